// Copyright 2026 The nisqrc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nisqrc/readout.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "nisqrc/channel_eq.hpp"

namespace nisqrc {

namespace {

constexpr int kClasses = 4;

RMat with_bias(const RMat& features) {
  RMat x(features.rows(), features.cols() + 1);
  x.leftCols(features.cols()) = features;
  x.col(features.cols()).setOnes();
  return x;
}

// Row-wise softmax probabilities of X W^T, overflow-safe.
RMat softmax_rows(const RMat& x, const RMat& w) {
  RMat z = x * w.transpose();
  for (Eigen::Index n = 0; n < z.rows(); ++n) {
    RVec row = z.row(n).transpose();
    const double zmax = row.maxCoeff();
    row = (row.array() - zmax).exp();
    z.row(n) = (row / row.sum()).transpose();
  }
  return z;
}

double regularized_loss(const RMat& x, const RMat& w,
                        const std::vector<int>& classes, double l2) {
  RMat z = x * w.transpose();
  double loss = 0.0;
  for (Eigen::Index n = 0; n < z.rows(); ++n) {
    const double zmax = z.row(n).maxCoeff();
    const double lse = zmax + std::log((z.row(n).array() - zmax).exp().sum());
    loss += lse - z(n, classes[size_t(n)]);
  }
  return loss / double(z.rows()) + 0.5 * l2 * w.squaredNorm();
}

}  // namespace

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::probability: return "probability";
    case FeatureKind::moment: return "moment";
    case FeatureKind::scalar_u: return "scalar_u";
  }
  return "probability";
}

FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "probability") return FeatureKind::probability;
  if (s == "moment") return FeatureKind::moment;
  if (s == "scalar_u") return FeatureKind::scalar_u;
  throw std::invalid_argument("unknown feature kind: " + s);
}

ReadoutModel fit_softmax_readout(const RMat& features,
                                 const std::vector<int>& labels,
                                 const FitOptions& opts) {
  if (!features.allFinite())
    throw std::invalid_argument("fit_softmax_readout: non-finite features");
  if (features.rows() != Eigen::Index(labels.size()))
    throw std::invalid_argument("fit_softmax_readout: feature/label count mismatch");
  if (opts.tol <= 0) throw std::invalid_argument("fit_softmax_readout: tol > 0");

  const Eigen::Index n_samples = features.rows();
  std::vector<int> classes(labels.size());
  Eigen::Vector4i per_class = Eigen::Vector4i::Zero();
  for (size_t i = 0; i < labels.size(); ++i) {
    classes[i] = symbol_class(labels[i]);
    ++per_class(classes[i]);
  }
  if (per_class.minCoeff() == 0)
    throw std::invalid_argument("fit_softmax_readout: a class has no samples");

  const RMat x = with_bias(features);
  const Eigen::Index f = x.cols();
  const Eigen::Index dim = kClasses * f;  // flattened (class-major) weights

  ReadoutModel model;
  model.weights = RMat::Zero(kClasses, f);
  double loss = regularized_loss(x, model.weights, classes, opts.l2);

  for (int it = 0; it < opts.max_iterations; ++it) {
    RMat p = softmax_rows(x, model.weights);
    for (Eigen::Index n = 0; n < n_samples; ++n) p(n, classes[size_t(n)]) -= 1.0;

    RMat grad = (p.transpose() * x) / double(n_samples) + opts.l2 * model.weights;
    model.gradient_norm = grad.norm();
    model.iterations = it;
    if (model.gradient_norm < opts.tol) {
      model.converged = true;
      break;
    }

    // Newton step on the flattened weights.  The Hessian blocks are
    // H[c,c'] = (1/N) X^T diag(p_c (d_cc' - p_c')) X + l2 I.
    RMat p_soft = softmax_rows(x, model.weights);
    RMat hess = RMat::Zero(dim, dim);
    for (Eigen::Index n = 0; n < n_samples; ++n) {
      const RVec xn = x.row(n).transpose();
      for (int c = 0; c < kClasses; ++c)
        for (int cp = c; cp < kClasses; ++cp) {
          const double s =
              p_soft(n, c) * ((c == cp ? 1.0 : 0.0) - p_soft(n, cp));
          if (s == 0.0) continue;
          hess.block(c * f, cp * f, f, f) += s * xn * xn.transpose();
        }
    }
    for (int c = 0; c < kClasses; ++c)
      for (int cp = 0; cp < c; ++cp)
        hess.block(c * f, cp * f, f, f) = hess.block(cp * f, c * f, f, f);
    hess /= double(n_samples);
    hess += opts.l2 * RMat::Identity(dim, dim);

    Eigen::VectorXd gflat(dim);
    for (int c = 0; c < kClasses; ++c) gflat.segment(c * f, f) = grad.row(c);
    Eigen::VectorXd dir = Eigen::LDLT<RMat>(hess).solve(gflat);

    // Backtracking keeps the loss non-increasing even far from the optimum.
    double step = 1.0;
    RMat w_old = model.weights;
    for (int ls = 0; ls < 40; ++ls) {
      RMat w_try = w_old;
      for (int c = 0; c < kClasses; ++c)
        w_try.row(c) -= step * dir.segment(c * f, f).transpose();
      const double new_loss = regularized_loss(x, w_try, classes, opts.l2);
      if (new_loss <= loss + 1e-14) {
        model.weights = w_try;
        loss = new_loss;
        break;
      }
      step *= 0.5;
    }
  }
  model.final_loss = loss;
  if (!model.converged) {
    RMat p = softmax_rows(x, model.weights);
    for (Eigen::Index n = 0; n < n_samples; ++n) p(n, classes[size_t(n)]) -= 1.0;
    model.gradient_norm =
        ((p.transpose() * x) / double(n_samples) + opts.l2 * model.weights).norm();
    model.converged = model.gradient_norm < opts.tol;
  }
  return model;
}

ReadoutModel fit_logistic_on_u(const RVec& u, const std::vector<int>& labels,
                               const FitOptions& opts) {
  RMat features = u;
  ReadoutModel model = fit_softmax_readout(features, labels, opts);
  model.kind = FeatureKind::scalar_u;
  return model;
}

std::vector<int> predict(const ReadoutModel& model, const RMat& features) {
  if (features.cols() + 1 != model.weights.cols())
    throw std::invalid_argument("predict: feature width mismatch");
  RMat z = with_bias(features) * model.weights.transpose();
  std::vector<int> out(z.rows());
  for (Eigen::Index n = 0; n < z.rows(); ++n) {
    int best = 0;
    for (int c = 1; c < kClasses; ++c)
      if (z(n, c) > z(n, best)) best = c;
    out[size_t(n)] = kCESymbols[best];
  }
  return out;
}

std::vector<int> predict_on_u(const ReadoutModel& model, const RVec& u) {
  return predict(model, RMat(u));
}

double cross_entropy(const ReadoutModel& model, const RMat& features,
                     const std::vector<int>& labels) {
  std::vector<int> classes(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) classes[i] = symbol_class(labels[i]);
  return regularized_loss(with_bias(features), model.weights, classes, 0.0);
}

void write_model_json(std::ostream& os, const ReadoutModel& model) {
  nlohmann::json j;
  j["feature_kind"] = to_string(model.kind);
  j["u_scale"] = model.u_scale;
  j["diagnostics"] = {{"final_loss", model.final_loss},
                      {"gradient_norm", model.gradient_norm},
                      {"iterations", model.iterations},
                      {"converged", model.converged}};
  auto& w = j["weights"];
  for (Eigen::Index c = 0; c < model.weights.rows(); ++c) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < model.weights.cols(); ++k)
      row.push_back(model.weights(c, k));
    w.push_back(row);
  }
  os << j.dump(2) << "\n";
}

ReadoutModel read_model_json(std::istream& is) {
  nlohmann::json j;
  is >> j;
  ReadoutModel model;
  model.kind = feature_kind_from_string(j.at("feature_kind").get<std::string>());
  model.u_scale = j.at("u_scale").get<double>();
  const auto& w = j.at("weights");
  model.weights.resize(w.size(), w.at(0).size());
  for (Eigen::Index c = 0; c < model.weights.rows(); ++c)
    for (Eigen::Index k = 0; k < model.weights.cols(); ++k)
      model.weights(c, k) = w.at(c).at(k).get<double>();
  const auto& d = j.at("diagnostics");
  model.final_loss = d.at("final_loss").get<double>();
  model.gradient_norm = d.at("gradient_norm").get<double>();
  model.iterations = d.at("iterations").get<int>();
  model.converged = d.at("converged").get<bool>();
  return model;
}

}  // namespace nisqrc
