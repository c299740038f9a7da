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

#include "nisqrc/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "nisqrc/reservoir.hpp"
#include "nisqrc/rng.hpp"

namespace nisqrc {

namespace {

// Chebyshev-Gauss nodes for an (n-1)-degree interpolant.
std::vector<double> chebyshev_nodes(int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = std::cos(M_PI * (2 * i + 1) / (2.0 * n));
  return x;
}

// Weights turning samples at the n Gauss nodes into monomial coefficients:
// c_k = sum_i W(k, i) f(x_i).  Samples -> Chebyshev coefficients (discrete
// cosine transform) -> power basis via the T_{m+1} = 2x T_m - T_{m-1}
// recurrence.  Conversion noise grows like 2^k, which bounds the practical
// expansion order at ~24 for 1e-9 residuals.
RMat monomial_fit_weights(int n) {
  RMat t = RMat::Zero(n, n);  // t(m, k): coefficient of x^k in T_m
  t(0, 0) = 1.0;
  if (n > 1) t(1, 1) = 1.0;
  for (int m = 2; m < n; ++m) {
    t.row(m).segment(1, n - 1) = 2.0 * t.row(m - 1).segment(0, n - 1);
    t.row(m) -= t.row(m - 2);
  }
  RMat dct(n, n);  // a_m = sum_i dct(m, i) f(x_i)
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      dct(m, i) = (m == 0 ? 1.0 : 2.0) / n *
                  std::cos(m * M_PI * (2 * i + 1) / (2.0 * n));
  return t.transpose() * dct;
}

// Trace rows of the POVM: row j applied to vec(X) gives Tr(M_j X).
CMat povm_trace_rows(const std::vector<CMat>& povm) {
  const auto d = povm.at(0).rows();
  CMat rows(Eigen::Index(povm.size()), d * d);
  for (size_t j = 0; j < povm.size(); ++j)
    rows.row(Eigen::Index(j)) = vectorize(povm[j].transpose()).transpose();
  return rows;
}

CMat maximally_mixed(int qubits) {
  const int d = dim_for_qubits(qubits);
  return CMat::Identity(d, d) / double(d);
}

}  // namespace

UExpansion extract_u_expansion(const ChannelFamily& family, int mem_qubits,
                               int readout_qubits, const UExpansionOptions& opts) {
  if (opts.k_max < 1)
    throw std::invalid_argument("extract_u_expansion: k_max must be >= 1");
  const int n = opts.k_max + 1;
  const int dm = dim_for_qubits(mem_qubits);
  const int dl = dim_for_qubits(mem_qubits + readout_qubits);
  const Eigen::Index vm = Eigen::Index(dm) * dm;
  const Eigen::Index vl = Eigen::Index(dl) * dl;

  const auto nodes = chebyshev_nodes(n);
  const RMat w = monomial_fit_weights(n);

  // Channel action on every embedded memory basis matrix, at one u.
  auto sample_embedded = [&](double u) {
    auto prepared = family.prepare(u);
    CMat e(vl, vm);
    CMat basis = CMat::Zero(dm, dm);
    for (Eigen::Index c = 0; c < vm; ++c) {
      basis(c % dm, c / dm) = 1.0;
      e.col(c) = vectorize(
          prepared->apply(embed_with_readout_ground(basis, readout_qubits)));
      basis(c % dm, c / dm) = 0.0;
    }
    return e;
  };

  UExpansion uexp;
  uexp.mem_qubits = mem_qubits;
  uexp.readout_qubits = readout_qubits;
  uexp.k_max = opts.k_max;
  uexp.e_k.assign(n, CMat::Zero(vl, vm));
  if (opts.build_full) uexp.r_k.assign(n, CMat::Zero(vl, vl));

  for (int i = 0; i < n; ++i) {
    CMat sample = sample_embedded(nodes[i]);
    for (int k = 0; k < n; ++k)
      if (w(k, i) != 0.0) uexp.e_k[k] += w(k, i) * sample;
    if (opts.build_full) {
      CMat full = family.superoperator(nodes[i]);
      for (int k = 0; k < n; ++k)
        if (w(k, i) != 0.0) uexp.r_k[k] += w(k, i) * full;
    }
  }

  const CMat pt = vec_partial_trace_map(mem_qubits, readout_qubits);
  uexp.p_k.reserve(n);
  for (int k = 0; k < n; ++k) uexp.p_k.push_back(pt * uexp.e_k[k]);

  // Reconstruction error at 8 held-out nodes (offset so they cannot collide
  // with the fit nodes).
  double worst = 0.0;
  for (int t = 0; t < 8; ++t) {
    const double u = 0.995 * std::cos(M_PI * (2 * t + 1) / 16.0);
    CMat horner = uexp.e_k[n - 1];
    for (int k = n - 2; k >= 0; --k) horner = u * horner + uexp.e_k[k];
    CMat direct = sample_embedded(u);
    worst = std::max(worst, (horner - direct).norm() / std::max(1e-300, direct.norm()));
  }
  uexp.residual = worst;
  if (opts.throw_on_residual && worst > opts.tolerance)
    throw std::runtime_error(
        "extract_u_expansion: reconstruction residual " + std::to_string(worst) +
        " exceeds tolerance " + std::to_string(opts.tolerance) +
        "; raise k_max (channel varies too strongly over u)");
  return uexp;
}

SpectralData spectral_analysis(const CMat& p0) {
  if (!is_trace_preserving(p0, 1e-8))
    throw std::invalid_argument("spectral_analysis: P_0 is not trace preserving");
  const auto vm = p0.rows();
  const int dm = static_cast<int>(std::llround(std::sqrt(double(vm))));

  EigResult eig = general_eig(p0);
  if (eig.max_residual > 1e-8)
    throw std::runtime_error(
        "spectral_analysis: eigenpair residual " + std::to_string(eig.max_residual) +
        " suggests a defective map");

  SpectralData spec;
  spec.mem_qubits = static_cast<int>(std::llround(std::log2(double(dm))));
  spec.eigenvalues = eig.values;
  spec.max_residual = eig.max_residual;

  if (std::abs(eig.values(0) - Complex(1, 0)) > 1e-9)
    throw std::runtime_error("spectral_analysis: lambda_1 = " +
                             std::to_string(eig.values(0).real()) + " + " +
                             std::to_string(eig.values(0).imag()) +
                             "i deviates from 1");
  if (eig.values.cwiseAbs().maxCoeff() > 1.0 + 1e-9)
    throw std::runtime_error("spectral_analysis: eigenvalue outside the unit disk");

  spec.degenerate_periphery =
      vm > 1 && std::abs(eig.values(1)) > 1.0 - 1e-9;

  spec.eigenmatrices.reserve(vm);
  for (Eigen::Index a = 0; a < vm; ++a) {
    CMat m = devectorize(eig.vectors.col(a));
    if (a == 0) {
      // Fixed point: hermitize and set unit trace.
      m = 0.5 * (m + m.adjoint()).eval();
      const Complex tr = m.trace();
      if (std::abs(tr) > 1e-8) {
        m /= tr;
      } else {
        // Degenerate periphery can make the lead eigenvector traceless;
        // fall back to a valid invariant state for reporting.
        m = maximally_mixed(spec.mem_qubits);
      }
      spec.fixed_point = m;
    } else {
      m /= m.norm();
      Eigen::Index r0 = 0, c0 = 0;
      m.cwiseAbs().maxCoeff(&r0, &c0);
      const Complex z = m(r0, c0);
      if (std::abs(z) > 0) m *= std::conj(z) / std::abs(z);
    }
    spec.eigenmatrices.push_back(std::move(m));
  }

  if (spec.degenerate_periphery) {
    spec.memory_time = std::numeric_limits<double>::infinity();
    spec.d_eff = -1;
  } else if (vm > 1) {
    const double l2 = std::abs(eig.values(1));
    spec.memory_time = l2 > 0 ? -1.0 / std::log(l2) : 0.0;
    spec.d_eff = int(std::ceil(spec.memory_time));
  }

  Eigen::JacobiSVD<CMat> svd(eig.vectors);
  const double smin = svd.singularValues().minCoeff();
  spec.eigenbasis_condition =
      smin > 0 ? svd.singularValues().maxCoeff() / smin
               : std::numeric_limits<double>::infinity();
  return spec;
}

VolterraKernels volterra_kernels(const UExpansion& uexp, const SpectralData& spec,
                                 const std::vector<CMat>& povm, int n_max) {
  if (uexp.k_max < 2)
    throw std::invalid_argument("volterra_kernels: need k_max >= 2");
  if (n_max < 1) throw std::invalid_argument("volterra_kernels: need n_max >= 1");
  if (spec.degenerate_periphery)
    throw std::runtime_error(
        "volterra_kernels: degenerate peripheral spectrum; the fixed point is "
        "not unique and the kernel formulas do not apply");
  if (spec.mem_qubits != uexp.mem_qubits)
    throw std::invalid_argument("volterra_kernels: spectral/expansion mismatch");

  const int K = static_cast<int>(povm.size());
  const CMat trace_rows = povm_trace_rows(povm);
  const auto out_k = [&](int k, const CVec& state) {
    return RVec((trace_rows * (uexp.e_k[k] * state)).real());
  };

  VolterraKernels ker;
  ker.n_max = n_max;
  ker.num_features = K;
  ker.h1.resize(K, n_max + 1);
  ker.h2.assign(K, RMat::Zero(n_max + 1, n_max + 1));

  const CVec fp = vectorize(spec.fixed_point);
  ker.h0 = out_k(0, fp);
  ker.h1.col(0) = out_k(1, fp);

  // us[m] = P_0^m P_1 rho_FP
  std::vector<CVec> us(n_max);
  us[0] = uexp.p_k[1] * fp;
  for (int m = 1; m < n_max; ++m) us[m] = uexp.p_k[0] * us[m - 1];
  for (int n1 = 1; n1 <= n_max; ++n1) ker.h1.col(n1) = out_k(0, us[n1 - 1]);

  // h2(0, 0) and the single-index branches.
  RVec v = out_k(2, fp);
  for (int j = 0; j < K; ++j) ker.h2[j](0, 0) = v(j);
  for (int n2 = 1; n2 <= n_max; ++n2) {
    v = out_k(1, us[n2 - 1]);
    for (int j = 0; j < K; ++j) ker.h2[j](0, n2) = v(j);
  }
  CVec b2 = uexp.p_k[2] * fp;
  for (int n = 1; n <= n_max; ++n) {
    v = out_k(0, b2);
    for (int j = 0; j < K; ++j) ker.h2[j](n, n) = v(j);
    b2 = uexp.p_k[0] * b2;
  }
  // 0 < n1 < n2: P_0^{n1-1} P_1 P_0^{n2-n1-1} P_1 rho_FP, walked over the
  // inner gap so each chain is one extra multiplication.
  for (int gap = 0; gap + 2 <= n_max; ++gap) {
    CVec t = uexp.p_k[1] * us[gap];
    for (int n1 = 1; n1 + gap + 1 <= n_max; ++n1) {
      const int n2 = n1 + gap + 1;
      v = out_k(0, t);
      for (int j = 0; j < K; ++j) ker.h2[j](n1, n2) = v(j);
      t = uexp.p_k[0] * t;
    }
  }
  return ker;
}

VolterraKernels no_reset_kernels(const ChannelFamily& family, int mem_qubits,
                                 int readout_qubits, int n_max, int k_max) {
  if (k_max < 2) throw std::invalid_argument("no_reset_kernels: need k_max >= 2");
  if (n_max < 1) throw std::invalid_argument("no_reset_kernels: need n_max >= 1");
  const int L = mem_qubits + readout_qubits;
  const int n = k_max + 1;
  const auto nodes = chebyshev_nodes(n);
  const RMat w = monomial_fit_weights(n);

  std::vector<std::unique_ptr<ChannelFamily::Prepared>> prepared;
  prepared.reserve(n);
  for (int i = 0; i < n; ++i) prepared.push_back(family.prepare(nodes[i]));
  auto step0 = family.prepare(0.0);

  // Masked step map (the carrier here is the full system).
  auto p0 = [&](const CMat& x) {
    return apply_measurement_mask(step0->apply(x), mem_qubits, readout_qubits);
  };
  auto rk = [&](int k, const CMat& x) {
    if (k == 0) return step0->apply(x);
    CMat acc = CMat::Zero(x.rows(), x.cols());
    for (int i = 0; i < n; ++i)
      if (w(k, i) != 0.0) acc += w(k, i) * prepared[i]->apply(x);
    return acc;
  };
  auto pk = [&](int k, const CMat& x) {
    return apply_measurement_mask(rk(k, x), mem_qubits, readout_qubits);
  };

  // Fixed point of the masked null-input map by power iteration.
  CMat fp = maximally_mixed(L);
  for (int it = 0; it < 20000; ++it) {
    CMat next = p0(fp);
    const double delta = (next - fp).norm();
    fp = std::move(next);
    if (delta < 1e-14) break;
    if (it == 19999)
      throw std::runtime_error("no_reset_kernels: fixed-point iteration did not converge");
  }

  const int K = dim_for_qubits(readout_qubits);
  auto out_k = [&](int k, const CMat& x) {
    return povm_probabilities(rk(k, x), mem_qubits, readout_qubits);
  };

  VolterraKernels ker;
  ker.n_max = n_max;
  ker.num_features = K;
  ker.h1.resize(K, n_max + 1);
  ker.h2.assign(K, RMat::Zero(n_max + 1, n_max + 1));

  ker.h0 = out_k(0, fp);
  ker.h1.col(0) = out_k(1, fp);

  std::vector<CMat> us(n_max);
  us[0] = pk(1, fp);
  for (int m = 1; m < n_max; ++m) us[m] = p0(us[m - 1]);
  for (int n1 = 1; n1 <= n_max; ++n1) ker.h1.col(n1) = out_k(0, us[n1 - 1]);

  RVec v = out_k(2, fp);
  for (int j = 0; j < K; ++j) ker.h2[j](0, 0) = v(j);
  for (int n2 = 1; n2 <= n_max; ++n2) {
    v = out_k(1, us[n2 - 1]);
    for (int j = 0; j < K; ++j) ker.h2[j](0, n2) = v(j);
  }
  CMat b2 = pk(2, fp);
  for (int m = 1; m <= n_max; ++m) {
    v = out_k(0, b2);
    for (int j = 0; j < K; ++j) ker.h2[j](m, m) = v(j);
    b2 = p0(b2);
  }
  for (int gap = 0; gap + 2 <= n_max; ++gap) {
    CMat t = pk(1, us[gap]);
    for (int n1 = 1; n1 + gap + 1 <= n_max; ++n1) {
      const int n2 = n1 + gap + 1;
      v = out_k(0, t);
      for (int j = 0; j < K; ++j) ker.h2[j](n1, n2) = v(j);
      t = p0(t);
    }
  }
  return ker;
}

InternalFeatureSet internal_features(const UExpansion& uexp,
                                     const SpectralData& spec,
                                     const RVec& u_grid,
                                     const std::vector<CMat>& povm) {
  if (spec.degenerate_periphery)
    throw std::runtime_error("internal_features: degenerate peripheral spectrum");
  const Eigen::Index vm = Eigen::Index(spec.eigenmatrices.size());
  CMat basis(vm, vm);
  for (Eigen::Index a = 0; a < vm; ++a)
    basis.col(a) = vectorize(spec.eigenmatrices[a]);

  InternalFeatureSet fs;
  fs.k_max = uexp.k_max;

  Eigen::JacobiSVD<CMat> svd(basis);
  const double smin = svd.singularValues().minCoeff();
  fs.eigenbasis_condition =
      smin > 0 ? svd.singularValues().maxCoeff() / smin
               : std::numeric_limits<double>::infinity();
  if (fs.eigenbasis_condition > 1e10)
    throw std::runtime_error("internal_features: eigenbasis condition number " +
                             std::to_string(fs.eigenbasis_condition));

  Eigen::PartialPivLU<CMat> lu(basis);
  fs.c.reserve(uexp.k_max + 1);
  for (int k = 0; k <= uexp.k_max; ++k)
    fs.c.push_back(lu.solve(uexp.p_k[k] * basis));

  fs.u_grid = u_grid;
  fs.features = CMat::Zero(vm, u_grid.size());
  for (Eigen::Index g = 0; g < u_grid.size(); ++g) {
    const double u = u_grid(g);
    double up = 1.0;
    for (int k = 1; k <= uexp.k_max; ++k) {
      up *= u;
      fs.features.col(g) += up * fs.c[k].col(0);
    }
  }

  fs.nu = povm_trace_rows(povm) * uexp.e_k[0] * basis;
  return fs;
}

RVec reconstruct_single_step_response(const InternalFeatureSet& internal,
                                      const SpectralData& spec, int p,
                                      int grid_index) {
  if (p < 1)
    throw std::invalid_argument("reconstruct_single_step_response: need p >= 1");
  const Eigen::Index vm = internal.nu.cols();
  CVec weighted = CVec::Zero(vm);
  for (Eigen::Index a = 1; a < vm; ++a)
    weighted(a) = std::pow(spec.eigenvalues(a), p - 1) *
                  internal.features(a, grid_index);
  return (internal.nu * weighted).real();
}

Complex CrossStepModes::at(const std::vector<int>& alphas,
                           const std::vector<int>& ks) const {
  if (int(alphas.size()) != steps || int(ks.size()) != steps)
    throw std::invalid_argument("CrossStepModes::at: index arity mismatch");
  std::size_t idx = 0;
  for (int i = 0; i < steps; ++i) idx = idx * dim + alphas[i];
  for (int i = 0; i < steps; ++i) idx = idx * k_max + ks[i];
  return values.at(idx);
}

CrossStepModes single_step_memory_decomposition(const InternalFeatureSet& internal,
                                                int steps) {
  if (steps < 1 || steps > 3)
    throw std::invalid_argument("single_step_memory_decomposition: P must be 1..3");
  CrossStepModes modes;
  modes.steps = steps;
  modes.k_max = internal.k_max;
  modes.dim = static_cast<int>(internal.nu.cols());

  std::size_t total = 1;
  for (int i = 0; i < steps; ++i) total *= std::size_t(modes.dim) * modes.k_max;
  modes.values.assign(total, Complex(0, 0));

  std::vector<int> alphas(steps), ks(steps);
  std::size_t idx = 0;
  // alphas-major then ks, matching CrossStepModes::at.
  const std::size_t alpha_total = [&] {
    std::size_t t = 1;
    for (int i = 0; i < steps; ++i) t *= modes.dim;
    return t;
  }();
  const std::size_t k_total = total / alpha_total;
  for (std::size_t ai = 0; ai < alpha_total; ++ai) {
    std::size_t rest = ai;
    for (int i = steps - 1; i >= 0; --i) {
      alphas[i] = int(rest % modes.dim);
      rest /= modes.dim;
    }
    for (std::size_t ki = 0; ki < k_total; ++ki) {
      std::size_t krest = ki;
      for (int i = steps - 1; i >= 0; --i) {
        ks[i] = int(krest % modes.k_max);
        krest /= modes.k_max;
      }
      Complex prod(1, 0);
      for (int i = 0; i < steps; ++i) {
        const int next = (i + 1 < steps) ? alphas[i + 1] : 0;  // chain ends at FP
        prod *= internal.c[ks[i] + 1](alphas[i], next);
        if (prod == Complex(0, 0)) break;
      }
      modes.values[idx++] = prod;
    }
  }
  return modes;
}

JacobianReport jacobian_rank(const ChannelFamily& family, int mem_qubits,
                             int readout_qubits, const JacobianOptions& opts) {
  if (!(opts.sv_threshold > 0.0 && opts.sv_threshold < 1.0))
    throw std::invalid_argument("jacobian_rank: threshold must be in (0, 1)");
  if (opts.eps <= 0) throw std::invalid_argument("jacobian_rank: eps must be > 0");
  const int K = dim_for_qubits(readout_qubits);

  SpectralData spec =
      spectral_analysis(memory_step_matrix(family, 0.0, mem_qubits, readout_qubits));
  const double nm = std::isfinite(spec.memory_time) ? spec.memory_time : 40.0;
  const int washout =
      opts.washout >= 0
          ? opts.washout
          : std::clamp(int(std::ceil(10.0 * std::ceil(nm))), 20, 400);
  const int lags = opts.max_lag >= 0
                       ? opts.max_lag
                       : std::max(int(std::ceil(3.0 * nm)), 2 * K);

  const int total = washout + lags + 1;
  RVec base(total);
  auto rng = make_engine(derive_seed(opts.seed, {0x6a61636f6269ULL}));
  std::uniform_real_distribution<double> unif(-0.95, 0.95);
  for (int i = 0; i < total; ++i) base(i) = unif(rng);

  RunOptions ro;
  ro.validate = false;
  std::vector<CMat> states;
  run_expected_features(family, mem_qubits, readout_qubits, base, {}, ro, &states);

  const RMat walsh = walsh_hadamard_matrix(K);
  // Feature row at the last step of a run that restarts from the cached
  // state just before the perturbed position.
  auto terminal_moments = [&](int position, double value) {
    RVec tail = base.segment(position, total - position);
    tail(0) = value;
    const CMat start = position > 0 ? states[position - 1] : CMat();
    FeatureSeries fs = run_expected_features(family, mem_qubits, readout_qubits,
                                             tail, start, ro);
    return RVec(walsh * fs.probabilities.row(fs.length - 1).transpose());
  };

  RMat jac(lags + 1, K - 1);
  for (int p = 0; p <= lags; ++p) {
    const int pos = total - 1 - p;
    RVec plus = terminal_moments(pos, base(pos) + opts.eps);
    RVec minus = terminal_moments(pos, base(pos) - opts.eps);
    RVec grad = (plus - minus) / (2.0 * opts.eps);
    jac.row(p) = grad.segment(1, K - 1).transpose();  // drop the constant
  }

  Eigen::JacobiSVD<RMat> svd(jac);
  JacobianReport report;
  report.singular_values = svd.singularValues();
  report.eps = opts.eps;
  report.sv_threshold = opts.sv_threshold;
  report.lags = lags;
  const double top = report.singular_values(0);
  for (Eigen::Index i = 0; i < report.singular_values.size(); ++i)
    if (report.singular_values(i) > opts.sv_threshold * top) ++report.rank;
  return report;
}

}  // namespace nisqrc
