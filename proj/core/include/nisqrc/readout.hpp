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

#ifndef NISQRC_READOUT_HPP
#define NISQRC_READOUT_HPP

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "nisqrc/linalg.hpp"

// Convex readout training: multinomial logistic regression over reservoir
// features (or over the raw input for the baseline), prediction, and
// evaluation.

namespace nisqrc {

enum class FeatureKind { probability, moment, scalar_u };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

struct ReadoutModel {
  RMat weights;  // 4 x (K+1); last column is the bias
  FeatureKind kind = FeatureKind::probability;
  double u_scale = 0.0;  // carried from the CE normalization

  // Training diagnostics.
  double final_loss = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FitOptions {
  double l2 = 1e-6;   // makes the optimum unique
  double tol = 1e-8;  // gradient-norm stopping criterion
  int max_iterations = 200;
};

// Minimizes mean cross-entropy + (l2/2)||w||^2 by damped Newton iteration
// (deterministic; loss is non-increasing across iterations).  Labels are
// symbols in {-3,-1,1,3}.  Throws on non-finite features; non-convergence
// within the cap is reported through `converged`.
ReadoutModel fit_softmax_readout(const RMat& features,
                                 const std::vector<int>& labels,
                                 const FitOptions& opts = {});

// Logistic regression on the scalar input (one-layer perceptron baseline).
ReadoutModel fit_logistic_on_u(const RVec& u, const std::vector<int>& labels,
                               const FitOptions& opts = {});

// Argmax over the four logits; ties resolved in symbol order (-3,-1,1,3).
std::vector<int> predict(const ReadoutModel& model, const RMat& features);
std::vector<int> predict_on_u(const ReadoutModel& model, const RVec& u);

// Mean cross-entropy (no regularizer), for diagnostics and tests.
double cross_entropy(const ReadoutModel& model, const RMat& features,
                     const std::vector<int>& labels);

// JSON round trip: weights, feature kind, u_scale, diagnostics.
void write_model_json(std::ostream& os, const ReadoutModel& model);
ReadoutModel read_model_json(std::istream& is);

}  // namespace nisqrc

#endif  // NISQRC_READOUT_HPP
