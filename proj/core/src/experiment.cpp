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

#include "nisqrc/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "nisqrc/channel_eq.hpp"
#include "nisqrc/rng.hpp"

namespace nisqrc {

namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kTrainTag = 0x747261696eULL;
constexpr std::uint64_t kTestTag = 0x74657374ULL;
constexpr std::uint64_t kSampleTrainTag = 0x73747261696eULL;
constexpr std::uint64_t kSampleTestTag = 0x7374657374ULL;

// Index-parallel map with deterministic result slots.
template <typename F>
void parallel_for(int count, int threads, F&& body) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

std::ofstream open_output(const std::string& dir, const char* name) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name, std::ios::binary);
  if (!out) throw std::runtime_error(std::string("cannot write ") + name);
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// One reservoir variant's execution machinery.
struct VariantPipeline {
  std::unique_ptr<ChannelFamily> family;
  std::unique_ptr<QuantizedPipeline> quantized;
  int mem_qubits = 0, readout_qubits = 0;
  bool reset = true;
  int washout = 0;

  // Feature block for one normalized message (washout rows dropped).
  RMat features(const RVec& message_inputs) const {
    RVec inputs(washout + message_inputs.size());
    inputs.head(washout).setZero();
    inputs.tail(message_inputs.size()) = message_inputs;
    FeatureSeries series;
    if (!reset) {
      series = run_no_reset_features(*family, mem_qubits, readout_qubits, inputs);
    } else if (quantized) {
      series = quantized->run(inputs);
    } else {
      series = run_expected_features(*family, mem_qubits, readout_qubits, inputs);
    }
    return series.probabilities.bottomRows(message_inputs.size());
  }
};

VariantPipeline make_variant_pipeline(const ExperimentConfig& config,
                                      const std::string& variant) {
  VariantPipeline vp;
  vp.mem_qubits = config.mem_qubits;
  vp.readout_qubits = config.readout_qubits;
  vp.reset = variant != "no_reset" && config.reset;
  vp.family = make_family(config, variant == "no_reset" ? "" : variant);
  double memory_time = std::numeric_limits<double>::quiet_NaN();
  if (vp.reset) {
    SpectralData spec = spectral_analysis(memory_step_matrix(
        *vp.family, 0.0, config.mem_qubits, config.readout_qubits));
    memory_time = spec.memory_time;
    if (config.quantize_u > 0)
      vp.quantized = std::make_unique<QuantizedPipeline>(
          *vp.family, config.mem_qubits, config.readout_qubits, config.quantize_u);
  }
  vp.washout = washout_steps(config, memory_time, vp.reset);
  return vp;
}

RMat sampled_or_expected(const RMat& expected, long long shots, std::uint64_t seed) {
  if (shots <= 0) return expected;
  FeatureSeries series;
  series.length = static_cast<int>(expected.rows());
  series.num_features = static_cast<int>(expected.cols());
  series.probabilities = expected;
  return sample_features(series, shots, seed).samples;
}

}  // namespace

int washout_steps(const ExperimentConfig& config, double memory_time, bool reset) {
  if (config.washout >= 0) return config.washout;
  if (!reset) return 50;
  if (!std::isfinite(memory_time)) return 400;
  return std::clamp(int(10 * std::ceil(memory_time)), 10, 400);
}

std::vector<SpectrumRow> run_spectrum_sweep(const ExperimentConfig& config,
                                            int threads) {
  struct Point {
    std::string axis;
    double value, tau_override, t1_override;
  };
  std::vector<Point> points;
  for (double tau : config.sweep.tau) points.push_back({"tau", tau, tau, -1.0});
  for (double t1 : config.sweep.t1) points.push_back({"t1", t1, -1.0, t1});
  if (points.empty()) points.push_back({"base", config.tau, -1.0, -1.0});

  std::vector<SpectrumRow> rows(points.size());
  parallel_for(static_cast<int>(points.size()), threads, [&](int i) {
    const auto& pt = points[size_t(i)];
    auto family = make_family(config, "", pt.tau_override, pt.t1_override);
    CMat p0;
    if (config.reset) {
      p0 = memory_step_matrix(*family, 0.0, config.mem_qubits, config.readout_qubits);
    } else {
      p0 = no_reset_measurement_superop(config.mem_qubits, config.readout_qubits) *
           family->superoperator(0.0);
    }
    SpectralData spec = spectral_analysis(p0);
    SpectrumRow row;
    row.axis = pt.axis;
    row.value = pt.value;
    row.memory_time = spec.memory_time;
    row.abs_lambda2 =
        spec.eigenvalues.size() > 1 ? std::abs(spec.eigenvalues(1)) : 0.0;
    row.degenerate = spec.degenerate_periphery;
    row.eigenvalues = spec.eigenvalues;
    rows[size_t(i)] = std::move(row);
  });
  return rows;
}

void cmd_spectrum(const CommandContext& ctx) {
  auto rows = run_spectrum_sweep(ctx.config, ctx.threads);

  auto csv = open_output(ctx.out_dir, "nm_sweep.csv");
  csv << "axis,value,n_m,abs_lambda2,degenerate\n";
  for (const auto& row : rows)
    csv << row.axis << "," << fmt(row.value) << "," << fmt(row.memory_time) << ","
        << fmt(row.abs_lambda2) << "," << (row.degenerate ? 1 : 0) << "\n";

  nlohmann::json j;
  j["points"] = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json p;
    p["axis"] = row.axis;
    p["value"] = row.value;
    if (std::isfinite(row.memory_time)) p["n_m"] = row.memory_time;
    else p["n_m"] = "inf";
    p["abs_lambda2"] = row.abs_lambda2;
    p["degenerate"] = row.degenerate;
    auto& ev = p["eigenvalues"];
    for (Eigen::Index a = 0; a < row.eigenvalues.size(); ++a)
      ev.push_back({row.eigenvalues(a).real(), row.eigenvalues(a).imag()});
    j["points"].push_back(std::move(p));
  }
  auto out = open_output(ctx.out_dir, "spectrum.json");
  out << j.dump(2) << "\n";
}

void cmd_kernels(const CommandContext& ctx) {
  const auto& config = ctx.config;
  auto family = make_family(config);
  VolterraKernels kernels;
  if (config.reset) {
    UExpansionOptions opts;
    opts.k_max = config.expansion.k_max;
    opts.tolerance = config.expansion.tolerance;
    UExpansion uexp = extract_u_expansion(*family, config.mem_qubits,
                                          config.readout_qubits, opts);
    SpectralData spec = spectral_analysis(uexp.p_k[0]);
    int n_max = config.kernel_n_max;
    if (n_max < 1)
      n_max = std::min(64, std::max(1, int(std::ceil(5.0 * spec.memory_time))));
    kernels = volterra_kernels(
        uexp, spec, povm_operators(config.mem_qubits, config.readout_qubits), n_max);
  } else {
    const int n_max = config.kernel_n_max > 0 ? config.kernel_n_max : 20;
    kernels = no_reset_kernels(*family, config.mem_qubits, config.readout_qubits,
                               n_max, std::max(2, config.expansion.k_max));
  }

  auto csv = open_output(ctx.out_dir, "kernels.csv");
  csv << "feature,order,n1,n2,value\n";
  for (int j = 0; j < kernels.num_features; ++j)
    csv << j << ",0,,," << fmt(kernels.h0(j)) << "\n";
  for (int j = 0; j < kernels.num_features; ++j)
    for (int n1 = 0; n1 <= kernels.n_max; ++n1)
      csv << j << ",1," << n1 << ",," << fmt(kernels.h1(j, n1)) << "\n";
  for (int j = 0; j < kernels.num_features; ++j)
    for (int n1 = 0; n1 <= kernels.n_max; ++n1)
      for (int n2 = n1; n2 <= kernels.n_max; ++n2)
        csv << j << ",2," << n1 << "," << n2 << ","
            << fmt(kernels.h2[size_t(j)](n1, n2)) << "\n";
}

CEOutcome run_ce_experiment(const ExperimentConfig& config, int threads) {
  const auto& task = config.task;
  const std::uint64_t master = config.master_seed;

  std::vector<std::string> variants = config.sweep.variants;
  if (variants.empty())
    variants.push_back(!config.reset ? "no_reset"
                       : config.connectivity == "split" ? "split"
                                                        : "connected");
  std::vector<long long> shots_grid =
      config.sweep.shots.empty() ? std::vector<long long>{config.shots}
                                 : config.sweep.shots;
  std::vector<int> lengths = config.sweep.test_length.empty()
                                 ? std::vector<int>{task.test_length}
                                 : config.sweep.test_length;

  // --- datasets ------------------------------------------------------
  const int q_count = task.train_messages;
  std::vector<std::vector<int>> train_msgs(q_count);
  std::vector<RVec> train_u(q_count);
  for (int q = 0; q < q_count; ++q) {
    const std::uint64_t seed = derive_seed(master, {kTrainTag, std::uint64_t(q)});
    train_msgs[q] = generate_message(task.train_length, seed);
    train_u[q] = distort(train_msgs[q], task.snr_db, seed);
  }
  double u_scale = 0.0;
  for (const auto& u : train_u) u_scale = std::max(u_scale, u.cwiseAbs().maxCoeff());
  std::vector<RVec> train_norm(q_count);
  for (int q = 0; q < q_count; ++q)
    train_norm[q] = normalize_input(train_u[q], u_scale).normalized;

  std::vector<int> train_labels;
  for (const auto& m : train_msgs)
    train_labels.insert(train_labels.end(), m.begin(), m.end());

  struct TestSet {
    std::vector<std::vector<int>> msgs;
    std::vector<RVec> u, norm;
  };
  std::vector<TestSet> tests(lengths.size());
  for (size_t li = 0; li < lengths.size(); ++li) {
    auto& ts = tests[li];
    ts.msgs.resize(task.test_messages);
    ts.u.resize(task.test_messages);
    ts.norm.resize(task.test_messages);
    for (int t = 0; t < task.test_messages; ++t) {
      const std::uint64_t seed = derive_seed(
          master, {kTestTag, std::uint64_t(lengths[li]), std::uint64_t(t)});
      ts.msgs[t] = generate_message(lengths[li], seed);
      ts.u[t] = distort(ts.msgs[t], task.snr_db, seed);
      ts.norm[t] = normalize_input(ts.u[t], u_scale).normalized;
    }
  }

  CEOutcome out;
  auto add_row = [&](const std::string& variant, long long shots, int len,
                     const std::string& split, double err) {
    out.rows.push_back({variant, shots, len, master, split, err});
  };

  // --- memory-less baselines ------------------------------------------
  {
    int errors = 0, total = 0, di_errors = 0;
    for (int q = 0; q < q_count; ++q) {
      auto rounded = rounding_baseline(train_u[q]);
      auto inverse = direct_inverse_baseline(train_u[q]);
      for (size_t n = 0; n < train_msgs[q].size(); ++n) {
        errors += rounded[n] != train_msgs[q][n];
        di_errors += inverse.symbols[n] != train_msgs[q][n];
        ++total;
      }
    }
    add_row("rounding", 0, task.train_length, "train", double(errors) / total);
    add_row("direct_inverse", 0, task.train_length, "train",
            double(di_errors) / total);

    RVec u_flat(train_labels.size());
    Eigen::Index at = 0;
    for (const auto& u : train_norm) {
      u_flat.segment(at, u.size()) = u;
      at += u.size();
    }
    FitOptions fit{task.l2, task.tol, 200};
    ReadoutModel lr = fit_logistic_on_u(u_flat, train_labels, fit);
    lr.u_scale = u_scale;
    add_row("logistic_u", 0, task.train_length, "train",
            error_rate(predict_on_u(lr, u_flat), train_labels));

    for (size_t li = 0; li < lengths.size(); ++li) {
      int r_err = 0, d_err = 0, l_err = 0, tot = 0;
      for (int t = 0; t < task.test_messages; ++t) {
        auto rounded = rounding_baseline(tests[li].u[t]);
        auto inverse = direct_inverse_baseline(tests[li].u[t]);
        auto logistic = predict_on_u(lr, tests[li].norm[t]);
        for (size_t n = 0; n < tests[li].msgs[t].size(); ++n) {
          r_err += rounded[n] != tests[li].msgs[t][n];
          d_err += inverse.symbols[n] != tests[li].msgs[t][n];
          l_err += logistic[n] != tests[li].msgs[t][n];
          ++tot;
        }
      }
      add_row("rounding", 0, lengths[li], "test", double(r_err) / tot);
      add_row("direct_inverse", 0, lengths[li], "test", double(d_err) / tot);
      add_row("logistic_u", 0, lengths[li], "test", double(l_err) / tot);
    }
  }

  // --- reservoir variants ----------------------------------------------
  bool first_model = true;
  for (size_t vi = 0; vi < variants.size(); ++vi) {
    const auto& variant = variants[vi];
    VariantPipeline vp = make_variant_pipeline(config, variant);

    // Expected features once per variant; shots grids reuse them.
    const int K = dim_for_qubits(config.readout_qubits);
    std::vector<RMat> train_feats(q_count);
    parallel_for(q_count, threads,
                 [&](int q) { train_feats[size_t(q)] = vp.features(train_norm[size_t(q)]); });
    std::vector<std::vector<RMat>> test_feats(lengths.size());
    for (size_t li = 0; li < lengths.size(); ++li) {
      test_feats[li].resize(task.test_messages);
      parallel_for(task.test_messages, threads, [&](int t) {
        test_feats[li][size_t(t)] = vp.features(tests[li].norm[size_t(t)]);
      });
    }

    for (long long shots : shots_grid) {
      RMat x_train(Eigen::Index(q_count) * task.train_length, K);
      for (int q = 0; q < q_count; ++q)
        x_train.middleRows(Eigen::Index(q) * task.train_length, task.train_length) =
            sampled_or_expected(
                train_feats[size_t(q)], shots,
                derive_seed(master, {kSampleTrainTag, vi, std::uint64_t(shots),
                                     std::uint64_t(q)}));

      FitOptions fit{task.l2, task.tol, 200};
      ReadoutModel model = fit_softmax_readout(x_train, train_labels, fit);
      model.kind = FeatureKind::probability;
      model.u_scale = u_scale;
      add_row(variant, shots, task.train_length, "train",
              error_rate(predict(model, x_train), train_labels));

      for (size_t li = 0; li < lengths.size(); ++li) {
        int errors = 0, total = 0;
        for (int t = 0; t < task.test_messages; ++t) {
          RMat x_test = sampled_or_expected(
              test_feats[li][size_t(t)], shots,
              derive_seed(master, {kSampleTestTag, vi, std::uint64_t(shots),
                                   std::uint64_t(lengths[li]), std::uint64_t(t)}));
          auto pred = predict(model, x_test);
          for (size_t n = 0; n < tests[li].msgs[t].size(); ++n)
            errors += pred[n] != tests[li].msgs[t][n];
          total += int(tests[li].msgs[t].size());
        }
        add_row(variant, shots, lengths[li], "test", double(errors) / total);
      }

      if (first_model) {
        out.model = model;
        first_model = false;
      }
    }
  }
  return out;
}

void write_ce_csv(std::ostream& os, const std::vector<CERow>& rows) {
  os << "variant,shots,test_length,seed,split,error\n";
  for (const auto& row : rows) {
    os << row.variant << ",";
    if (row.shots > 0) os << row.shots;
    else os << "inf";
    os << "," << row.test_length << "," << row.seed << "," << row.split << ","
       << fmt(row.error) << "\n";
  }
}

void cmd_ce(const CommandContext& ctx) {
  CEOutcome outcome = run_ce_experiment(ctx.config, ctx.threads);
  auto csv = open_output(ctx.out_dir, "results.csv");
  write_ce_csv(csv, outcome.rows);
  auto model = open_output(ctx.out_dir, "model.json");
  write_model_json(model, outcome.model);
}

void cmd_jacobian(const CommandContext& ctx) {
  const auto& config = ctx.config;
  auto family = make_family(config);
  JacobianOptions opts;
  opts.eps = config.jacobian.eps;
  opts.sv_threshold = config.jacobian.sv_threshold;
  opts.max_lag = config.jacobian.max_lag;
  opts.seed = config.master_seed;
  JacobianReport report =
      jacobian_rank(*family, config.mem_qubits, config.readout_qubits, opts);

  auto rank_at = [&](double threshold) {
    int rank = 0;
    const double top = report.singular_values(0);
    for (Eigen::Index i = 0; i < report.singular_values.size(); ++i)
      if (report.singular_values(i) > threshold * top) ++rank;
    return rank;
  };

  nlohmann::json j;
  j["rank"] = report.rank;
  j["eps"] = report.eps;
  j["threshold"] = report.sv_threshold;
  j["lags"] = report.lags;
  j["rank_threshold_div_sqrt10"] = rank_at(report.sv_threshold / std::sqrt(10.0));
  j["rank_threshold_mul_sqrt10"] = rank_at(report.sv_threshold * std::sqrt(10.0));
  auto& sv = j["singular_values"];
  for (Eigen::Index i = 0; i < report.singular_values.size(); ++i)
    sv.push_back(report.singular_values(i));
  auto out = open_output(ctx.out_dir, "rank_report.json");
  out << j.dump(2) << "\n";

  auto csv = open_output(ctx.out_dir, "singular_values.csv");
  csv << "index,value\n";
  for (Eigen::Index i = 0; i < report.singular_values.size(); ++i)
    csv << i << "," << fmt(report.singular_values(i)) << "\n";
}

}  // namespace nisqrc
