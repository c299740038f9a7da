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

#include "nisqrc/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace nisqrc {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& node, const std::set<std::string>& known,
                         const std::string& where) {
  for (auto it = node.begin(); it != node.end(); ++it)
    if (!known.count(it.key()))
      throw std::invalid_argument("config: unknown key \"" + it.key() +
                                  "\" in " + where);
}

// "inf" sentinel or a positive number.
double parse_extended(const json& v, const std::string& where) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf")
      return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("config: " + where + " must be a number or \"inf\"");
  }
  return v.get<double>();
}

long long parse_shots(const json& v, const std::string& where) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return 0;
    throw std::invalid_argument("config: " + where + " must be a count or \"inf\"");
  }
  const double d = v.get<double>();  // accepts 1e5 style literals
  if (d < 1) throw std::invalid_argument("config: " + where + " must be >= 1");
  return static_cast<long long>(d);
}

void parse_ansatz(const json& a, ExperimentConfig& c) {
  reject_unknown_keys(a,
                      {"kind", "memory_qubits", "readout_qubits", "tau",
                       "connectivity", "seed", "hyper", "circuit"},
                      "ansatz");
  if (a.contains("kind")) {
    const auto kind = a["kind"].get<std::string>();
    if (kind == "hamiltonian") c.kind = ExperimentConfig::AnsatzKind::hamiltonian;
    else if (kind == "circuit") c.kind = ExperimentConfig::AnsatzKind::circuit;
    else throw std::invalid_argument("config: ansatz.kind must be hamiltonian|circuit");
  }
  if (a.contains("memory_qubits")) c.mem_qubits = a["memory_qubits"].get<int>();
  if (a.contains("readout_qubits")) c.readout_qubits = a["readout_qubits"].get<int>();
  if (c.mem_qubits < 1 || c.readout_qubits < 1)
    throw std::invalid_argument("config: need memory_qubits, readout_qubits >= 1");
  if (a.contains("tau")) c.tau = a["tau"].get<double>();
  if (c.tau < 0) throw std::invalid_argument("config: ansatz.tau must be >= 0");
  if (a.contains("seed")) c.ansatz_seed = a["seed"].get<std::uint64_t>();
  if (a.contains("connectivity")) {
    const auto& conn = a["connectivity"];
    if (conn.is_string()) {
      c.connectivity = conn.get<std::string>();
      if (c.connectivity != "full" && c.connectivity != "chain" &&
          c.connectivity != "split")
        throw std::invalid_argument(
            "config: connectivity must be full|chain|split or an edge list");
    } else if (conn.is_array()) {
      c.connectivity = "explicit";
      for (const auto& e : conn) {
        if (!e.is_array() || e.size() != 2)
          throw std::invalid_argument("config: edges must be [i, j] pairs");
        c.explicit_edges.emplace_back(e[0].get<int>(), e[1].get<int>());
      }
    } else {
      throw std::invalid_argument("config: bad connectivity value");
    }
  }
  if (a.contains("hyper")) {
    const auto& h = a["hyper"];
    reject_unknown_keys(h, {"j_max", "eta_x", "eps_x_rms", "eta_z", "eps_z_rms"},
                        "ansatz.hyper");
    if (h.contains("j_max")) c.hyper.j_max = h["j_max"].get<double>();
    if (h.contains("eta_x")) c.hyper.eta_x = h["eta_x"].get<double>();
    if (h.contains("eps_x_rms")) c.hyper.eps_x_rms = h["eps_x_rms"].get<double>();
    if (h.contains("eta_z")) c.hyper.eta_z = h["eta_z"].get<double>();
    if (h.contains("eps_z_rms")) c.hyper.eps_z_rms = h["eps_z_rms"].get<double>();
  }
  if (a.contains("circuit")) {
    const auto& t = a["circuit"];
    reject_unknown_keys(t,
                        {"theta_x_min", "theta_z_min", "theta_i_min",
                         "delta_theta_x", "delta_theta_z", "delta_theta_i",
                         "coupling", "trotter_steps"},
                        "ansatz.circuit");
    auto& h = c.circuit_hyper;
    if (t.contains("theta_x_min")) h.theta_x_min = t["theta_x_min"].get<double>();
    if (t.contains("theta_z_min")) h.theta_z_min = t["theta_z_min"].get<double>();
    if (t.contains("theta_i_min")) h.theta_i_min = t["theta_i_min"].get<double>();
    if (t.contains("delta_theta_x")) h.delta_theta_x = t["delta_theta_x"].get<double>();
    if (t.contains("delta_theta_z")) h.delta_theta_z = t["delta_theta_z"].get<double>();
    if (t.contains("delta_theta_i")) h.delta_theta_i = t["delta_theta_i"].get<double>();
    if (t.contains("coupling")) h.coupling = t["coupling"].get<double>();
    if (t.contains("trotter_steps")) h.trotter_steps = t["trotter_steps"].get<int>();
  }
}

}  // namespace

ExperimentConfig parse_config_string(const std::string& json_text) {
  json root = json::parse(json_text);
  reject_unknown_keys(root,
                      {"ansatz", "dissipation", "reset", "idle_delay",
                       "quantize_u", "washout", "task", "shots", "expansion",
                       "kernels", "jacobian", "sweep", "seed"},
                      "the top level");
  ExperimentConfig c;
  if (root.contains("ansatz")) parse_ansatz(root["ansatz"], c);

  if (root.contains("dissipation")) {
    const auto& d = root["dissipation"];
    reject_unknown_keys(d, {"t1", "t_phi"}, "dissipation");
    for (auto [key, scalar, list] :
         {std::tuple<const char*, double*, std::vector<double>*>{"t1", &c.t1, &c.t1_list},
          {"t_phi", &c.t_phi, &c.t_phi_list}}) {
      if (!d.contains(key)) continue;
      const auto& v = d[key];
      if (v.is_array()) {
        for (const auto& x : v)
          list->push_back(parse_extended(x, std::string("dissipation.") + key));
        if (int(list->size()) != c.qubits())
          throw std::invalid_argument(std::string("config: dissipation.") + key +
                                      " list must have one entry per qubit");
      } else {
        *scalar = parse_extended(v, std::string("dissipation.") + key);
        if (*scalar <= 0)
          throw std::invalid_argument(std::string("config: dissipation.") + key +
                                      " must be positive");
      }
    }
  }

  if (root.contains("reset")) c.reset = root["reset"].get<bool>();
  if (root.contains("idle_delay")) c.idle_delay = root["idle_delay"].get<double>();
  if (c.idle_delay < 0) throw std::invalid_argument("config: idle_delay >= 0");
  if (root.contains("quantize_u")) c.quantize_u = root["quantize_u"].get<int>();
  if (root.contains("washout")) {
    const auto& w = root["washout"];
    if (w.is_string()) {
      if (w.get<std::string>() != "auto")
        throw std::invalid_argument("config: washout must be \"auto\" or an integer");
      c.washout = -1;
    } else {
      c.washout = w.get<int>();
      if (c.washout < 0) throw std::invalid_argument("config: washout must be >= 0");
    }
  }

  if (root.contains("task")) {
    const auto& t = root["task"];
    reject_unknown_keys(t,
                        {"snr_db", "train_messages", "train_length",
                         "test_messages", "test_length", "l2", "tol"},
                        "task");
    if (t.contains("snr_db")) c.task.snr_db = t["snr_db"].get<double>();
    if (t.contains("train_messages")) c.task.train_messages = t["train_messages"].get<int>();
    if (t.contains("train_length")) c.task.train_length = t["train_length"].get<int>();
    if (t.contains("test_messages")) c.task.test_messages = t["test_messages"].get<int>();
    if (t.contains("test_length")) c.task.test_length = t["test_length"].get<int>();
    if (t.contains("l2")) c.task.l2 = t["l2"].get<double>();
    if (t.contains("tol")) c.task.tol = t["tol"].get<double>();
  }

  if (root.contains("shots")) c.shots = parse_shots(root["shots"], "shots");

  if (root.contains("expansion")) {
    const auto& e = root["expansion"];
    reject_unknown_keys(e, {"k_max", "tolerance"}, "expansion");
    if (e.contains("k_max")) c.expansion.k_max = e["k_max"].get<int>();
    if (e.contains("tolerance")) c.expansion.tolerance = e["tolerance"].get<double>();
  }

  if (root.contains("kernels")) {
    const auto& k = root["kernels"];
    reject_unknown_keys(k, {"n_max"}, "kernels");
    if (k.contains("n_max")) {
      if (k["n_max"].is_string()) {
        if (k["n_max"].get<std::string>() != "auto")
          throw std::invalid_argument("config: kernels.n_max must be \"auto\" or an integer");
      } else {
        c.kernel_n_max = k["n_max"].get<int>();
      }
    }
  }

  if (root.contains("jacobian")) {
    const auto& jj = root["jacobian"];
    reject_unknown_keys(jj, {"eps", "threshold", "max_lag"}, "jacobian");
    if (jj.contains("eps")) c.jacobian.eps = jj["eps"].get<double>();
    if (jj.contains("threshold")) c.jacobian.sv_threshold = jj["threshold"].get<double>();
    if (jj.contains("max_lag")) c.jacobian.max_lag = jj["max_lag"].get<int>();
  }

  if (root.contains("sweep")) {
    const auto& s = root["sweep"];
    reject_unknown_keys(s, {"tau", "t1", "shots", "test_length", "variants"}, "sweep");
    if (s.contains("tau"))
      for (const auto& v : s["tau"]) c.sweep.tau.push_back(v.get<double>());
    if (s.contains("t1"))
      for (const auto& v : s["t1"])
        c.sweep.t1.push_back(parse_extended(v, "sweep.t1"));
    if (s.contains("shots"))
      for (const auto& v : s["shots"]) c.sweep.shots.push_back(parse_shots(v, "sweep.shots"));
    if (s.contains("test_length"))
      for (const auto& v : s["test_length"]) c.sweep.test_length.push_back(v.get<int>());
    if (s.contains("variants"))
      for (const auto& v : s["variants"]) {
        const auto name = v.get<std::string>();
        if (name != "connected" && name != "split" && name != "no_reset")
          throw std::invalid_argument("config: sweep.variants entries must be "
                                      "connected|split|no_reset");
        c.sweep.variants.push_back(name);
      }
  }

  if (root.contains("seed")) c.master_seed = root["seed"].get<std::uint64_t>();
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config_string(std::string(std::istreambuf_iterator<char>(in), {}));
}

DissipationSpec make_dissipation(const ExperimentConfig& config, double t1_override) {
  const int L = config.qubits();
  DissipationSpec d;
  auto rates_from = [&](double scalar, const std::vector<double>& list) {
    RVec r = RVec::Zero(L);
    bool any = false;
    for (int i = 0; i < L; ++i) {
      const double t = list.empty() ? scalar : list[size_t(i)];
      if (std::isfinite(t)) {
        r(i) = 1.0 / t;
        any = true;
      }
    }
    return any ? r : RVec();
  };
  const double t1 = t1_override > 0 ? t1_override : config.t1;
  d.damping_rates = rates_from(t1, t1_override > 0 ? std::vector<double>{} : config.t1_list);
  d.dephasing_rates = rates_from(config.t_phi, config.t_phi_list);
  return d;
}

std::vector<std::pair<int, int>> resolve_edges(const ExperimentConfig& config,
                                               const std::string& variant) {
  std::string conn = config.connectivity;
  if (variant == "split") conn = "split";
  else if (variant == "connected" && conn == "split") conn = "full";

  if (conn == "full") return all_to_all_edges(config.qubits());
  if (conn == "chain")
    return chain_edges(alternating_chain(config.mem_qubits, config.readout_qubits));
  if (conn == "split") return split_edges(config.mem_qubits, config.readout_qubits);
  return config.explicit_edges;
}

std::unique_ptr<ChannelFamily> make_family(const ExperimentConfig& config,
                                           const std::string& variant,
                                           double tau_override,
                                           double t1_override) {
  const double tau = tau_override > 0 ? tau_override : config.tau;
  DissipationSpec diss = make_dissipation(config, t1_override);
  if (config.kind == ExperimentConfig::AnsatzKind::hamiltonian) {
    HamiltonianAnsatz ansatz = draw_hamiltonian_ansatz(
        config.mem_qubits, config.readout_qubits, tau,
        resolve_edges(config, variant), config.hyper, config.ansatz_seed);
    return std::make_unique<HamiltonianFamily>(std::move(ansatz), std::move(diss),
                                               config.idle_delay);
  }
  CircuitAnsatz ansatz = draw_circuit_ansatz(
      config.mem_qubits, config.readout_qubits, tau, config.circuit_hyper,
      alternating_chain(config.mem_qubits, config.readout_qubits),
      config.ansatz_seed);
  if (variant == "split" || (config.connectivity == "split" && variant != "connected")) {
    // Sever the middle coupling of the chain.
    auto& edges = ansatz.edges;
    if (!edges.empty()) edges.erase(edges.begin() + Eigen::Index(edges.size()) / 2);
  }
  return std::make_unique<CircuitFamily>(std::move(ansatz), std::move(diss),
                                         config.idle_delay);
}

}  // namespace nisqrc
