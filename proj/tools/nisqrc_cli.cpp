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

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nisqrc/experiment.hpp"

namespace {

struct Args {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
};

void add_common_options(CLI::App* sub, Args& args) {
  sub->add_option("--config", args.config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", args.out_dir, "output directory");
  sub->add_option("--seed", args.seed, "master seed override")
      ->each([&args](const std::string&) { args.seed_given = true; });
  sub->add_option("--threads", args.threads, "worker threads for sweep points")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nisqrc: measured-and-reset quantum reservoir simulator"};
  app.require_subcommand(1);

  Args args;
  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and memory time");
  auto* kernels = app.add_subcommand("kernels", "Volterra kernel tables");
  auto* ce = app.add_subcommand("ce", "channel-equalization benchmark");
  auto* jacobian = app.add_subcommand("jacobian", "feature Jacobian rank");
  for (auto* sub : {spectrum, kernels, ce, jacobian}) add_common_options(sub, args);

  CLI11_PARSE(app, argc, argv);

  try {
    nisqrc::CommandContext ctx;
    ctx.config = nisqrc::parse_config_file(args.config_path);
    if (args.seed_given) ctx.config.master_seed = args.seed;
    ctx.out_dir = args.out_dir;
    ctx.threads = args.threads;

    if (spectrum->parsed()) nisqrc::cmd_spectrum(ctx);
    else if (kernels->parsed()) nisqrc::cmd_kernels(ctx);
    else if (ce->parsed()) nisqrc::cmd_ce(ctx);
    else if (jacobian->parsed()) nisqrc::cmd_jacobian(ctx);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
