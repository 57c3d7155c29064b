// Copyright 2026 The treedec Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>

#include <iostream>

#include "treedec/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"treedec: tree-based parallel decoding benchmarks"};
  app.require_subcommand(1);
  treedec::CommandOptions opts;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opts.config_path, "YAML run configuration");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", opts.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed-override", seed, "replace every seed in the configuration");
    sub->add_flag("--verbose", opts.verbose, "write acceptance and cost diagnostics");
  };
  auto* run = app.add_subcommand("run", "decode the configured workload");
  add_common(run, true);
  auto* sweep = app.add_subcommand("sweep", "sweep one or more axes against an autoregressive baseline");
  add_common(sweep, true);
  sweep->add_option("--axis", opts.axis, "batch, prune_layer, prune_topk, mode, or a comma-joined combination")
      ->required();
  auto* selftest = app.add_subcommand("selftest", "run the reduced-scale oracle suites");
  add_common(selftest, false);

  CLI11_PARSE(app, argc, argv);
  for (auto* sub : {run, sweep, selftest}) {
    if (sub->parsed() && sub->count("--seed-override")) opts.seed_override = seed;
  }
  if (run->parsed()) return treedec::cmd_run(opts, std::cout, std::cerr);
  if (sweep->parsed()) return treedec::cmd_sweep(opts, std::cout, std::cerr);
  return treedec::cmd_selftest(opts, std::cout, std::cerr);
}
