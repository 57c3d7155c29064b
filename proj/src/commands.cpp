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

#include "treedec/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "treedec/report.hpp"
#include "treedec/selftest.hpp"

namespace treedec {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_axes(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

RunConfig load_with_overrides(const CommandOptions& opts) {
  if (opts.config_path.empty()) throw ConfigError("<cli>:0: --config is required");
  RunConfig cfg = load_config(opts.config_path);
  if (opts.seed_override) override_seed(cfg, *opts.seed_override);
  return cfg;
}

}  // namespace

RunResult execute(const RunConfig& config, const ModelBackend& backend) {
  std::optional<LatencyModel> clock;
  if (config.backend.simulated_clock) clock.emplace(config.backend.latency);
  Engine engine(backend, config.engine, clock ? &*clock : nullptr);
  return engine.run(make_prompts(config), config.workload.max_tokens, config.workload.batch_size);
}

std::vector<SweepRow> run_sweep(const RunConfig& config, const std::vector<std::string>& axes) {
  if (axes.empty()) throw ConfigError("<cli>:0: --axis is required for sweep");
  struct Axis {
    std::string name;
    std::vector<std::string> values;
  };
  std::vector<Axis> grid;
  for (const auto& a : axes) {
    Axis ax{a, {}};
    if (a == "batch") {
      for (int v : config.sweep.batch) ax.values.push_back(std::to_string(v));
    } else if (a == "prune_layer") {
      for (int v : config.sweep.prune_layer) ax.values.push_back(std::to_string(v));
    } else if (a == "prune_topk") {
      for (int v : config.sweep.prune_topk) ax.values.push_back(std::to_string(v));
    } else if (a == "mode") {
      for (Mode m : config.sweep.mode) ax.values.push_back(to_string(m));
    } else {
      throw ConfigError("<cli>:0: unknown sweep axis '" + a + "'");
    }
    if (ax.values.empty()) throw ConfigError("<cli>:0: sweep." + a + " lists no values");
    grid.push_back(std::move(ax));
  }

  const auto backend = make_backend(config);
  std::map<int, double> baseline;  // batch size -> autoregressive tokens/sec
  std::vector<SweepRow> rows;
  std::vector<std::size_t> idx(grid.size(), 0);
  while (true) {
    RunConfig point = config;
    SweepRow row;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::string& v = grid[i].values[idx[i]];
      row.axes.emplace_back(grid[i].name, v);
      if (grid[i].name == "batch") point.workload.batch_size = std::stoi(v);
      if (grid[i].name == "prune_layer") point.engine.prune.layer = std::stoi(v);
      if (grid[i].name == "prune_topk") point.engine.prune.topk = std::stoi(v);
      if (grid[i].name == "mode") point.engine.mode = *parse_mode(v);
    }
    row.mode = to_string(point.engine.mode);
    row.summary = execute(point, *backend).summary;
    const int batch = point.workload.batch_size;
    if (!baseline.contains(batch)) {
      RunConfig ar = point;
      ar.engine.mode = Mode::kAutoregressive;
      baseline[batch] = execute(ar, *backend).summary.tokens_per_second;
    }
    row.baseline_tokens_per_second = baseline[batch];
    row.speedup = row.baseline_tokens_per_second > 0 ? row.summary.tokens_per_second / row.baseline_tokens_per_second : 0;
    rows.push_back(std::move(row));

    std::size_t i = grid.size();
    while (i > 0) {
      --i;
      if (++idx[i] < grid[i].values.size()) break;
      idx[i] = 0;
      if (i == 0) return rows;
    }
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  if (rows.empty()) return;
  for (const auto& [name, value] : rows.front().axes) {
    if (name != "mode") os << name << ',';
  }
  os << "mode,tokens_per_second,baseline_tokens_per_second,speedup,mean_accepted,mean_prune_rate,mean_tree_size\n";
  const auto old = os.precision(10);
  for (const auto& r : rows) {
    for (const auto& [name, value] : r.axes) {
      if (name != "mode") os << value << ',';
    }
    os << r.mode << ',' << r.summary.tokens_per_second << ',' << r.baseline_tokens_per_second << ',' << r.speedup << ','
       << r.summary.mean_accepted << ',' << r.summary.mean_prune_rate << ',' << r.summary.mean_tree_size << '\n';
  }
  os.precision(old);
}

int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = load_with_overrides(opts);
    const auto backend = make_backend(cfg);
    std::optional<LatencyModel> clock;
    if (cfg.backend.simulated_clock) clock.emplace(cfg.backend.latency);
    Engine engine(*backend, cfg.engine, clock ? &*clock : nullptr);
    const RunResult res = engine.run(make_prompts(cfg), cfg.workload.max_tokens, cfg.workload.batch_size);

    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    if (cfg.output.transcripts) {
      fs::create_directories(dir / "transcripts");
      for (std::size_t i = 0; i < res.transcripts.size(); ++i) {
        std::ostringstream name;
        name << "seq_" << std::setw(4) << std::setfill('0') << i << ".txt";
        auto os = open_out(dir / "transcripts" / name.str());
        write_transcript(os, res.transcripts[i]);
      }
    }
    {
      auto os = open_out(dir / cfg.output.metrics);
      write_metrics_jsonl(os, res.metrics);
    }
    {
      auto os = open_out(dir / cfg.output.plans);
      write_plans_jsonl(os, res.plans);
    }
    {
      auto os = open_out(dir / cfg.output.summary);
      write_summary_header(os);
      write_summary_row(os, to_string(cfg.engine.mode), res.summary);
    }
    if (opts.verbose) {
      auto acc = open_out(dir / "acceptance.csv");
      write_stats_csv(acc, engine.acceptance());
      auto cost = open_out(dir / "cost.csv");
      cost << "size,T_perf,o,W,beta0,beta1\n";
      engine.cost_model().write_diagnostics(cost, engine.iteration());
    }
    out << to_string(cfg.engine.mode) << ": " << res.summary.tokens << " tokens in " << res.summary.iterations
        << " iterations, " << res.summary.tokens_per_second << " tokens/s, mean accepted "
        << res.summary.mean_accepted << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_sweep(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = load_with_overrides(opts);
    const auto rows = run_sweep(cfg, split_axes(opts.axis));
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    auto os = open_out(dir / "sweep.csv");
    write_sweep_csv(os, rows);
    write_sweep_csv(out, rows);
    return 0;
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_selftest(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const auto results = run_selftest(opts.seed_override.value_or(1));
    print_results(out, results);
    for (const auto& r : results) {
      if (!r.passed) return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace treedec
