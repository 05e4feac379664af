// Copyright 2026 The gpsindy Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gpsindy/errors.hpp"
#include "gpsindy/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRunFailed = 2;
constexpr int kExitInternal = 3;

int run(const std::string& config_path, const std::optional<std::string>& output,
        const std::optional<std::uint64_t>& seed, std::optional<int> workers, bool emit_fields, int verbosity) {
  using namespace gpsindy;
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (output) cfg.output_dir = *output;
    if (seed) cfg.seeds = {*seed};
    if (workers) cfg.workers = *workers;
    if (emit_fields) cfg.emit_fields = true;
    cfg.validate();
  } catch (const Error& e) {
    std::cerr << "gpsindy: " << e.what() << "\n";
    return kExitConfig;
  }
  if (verbosity > 0)
    std::cerr << "gpsindy: " << cfg.name << ": " << cfg.noise_ratios.size() * cfg.seeds.size() << " runs, "
              << cfg.workers << " worker(s)\n";
  ExperimentReport report;
  try {
    report = run_experiment(cfg);
  } catch (const Error& e) {
    std::cerr << "gpsindy: " << e.what() << "\n";
    return e.kind() == ErrorKind::ConfigError ? kExitConfig : kExitInternal;
  }
  write_outputs(cfg, report);
  for (const RunRecord& r : report.runs) {
    if (r.status != "ok") std::cerr << "gpsindy: sigma_nr=" << r.noise_ratio << " seed=" << r.seed << ": " << r.message << "\n";
    else if (verbosity > 0) {
      std::cerr << "gpsindy: sigma_nr=" << r.noise_ratio << " seed=" << r.seed << " ok";
      if (r.e_2) std::cerr << " E_inf=" << *r.e_inf << "% E_2=" << *r.e_2 << "% TPR=" << *r.tpr;
      std::cerr << " (" << r.runtime_seconds << " s)\n";
    }
  }
  if (verbosity > 0) std::cerr << "gpsindy: wrote " << cfg.output_dir << "\n";
  return report.any_failed() ? kExitRunFailed : kExitOk;
}

int list(const std::optional<std::string>& config_path, bool names_only) {
  using namespace gpsindy;
  std::optional<ExperimentConfig> cfg;
  if (config_path) {
    try {
      cfg = load_config(*config_path);
    } catch (const Error& e) {
      std::cerr << "gpsindy: " << e.what() << "\n";
      return kExitConfig;
    }
  }
  std::cout << list_presets(cfg ? &*cfg : nullptr, names_only);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equation discovery from noisy single- and multi-fidelity data"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
  std::string config_path;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool emit_fields = false;
  int verbosity = 0;
  run_cmd->add_option("config", config_path, "Experiment INI file")->required();
  run_cmd->add_option("-o,--output", output, "Override the output directory");
  run_cmd->add_option("-s,--seed", seed, "Run this single seed instead of the configured list");
  run_cmd->add_option("-j,--workers", workers, "Worker threads across runs")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--emit-fields", emit_fields, "Write predicted fields to fields/*.csv");
  run_cmd->add_flag("-v,--verbose", verbosity, "Progress on stderr (repeatable)");

  auto* list_cmd = app.add_subcommand("list-presets", "List experiment kinds, libraries and truth specs");
  std::optional<std::string> list_config;
  bool names_only = false;
  list_cmd->add_option("-c,--config", list_config, "Also list custom libraries declared in this config");
  list_cmd->add_flag("--names", names_only, "One preset name per line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }
  try {
    if (*run_cmd) return run(config_path, output, seed, workers, emit_fields, verbosity);
    return list(list_config, names_only);
  } catch (const std::exception& e) {
    std::cerr << "gpsindy: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
