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

#ifndef GPSINDY_EXPERIMENT_HPP
#define GPSINDY_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpsindy/features.hpp"
#include "gpsindy/gp.hpp"
#include "gpsindy/pipeline.hpp"
#include "gpsindy/simdata.hpp"
#include "gpsindy/sparse.hpp"

namespace gpsindy {

enum class ExperimentKind {
  Lorenz,
  BurgersSf,
  BurgersMf,
  BurgersAltLf,
  BurgersLfOnly,
  KdvSf,
  KdvMf,
  CustomFromFiles,
};

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

/// Rows x columns of an even-stride (time, space) grid.
struct GridSize {
  Eigen::Index nt = 0;
  Eigen::Index nx = 0;
};

struct DataSpec {
  double t_end = 10.0;
  double dt = 0.001;  // generator output / fine step
  double x_start = 0.0;
  double x_end = 0.0;
  double dx = 0.0;  // fine spatial step; 0 for ODE data
  double solver_dt = 0.002;
  GridSize hf;  // training grid of the (HF or SF) level
  GridSize lf;  // LF training grid after interpolation
  double lf_coarse_dt = 0.0;
  double lf_coarse_dx = 0.0;
  std::string hf_file;
  std::string lf_file;
};

struct PredictionSpec {
  bool on_training = false;  // GP-SINDy* control
  double dt = 0.0;
  double dx = 0.0;
};

struct ExperimentConfig {
  std::string name;
  ExperimentKind kind = ExperimentKind::Lorenz;
  std::vector<double> noise_ratios{0.0};
  std::vector<std::uint64_t> seeds{0};
  DataSpec data;
  PredictionSpec prediction;
  std::string library;
  std::string truth;  // truth preset name; empty when unknown
  std::map<std::string, Library> custom_libraries;
  StwlsConfig stwls;
  GpConfig gp;      // SF surrogate, MF high level
  GpConfig gp_low;  // MF low level
  double timeout_seconds = 0.0;  // per run; 0 disables
  int workers = 1;
  bool emit_fields = false;
  std::string output_dir = "out";

  bool multi_fidelity() const;
  Library resolve_library() const;
  /// Throws config-error naming the offending key.
  void validate() const;
};

/// Defaults reproducing the published protocol of each kind.
ExperimentConfig preset(ExperimentKind kind);
std::vector<std::string> preset_names();

/// Flat INI file: [experiment], [data], [prediction], [library], [stwls], [gp], [gp_low],
/// and one [library.NAME] section per custom library. Keys override the preset named by
/// experiment.kind. Throws config-error.
ExperimentConfig load_config(const std::string& path);

/// Parses a custom library term list "p1,..,pd|q1,q2,q3; ...".
Library parse_custom_library(const std::string& name, const std::vector<std::string>& states,
                             const std::string& terms);

/// Experiment kinds, libraries and truth specs, one block each.
std::string list_presets(const ExperimentConfig* config = nullptr, bool names_only = false);

struct RunRecord {
  double noise_ratio = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok | timeout | failed:<kind>
  std::string message;
  std::optional<double> e_inf, e_2, tpr;
  double runtime_seconds = 0.0;
  Eigen::MatrixXd coefficients;
  std::optional<DiscoveryResult> result;  // kept only when fields are emitted
};

struct ExperimentReport {
  std::vector<RunRecord> runs;  // ordered by (noise ratio, seed)
  std::vector<std::string> feature_names;
  std::vector<std::string> channel_names;
  bool any_failed() const;
};

/// Clean datasets shared by every run of an experiment.
struct CleanData {
  Dataset high;
  std::optional<Dataset> low;
};

CleanData generate_clean(const ExperimentConfig& config);
RunRecord run_single(const ExperimentConfig& config, const CleanData& clean, double noise_ratio,
                     std::uint64_t seed);
ExperimentReport run_experiment(const ExperimentConfig& config);
/// coefficients.csv, metrics.csv, timing.csv, summary.json and optional fields/.
void write_outputs(const ExperimentConfig& config, const ExperimentReport& report);

}  // namespace gpsindy

#endif  // GPSINDY_EXPERIMENT_HPP
