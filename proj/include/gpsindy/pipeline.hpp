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

#ifndef GPSINDY_PIPELINE_HPP
#define GPSINDY_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpsindy/features.hpp"
#include "gpsindy/gp.hpp"
#include "gpsindy/grid.hpp"
#include "gpsindy/mfgp.hpp"
#include "gpsindy/simdata.hpp"
#include "gpsindy/sparse.hpp"

namespace gpsindy {

struct PredictionGrid {
  Eigen::MatrixXd points;  // D x N'
  std::optional<TensorGrid> grid;

  static PredictionGrid from_points(Eigen::MatrixXd points);
  static PredictionGrid from_grid(const TensorGrid& grid);
  static PredictionGrid from_spec(const GridSpec& spec) { return from_grid(spec.tensor()); }
  Eigen::Index size() const { return points.cols(); }
  int dims() const { return static_cast<int>(points.rows()); }
};

struct SurrogateSummary {
  // Standardised units; for MFGP the packed [rho, f, delta] log-parameters.
  Eigen::VectorXd log_hyperparams;
  double noise_variance = 0.0;
  double low_noise_variance = 0.0;  // MFGP only
  double nlml = 0.0;
  double target_scale = 1.0;
};

/// Posterior fields at the prediction grid, one column per channel.
struct InferredFields {
  FieldBundle bundle;
  Eigen::MatrixXd time_derivative;
  Eigen::MatrixXd time_variance;
};

struct DiscoveryResult {
  Eigen::MatrixXd coefficients;  // N_f x d
  std::vector<SparseSolution> solutions;
  std::vector<SurrogateSummary> surrogates;
  std::vector<std::string> feature_names;
  std::vector<std::string> channel_names;
  PredictionGrid grid;
  InferredFields fields;
};

/// Time is input 0; spatial derivatives are taken along input 1.
DiscoveryResult gp_sindy(const Dataset& data, const PredictionGrid& xp, const Library& lib,
                         const StwlsConfig& stwls_cfg, const GpConfig& gp_cfg);
DiscoveryResult mfgp_sindy(const Dataset& data_lf, const Dataset& data_hf, const PredictionGrid& xp,
                           const Library& lib, const StwlsConfig& stwls_cfg, const MfgpConfig& mfgp_cfg);

/// STWLS on each channel with W = diag(1 / var(u_t)).
DiscoveryResult discover(InferredFields fields, const PredictionGrid& xp, const Library& lib,
                         const StwlsConfig& stwls_cfg);

}  // namespace gpsindy

#endif
