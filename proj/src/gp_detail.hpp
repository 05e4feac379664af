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

#ifndef GPSINDY_SRC_GP_DETAIL_HPP
#define GPSINDY_SRC_GP_DETAIL_HPP

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "gpsindy/gp.hpp"

namespace gpsindy::detail {

struct Standardizer {
  double offset = 0.0;
  double scale = 1.0;
};

Standardizer make_standardizer(const Eigen::VectorXd& y, bool enabled);

/// Flat indices of a per-axis even-stride sub-grid holding at most about cap points.
std::vector<Eigen::Index> grid_subsample(const TensorGrid& grid, Eigen::Index cap);

/// Rprop from cfg.restarts random log-space starts (shifted by init_shift); the
/// last parameter is the log noise std, bounded below by noise_lower.
RpropResult multistart(const std::function<NlmlResult(const Eigen::VectorXd&)>& obj, int nparams,
                       const GpConfig& cfg, double noise_lower, const Eigen::VectorXd& init_shift);

NlmlResult toeplitz_nlml_with_grad(const SeHyperparams& theta, double noise_variance, double spacing,
                                   const Eigen::VectorXd& y);

}  // namespace gpsindy::detail

#endif  // GPSINDY_SRC_GP_DETAIL_HPP
