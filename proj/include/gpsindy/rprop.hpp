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

#ifndef GPSINDY_RPROP_HPP
#define GPSINDY_RPROP_HPP

#include <functional>
#include <limits>

#include <Eigen/Dense>

#include "gpsindy/grid.hpp"

namespace gpsindy {

struct RpropSettings {
  double increase = 1.2;
  double decrease = 0.5;
  double initial_step = 0.1;
  double min_step = 1e-6;
  double max_step = 1.0;
  int iterations = 500;
  // Stop once every per-parameter step has shrunk below this; 0 disables.
  double step_tolerance = 0.0;
  int max_failures = 25;
};

/// Returns false when the objective cannot be evaluated at the given point.
using Objective = std::function<bool(const Eigen::VectorXd&, double&, Eigen::VectorXd&)>;

struct RpropResult {
  Eigen::VectorXd best;
  double best_value = std::numeric_limits<double>::infinity();
  double initial_value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool ok = false;
};

/// Sign-based resilient propagation, keeping the best point of the trajectory.
/// Optional box bounds are applied after each update.
RpropResult rprop_minimize(const Objective& fn, Eigen::VectorXd start, const RpropSettings& settings,
                           const Eigen::VectorXd& lower = {}, const Eigen::VectorXd& upper = {},
                           const Deadline* deadline = nullptr);

}  // namespace gpsindy

#endif  // GPSINDY_RPROP_HPP
