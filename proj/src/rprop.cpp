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

#include "gpsindy/rprop.hpp"

#include <algorithm>
#include <cmath>

namespace gpsindy {

RpropResult rprop_minimize(const Objective& fn, Eigen::VectorXd start, const RpropSettings& s,
                           const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                           const Deadline* deadline) {
  const Eigen::Index n = start.size();
  auto clamp = [&](Eigen::VectorXd& p) {
    if (lower.size() == n) p = p.cwiseMax(lower);
    if (upper.size() == n) p = p.cwiseMin(upper);
  };
  RpropResult res;
  Eigen::VectorXd p = std::move(start);
  clamp(p);
  Eigen::VectorXd last_good = p;
  Eigen::VectorXd step = Eigen::VectorXd::Constant(n, s.initial_step);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad(n);
  int failures = 0;

  for (int it = 0; it < s.iterations; ++it) {
    if (deadline) deadline->check("hyperparameter optimisation");
    double f = 0.0;
    ++res.evaluations;
    const bool ok = fn(p, f, grad) && std::isfinite(f) && grad.allFinite();
    if (!ok) {
      if (!res.ok || ++failures > s.max_failures) break;
      p = last_good;
      step = (step * s.decrease).cwiseMax(s.min_step);
      prev.setZero();
      continue;
    }
    if (!res.ok) {
      res.ok = true;
      res.initial_value = f;
    }
    if (f < res.best_value) {
      res.best_value = f;
      res.best = p;
    }
    last_good = p;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sign = grad[i] * prev[i];
      if (sign > 0.0) {
        step[i] = std::min(step[i] * s.increase, s.max_step);
      } else if (sign < 0.0) {
        step[i] = std::max(step[i] * s.decrease, s.min_step);
        grad[i] = 0.0;
      }
      if (grad[i] > 0.0) {
        p[i] -= step[i];
      } else if (grad[i] < 0.0) {
        p[i] += step[i];
      }
    }
    clamp(p);
    prev = grad;
    if (s.step_tolerance > 0.0 && step.maxCoeff() < s.step_tolerance) break;
  }
  return res;
}

}  // namespace gpsindy
