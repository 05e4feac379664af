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

#include "gpsindy/grid.hpp"

#include <cmath>
#include <string>

#include "gpsindy/errors.hpp"

namespace gpsindy {

Axis Axis::from_range(double first, double last, double step) {
  require(step > 0.0 && std::isfinite(step), "axis step must be positive");
  require(last >= first, "axis range is reversed");
  const double steps = (last - first) / step;
  const double rounded = std::round(steps);
  require(std::abs(steps - rounded) <= 1e-9 * std::max(1.0, rounded),
          "axis range is not an integer number of steps");
  return Axis{first, step, static_cast<Eigen::Index>(rounded) + 1};
}

Eigen::VectorXd Axis::values() const {
  Eigen::VectorXd v(count);
  for (Eigen::Index i = 0; i < count; ++i) v[i] = at(i);
  return v;
}

Eigen::Index TensorGrid::size() const {
  Eigen::Index n = axes.empty() ? 0 : 1;
  for (const auto& a : axes) n *= a.count;
  return n;
}

Eigen::MatrixXd TensorGrid::points() const {
  const int d = dims();
  const Eigen::Index n = size();
  Eigen::MatrixXd out(d, n);
  std::vector<Eigen::Index> idx(d, 0);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (int j = 0; j < d; ++j) out(j, k) = axes[j].at(idx[j]);
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[j] < axes[j].count) break;
      idx[j] = 0;
    }
  }
  return out;
}

std::vector<Eigen::VectorXd> TensorGrid::axis_values() const {
  std::vector<Eigen::VectorXd> out;
  for (const auto& a : axes) out.push_back(a.values());
  return out;
}

void GridSpec::validate() const {
  require(t_end > 0.0 && dt > 0.0, "time range and step must be positive");
  (void)Axis::from_range(0.0, t_end, dt);
  if (dx) {
    require(x_start && x_end, "spatial range needs both ends");
    (void)Axis::from_range(*x_start, *x_end, *dx);
  }
}

TensorGrid GridSpec::tensor() const {
  validate();
  TensorGrid g;
  g.axes.push_back(Axis::from_range(0.0, t_end, dt));
  if (dx) g.axes.push_back(Axis::from_range(*x_start, *x_end, *dx));
  return g;
}

Deadline::Deadline(double seconds) {
  if (seconds > 0.0) {
    end_ = std::chrono::steady_clock::now() +
           std::chrono::duration_cast<std::chrono::steady_clock::duration>(
               std::chrono::duration<double>(seconds));
  }
}

bool Deadline::expired() const { return end_ && std::chrono::steady_clock::now() > *end_; }

void Deadline::check(const char* where) const {
  if (expired()) fail(ErrorKind::Timeout, std::string("wall-clock cap exceeded in ") + where);
}

}  // namespace gpsindy
