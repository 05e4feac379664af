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

#ifndef GPSINDY_GRID_HPP
#define GPSINDY_GRID_HPP

#include <chrono>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace gpsindy {

/// Uniformly spaced axis: start, start + step, ..., start + (count-1) step.
struct Axis {
  double start = 0.0;
  double step = 1.0;
  Eigen::Index count = 1;

  static Axis from_range(double first, double last, double step);

  double at(Eigen::Index i) const { return start + step * static_cast<double>(i); }
  double last() const { return at(count - 1); }
  Eigen::VectorXd values() const;
};

/// Tensor-product grid. Axis 0 is outermost, so row order is time-major.
struct TensorGrid {
  std::vector<Axis> axes;

  int dims() const { return static_cast<int>(axes.size()); }
  Eigen::Index size() const;
  Eigen::MatrixXd points() const;  // D x N
  std::vector<Eigen::VectorXd> axis_values() const;
};

/// Time range [0, T] with step dt, optionally a spatial range with step dx.
struct GridSpec {
  double t_end = 1.0;
  double dt = 0.1;
  std::optional<double> x_start;
  std::optional<double> x_end;
  std::optional<double> dx;
  bool periodic = false;

  void validate() const;
  bool has_space() const { return dx.has_value(); }
  TensorGrid tensor() const;
};

/// Cooperative wall-clock limit checked by long-running loops.
class Deadline {
 public:
  Deadline() = default;
  explicit Deadline(double seconds);

  bool expired() const;
  void check(const char* where) const;

 private:
  std::optional<std::chrono::steady_clock::time_point> end_;
};

}  // namespace gpsindy

#endif  // GPSINDY_GRID_HPP
