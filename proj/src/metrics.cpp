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

#include "gpsindy/metrics.hpp"

#include <cmath>

#include "gpsindy/errors.hpp"
#include "gpsindy/features.hpp"

namespace gpsindy {

namespace {

void check_shapes(const Eigen::MatrixXd& c, const Eigen::MatrixXd& truth) {
  if (c.rows() != truth.rows() || c.cols() != truth.cols()) {
    fail(ErrorKind::InvalidArgument, "coefficient shapes differ: " + std::to_string(c.rows()) + "x" +
                                         std::to_string(c.cols()) + " vs " + std::to_string(truth.rows()) +
                                         "x" + std::to_string(truth.cols()));
  }
}

void set(TruthSpec& t, const Library& lib, const std::string& feature, int channel, double v) {
  const int i = lib.index_of(feature);
  require(i >= 0, "truth preset references unknown feature " + feature);
  t.coefficients(i, channel) = v;
}

}  // namespace

void TruthSpec::validate() const {
  require(coefficients.size() > 0 && (coefficients.array() != 0.0).any(), "truth has no nonzero entries");
}

TruthSpec truth_preset(const std::string& name) {
  TruthSpec t;
  if (name == "lorenz") {
    const Library lib = standard_library("lorenz-poly3");
    t.library = lib.name;
    t.coefficients = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(lib.size()), 3);
    set(t, lib, "x", 0, -10.0);
    set(t, lib, "y", 0, 10.0);
    set(t, lib, "x", 1, 28.0);
    set(t, lib, "y", 1, -1.0);
    set(t, lib, "x*z", 1, -1.0);
    set(t, lib, "z", 2, -8.0 / 3.0);
    set(t, lib, "x*y", 2, 1.0);
  } else if (name == "burgers") {
    const Library lib = standard_library("burgers-10");
    t.library = lib.name;
    t.coefficients = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(lib.size()), 1);
    set(t, lib, "u_xx", 0, 0.5);
    set(t, lib, "u*u_x", 0, -1.0);
  } else if (name == "kdv") {
    const Library lib = standard_library("kdv-15");
    t.library = lib.name;
    t.coefficients = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(lib.size()), 1);
    set(t, lib, "u_xxx", 0, -1.0);
    set(t, lib, "u*u_x", 0, -1.0);
  } else {
    fail(ErrorKind::InvalidArgument, "unknown truth preset: " + name);
  }
  return t;
}

std::vector<std::string> truth_preset_names() { return {"lorenz", "burgers", "kdv"}; }

double e_inf(const Eigen::MatrixXd& c, const Eigen::MatrixXd& truth) {
  check_shapes(c, truth);
  double worst = -1.0;
  for (Eigen::Index j = 0; j < truth.cols(); ++j)
    for (Eigen::Index i = 0; i < truth.rows(); ++i)
      if (truth(i, j) != 0.0) worst = std::max(worst, std::abs(c(i, j) - truth(i, j)) / std::abs(truth(i, j)));
  if (worst < 0.0) fail(ErrorKind::InvalidArgument, "e_inf: truth is all zero");
  return 100.0 * worst;
}

double e_2(const Eigen::MatrixXd& c, const Eigen::MatrixXd& truth) {
  check_shapes(c, truth);
  const double n = truth.norm();
  if (n == 0.0) fail(ErrorKind::InvalidArgument, "e_2: truth has zero norm");
  return 100.0 * (c - truth).norm() / n;
}

double tpr(const Eigen::MatrixXd& c, const Eigen::MatrixXd& truth, double zero_tol) {
  check_shapes(c, truth);
  int tp = 0, fn = 0, fp = 0;
  for (Eigen::Index j = 0; j < truth.cols(); ++j) {
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
      const bool t = std::abs(truth(i, j)) > zero_tol, d = std::abs(c(i, j)) > zero_tol;
      tp += t && d;
      fn += t && !d;
      fp += !t && d;
    }
  }
  const int denom = tp + fn + fp;
  return denom == 0 ? 1.0 : static_cast<double>(tp) / denom;
}

}  // namespace gpsindy
