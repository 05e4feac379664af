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

#ifndef GPSINDY_METRICS_HPP
#define GPSINDY_METRICS_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gpsindy {

struct TruthSpec {
  Eigen::MatrixXd coefficients;  // N_f x d
  std::string library;

  void validate() const;
};

/// Presets: lorenz, burgers, kdv (aligned with the matching standard library).
TruthSpec truth_preset(const std::string& name);
std::vector<std::string> truth_preset_names();

/// Percent. Max relative error over the true nonzero coefficients.
double e_inf(const Eigen::MatrixXd& c, const Eigen::MatrixXd& truth);
/// Percent. Relative Frobenius error.
double e_2(const Eigen::MatrixXd& c, const Eigen::MatrixXd& truth);
/// TP / (TP + FN + FP) over supports; |c| <= zero_tol counts as zero.
double tpr(const Eigen::MatrixXd& c, const Eigen::MatrixXd& truth, double zero_tol = 0.0);

}  // namespace gpsindy

#endif
