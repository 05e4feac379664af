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

#ifndef GPSINDY_SPARSE_HPP
#define GPSINDY_SPARSE_HPP

#include <vector>

#include <Eigen/Dense>

namespace gpsindy {

struct StwlsConfig {
  std::vector<double> lambdas{0.0};
  double eta = 1.0;
  int outer = 20;
  int inner = 10;

  void validate() const;
};

struct LambdaDiagnostics {
  double lambda = 0.0;
  int accepted = 0;
  int rejected = 0;
  std::vector<double> thresholds;
};

struct SparseSolution {
  Eigen::VectorXd coefficients;
  std::vector<int> support;
  double loss = 0.0;
  std::vector<double> accepted_losses;
  std::vector<LambdaDiagnostics> per_lambda;
};

/// Weighted least squares with diagonal weights w (length N'), via QR of sqrt(W) Phi.
/// Rank-deficient systems raise singular-system.
Eigen::VectorXd wls_solve(const Eigen::MatrixXd& phi, const Eigen::VectorXd& z, const Eigen::VectorXd& w);

/// (Phi c - Z)^T W (Phi c - Z) + eta * ||c||_0
double penalized_loss(const Eigen::MatrixXd& phi, const Eigen::VectorXd& z, const Eigen::VectorXd& w,
                      const Eigen::VectorXd& c, double eta);

/// Sequential thresholding with ridge support search and WLS refits.
SparseSolution stwls(const Eigen::MatrixXd& phi, const Eigen::VectorXd& z, const Eigen::VectorXd& w,
                     const StwlsConfig& cfg);

}  // namespace gpsindy

#endif
