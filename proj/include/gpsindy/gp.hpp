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

#ifndef GPSINDY_GP_HPP
#define GPSINDY_GP_HPP

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "gpsindy/grid.hpp"
#include "gpsindy/kernels.hpp"
#include "gpsindy/rprop.hpp"

namespace gpsindy {

inline constexpr double kVarianceFloor = 1e-12;

struct GpConfig {
  int restarts = 4;
  std::uint64_t seed = 0;
  double init_low = 0.05;
  double init_high = 5.0;
  RpropSettings rprop;
  // Even-stride training subsample size; 0 trains on every point.
  Eigen::Index train_cap = 0;
  // Condition the posterior on all points, not only the training subsample.
  bool condition_on_full = true;
  bool standardize = true;
  // Lower bound on the noise variance, in standardised target units.
  double noise_floor = 1e-8;
  // Use the exact Kronecker backend for 2-D tensor-grid data.
  bool use_kronecker = true;
  const Deadline* deadline = nullptr;

  void validate() const;
};

struct PosteriorEstimate {
  double mean = 0.0;
  double variance = 0.0;
};

struct PosteriorField {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // empty when not requested
};

struct NlmlResult {
  double value = 0.0;
  Eigen::VectorXd gradient;  // over [log amplitude, log lengthscales..., log noise std]
};

double nlml(const SeHyperparams& theta, double noise_variance, const Eigen::MatrixXd& x,
            const Eigen::VectorXd& y);
Eigen::VectorXd nlml_grad(const SeHyperparams& theta, double noise_variance, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& y);
NlmlResult nlml_with_grad(const SeHyperparams& theta, double noise_variance, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& y);
/// Same objective for data on a 2-axis tensor grid (time-major values).
NlmlResult nlml_with_grad(const SeHyperparams& theta, double noise_variance, const TensorGrid& grid,
                          const Eigen::VectorXd& y);

/// Lower Cholesky factor of a + jitter*I with the escalating jitter ladder.
/// Returns the jitter used; throws ill-conditioned-kernel when the ladder is exhausted.
double cholesky_with_jitter(const Eigen::MatrixXd& a, Eigen::LLT<Eigen::MatrixXd>& llt);

class GpModel {
 public:
  enum class Backend { Dense, Kronecker };

  GpModel() = default;

  /// Condition on scattered data with fixed hyperparameters (no standardisation).
  static GpModel condition(Eigen::MatrixXd x, Eigen::VectorXd y, SeHyperparams theta, double noise_variance,
                           double offset = 0.0, double scale = 1.0);
  /// Condition on tensor-grid data using per-axis eigendecompositions.
  static GpModel condition(const TensorGrid& grid, Eigen::VectorXd y, SeHyperparams theta,
                           double noise_variance, double offset = 0.0, double scale = 1.0);

  Backend backend() const { return backend_; }
  int dims() const { return theta_.dims(); }
  Eigen::Index size() const { return y_.size(); }
  const Eigen::MatrixXd& inputs() const { return x_; }
  const std::optional<TensorGrid>& grid() const { return grid_; }
  // Internal (standardised) targets and hyperparameters.
  const Eigen::VectorXd& targets() const { return y_; }
  const SeHyperparams& hyperparams() const { return theta_; }
  double noise_variance() const { return noise_; }
  double jitter() const { return jitter_; }
  double offset() const { return offset_; }
  double scale() const { return scale_; }
  double nlml_value() const { return nlml_; }
  // Dense backend only.
  const Eigen::MatrixXd& cholesky() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }

  PosteriorField predict(const Eigen::MatrixXd& xs, int dim, int order, bool with_variance) const;
  PosteriorField predict(const TensorGrid& grid, int dim, int order, bool with_variance) const;

 private:
  Backend backend_ = Backend::Dense;
  Eigen::MatrixXd x_;
  std::optional<TensorGrid> grid_;
  Eigen::VectorXd y_;
  SeHyperparams theta_;
  double noise_ = 0.0;
  double jitter_ = 0.0;
  double offset_ = 0.0;
  double scale_ = 1.0;
  double nlml_ = 0.0;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  // Kronecker backend: unit-amplitude axis eigenpairs and inverse spectrum.
  Eigen::MatrixXd q_t_, q_x_;
  Eigen::VectorXd l_t_, l_x_;
  Eigen::MatrixXd inv_spec_;  // n_t x n_x
  Eigen::MatrixXd alpha_grid_;  // n_t x n_x

  friend GpModel fit(const Eigen::MatrixXd&, const Eigen::VectorXd&, const GpConfig&);
  friend GpModel fit(const TensorGrid&, const Eigen::VectorXd&, const GpConfig&);
};

/// Hyperparameter fit by Rprop over log-parameters with random restarts.
GpModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpConfig& config);
/// Grid-aware fit: Kronecker backend when allowed, otherwise dense on the grid points.
GpModel fit(const TensorGrid& grid, const Eigen::VectorXd& y, const GpConfig& config);

PosteriorEstimate posterior_state(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& xs);
PosteriorEstimate posterior_derivative(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& xs,
                                       int dim, int order);

/// Even-stride index subset of size cap from 0..n-1, both ends included.
std::vector<Eigen::Index> even_stride_indices(Eigen::Index n, Eigen::Index cap);

}  // namespace gpsindy

#endif  // GPSINDY_GP_HPP
