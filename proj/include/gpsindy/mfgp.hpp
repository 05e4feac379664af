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

#ifndef GPSINDY_MFGP_HPP
#define GPSINDY_MFGP_HPP

#include <optional>

#include <Eigen/Dense>

#include "gpsindy/gp.hpp"
#include "gpsindy/kernels.hpp"

namespace gpsindy {

struct MfgpConfig {
  GpConfig low;
  GpConfig high;
};

/// Two-level model: an SE GP on the LF data, and a GP on the HF data over the
/// augmented input (x, f1(x)) where f1 is the LF posterior mean.
class MfgpModel {
 public:
  MfgpModel() = default;

  /// Condition the HF level with fixed hyperparameters. y2 is in raw units.
  static MfgpModel condition(GpModel low, Eigen::MatrixXd x2, const Eigen::VectorXd& y2, MfgpHyperparams theta,
                             double noise_variance, double offset = 0.0, double scale = 1.0);

  const GpModel& low() const { return low_; }
  int dims() const { return theta_.dims(); }
  const Eigen::MatrixXd& inputs() const { return x2_; }
  // LF posterior mean at the HF inputs.
  const Eigen::VectorXd& augmented() const { return f2_; }
  const Eigen::VectorXd& targets() const { return y2_; }
  const MfgpHyperparams& hyperparams() const { return theta_; }
  double noise_variance() const { return noise_; }
  double low_noise_variance() const { return low_.noise_variance(); }
  double jitter() const { return jitter_; }
  double offset() const { return offset_; }
  double scale() const { return scale_; }
  double nlml_value() const { return nlml_; }
  const Eigen::MatrixXd& cholesky() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }

  /// Posterior of d^order f2 / dx_dim^order at the columns of xs, LF treated as exact.
  PosteriorField predict(const Eigen::MatrixXd& xs, int dim, int order, bool with_variance) const;

 private:
  GpModel low_;
  Eigen::MatrixXd x2_;
  Eigen::VectorXd f2_;
  Eigen::VectorXd y2_;
  MfgpHyperparams theta_;
  double noise_ = 0.0;
  double jitter_ = 0.0;
  double offset_ = 0.0;
  double scale_ = 1.0;
  double nlml_ = 0.0;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
};

/// HF level fit on top of an already trained LF model. grid2, when given,
/// describes x2 as a tensor grid and drives the training subsample.
MfgpModel mfgp_fit(GpModel low, const Eigen::MatrixXd& x2, const Eigen::VectorXd& y2, const MfgpConfig& config,
                   const std::optional<TensorGrid>& grid2 = std::nullopt);
MfgpModel mfgp_fit(const Eigen::MatrixXd& x1, const Eigen::VectorXd& y1, const Eigen::MatrixXd& x2,
                   const Eigen::VectorXd& y2, const MfgpConfig& config);
MfgpModel mfgp_fit(const TensorGrid& grid1, const Eigen::VectorXd& y1, const TensorGrid& grid2,
                   const Eigen::VectorXd& y2, const MfgpConfig& config);

PosteriorEstimate mfgp_predict_state(const MfgpModel& model, const Eigen::Ref<const Eigen::VectorXd>& xs);
PosteriorEstimate mfgp_predict_derivative(const MfgpModel& model, const Eigen::Ref<const Eigen::VectorXd>& xs,
                                          int dim, int order);

/// HF negative log marginal likelihood and gradient over
/// [MfgpHyperparams::to_log(), log noise std] for fixed augmented inputs.
NlmlResult mfgp_nlml_with_grad(const MfgpHyperparams& theta, double noise_variance, const Eigen::MatrixXd& x2,
                               const Eigen::VectorXd& f2, const Eigen::VectorXd& y2);

}  // namespace gpsindy

#endif
