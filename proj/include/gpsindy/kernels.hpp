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

#ifndef GPSINDY_KERNELS_HPP
#define GPSINDY_KERNELS_HPP

#include <array>
#include <vector>

#include <Eigen/Dense>

namespace gpsindy {

inline constexpr int kMaxDerivativeOrder = 3;
inline constexpr int kMaxJetDims = 3;

/// Amplitude (signal std) and one lengthscale per input dimension.
struct SeHyperparams {
  double amplitude = 1.0;
  Eigen::VectorXd lengthscales;

  SeHyperparams() = default;
  SeHyperparams(double amp, Eigen::VectorXd ls) : amplitude(amp), lengthscales(std::move(ls)) {}

  int dims() const { return static_cast<int>(lengthscales.size()); }
  void validate() const;
  void validate(int expected_dims) const;

  // Packed as [log amplitude, log lengthscales...].
  Eigen::VectorXd to_log() const;
  static SeHyperparams from_log(const Eigen::Ref<const Eigen::VectorXd>& packed);
};

struct MfgpHyperparams {
  SeHyperparams rho;    // over x
  SeHyperparams f;      // over the scalar LF mean
  SeHyperparams delta;  // over x

  int dims() const { return rho.dims(); }
  void validate() const;

  // Packed as [rho, f, delta], each in SeHyperparams::to_log layout.
  Eigen::VectorXd to_log() const;
  static MfgpHyperparams from_log(const Eigen::Ref<const Eigen::VectorXd>& packed, int dims);
  static int packed_size(int dims) { return 2 * (dims + 1) + 2; }
};

/// Orders of differentiation on the first (x) and second (x') argument.
struct DerivativeRequest {
  int first_dim = 0;
  int first_order = 0;
  int second_dim = 0;
  int second_order = 0;

  static DerivativeRequest none() { return {}; }
  static DerivativeRequest on_first(int dim, int order) { return {dim, order, 0, 0}; }
  static DerivativeRequest on_second(int dim, int order) { return {0, 0, dim, order}; }
  static DerivativeRequest on_both(int dim, int order) { return {dim, order, dim, order}; }
  static DerivativeRequest mixed(int dim_a, int order_a, int dim_b, int order_b) {
    return {dim_a, order_a, dim_b, order_b};
  }

  int total_order() const { return first_order + second_order; }
  void validate(int dims) const;
};

double se_eval(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& xp,
               const SeHyperparams& theta);

double se_partial(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& xp,
                  const SeHyperparams& theta, const DerivativeRequest& req);

/// LF posterior mean at a point and its partials d^m f / dx_j^m, m = 1..3.
/// Entries that were never set hold NaN and are rejected when read.
struct LfJet {
  double value = 0.0;
  std::array<std::array<double, kMaxDerivativeOrder>, kMaxJetDims> derivs;

  LfJet();
  explicit LfJet(double v);

  void set(int dim, int order, double v);
  double get(int dim, int order) const;
};

double mfgp_eval(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& xp,
                 double f_lo, double f_lo_p, const MfgpHyperparams& theta);

double mfgp_partial(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& xp,
                    const LfJet& jet, const LfJet& jet_p, const MfgpHyperparams& theta,
                    const DerivativeRequest& req);

/// Same quantity through a truncated bivariate Taylor expansion; covers every
/// order pair up to (3, 3) and serves as an independent route for checks.
double mfgp_partial_series(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& xp, const LfJet& jet,
                           const LfJet& jet_p, const MfgpHyperparams& theta,
                           const DerivativeRequest& req);

Eigen::MatrixXd cov_block(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb, const SeHyperparams& theta,
                          const DerivativeRequest& req = {});

Eigen::MatrixXd mfgp_cov_block(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb,
                               const std::vector<LfJet>& jets_a, const std::vector<LfJet>& jets_b,
                               const MfgpHyperparams& theta, const DerivativeRequest& req = {});

double hermite_he(int n, double r);

}  // namespace gpsindy

#endif  // GPSINDY_KERNELS_HPP
