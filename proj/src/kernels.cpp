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

#include "gpsindy/kernels.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gpsindy/errors.hpp"

namespace gpsindy {

namespace {

constexpr double kFactorial[7] = {1, 1, 2, 6, 24, 120, 720};

void check_point_dims(Eigen::Index a, Eigen::Index b, int dims) {
  if (a != dims || b != dims) {
    fail(ErrorKind::InvalidArgument, "point dimension " + std::to_string(a) + "/" + std::to_string(b) +
                                         " does not match hyperparameters (" + std::to_string(dims) + ")");
  }
}

// d^n/du^n exp(-u^2 / (2 l^2)) divided by exp(...).
inline double gauss_derivative_factor(int n, double u, double ls) {
  if (n == 0) return 1.0;
  const double r = u / ls;
  const double scale = std::pow(-1.0 / ls, n);
  return scale * hermite_he(n, r);
}

inline double se_raw(const double* x, const double* xp, int dims, double amp, const double* ls,
                     const DerivativeRequest& req) {
  double expo = 0.0;
  double factor = 1.0;
  for (int s = 0; s < dims; ++s) {
    const double u = x[s] - xp[s];
    const double r = u / ls[s];
    expo += r * r;
    const int a = (req.first_dim == s) ? req.first_order : 0;
    const int b = (req.second_dim == s) ? req.second_order : 0;
    if (a + b > 0) {
      factor *= gauss_derivative_factor(a + b, u, ls[s]);
      if (b % 2 == 1) factor = -factor;
    }
  }
  return amp * amp * factor * std::exp(-0.5 * expo);
}

// n-th derivative of g(w) = A^2 exp(-w^2 / (2 l^2)).
inline double kf_derivative(int n, double w, const SeHyperparams& f) {
  const double ls = f.lengthscales[0];
  const double r = w / ls;
  return f.amplitude * f.amplitude * gauss_derivative_factor(n, w, ls) * std::exp(-0.5 * r * r);
}

using Series = std::array<std::array<double, 4>, 4>;

Series series_mul(const Series& a, const Series& b, int pa, int pb) {
  Series out{};
  for (int i = 0; i <= pa; ++i)
    for (int j = 0; j <= pb; ++j) {
      if (a[i][j] == 0.0) continue;
      for (int k = 0; i + k <= pa; ++k)
        for (int l = 0; j + l <= pb; ++l) out[i + k][j + l] += a[i][j] * b[k][l];
    }
  return out;
}

}  // namespace

double hermite_he(int n, double r) {
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = r;
  for (int k = 1; k < n; ++k) {
    const double next = r * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void SeHyperparams::validate() const {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) fail(ErrorKind::InvalidArgument, "amplitude must be positive");
  if (lengthscales.size() == 0) fail(ErrorKind::InvalidArgument, "at least one lengthscale required");
  for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
    if (!(lengthscales[i] > 0.0)) fail(ErrorKind::InvalidArgument, "lengthscales must be positive");
  }
}

void SeHyperparams::validate(int expected_dims) const {
  validate();
  check_point_dims(expected_dims, expected_dims, dims());
}

Eigen::VectorXd SeHyperparams::to_log() const {
  Eigen::VectorXd p(1 + lengthscales.size());
  p[0] = std::log(amplitude);
  p.tail(lengthscales.size()) = lengthscales.array().log();
  return p;
}

SeHyperparams SeHyperparams::from_log(const Eigen::Ref<const Eigen::VectorXd>& packed) {
  require(packed.size() >= 2, "packed SE hyperparameters need at least two entries");
  return SeHyperparams(std::exp(packed[0]), packed.tail(packed.size() - 1).array().exp().matrix());
}

void MfgpHyperparams::validate() const {
  rho.validate();
  f.validate(1);
  delta.validate(rho.dims());
}

Eigen::VectorXd MfgpHyperparams::to_log() const {
  Eigen::VectorXd p(packed_size(dims()));
  const int d = dims();
  p.segment(0, d + 1) = rho.to_log();
  p.segment(d + 1, 2) = f.to_log();
  p.segment(d + 3, d + 1) = delta.to_log();
  return p;
}

MfgpHyperparams MfgpHyperparams::from_log(const Eigen::Ref<const Eigen::VectorXd>& packed, int dims) {
  require(packed.size() == packed_size(dims), "packed MFGP hyperparameters have the wrong length");
  MfgpHyperparams h;
  h.rho = SeHyperparams::from_log(packed.segment(0, dims + 1));
  h.f = SeHyperparams::from_log(packed.segment(dims + 1, 2));
  h.delta = SeHyperparams::from_log(packed.segment(dims + 3, dims + 1));
  return h;
}

void DerivativeRequest::validate(int dims) const {
  if (first_order < 0 || second_order < 0) fail(ErrorKind::InvalidArgument, "negative derivative order");
  if (first_order > kMaxDerivativeOrder || second_order > kMaxDerivativeOrder) {
    fail(ErrorKind::UnsupportedRequest, "derivative order above 3 is not supported");
  }
  if ((first_order > 0 && (first_dim < 0 || first_dim >= dims)) ||
      (second_order > 0 && (second_dim < 0 || second_dim >= dims))) {
    fail(ErrorKind::InvalidArgument, "derivative dimension out of range");
  }
}

double se_eval(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& xp,
               const SeHyperparams& theta) {
  check_point_dims(x.size(), xp.size(), theta.dims());
  return se_raw(x.data(), xp.data(), theta.dims(), theta.amplitude, theta.lengthscales.data(), {});
}

double se_partial(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& xp,
                  const SeHyperparams& theta, const DerivativeRequest& req) {
  check_point_dims(x.size(), xp.size(), theta.dims());
  req.validate(theta.dims());
  return se_raw(x.data(), xp.data(), theta.dims(), theta.amplitude, theta.lengthscales.data(), req);
}

LfJet::LfJet() : LfJet(0.0) {}

LfJet::LfJet(double v) : value(v) {
  for (auto& row : derivs) row.fill(std::numeric_limits<double>::quiet_NaN());
}

void LfJet::set(int dim, int order, double v) {
  require(dim >= 0 && dim < kMaxJetDims && order >= 0 && order <= kMaxDerivativeOrder,
          "LF jet index out of range");
  if (order == 0) {
    value = v;
  } else {
    derivs[dim][order - 1] = v;
  }
}

double LfJet::get(int dim, int order) const {
  if (order == 0) return value;
  require(dim >= 0 && dim < kMaxJetDims && order <= kMaxDerivativeOrder, "LF jet index out of range");
  const double v = derivs[dim][order - 1];
  if (std::isnan(v)) {
    fail(ErrorKind::InvalidArgument, "LF derivative of order " + std::to_string(order) + " in dimension " +
                                         std::to_string(dim) + " was not supplied");
  }
  return v;
}

double mfgp_eval(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& xp,
                 double f_lo, double f_lo_p, const MfgpHyperparams& theta) {
  check_point_dims(x.size(), xp.size(), theta.dims());
  const int d = theta.dims();
  const double kr = se_raw(x.data(), xp.data(), d, theta.rho.amplitude, theta.rho.lengthscales.data(), {});
  const double kd = se_raw(x.data(), xp.data(), d, theta.delta.amplitude, theta.delta.lengthscales.data(), {});
  return kr * kf_derivative(0, f_lo - f_lo_p, theta.f) + kd;
}

double mfgp_partial_series(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& xp, const LfJet& jet,
                           const LfJet& jet_p, const MfgpHyperparams& theta,
                           const DerivativeRequest& req) {
  check_point_dims(x.size(), xp.size(), theta.dims());
  const int d = theta.dims();
  req.validate(d);
  const int pa = req.first_order;
  const int pb = req.second_order;
  const int i = req.first_dim;
  const int j = req.second_dim;

  Series rho{}, delta{}, h{};
  for (int p = 0; p <= pa; ++p)
    for (int q = 0; q <= pb; ++q) {
      const DerivativeRequest r = DerivativeRequest::mixed(i, p, j, q);
      const double norm = kFactorial[p] * kFactorial[q];
      rho[p][q] = se_raw(x.data(), xp.data(), d, theta.rho.amplitude, theta.rho.lengthscales.data(), r) / norm;
      delta[p][q] =
          se_raw(x.data(), xp.data(), d, theta.delta.amplitude, theta.delta.lengthscales.data(), r) / norm;
    }
  for (int p = 1; p <= pa; ++p) h[p][0] = jet.get(i, p) / kFactorial[p];
  for (int q = 1; q <= pb; ++q) h[0][q] = -jet_p.get(j, q) / kFactorial[q];

  const double w0 = jet.value - jet_p.value;
  Series kf{};
  Series hp{};
  hp[0][0] = 1.0;
  for (int n = 0; n <= pa + pb; ++n) {
    const double c = kf_derivative(n, w0, theta.f) / kFactorial[n];
    for (int p = 0; p <= pa; ++p)
      for (int q = 0; q <= pb; ++q) kf[p][q] += c * hp[p][q];
    hp = series_mul(hp, h, pa, pb);
  }
  const Series prod = series_mul(rho, kf, pa, pb);
  return (prod[pa][pb] + delta[pa][pb]) * kFactorial[pa] * kFactorial[pb];
}

double mfgp_partial(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& xp,
                    const LfJet& jet, const LfJet& jet_p, const MfgpHyperparams& theta,
                    const DerivativeRequest& req) {
  check_point_dims(x.size(), xp.size(), theta.dims());
  const int d = theta.dims();
  req.validate(d);
  const int a = req.first_order;
  const int b = req.second_order;
  if (a > 0 && b == 0) {
    return mfgp_partial(xp, x, jet_p, jet, theta, DerivativeRequest::on_second(req.first_dim, a));
  }
  const double* ls_r = theta.rho.lengthscales.data();
  const double* ls_d = theta.delta.lengthscales.data();
  const double ar = theta.rho.amplitude;
  const double ad = theta.delta.amplitude;
  auto rho = [&](int di, int oi, int dj, int oj) {
    return se_raw(x.data(), xp.data(), d, ar, ls_r, DerivativeRequest::mixed(di, oi, dj, oj));
  };
  auto del = [&](int di, int oi, int dj, int oj) {
    return se_raw(x.data(), xp.data(), d, ad, ls_d, DerivativeRequest::mixed(di, oi, dj, oj));
  };
  const double w = jet.value - jet_p.value;
  // Partials of k_f with respect to its second argument F'.
  const double kf = kf_derivative(0, w, theta.f);
  const double kf_p = -kf_derivative(1, w, theta.f);
  const double kf_pp = kf_derivative(2, w, theta.f);
  const double kf_ppp = -kf_derivative(3, w, theta.f);

  if (a == 0) {
    const int j = req.second_dim;
    switch (b) {
      case 0:
        return rho(0, 0, 0, 0) * kf + del(0, 0, 0, 0);
      case 1: {
        const double f1 = jet_p.get(j, 1);
        return rho(0, 0, j, 1) * kf + rho(0, 0, 0, 0) * kf_p * f1 + del(0, 0, j, 1);
      }
      case 2: {
        const double f1 = jet_p.get(j, 1);
        const double f2 = jet_p.get(j, 2);
        return rho(0, 0, j, 2) * kf + 2.0 * rho(0, 0, j, 1) * kf_p * f1 +
               rho(0, 0, 0, 0) * (kf_pp * f1 * f1 + kf_p * f2) + del(0, 0, j, 2);
      }
      case 3: {
        const double f1 = jet_p.get(j, 1);
        const double f2 = jet_p.get(j, 2);
        const double f3 = jet_p.get(j, 3);
        return rho(0, 0, j, 3) * kf + 3.0 * rho(0, 0, j, 2) * kf_p * f1 +
               3.0 * rho(0, 0, j, 1) * (kf_pp * f1 * f1 + kf_p * f2) +
               rho(0, 0, 0, 0) * (kf_ppp * f1 * f1 * f1 + 3.0 * kf_pp * f1 * f2 + kf_p * f3) +
               del(0, 0, j, 3);
      }
      default:
        break;
    }
  }
  if (a == 1 && b == 1) {
    const int i = req.first_dim;
    const int j = req.second_dim;
    const double fi = jet.get(i, 1);
    const double fj = jet_p.get(j, 1);
    // d kf / dF = -kf_p and d^2 kf / dF dF' = -kf_pp.
    return rho(i, 1, j, 1) * kf - rho(0, 0, j, 1) * kf_p * fi + rho(i, 1, 0, 0) * kf_p * fj -
           rho(0, 0, 0, 0) * kf_pp * fi * fj + del(i, 1, j, 1);
  }
  return mfgp_partial_series(x, xp, jet, jet_p, theta, req);
}

Eigen::MatrixXd cov_block(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb, const SeHyperparams& theta,
                          const DerivativeRequest& req) {
  const int d = theta.dims();
  check_point_dims(xa.rows(), xb.rows(), d);
  req.validate(d);
  Eigen::MatrixXd out(xa.cols(), xb.cols());
  const double* ls = theta.lengthscales.data();
  for (Eigen::Index c = 0; c < xb.cols(); ++c)
    for (Eigen::Index r = 0; r < xa.cols(); ++r)
      out(r, c) = se_raw(xa.col(r).data(), xb.col(c).data(), d, theta.amplitude, ls, req);
  return out;
}

Eigen::MatrixXd mfgp_cov_block(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb,
                               const std::vector<LfJet>& jets_a, const std::vector<LfJet>& jets_b,
                               const MfgpHyperparams& theta, const DerivativeRequest& req) {
  const int d = theta.dims();
  check_point_dims(xa.rows(), xb.rows(), d);
  require(static_cast<Eigen::Index>(jets_a.size()) == xa.cols() &&
              static_cast<Eigen::Index>(jets_b.size()) == xb.cols(),
          "one LF jet per point required");
  req.validate(d);
  Eigen::MatrixXd out(xa.cols(), xb.cols());
  for (Eigen::Index c = 0; c < xb.cols(); ++c)
    for (Eigen::Index r = 0; r < xa.cols(); ++r)
      out(r, c) = mfgp_partial(xa.col(r), xb.col(c), jets_a[r], jets_b[c], theta, req);
  return out;
}

}  // namespace gpsindy
