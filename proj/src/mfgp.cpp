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

#include "gpsindy/mfgp.hpp"

#include <algorithm>
#include <cmath>

#include "gp_detail.hpp"
#include "gpsindy/errors.hpp"

namespace gpsindy {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr Eigen::Index kChunk = 2048;

Eigen::ArrayXd hermite(int n, const Eigen::ArrayXd& u) {
  switch (n) {
    case 0:
      return Eigen::ArrayXd::Ones(u.size());
    case 1:
      return u;
    case 2:
      return u.square() - 1.0;
    default:
      return u.cube() - 3.0 * u;
  }
}

// Column of d^m/dx_dim^m k((x, F(x)), (x2_i, f2_i)) over all HF points i.
// jet holds F and its first m derivatives along dim at x.
Eigen::ArrayXd first_arg_column(const Eigen::Ref<const Eigen::VectorXd>& x, const double* jet,
                                const Eigen::MatrixXd& x2, const Eigen::VectorXd& f2,
                                const MfgpHyperparams& th, int dim, int m) {
  const Eigen::Index n = x2.cols();
  const int d = th.dims();
  Eigen::ArrayXd sr = Eigen::ArrayXd::Zero(n), sd = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd delta_dim;
  for (int s = 0; s < d; ++s) {
    const Eigen::ArrayXd diff = x[s] - x2.row(s).transpose().array();
    const Eigen::ArrayXd sq = diff.square();
    sr += sq / (th.rho.lengthscales[s] * th.rho.lengthscales[s]);
    sd += sq / (th.delta.lengthscales[s] * th.delta.lengthscales[s]);
    if (s == dim) delta_dim = diff;
  }
  const double ar2 = th.rho.amplitude * th.rho.amplitude;
  const double ad2 = th.delta.amplitude * th.delta.amplitude;
  const double af2 = th.f.amplitude * th.f.amplitude;
  const double lf = th.f.lengthscales[0];
  const Eigen::ArrayXd er = ar2 * (-0.5 * sr).exp();
  const Eigen::ArrayXd ed = ad2 * (-0.5 * sd).exp();
  const Eigen::ArrayXd v = (jet[0] - f2.array()) / lf;
  const Eigen::ArrayXd ef = af2 * (-0.5 * v.square()).exp();
  if (m == 0) return er * ef + ed;

  const double lr = th.rho.lengthscales[dim], ld = th.delta.lengthscales[dim];
  const Eigen::ArrayXd ur = delta_dim / lr, ud = delta_dim / ld;
  auto rho_k = [&](int k) { return Eigen::ArrayXd(er * std::pow(-1.0 / lr, k) * hermite(k, ur)); };
  auto kf_n = [&](int k) { return Eigen::ArrayXd(ef * std::pow(-1.0 / lf, k) * hermite(k, v)); };
  const double f1 = jet[1];
  const double fd2 = m >= 2 ? jet[2] : 0.0;
  const double fd3 = m >= 3 ? jet[3] : 0.0;
  // Derivatives of k_f(F(x) - f2) along x by the chain rule.
  std::array<Eigen::ArrayXd, 4> dkf;
  dkf[0] = ef;
  const Eigen::ArrayXd k1 = kf_n(1);
  dkf[1] = k1 * f1;
  if (m >= 2) {
    const Eigen::ArrayXd k2 = kf_n(2);
    dkf[2] = k2 * (f1 * f1) + k1 * fd2;
    if (m >= 3) dkf[3] = kf_n(3) * (f1 * f1 * f1) + k2 * (3.0 * f1 * fd2) + k1 * fd3;
  }
  static constexpr int kBinom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
  Eigen::ArrayXd out = ed * std::pow(-1.0 / ld, m) * hermite(m, ud);
  for (int k = 0; k <= m; ++k) out += kBinom[m][k] * rho_k(k) * dkf[m - k];
  return out;
}

Eigen::MatrixXd train_cov(const Eigen::MatrixXd& x2, const Eigen::VectorXd& f2, const MfgpHyperparams& th) {
  const Eigen::Index n = x2.cols();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const double jet = f2[c];
    k.col(c) = first_arg_column(x2.col(c), &jet, x2, f2, th, 0, 0).matrix();
  }
  return k;
}

Eigen::MatrixXd squared_differences(const Eigen::VectorXd& a) {
  return (a.replicate(1, a.size()) - a.transpose().replicate(a.size(), 1)).array().square().matrix();
}

}  // namespace

NlmlResult mfgp_nlml_with_grad(const MfgpHyperparams& theta, double noise_variance, const Eigen::MatrixXd& x2,
                               const Eigen::VectorXd& f2, const Eigen::VectorXd& y2) {
  theta.validate();
  require(x2.rows() == theta.dims(), "HF inputs do not match the hyperparameter dimension");
  require(x2.cols() == y2.size() && f2.size() == y2.size(), "HF inputs, LF means and targets disagree in size");
  require(noise_variance > 0.0, "noise variance must be positive");
  const Eigen::Index n = y2.size();
  const int d = theta.dims();
  std::vector<Eigen::ArrayXXd> sq;
  for (int s = 0; s < d; ++s) sq.push_back(squared_differences(x2.row(s).transpose()).array());
  const Eigen::ArrayXXd sqf = squared_differences(f2).array();

  Eigen::ArrayXXd sr = Eigen::ArrayXXd::Zero(n, n), sd = Eigen::ArrayXXd::Zero(n, n);
  for (int s = 0; s < d; ++s) {
    sr += sq[s] / (theta.rho.lengthscales[s] * theta.rho.lengthscales[s]);
    sd += sq[s] / (theta.delta.lengthscales[s] * theta.delta.lengthscales[s]);
  }
  const double lf = theta.f.lengthscales[0];
  const double amp_p = std::pow(theta.rho.amplitude * theta.f.amplitude, 2);
  const Eigen::ArrayXXd p = amp_p * (-0.5 * (sr + sqf / (lf * lf))).exp();
  const Eigen::ArrayXXd q = theta.delta.amplitude * theta.delta.amplitude * (-0.5 * sd).exp();
  Eigen::MatrixXd kn = (p + q).matrix();
  kn.diagonal().array() += noise_variance;
  Eigen::LLT<Eigen::MatrixXd> llt;
  cholesky_with_jitter(kn, llt);
  const Eigen::VectorXd alpha = llt.solve(y2);
  NlmlResult out;
  out.value = 0.5 * y2.dot(alpha) + llt.matrixLLT().diagonal().array().log().sum() +
              0.5 * static_cast<double>(n) * kLog2Pi;
  Eigen::MatrixXd w = llt.solve(Eigen::MatrixXd::Identity(n, n));
  w.noalias() -= alpha * alpha.transpose();
  const Eigen::ArrayXXd wa = w.array();
  const Eigen::ArrayXXd wp = wa * p, wq = wa * q;
  out.gradient.resize(MfgpHyperparams::packed_size(d) + 1);
  Eigen::Index at = 0;
  out.gradient[at++] = wp.sum();
  for (int s = 0; s < d; ++s)
    out.gradient[at++] = 0.5 * (wp * sq[s]).sum() / (theta.rho.lengthscales[s] * theta.rho.lengthscales[s]);
  out.gradient[at++] = wp.sum();
  out.gradient[at++] = 0.5 * (wp * sqf).sum() / (lf * lf);
  out.gradient[at++] = wq.sum();
  for (int s = 0; s < d; ++s)
    out.gradient[at++] = 0.5 * (wq * sq[s]).sum() / (theta.delta.lengthscales[s] * theta.delta.lengthscales[s]);
  out.gradient[at] = w.trace() * noise_variance;
  return out;
}

MfgpModel MfgpModel::condition(GpModel low, Eigen::MatrixXd x2, const Eigen::VectorXd& y2, MfgpHyperparams theta,
                               double noise_variance, double offset, double scale) {
  theta.validate();
  require(x2.rows() == theta.dims() && low.dims() == theta.dims(), "LF and HF dimensions disagree");
  require(x2.cols() == y2.size() && y2.size() >= 1, "HF inputs and targets disagree in size");
  require(x2.allFinite() && y2.allFinite(), "non-finite HF training data");
  require(noise_variance > 0.0 && scale > 0.0, "noise variance and scale must be positive");
  MfgpModel m;
  m.low_ = std::move(low);
  m.x2_ = std::move(x2);
  m.f2_ = m.low_.predict(m.x2_, 0, 0, false).mean;
  m.y2_ = (y2.array() - offset) / scale;
  m.theta_ = std::move(theta);
  m.noise_ = noise_variance;
  m.offset_ = offset;
  m.scale_ = scale;
  Eigen::MatrixXd k = train_cov(m.x2_, m.f2_, m.theta_);
  k.diagonal().array() += noise_variance;
  Eigen::LLT<Eigen::MatrixXd> llt;
  m.jitter_ = cholesky_with_jitter(k, llt);
  m.chol_ = llt.matrixL();
  m.alpha_ = llt.solve(m.y2_);
  m.nlml_ = 0.5 * m.y2_.dot(m.alpha_) + m.chol_.diagonal().array().log().sum() +
            0.5 * static_cast<double>(m.y2_.size()) * kLog2Pi;
  return m;
}

PosteriorField MfgpModel::predict(const Eigen::MatrixXd& xs, int dim, int order, bool with_variance) const {
  require(xs.rows() == dims(), "query dimension does not match the model");
  DerivativeRequest::on_first(dim, order).validate(dims());
  const Eigen::Index nq = xs.cols();
  // LF posterior mean and its partials along dim, used as exact values.
  Eigen::MatrixXd jets(order + 1, nq);
  for (int k = 0; k <= order; ++k) jets.row(k) = low_.predict(xs, dim, k, false).mean.transpose();

  PosteriorField out;
  out.mean.resize(nq);
  if (with_variance) out.variance.resize(nq);
  const double shift = order == 0 ? offset_ : 0.0;
  const double s2 = scale_ * scale_;
  const Eigen::Index n = x2_.cols();
  for (Eigen::Index c0 = 0; c0 < nq; c0 += kChunk) {
    const Eigen::Index c = std::min(kChunk, nq - c0);
    Eigen::MatrixXd ks(n, c);
    for (Eigen::Index q = 0; q < c; ++q) {
      ks.col(q) = first_arg_column(xs.col(c0 + q), jets.col(c0 + q).data(), x2_, f2_, theta_, dim, order).matrix();
    }
    out.mean.segment(c0, c) = (ks.transpose() * alpha_).array() * scale_ + shift;
    if (!with_variance) continue;
    chol_.triangularView<Eigen::Lower>().solveInPlace(ks);
    const Eigen::VectorXd reduction = ks.colwise().squaredNorm().transpose();
    for (Eigen::Index q = 0; q < c; ++q) {
      LfJet jet(jets(0, c0 + q));
      for (int k = 1; k <= order; ++k) jet.set(dim, k, jets(k, c0 + q));
      const auto x = xs.col(c0 + q);
      const double prior = mfgp_partial(x, x, jet, jet, theta_, DerivativeRequest::on_both(dim, order));
      out.variance[c0 + q] = std::max((prior - reduction[q]) * s2, kVarianceFloor);
    }
  }
  return out;
}

MfgpModel mfgp_fit(GpModel low, const Eigen::MatrixXd& x2, const Eigen::VectorXd& y2, const MfgpConfig& cfg,
                   const std::optional<TensorGrid>& grid2) {
  cfg.high.validate();
  const int d = low.dims();
  require(x2.rows() == d, "LF and HF inputs differ in dimension");
  require(x2.cols() == y2.size(), "HF inputs and targets disagree in size");
  require(y2.size() >= 2, "at least two HF observations required");
  require(x2.allFinite() && y2.allFinite(), "non-finite HF training data");
  if (grid2) require(grid2->size() == y2.size(), "HF grid and targets disagree in size");

  const detail::Standardizer st = detail::make_standardizer(y2, cfg.high.standardize);
  const Eigen::VectorXd ys = (y2.array() - st.offset) / st.scale;
  const Eigen::VectorXd f2 = low.predict(x2, 0, 0, false).mean;

  std::vector<Eigen::Index> idx;
  if (grid2 && cfg.high.train_cap > 0) {
    idx = detail::grid_subsample(*grid2, cfg.high.train_cap);
  } else {
    idx = even_stride_indices(y2.size(), cfg.high.train_cap);
  }
  const Eigen::Index nt = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd xt(d, nt);
  Eigen::VectorXd ft(nt), yt(nt), yraw(nt);
  for (Eigen::Index k = 0; k < nt; ++k) {
    xt.col(k) = x2.col(idx[k]);
    ft[k] = f2[idx[k]];
    yt[k] = ys[idx[k]];
    yraw[k] = y2[idx[k]];
  }

  const int np = MfgpHyperparams::packed_size(d) + 1;
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(np);
  const double range = ft.maxCoeff() - ft.minCoeff();
  if (range > 0.0) shift[d + 2] = std::log(range);
  const double noise_lower = 0.5 * std::log(cfg.high.noise_floor);
  auto objective = [&](const Eigen::VectorXd& p) {
    const MfgpHyperparams th = MfgpHyperparams::from_log(p.head(np - 1), d);
    return mfgp_nlml_with_grad(th, std::exp(2.0 * p[np - 1]), xt, ft, yt);
  };
  RpropResult best;
  try {
    best = detail::multistart(objective, np, cfg.high, noise_lower, shift);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::FitFailed) fail(ErrorKind::FitFailed, std::string("high-fidelity level: ") + e.what());
    throw;
  }
  const MfgpHyperparams theta = MfgpHyperparams::from_log(best.best.head(np - 1), d);
  const double noise = std::exp(2.0 * best.best[np - 1]);
  const bool full = cfg.high.condition_on_full || nt == y2.size();
  if (full) return MfgpModel::condition(std::move(low), x2, y2, theta, noise, st.offset, st.scale);
  return MfgpModel::condition(std::move(low), xt, yraw, theta, noise, st.offset, st.scale);
}

namespace {

template <class F>
GpModel fit_low(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::FitFailed) fail(ErrorKind::FitFailed, std::string("low-fidelity level: ") + e.what());
    throw;
  }
}

}  // namespace

MfgpModel mfgp_fit(const Eigen::MatrixXd& x1, const Eigen::VectorXd& y1, const Eigen::MatrixXd& x2,
                   const Eigen::VectorXd& y2, const MfgpConfig& cfg) {
  require(y1.size() >= 2, "at least two LF observations required");
  GpModel low = fit_low([&] { return fit(x1, y1, cfg.low); });
  return mfgp_fit(std::move(low), x2, y2, cfg);
}

MfgpModel mfgp_fit(const TensorGrid& grid1, const Eigen::VectorXd& y1, const TensorGrid& grid2,
                   const Eigen::VectorXd& y2, const MfgpConfig& cfg) {
  require(y1.size() >= 2, "at least two LF observations required");
  GpModel low = fit_low([&] { return fit(grid1, y1, cfg.low); });
  return mfgp_fit(std::move(low), grid2.points(), y2, cfg, grid2);
}

PosteriorEstimate mfgp_predict_state(const MfgpModel& model, const Eigen::Ref<const Eigen::VectorXd>& xs) {
  return mfgp_predict_derivative(model, xs, 0, 0);
}

PosteriorEstimate mfgp_predict_derivative(const MfgpModel& model, const Eigen::Ref<const Eigen::VectorXd>& xs,
                                          int dim, int order) {
  const PosteriorField f = model.predict(Eigen::MatrixXd(xs), dim, order, true);
  return {f.mean[0], f.variance[0]};
}

}  // namespace gpsindy
