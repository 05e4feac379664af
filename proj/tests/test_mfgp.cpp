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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gpsindy/errors.hpp"
#include "gpsindy/gp.hpp"
#include "gpsindy/mfgp.hpp"

using namespace gpsindy;

namespace {

constexpr double kPi = std::numbers::pi;

MfgpHyperparams params(double ar, double lr, double af, double lf, double ad, double ld) {
  MfgpHyperparams t;
  t.rho = SeHyperparams(ar, Eigen::VectorXd::Constant(1, lr));
  t.f = SeHyperparams(af, Eigen::VectorXd::Constant(1, lf));
  t.delta = SeHyperparams(ad, Eigen::VectorXd::Constant(1, ld));
  return t;
}

Eigen::MatrixXd line(double a, double b, int n) { return Eigen::RowVectorXd::LinSpaced(n, a, b); }

GpModel sin_low(int n) {
  const Eigen::MatrixXd x = line(0, 2 * kPi, n);
  const Eigen::VectorXd y = x.row(0).transpose().array().sin();
  return GpModel::condition(x, y, SeHyperparams(1.0, Eigen::VectorXd::Constant(1, 1.2)), 1e-6);
}

// Negative log likelihood from the scalar kernel route and a dense LU.
double oracle_nlml(const MfgpHyperparams& th, double noise, const Eigen::MatrixXd& x2, const Eigen::VectorXd& f2,
                   const Eigen::VectorXd& y2) {
  std::vector<LfJet> jets;
  for (Eigen::Index i = 0; i < f2.size(); ++i) jets.emplace_back(f2[i]);
  Eigen::MatrixXd k = mfgp_cov_block(x2, x2, jets, jets, th);
  k.diagonal().array() += noise;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  const double logdet = lu.matrixLU().diagonal().array().abs().log().sum();
  return 0.5 * y2.dot(lu.solve(y2)) + 0.5 * logdet + 0.5 * static_cast<double>(y2.size()) * std::log(2 * kPi);
}

}  // namespace

TEST(MfgpNlml, MatchesDenseOracleAndFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.3, 2.0);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 12;
    Eigen::MatrixXd x2(2, n);
    for (int i = 0; i < n; ++i) x2.col(i) << 3 * u(rng), 3 * u(rng);
    Eigen::VectorXd f2(n), y2(n);
    for (int i = 0; i < n; ++i) {
      f2[i] = std::sin(x2(0, i)) + 0.5 * x2(1, i);
      y2[i] = nd(rng);
    }
    MfgpHyperparams th;
    th.rho = SeHyperparams(u(rng), Eigen::Vector2d(u(rng), u(rng)));
    th.f = SeHyperparams(u(rng), Eigen::VectorXd::Constant(1, u(rng)));
    th.delta = SeHyperparams(u(rng), Eigen::Vector2d(u(rng), u(rng)));
    const double noise = 0.05 * u(rng);
    const NlmlResult r = mfgp_nlml_with_grad(th, noise, x2, f2, y2);
    EXPECT_NEAR(r.value, oracle_nlml(th, noise, x2, f2, y2), 1e-9 * std::abs(r.value) + 1e-9);
    Eigen::VectorXd p(r.gradient.size());
    p << th.to_log(), 0.5 * std::log(noise);
    const int np = static_cast<int>(p.size());
    for (int i = 0; i < np; ++i) {
      const double h = 1e-6;
      Eigen::VectorXd a = p, b = p;
      a[i] += h;
      b[i] -= h;
      auto value = [&](const Eigen::VectorXd& q) {
        return mfgp_nlml_with_grad(MfgpHyperparams::from_log(q.head(np - 1), 2), std::exp(2 * q[np - 1]), x2, f2, y2)
            .value;
      };
      const double fd = (value(a) - value(b)) / (2 * h);
      EXPECT_NEAR(r.gradient[i], fd, 1e-5 * (1 + std::abs(fd))) << "param " << i;
    }
  }
}

TEST(MfgpModel, PosteriorBlocksMatchScalarRoute) {
  const GpModel low = sin_low(15);
  const Eigen::MatrixXd x2 = line(0.1, 6.0, 9);
  const Eigen::VectorXd y2 = (x2.row(0).transpose().array() * 1.1).sin() + 0.2;
  const MfgpHyperparams th = params(0.9, 1.3, 1.1, 0.7, 0.4, 2.0);
  const MfgpModel m = MfgpModel::condition(low, x2, y2, th, 1e-4, 0.1, 1.5);
  const Eigen::MatrixXd xs = line(0.3, 5.7, 7);
  std::vector<LfJet> jets_hf;
  for (Eigen::Index i = 0; i < x2.cols(); ++i) jets_hf.emplace_back(m.augmented()[i]);
  for (int order = 0; order <= 3; ++order) {
    std::vector<LfJet> jets_q;
    std::vector<Eigen::VectorXd> lf(order + 1);
    for (int k = 0; k <= order; ++k) lf[k] = low.predict(xs, 0, k, false).mean;
    for (Eigen::Index q = 0; q < xs.cols(); ++q) {
      LfJet j(lf[0][q]);
      for (int k = 1; k <= order; ++k) j.set(0, k, lf[k][q]);
      jets_q.push_back(j);
    }
    const Eigen::MatrixXd kq = mfgp_cov_block(xs, x2, jets_q, jets_hf, th, DerivativeRequest::on_first(0, order));
    const PosteriorField pf = m.predict(xs, 0, order, true);
    const Eigen::VectorXd want = (kq * m.alpha()).array() * 1.5 + (order == 0 ? 0.1 : 0.0);
    EXPECT_LT((pf.mean - want).cwiseAbs().maxCoeff(), 1e-10 * (1 + want.cwiseAbs().maxCoeff())) << order;
    for (Eigen::Index q = 0; q < xs.cols(); ++q) {
      const Eigen::VectorXd v = m.cholesky().triangularView<Eigen::Lower>().solve(kq.row(q).transpose());
      const double prior = mfgp_partial(xs.col(q), xs.col(q), jets_q[q], jets_q[q], th,
                                        DerivativeRequest::on_both(0, order));
      EXPECT_NEAR(pf.variance[q], std::max((prior - v.squaredNorm()) * 2.25, kVarianceFloor),
                  1e-9 * (1 + prior * 2.25));
    }
  }
  EXPECT_THROW(m.predict(xs, 0, 4, false), Error);
}

TEST(MfgpModel, AugmentationIsLfPosteriorMean) {
  const GpModel low = sin_low(11);
  const Eigen::MatrixXd x2 = line(0.2, 6.0, 8);
  const MfgpModel m = MfgpModel::condition(low, x2, x2.row(0).transpose().array().cos(), params(1, 1, 1, 1, 1, 1), 1e-3);
  const Eigen::VectorXd again = low.predict(x2, 0, 0, false).mean;
  EXPECT_EQ(m.augmented(), again);
  EXPECT_EQ(m.inputs(), x2);
}

TEST(MfgpModel, FlatLfKernelEqualsSingleFidelity) {
  // Infinite k_f lengthscale, unit k_f amplitude and matching rho/delta lengthscales.
  const GpModel low = sin_low(13);
  const Eigen::MatrixXd x2 = line(0.0, 6.0, 10);
  const Eigen::VectorXd y2 = (x2.row(0).transpose().array() * 0.8).sin().matrix();
  const MfgpModel m = MfgpModel::condition(low, x2, y2, params(0.8, 1.1, 1.0, 1e12, 0.5, 1.1), 1e-4);
  const SeHyperparams se(std::sqrt(0.64 + 0.25), Eigen::VectorXd::Constant(1, 1.1));
  const GpModel sf = GpModel::condition(x2, y2, se, 1e-4);
  const Eigen::MatrixXd xs = line(-1.0, 7.0, 23);
  for (int order = 0; order <= 3; ++order) {
    const PosteriorField a = m.predict(xs, 0, order, true), b = sf.predict(xs, 0, order, true);
    EXPECT_LT((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-8) << order;
    EXPECT_LT((a.variance - b.variance).cwiseAbs().maxCoeff(), 1e-8) << order;
  }
}

TEST(MfgpModel, ConstantLfCollapsesToScaledRho) {
  const Eigen::MatrixXd x1 = line(0, 6, 9);
  const GpModel low =
      GpModel::condition(x1, Eigen::VectorXd::Constant(9, 0.7), SeHyperparams(1.0, Eigen::VectorXd::Ones(1)), 1e-4,
                         0.7, 1.0);
  const Eigen::MatrixXd x2 = line(0.0, 6.0, 10);
  const Eigen::VectorXd y2 = x2.row(0).transpose().array().sin();
  const MfgpModel m = MfgpModel::condition(low, x2, y2, params(0.9, 1.4, 1.3, 0.6, 0.3, 1.4), 1e-4);
  const SeHyperparams se(std::sqrt(0.81 * 1.69 + 0.09), Eigen::VectorXd::Constant(1, 1.4));
  const GpModel sf = GpModel::condition(x2, y2, se, 1e-4);
  const Eigen::MatrixXd xs = line(0.5, 5.5, 11);
  for (int order = 0; order <= 3; ++order) {
    const PosteriorField a = m.predict(xs, 0, order, true), b = sf.predict(xs, 0, order, true);
    EXPECT_LT((a.mean - b.mean).cwiseAbs().maxCoeff(), 1e-8) << order;
    EXPECT_LT((a.variance - b.variance).cwiseAbs().maxCoeff(), 1e-8) << order;
  }
}

TEST(MfgpModel, PriorReversionAndInterpolation) {
  const GpModel low = sin_low(13);
  const Eigen::MatrixXd x2 = line(0.0, 6.0, 12);
  const Eigen::VectorXd y2 = x2.row(0).transpose().array().sin() + 2.0;
  const MfgpHyperparams th = params(0.9, 1.0, 1.2, 0.8, 0.4, 1.5);
  const MfgpModel m = MfgpModel::condition(low, x2, y2, th, 1e-8, 2.0, 1.0);
  const PosteriorField at = m.predict(x2, 0, 0, true);
  EXPECT_LT((at.mean - y2).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_TRUE((at.variance.array() >= 0.0).all());
  Eigen::MatrixXd far(1, 1);
  far << 200.0;
  const PosteriorEstimate e = mfgp_predict_state(m, far.col(0));
  EXPECT_NEAR(e.mean, 2.0, 1e-10);
  EXPECT_NEAR(e.variance, 0.81 * 1.44 + 0.16, 1e-10);
}

TEST(MfgpFit, SinCompositionDerivatives) {
  MfgpConfig cfg;
  cfg.low.seed = 1;
  cfg.high.seed = 2;
  cfg.low.restarts = cfg.high.restarts = 2;
  const Eigen::MatrixXd x1 = line(0, 2 * kPi, 12), x2 = line(0, 2 * kPi, 30);
  const Eigen::VectorXd y1 = x1.row(0).transpose().array().sin(), y2 = x2.row(0).transpose().array().sin();
  const MfgpModel m = mfgp_fit(x1, y1, x2, y2, cfg);
  const Eigen::MatrixXd xs = line(1.0, 2 * kPi - 1.0, 41);
  const PosteriorField d1 = m.predict(xs, 0, 1, true);
  EXPECT_LT((d1.mean.array() - xs.row(0).transpose().array().cos()).abs().maxCoeff(), 5e-2);
  const double h = 1e-3;
  for (int order = 2; order <= 3; ++order) {
    const PosteriorField d = m.predict(xs, 0, order, false);
    const PosteriorField lo = m.predict(xs.array() - h, 0, order - 1, false);
    const PosteriorField hi = m.predict(xs.array() + h, 0, order - 1, false);
    const Eigen::VectorXd fd = (hi.mean - lo.mean) / (2 * h);
    EXPECT_LT((d.mean - fd).norm() / fd.norm(), 1e-2) << order;
  }
  for (int i = 0; i < 4; ++i) EXPECT_TRUE(std::isfinite(m.hyperparams().to_log()[i]));
}

TEST(MfgpFit, IdenticalLevelsMatchSingleFidelity) {
  GpConfig g;
  g.seed = 5;
  g.restarts = 2;
  MfgpConfig cfg{g, g};
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0.0, 0.02);
  const Eigen::MatrixXd x = line(0, 2 * kPi, 40);
  Eigen::VectorXd y = x.row(0).transpose().array().sin();
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += nd(rng);
  const MfgpModel m = mfgp_fit(x, y, x, y, cfg);
  const GpModel sf = fit(x, y, g);
  const Eigen::MatrixXd xs = line(0.1, 2 * kPi - 0.1, 101);
  const double diff = (m.predict(xs, 0, 0, false).mean - sf.predict(xs, 0, 0, false).mean).cwiseAbs().maxCoeff();
  EXPECT_LT(diff, 0.05);
}

TEST(MfgpFit, MinimalHighFidelitySet) {
  MfgpConfig cfg;
  cfg.low.restarts = cfg.high.restarts = 1;
  const Eigen::MatrixXd x1 = line(0, 1, 6);
  const Eigen::VectorXd y1 = x1.row(0).transpose().array().square();
  Eigen::MatrixXd x2(1, 2);
  x2 << 0.2, 0.8;
  const MfgpModel m = mfgp_fit(x1, y1, x2, Eigen::Vector2d(0.05, 0.7), cfg);
  EXPECT_TRUE(m.hyperparams().to_log().allFinite());
  EXPECT_TRUE(std::isfinite(m.noise_variance()));
  EXPECT_THROW(mfgp_fit(x1, y1, x2.leftCols(1), Eigen::VectorXd::Ones(1), cfg), Error);
}
