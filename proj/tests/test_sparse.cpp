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
#include <random>

#include "gpsindy/errors.hpp"
#include "gpsindy/sparse.hpp"

using namespace gpsindy;

namespace {

Eigen::MatrixXd gaussian(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Eigen::MatrixXd::NullaryExpr(r, c, [&] { return n(rng); });
}

struct Enumerated {
  double loss;
  unsigned mask;
};

// Exhaustive search over supports; refits via SVD of the weighted system.
Enumerated brute_force(const Eigen::MatrixXd& phi, const Eigen::VectorXd& z, const Eigen::VectorXd& w, double eta) {
  const int nf = static_cast<int>(phi.cols());
  const Eigen::VectorXd sw = w.cwiseSqrt();
  Enumerated best{std::numeric_limits<double>::infinity(), 0};
  for (unsigned mask = 0; mask < (1u << nf); ++mask) {
    std::vector<int> idx;
    for (int j = 0; j < nf; ++j)
      if (mask & (1u << j)) idx.push_back(j);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nf);
    if (!idx.empty()) {
      Eigen::MatrixXd a(phi.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t j = 0; j < idx.size(); ++j) a.col(static_cast<Eigen::Index>(j)) = sw.cwiseProduct(phi.col(idx[j]));
      const Eigen::VectorXd sub = a.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(sw.cwiseProduct(z));
      for (std::size_t j = 0; j < idx.size(); ++j) c[idx[j]] = sub[static_cast<Eigen::Index>(j)];
    }
    const Eigen::VectorXd r = phi * c - z;
    const double loss = r.cwiseAbs2().dot(w) + eta * static_cast<double>(idx.size());
    if (loss < best.loss) best = {loss, mask};
  }
  return best;
}

}  // namespace

TEST(WlsSolve, IdentityWeightsMatchPseudoInverse) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd phi = gaussian(20, 5, rng);
  const Eigen::VectorXd z = gaussian(20, 1, rng);
  const Eigen::VectorXd c = wls_solve(phi, z, Eigen::VectorXd::Ones(20));
  const Eigen::VectorXd pinv = phi.completeOrthogonalDecomposition().pseudoInverse() * z;
  EXPECT_LT((c - pinv).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(WlsSolve, PositiveScalingInvariance) {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd phi = gaussian(40, 4, rng);
  const Eigen::VectorXd z = gaussian(40, 1, rng);
  const Eigen::VectorXd w = gaussian(40, 1, rng).array().exp();
  const Eigen::VectorXd c = wls_solve(phi, z, w);
  for (double s : {1e-6, 0.3, 7.0, 1e5}) EXPECT_LT((wls_solve(phi, z, s * w) - c).norm(), 1e-10 * (1 + c.norm()));
  // Normal equations hold.
  const Eigen::VectorXd ne = phi.transpose() * w.asDiagonal() * (phi * c - z);
  EXPECT_LT(ne.norm(), 1e-10);
}

TEST(WlsSolve, MonteCarloUnbiased) {
  std::mt19937_64 rng(3);
  const int n = 30, p = 3, draws = 10000;
  const Eigen::MatrixXd phi = gaussian(n, p, rng);
  const Eigen::VectorXd truth = Eigen::Vector3d(1.0, -2.0, 0.5);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  Eigen::VectorXd sd(n);
  for (int i = 0; i < n; ++i) sd[i] = u(rng);
  const Eigen::VectorXd w = sd.array().square().inverse();
  std::normal_distribution<double> nd;
  Eigen::MatrixXd est(draws, p);
  for (int k = 0; k < draws; ++k) {
    Eigen::VectorXd z = phi * truth;
    for (int i = 0; i < n; ++i) z[i] += sd[i] * nd(rng);
    est.row(k) = wls_solve(phi, z, w).transpose();
  }
  const Eigen::RowVectorXd mean = est.colwise().mean();
  const Eigen::RowVectorXd centered_sd =
      ((est.rowwise() - mean).array().square().colwise().sum() / (draws - 1)).sqrt();
  for (int j = 0; j < p; ++j) EXPECT_LT(std::abs(mean[j] - truth[j]), 3.0 * centered_sd[j] / std::sqrt(draws));
  // The empirical covariance approaches (Phi^T W Phi)^-1.
  const Eigen::MatrixXd blue = (phi.transpose() * w.asDiagonal() * phi).inverse();
  for (int j = 0; j < p; ++j) EXPECT_NEAR(centered_sd[j] * centered_sd[j] / blue(j, j), 1.0, 0.05);
}

TEST(WlsSolve, RankDeficientRejected) {
  std::mt19937_64 rng(4);
  Eigen::MatrixXd phi = gaussian(10, 3, rng);
  phi.col(2) = 2.0 * phi.col(0);
  try {
    wls_solve(phi, Eigen::VectorXd::Ones(10), Eigen::VectorXd::Ones(10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularSystem);
  }
  EXPECT_THROW(wls_solve(phi.leftCols(2), Eigen::VectorXd::Ones(10), -Eigen::VectorXd::Ones(10)), Error);
}

TEST(Stwls, ZeroTarget) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd phi = gaussian(25, 5, rng);
  StwlsConfig cfg{{0.0, 0.1}, 1.0, 20, 10};
  const SparseSolution s = stwls(phi, Eigen::VectorXd::Zero(25), Eigen::VectorXd::Ones(25), cfg);
  EXPECT_EQ(s.coefficients, Eigen::VectorXd::Zero(5));
  EXPECT_EQ(s.loss, 0.0);
  EXPECT_TRUE(s.support.empty());
}

TEST(Stwls, OrthonormalExactRepresentation) {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd q = gaussian(50, 6, rng).householderQr().householderQ() * Eigen::MatrixXd::Identity(50, 6);
  const Eigen::VectorXd z = 2.0 * q.col(0);
  StwlsConfig cfg{{0.0, 0.5}, 0.1, 20, 10};
  const SparseSolution s = stwls(q, z, Eigen::VectorXd::Ones(50), cfg);
  Eigen::VectorXd want = Eigen::VectorXd::Zero(6);
  want[0] = 2.0;
  EXPECT_LT((s.coefficients - want).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(s.support, std::vector<int>{0});
  for (int i = 1; i < 6; ++i) EXPECT_EQ(s.coefficients[i], 0.0);
}

TEST(Stwls, EmptySupportCompetes) {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd phi = gaussian(20, 3, rng);
  const Eigen::VectorXd z = 1e-3 * gaussian(20, 1, rng);
  const SparseSolution s = stwls(phi, z, Eigen::VectorXd::Ones(20), StwlsConfig{{0.0}, 10.0, 5, 5});
  EXPECT_TRUE(s.support.empty());
  EXPECT_NEAR(s.loss, z.squaredNorm(), 1e-15);
}

TEST(Stwls, ConfigValidation) {
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd one = Eigen::VectorXd::Ones(3);
  for (const StwlsConfig& bad : {StwlsConfig{{}, 1, 1, 1}, StwlsConfig{{-1}, 1, 1, 1}, StwlsConfig{{0}, 0, 1, 1},
                                 StwlsConfig{{0}, 1, 0, 1}, StwlsConfig{{0}, 1, 1, 0}}) {
    try {
      stwls(phi, one, one, bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    }
  }
}

TEST(Stwls, BruteForceAgreementAndInvariants) {
  int near_optimal = 0, identical = 0;
  for (int seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const int n = 30, nf = 6;
    const Eigen::MatrixXd phi = gaussian(n, nf, rng);
    std::uniform_int_distribution<int> pick(0, nf - 1);
    const int a = pick(rng);
    int b = pick(rng);
    while (b == a) b = pick(rng);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nf);
    std::uniform_real_distribution<double> mag(1.0, 3.0);
    c[a] = mag(rng);
    c[b] = -mag(rng);
    const Eigen::VectorXd clean = phi * c;
    // 20 dB: noise power one hundredth of the signal power.
    const double sd = std::sqrt(clean.squaredNorm() / n / 100.0);
    Eigen::VectorXd z = clean + sd * gaussian(n, 1, rng);
    std::uniform_real_distribution<double> wd(0.5, 2.0);
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = wd(rng) / (sd * sd);
    const double eta = 5.0;
    const SparseSolution s = stwls(phi, z, w, StwlsConfig{{0.0, 0.1, 1.0}, eta, 20, 10});
    const Enumerated opt = brute_force(phi, z, w, eta);
    unsigned mask = 0;
    for (int j : s.support) mask |= 1u << j;
    identical += mask == opt.mask;
    near_optimal += s.loss <= 1.0001 * opt.loss || mask == opt.mask;

    for (std::size_t k = 1; k < s.accepted_losses.size(); ++k)
      EXPECT_LE(s.accepted_losses[k], s.accepted_losses[k - 1]);
    EXPECT_NEAR(s.loss, penalized_loss(phi, z, w, s.coefficients, eta), 1e-10 * s.loss);
    for (int j = 0; j < nf; ++j)
      if (!(mask & (1u << j))) EXPECT_EQ(s.coefficients[j], 0.0);
    if (!s.support.empty()) {
      Eigen::MatrixXd sub(n, static_cast<Eigen::Index>(s.support.size()));
      for (std::size_t j = 0; j < s.support.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = phi.col(s.support[j]);
      const Eigen::VectorXd ne = sub.transpose() * w.asDiagonal() * (phi * s.coefficients - z);
      EXPECT_LT(ne.norm() / (sub.transpose() * w.asDiagonal() * z).norm(), 1e-8);
    }
  }
  EXPECT_GE(near_optimal, 45);
  RecordProperty("support_match_rate", identical);
}
