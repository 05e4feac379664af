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

#include "gpsindy/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gpsindy/errors.hpp"

namespace gpsindy {

namespace {

void check_inputs(const Eigen::MatrixXd& phi, const Eigen::VectorXd& z, const Eigen::VectorXd& w) {
  require(phi.rows() == z.size() && w.size() == z.size(), "phi, Z and W row counts differ");
  require(phi.cols() >= 1, "phi has no columns");
  require(phi.allFinite() && z.allFinite(), "phi or Z contains non-finite values");
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    require(std::isfinite(w[i]) && w[i] > 0.0, "weights must be finite and positive");
  }
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& a, const std::vector<int>& idx) {
  Eigen::MatrixXd out(a.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = a.col(idx[j]);
  return out;
}

std::vector<int> support_of(const Eigen::VectorXd& c) {
  std::vector<int> s;
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (c[i] != 0.0) s.push_back(static_cast<int>(i));
  return s;
}

}  // namespace

void StwlsConfig::validate() const {
  if (lambdas.empty()) fail(ErrorKind::ConfigError, "stwls: lambda set is empty");
  for (double l : lambdas)
    if (!(l >= 0.0) || !std::isfinite(l)) fail(ErrorKind::ConfigError, "stwls: lambda must be >= 0");
  if (!(eta > 0.0) || !std::isfinite(eta)) fail(ErrorKind::ConfigError, "stwls: eta must be > 0");
  if (outer < 1 || inner < 1) fail(ErrorKind::ConfigError, "stwls: K and J must be >= 1");
}

Eigen::VectorXd wls_solve(const Eigen::MatrixXd& phi, const Eigen::VectorXd& z, const Eigen::VectorXd& w) {
  check_inputs(phi, z, w);
  require(phi.rows() >= phi.cols(), "wls_solve: fewer rows than columns");
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd a = sw.asDiagonal() * phi;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-12);
  if (qr.rank() < phi.cols()) {
    fail(ErrorKind::SingularSystem, "wls_solve: weighted design has rank " + std::to_string(qr.rank()) + " < " +
                                        std::to_string(phi.cols()));
  }
  return qr.solve(sw.cwiseProduct(z));
}

double penalized_loss(const Eigen::MatrixXd& phi, const Eigen::VectorXd& z, const Eigen::VectorXd& w,
                      const Eigen::VectorXd& c, double eta) {
  const Eigen::VectorXd r = phi * c - z;
  const auto nnz = (c.array() != 0.0).count();
  return r.cwiseAbs2().dot(w) + eta * static_cast<double>(nnz);
}

SparseSolution stwls(const Eigen::MatrixXd& phi, const Eigen::VectorXd& z, const Eigen::VectorXd& w,
                     const StwlsConfig& cfg) {
  check_inputs(phi, z, w);
  cfg.validate();
  const int nf = static_cast<int>(phi.cols());

  // Ridge systems reuse the weighted Gram matrix; refits go through QR.
  const Eigen::MatrixXd wphi = w.asDiagonal() * phi;
  const Eigen::MatrixXd gram = phi.transpose() * wphi;
  const Eigen::VectorXd rhs = wphi.transpose() * z;

  std::map<std::vector<int>, Eigen::VectorXd> refits;
  auto refit = [&](const std::vector<int>& idx) -> const Eigen::VectorXd& {
    auto it = refits.find(idx);
    if (it != refits.end()) return it->second;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nf);
    if (!idx.empty()) {
      const Eigen::VectorXd sub = wls_solve(take_columns(phi, idx), z, w);
      for (std::size_t j = 0; j < idx.size(); ++j) c[idx[j]] = sub[static_cast<Eigen::Index>(j)];
    }
    return refits.emplace(idx, std::move(c)).first->second;
  };
  auto ridge = [&](const std::vector<int>& idx, double lambda) {
    const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
    if (lambda == 0.0) {
      Eigen::VectorXd sub(m);
      const Eigen::VectorXd& full = refit(idx);
      for (Eigen::Index j = 0; j < m; ++j) sub[j] = full[idx[j]];
      return sub;
    }
    Eigen::MatrixXd g(m, m);
    Eigen::VectorXd b(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      b[a] = rhs[idx[a]];
      for (Eigen::Index c = 0; c < m; ++c) g(a, c) = gram(idx[a], idx[c]);
    }
    g.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) fail(ErrorKind::SingularSystem, "stwls: ridge system not positive definite");
    return Eigen::VectorXd(llt.solve(b));
  };

  SparseSolution out;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues().size() > 0) svd.setThreshold(1e-10);
  Eigen::VectorXd best = svd.solve(z);
  double best_loss = penalized_loss(phi, z, w, best, cfg.eta);
  out.accepted_losses.push_back(best_loss);
  double tau = 0.0;

  for (double lambda : cfg.lambdas) {
    LambdaDiagnostics diag;
    diag.lambda = lambda;
    for (int k = 0; k < cfg.outer; ++k) {
      diag.thresholds.push_back(tau);
      std::vector<int> idx(nf);
      for (int j = 0; j < nf; ++j) idx[j] = j;
      for (int j = 0; j < cfg.inner && !idx.empty(); ++j) {
        const Eigen::VectorXd c = ridge(idx, lambda);
        std::vector<int> keep;
        for (std::size_t a = 0; a < idx.size(); ++a)
          if (std::abs(c[static_cast<Eigen::Index>(a)]) >= tau) keep.push_back(idx[a]);
        idx = std::move(keep);
      }
      const Eigen::VectorXd& c = refit(idx);
      const double loss = penalized_loss(phi, z, w, c, cfg.eta);
      if (loss <= best_loss) {
        best_loss = loss;
        best = c;
        out.accepted_losses.push_back(loss);
        ++diag.accepted;
      } else {
        ++diag.rejected;
      }
      double smallest = 0.0;
      for (Eigen::Index i = 0; i < best.size(); ++i)
        if (best[i] != 0.0 && (smallest == 0.0 || std::abs(best[i]) < smallest)) smallest = std::abs(best[i]);
      if (smallest > 0.0) tau = 1.05 * smallest;
    }
    out.per_lambda.push_back(std::move(diag));
  }
  out.coefficients = best;
  out.support = support_of(best);
  out.loss = penalized_loss(phi, z, w, best, cfg.eta);
  return out;
}

}  // namespace gpsindy
