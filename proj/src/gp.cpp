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

#include "gpsindy/gp.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gp_detail.hpp"
#include "gpsindy/errors.hpp"

namespace gpsindy {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double prior_derivative_variance(const SeHyperparams& theta, int dim, int order) {
  double v = theta.amplitude * theta.amplitude;
  if (order > 0) v *= std::pow(1.0 / theta.lengthscales[dim], 2 * order) * std::abs(hermite_he(2 * order, 0.0));
  return v;
}

Eigen::MatrixXd squared_differences(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a.replicate(1, b.size()) - b.transpose().replicate(a.size(), 1)).array().square().matrix();
}

// Dense objective over p = [log amp, log ls..., log noise std].
class DenseObjective {
 public:
  DenseObjective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) : y_(y) {
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
      const Eigen::VectorXd row = x.row(s).transpose();
      sq_.push_back(squared_differences(row, row));
    }
  }

  NlmlResult evaluate(const Eigen::VectorXd& p) const {
    const Eigen::Index n = y_.size();
    const int d = static_cast<int>(sq_.size());
    const double amp2 = std::exp(2.0 * p[0]);
    const double noise = std::exp(2.0 * p[d + 1]);
    Eigen::ArrayXXd expo = Eigen::ArrayXXd::Zero(n, n);
    for (int s = 0; s < d; ++s) expo += sq_[s].array() * std::exp(-2.0 * p[1 + s]);
    const Eigen::MatrixXd k = (amp2 * (-0.5 * expo).exp()).matrix();
    Eigen::MatrixXd kn = k;
    kn.diagonal().array() += noise;
    Eigen::LLT<Eigen::MatrixXd> llt;
    const double jitter = cholesky_with_jitter(kn, llt);
    const Eigen::VectorXd alpha = llt.solve(y_);
    const Eigen::MatrixXd& l = llt.matrixLLT();
    NlmlResult out;
    out.value = 0.5 * y_.dot(alpha) + l.diagonal().array().log().sum() + 0.5 * static_cast<double>(n) * kLog2Pi;
    Eigen::MatrixXd w = llt.solve(Eigen::MatrixXd::Identity(n, n));
    w.noalias() -= alpha * alpha.transpose();
    out.gradient.resize(d + 2);
    out.gradient[0] = (w.array() * k.array()).sum();
    for (int s = 0; s < d; ++s) {
      out.gradient[1 + s] =
          0.5 * std::exp(-2.0 * p[1 + s]) * (w.array() * k.array() * sq_[s].array()).sum();
    }
    out.gradient[d + 1] = w.trace() * noise;
    (void)jitter;
    return out;
  }

 private:
  Eigen::VectorXd y_;
  std::vector<Eigen::MatrixXd> sq_;
};

// Symmetric positive definite Toeplitz systems from a uniform 1-D grid,
// solved exactly by Levinson recursion in O(n^2).
class ToeplitzObjective {
 public:
  ToeplitzObjective(double spacing, const Eigen::VectorXd& y) : h_(spacing), y_(y) {}

  static bool applicable(const Eigen::MatrixXd& x, double& spacing) {
    if (x.rows() != 1 || x.cols() < 3) return false;
    spacing = x(0, 1) - x(0, 0);
    if (!(spacing > 0.0)) return false;
    for (Eigen::Index i = 1; i < x.cols(); ++i) {
      if (std::abs((x(0, i) - x(0, i - 1)) - spacing) > 1e-9 * spacing) return false;
    }
    return true;
  }

  NlmlResult evaluate(const Eigen::VectorXd& p) const {
    const Eigen::Index n = y_.size();
    const double amp2 = std::exp(2.0 * p[0]);
    const double ls = std::exp(p[1]);
    const double noise = std::exp(2.0 * p[2]);
    Eigen::VectorXd kcol(n), dls(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double r = static_cast<double>(k) * h_ / ls;
      kcol[k] = amp2 * std::exp(-0.5 * r * r);
      dls[k] = kcol[k] * r * r;
    }
    double jitter = 0.0;
    const double base = amp2 + noise;
    for (;;) {
      Eigen::VectorXd col = kcol;
      col[0] += noise + jitter;
      Eigen::VectorXd alpha, first;
      double logdet = 0.0;
      if (levinson(col, alpha, first, logdet)) {
        NlmlResult out;
        out.value = 0.5 * y_.dot(alpha) + 0.5 * logdet + 0.5 * static_cast<double>(n) * kLog2Pi;
        // Diagonal sums of the inverse via the Gohberg-Semencul representation.
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 1; i < n; ++i) b[i] = first[n - i];
        Eigen::VectorXd s(n), c(n);
        for (Eigen::Index k = 0; k < n; ++k) {
          double acc = 0.0;
          for (Eigen::Index q = 0; q + k < n; ++q) {
            acc += static_cast<double>(n - k - q) * (first[q] * first[q + k] - b[q] * b[q + k]);
          }
          acc /= first[0];
          double quad = alpha.head(n - k).dot(alpha.tail(n - k));
          if (k > 0) {
            acc *= 2.0;
            quad *= 2.0;
          }
          s[k] = acc;
          c[k] = quad;
        }
        out.gradient.resize(3);
        out.gradient[0] = (s - c).dot(kcol);
        out.gradient[1] = 0.5 * (s - c).dot(dls);
        out.gradient[2] = (s[0] - c[0]) * noise;
        return out;
      }
      jitter = (jitter == 0.0) ? 1e-10 * base : jitter * 10.0;
      if (jitter > 1e-4 * base * (1.0 + 1e-9)) {
        fail(ErrorKind::IllConditionedKernel, "Toeplitz recursion failed after jitter ladder");
      }
    }
  }

 private:
  // Solves T alpha = y, returns the first column of T^{-1} and log det T.
  bool levinson(const Eigen::VectorXd& r, Eigen::VectorXd& x, Eigen::VectorXd& first, double& logdet) const {
    const Eigen::Index n = r.size();
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);  // predictor coefficients a[1..m]
    Eigen::VectorXd tmp(n);
    double e = r[0];
    if (!(e > 0.0)) return false;
    logdet = std::log(e);
    x = Eigen::VectorXd::Zero(n);
    x[0] = y_[0] / r[0];
    for (Eigen::Index m = 1; m < n; ++m) {
      double num = r[m];
      for (Eigen::Index i = 1; i < m; ++i) num -= a[i] * r[m - i];
      const double kappa = num / e;
      for (Eigen::Index i = 1; i < m; ++i) tmp[i] = a[i] - kappa * a[m - i];
      for (Eigen::Index i = 1; i < m; ++i) a[i] = tmp[i];
      a[m] = kappa;
      e *= (1.0 - kappa * kappa);
      if (!(e > 0.0) || !std::isfinite(e)) return false;
      logdet += std::log(e);
      double eps = y_[m];
      for (Eigen::Index i = 0; i < m; ++i) eps -= r[m - i] * x[i];
      const double g = eps / e;
      // Last column of the inverse of the leading (m+1) block is [-a_m..-a_1, 1] / e.
      for (Eigen::Index i = 0; i < m; ++i) x[i] -= g * a[m - i];
      x[m] = g;
    }
    first.resize(n);
    first[0] = 1.0 / e;
    for (Eigen::Index i = 1; i < n; ++i) first[i] = -a[i] / e;
    return true;
  }

  double h_;
  Eigen::VectorXd y_;
};

struct KronFactor {
  Eigen::MatrixXd q_t, q_x;
  Eigen::VectorXd l_t, l_x;
  Eigen::MatrixXd inv_spec;
  Eigen::MatrixXd alpha_tilde;
  double logdet = 0.0;
  double quad = 0.0;
};

void eig_unit(const Eigen::MatrixXd& sq, double ls, Eigen::MatrixXd& q, Eigen::VectorXd& l) {
  const Eigen::MatrixXd k = (-0.5 / (ls * ls) * sq.array()).exp().matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  q = es.eigenvectors();
  l = es.eigenvalues().cwiseMax(0.0);
}

KronFactor kron_factor(const Eigen::MatrixXd& sq_t, const Eigen::MatrixXd& sq_x, const Eigen::MatrixXd& y,
                       double amp2, double ls_t, double ls_x, double noise) {
  KronFactor f;
  eig_unit(sq_t, ls_t, f.q_t, f.l_t);
  eig_unit(sq_x, ls_x, f.q_x, f.l_x);
  const Eigen::MatrixXd spec = (amp2 * f.l_t * f.l_x.transpose()).array() + noise;
  f.inv_spec = spec.cwiseInverse();
  const Eigen::MatrixXd yt = f.q_t.transpose() * y * f.q_x;
  f.alpha_tilde = yt.cwiseProduct(f.inv_spec);
  f.quad = yt.cwiseProduct(f.alpha_tilde).sum();
  f.logdet = spec.array().log().sum();
  return f;
}

Eigen::MatrixXd grid_matrix(const Eigen::VectorXd& y, Eigen::Index nt, Eigen::Index nx) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(y.data(), nt,
                                                                                                   nx);
}

Eigen::VectorXd flatten_rows(const Eigen::MatrixXd& m) {
  Eigen::VectorXd out(m.size());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(out.data(), m.rows(),
                                                                                      m.cols()) = m;
  return out;
}

class KronObjective {
 public:
  KronObjective(const TensorGrid& grid, const Eigen::VectorXd& y) {
    const Eigen::VectorXd t = grid.axes[0].values();
    const Eigen::VectorXd x = grid.axes[1].values();
    sq_t_ = squared_differences(t, t);
    sq_x_ = squared_differences(x, x);
    y_ = grid_matrix(y, t.size(), x.size());
  }

  NlmlResult evaluate(const Eigen::VectorXd& p) const {
    const double amp2 = std::exp(2.0 * p[0]);
    const double ls_t = std::exp(p[1]);
    const double ls_x = std::exp(p[2]);
    const double noise = std::exp(2.0 * p[3]);
    const KronFactor f = kron_factor(sq_t_, sq_x_, y_, amp2, ls_t, ls_x, noise);
    const double n = static_cast<double>(y_.size());
    NlmlResult out;
    out.value = 0.5 * f.quad + 0.5 * f.logdet + 0.5 * n * kLog2Pi;
    const Eigen::MatrixXd ll = f.l_t * f.l_x.transpose();
    const Eigen::MatrixXd a2 = f.alpha_tilde.cwiseAbs2();
    out.gradient.resize(4);
    out.gradient[0] = amp2 * ((ll.cwiseProduct(f.inv_spec)).sum() - ll.cwiseProduct(a2).sum());
    auto dk = [](const Eigen::MatrixXd& sq, double ls) {
      const double il2 = 1.0 / (ls * ls);
      return ((-0.5 * il2 * sq.array()).exp() * sq.array() * il2).matrix();
    };
    const Eigen::MatrixXd g_t = f.q_t.transpose() * dk(sq_t_, ls_t) * f.q_t;
    const Eigen::MatrixXd g_x = f.q_x.transpose() * dk(sq_x_, ls_x) * f.q_x;
    const double tr_t = (g_t.diagonal().asDiagonal() * f.inv_spec * f.l_x.asDiagonal()).sum();
    const double quad_t = ((g_t * f.alpha_tilde).cwiseProduct(f.alpha_tilde) * f.l_x).sum();
    const double tr_x = (f.l_t.asDiagonal() * f.inv_spec * g_x.diagonal().asDiagonal()).sum();
    const double quad_x = (f.l_t.transpose() * (f.alpha_tilde * g_x).cwiseProduct(f.alpha_tilde)).sum();
    out.gradient[1] = 0.5 * amp2 * (tr_t - quad_t);
    out.gradient[2] = 0.5 * amp2 * (tr_x - quad_x);
    out.gradient[3] = noise * (f.inv_spec.sum() - a2.sum());
    return out;
  }

 private:
  Eigen::MatrixXd sq_t_, sq_x_, y_;
};

Eigen::VectorXd pack(const SeHyperparams& theta, double noise_variance) {
  Eigen::VectorXd p(theta.dims() + 2);
  p.head(theta.dims() + 1) = theta.to_log();
  p[theta.dims() + 1] = 0.5 * std::log(noise_variance);
  return p;
}

void check_data(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int dims) {
  require(x.cols() == y.size(), "inputs and targets disagree in size");
  require(x.rows() == dims, "input dimension does not match hyperparameters");
  require(y.size() >= 1, "at least one observation required");
  require(x.allFinite() && y.allFinite(), "non-finite training data");
}

template <class Obj>
RpropResult multistart(const Obj& obj, int nparams, const GpConfig& cfg, double noise_lower) {
  return detail::multistart([&](const Eigen::VectorXd& p) { return obj.evaluate(p); }, nparams, cfg, noise_lower,
                            Eigen::VectorXd::Zero(nparams));
}

}  // namespace

namespace detail {

Standardizer make_standardizer(const Eigen::VectorXd& y, bool enabled) {
  Standardizer s;
  if (!enabled || y.size() < 2) return s;
  s.offset = y.mean();
  const double sd = std::sqrt((y.array() - s.offset).square().mean());
  s.scale = (sd > 0.0 && std::isfinite(sd)) ? sd : 1.0;
  return s;
}

RpropResult multistart(const std::function<NlmlResult(const Eigen::VectorXd&)>& obj, int nparams,
                       const GpConfig& cfg, double noise_lower, const Eigen::VectorXd& init_shift) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> init(std::log(cfg.init_low), std::log(cfg.init_high));
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(nparams, -std::numeric_limits<double>::infinity());
  lower[nparams - 1] = noise_lower;
  Objective fn = [&](const Eigen::VectorXd& p, double& f, Eigen::VectorXd& g) {
    try {
      NlmlResult r = obj(p);
      f = r.value;
      g = std::move(r.gradient);
      return true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::IllConditionedKernel) throw;
      return false;
    }
  };
  RpropResult best;
  for (int r = 0; r < cfg.restarts; ++r) {
    Eigen::VectorXd p0(nparams);
    for (int i = 0; i < nparams; ++i) p0[i] = init(rng) + init_shift[i];
    p0[nparams - 1] = std::max(p0[nparams - 1], noise_lower);
    RpropResult res = rprop_minimize(fn, p0, cfg.rprop, lower, {}, cfg.deadline);
    if (res.ok && res.best_value < best.best_value) best = std::move(res);
  }
  if (!best.ok) fail(ErrorKind::FitFailed, "every restart hit an ill-conditioned kernel");
  return best;
}

std::vector<Eigen::Index> grid_subsample(const TensorGrid& grid, Eigen::Index cap) {
  const Eigen::Index n = grid.size();
  std::vector<std::vector<Eigen::Index>> per_axis;
  if (cap <= 0 || cap >= n) {
    for (const auto& a : grid.axes) {
      std::vector<Eigen::Index> all(a.count);
      for (Eigen::Index i = 0; i < a.count; ++i) all[i] = i;
      per_axis.push_back(all);
    }
  } else {
    const double f = std::pow(static_cast<double>(cap) / static_cast<double>(n), 1.0 / grid.dims());
    for (int j = 0; j < grid.dims(); ++j) {
      const Eigen::Index c = grid.axes[j].count;
      const Eigen::Index m = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(c * f)), 2, c);
      per_axis.push_back(even_stride_indices(c, m));
    }
  }
  std::vector<Eigen::Index> flat;
  std::vector<size_t> idx(grid.dims(), 0);
  for (;;) {
    Eigen::Index k = 0;
    for (int j = 0; j < grid.dims(); ++j) k = k * grid.axes[j].count + per_axis[j][idx[j]];
    flat.push_back(k);
    int j = grid.dims() - 1;
    for (; j >= 0; --j) {
      if (++idx[j] < per_axis[j].size()) break;
      idx[j] = 0;
    }
    if (j < 0) break;
  }
  return flat;
}

}  // namespace detail

void GpConfig::validate() const {
  require(restarts >= 1, "restarts must be at least 1");
  require(rprop.iterations >= 1, "iterations must be at least 1");
  require(init_low > 0.0 && init_high >= init_low, "initialisation range must be positive and ordered");
  require(noise_floor > 0.0, "noise floor must be positive");
  require(train_cap >= 0, "train cap must be non-negative");
}

double cholesky_with_jitter(const Eigen::MatrixXd& a, Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(a);
  if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 0.0) return 0.0;
  const double mean_diag = a.diagonal().mean();
  for (double rel = 1e-10; rel <= 1e-4 * (1.0 + 1e-9); rel *= 10.0) {
    Eigen::MatrixXd b = a;
    b.diagonal().array() += rel * mean_diag;
    llt.compute(b);
    if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 0.0) return rel * mean_diag;
  }
  fail(ErrorKind::IllConditionedKernel, "Cholesky failed after jitter up to 1e-4 of the mean diagonal");
}

NlmlResult nlml_with_grad(const SeHyperparams& theta, double noise_variance, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& y) {
  theta.validate();
  check_data(x, y, theta.dims());
  require(noise_variance > 0.0, "noise variance must be positive");
  return DenseObjective(x, y).evaluate(pack(theta, noise_variance));
}

double nlml(const SeHyperparams& theta, double noise_variance, const Eigen::MatrixXd& x,
            const Eigen::VectorXd& y) {
  theta.validate();
  check_data(x, y, theta.dims());
  require(noise_variance > 0.0, "noise variance must be positive");
  Eigen::MatrixXd k = cov_block(x, x, theta);
  k.diagonal().array() += noise_variance;
  Eigen::LLT<Eigen::MatrixXd> llt;
  cholesky_with_jitter(k, llt);
  const Eigen::VectorXd alpha = llt.solve(y);
  return 0.5 * y.dot(alpha) + llt.matrixLLT().diagonal().array().log().sum() +
         0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

Eigen::VectorXd nlml_grad(const SeHyperparams& theta, double noise_variance, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& y) {
  return nlml_with_grad(theta, noise_variance, x, y).gradient;
}

NlmlResult nlml_with_grad(const SeHyperparams& theta, double noise_variance, const TensorGrid& grid,
                          const Eigen::VectorXd& y) {
  theta.validate(2);
  require(grid.dims() == 2, "Kronecker objective needs a 2-axis grid");
  require(grid.size() == y.size(), "grid and targets disagree in size");
  require(noise_variance > 0.0, "noise variance must be positive");
  return KronObjective(grid, y).evaluate(pack(theta, noise_variance));
}

namespace detail {

NlmlResult toeplitz_nlml_with_grad(const SeHyperparams& theta, double noise_variance, double spacing,
                                   const Eigen::VectorXd& y) {
  return ToeplitzObjective(spacing, y).evaluate(pack(theta, noise_variance));
}

}  // namespace detail

std::vector<Eigen::Index> even_stride_indices(Eigen::Index n, Eigen::Index cap) {
  std::vector<Eigen::Index> idx;
  if (cap <= 0 || cap >= n) {
    for (Eigen::Index i = 0; i < n; ++i) idx.push_back(i);
    return idx;
  }
  if (cap == 1) return {0};
  for (Eigen::Index k = 0; k < cap; ++k) {
    idx.push_back(static_cast<Eigen::Index>(
        std::llround(static_cast<double>(k) * static_cast<double>(n - 1) / static_cast<double>(cap - 1))));
  }
  return idx;
}

GpModel GpModel::condition(Eigen::MatrixXd x, Eigen::VectorXd y, SeHyperparams theta, double noise_variance,
                           double offset, double scale) {
  theta.validate();
  check_data(x, y, theta.dims());
  require(noise_variance > 0.0, "noise variance must be positive");
  require(scale > 0.0, "target scale must be positive");
  GpModel m;
  m.backend_ = Backend::Dense;
  m.x_ = std::move(x);
  m.y_ = (y.array() - offset) / scale;
  m.theta_ = std::move(theta);
  m.noise_ = noise_variance;
  m.offset_ = offset;
  m.scale_ = scale;
  Eigen::MatrixXd k = cov_block(m.x_, m.x_, m.theta_);
  k.diagonal().array() += noise_variance;
  Eigen::LLT<Eigen::MatrixXd> llt;
  m.jitter_ = cholesky_with_jitter(k, llt);
  m.chol_ = llt.matrixL();
  m.alpha_ = llt.solve(m.y_);
  m.nlml_ = 0.5 * m.y_.dot(m.alpha_) + m.chol_.diagonal().array().log().sum() +
            0.5 * static_cast<double>(m.y_.size()) * kLog2Pi;
  return m;
}

GpModel GpModel::condition(const TensorGrid& grid, Eigen::VectorXd y, SeHyperparams theta,
                           double noise_variance, double offset, double scale) {
  theta.validate(2);
  require(grid.dims() == 2, "Kronecker backend needs a 2-axis grid");
  require(grid.size() == y.size(), "grid and targets disagree in size");
  require(noise_variance > 0.0 && scale > 0.0, "noise variance and scale must be positive");
  GpModel m;
  m.backend_ = Backend::Kronecker;
  m.grid_ = grid;
  m.x_ = grid.points();
  m.y_ = (y.array() - offset) / scale;
  m.theta_ = std::move(theta);
  m.noise_ = noise_variance;
  m.offset_ = offset;
  m.scale_ = scale;
  const Eigen::VectorXd t = grid.axes[0].values();
  const Eigen::VectorXd xs = grid.axes[1].values();
  const double amp2 = m.theta_.amplitude * m.theta_.amplitude;
  const KronFactor f = kron_factor(squared_differences(t, t), squared_differences(xs, xs),
                                   grid_matrix(m.y_, t.size(), xs.size()), amp2, m.theta_.lengthscales[0],
                                   m.theta_.lengthscales[1], noise_variance);
  m.q_t_ = f.q_t;
  m.q_x_ = f.q_x;
  m.l_t_ = f.l_t;
  m.l_x_ = f.l_x;
  m.inv_spec_ = f.inv_spec;
  m.alpha_grid_ = f.q_t * f.alpha_tilde * f.q_x.transpose();
  m.alpha_ = flatten_rows(m.alpha_grid_);
  m.nlml_ = 0.5 * f.quad + 0.5 * f.logdet + 0.5 * static_cast<double>(m.y_.size()) * kLog2Pi;
  return m;
}

PosteriorField GpModel::predict(const Eigen::MatrixXd& xs, int dim, int order, bool with_variance) const {
  require(xs.rows() == dims(), "query dimension does not match the model");
  const DerivativeRequest req = DerivativeRequest::on_second(dim, order);
  req.validate(dims());
  const double prior = prior_derivative_variance(theta_, dim, order);
  const Eigen::Index m = xs.cols();
  PosteriorField out;
  out.mean.resize(m);
  if (with_variance) out.variance.resize(m);
  const double shift = (order == 0) ? offset_ : 0.0;
  const double s2 = scale_ * scale_;
  constexpr Eigen::Index kChunk = 2048;

  if (backend_ == Backend::Kronecker) {
    const SeHyperparams ut(1.0, theta_.lengthscales.segment(0, 1));
    const SeHyperparams ux(1.0, theta_.lengthscales.segment(1, 1));
    const Eigen::MatrixXd t = grid_->axes[0].values().transpose();
    const Eigen::MatrixXd x = grid_->axes[1].values().transpose();
    const double amp2 = theta_.amplitude * theta_.amplitude;
    for (Eigen::Index c0 = 0; c0 < m; c0 += kChunk) {
      const Eigen::Index c = std::min(kChunk, m - c0);
      const Eigen::MatrixXd at = cov_block(t, xs.block(0, c0, 1, c), ut,
                                           DerivativeRequest::on_second(0, dim == 0 ? order : 0));
      const Eigen::MatrixXd ax = cov_block(x, xs.block(1, c0, 1, c), ux,
                                           DerivativeRequest::on_second(0, dim == 1 ? order : 0));
      const Eigen::MatrixXd tmp = alpha_grid_ * ax;
      out.mean.segment(c0, c) =
          (amp2 * tmp.cwiseProduct(at).colwise().sum().transpose()).array() * scale_ + shift;
      if (with_variance) {
        const Eigen::MatrixXd bt = (q_t_.transpose() * at).cwiseAbs2();
        const Eigen::MatrixXd bx = (q_x_.transpose() * ax).cwiseAbs2();
        const Eigen::MatrixXd w = inv_spec_.transpose() * bt;
        const Eigen::VectorXd red = w.cwiseProduct(bx).colwise().sum().transpose();
        out.variance.segment(c0, c) =
            ((prior - amp2 * amp2 * red.array()) * s2).max(kVarianceFloor).matrix();
      }
    }
    return out;
  }

  for (Eigen::Index c0 = 0; c0 < m; c0 += kChunk) {
    const Eigen::Index c = std::min(kChunk, m - c0);
    Eigen::MatrixXd ks = cov_block(x_, xs.middleCols(c0, c), theta_, req);
    out.mean.segment(c0, c) = (ks.transpose() * alpha_).array() * scale_ + shift;
    if (with_variance) {
      chol_.triangularView<Eigen::Lower>().solveInPlace(ks);
      out.variance.segment(c0, c) =
          ((prior - ks.colwise().squaredNorm().transpose().array()) * s2).max(kVarianceFloor).matrix();
    }
  }
  return out;
}

PosteriorField GpModel::predict(const TensorGrid& grid, int dim, int order, bool with_variance) const {
  if (backend_ != Backend::Kronecker || grid.dims() != 2) {
    return predict(grid.points(), dim, order, with_variance);
  }
  const DerivativeRequest req = DerivativeRequest::on_second(dim, order);
  req.validate(dims());
  const SeHyperparams ut(1.0, theta_.lengthscales.segment(0, 1));
  const SeHyperparams ux(1.0, theta_.lengthscales.segment(1, 1));
  const Eigen::MatrixXd t = grid_->axes[0].values().transpose();
  const Eigen::MatrixXd x = grid_->axes[1].values().transpose();
  const Eigen::MatrixXd qt = grid.axes[0].values().transpose();
  const Eigen::MatrixXd qx = grid.axes[1].values().transpose();
  const Eigen::MatrixXd at =
      cov_block(qt, t, ut, DerivativeRequest::on_first(0, dim == 0 ? order : 0));  // n't x nt
  const Eigen::MatrixXd ax =
      cov_block(qx, x, ux, DerivativeRequest::on_first(0, dim == 1 ? order : 0));  // n'x x nx
  // d/dx* k(x*, x) on the first argument equals d/dx* k(x, x*) on the second by symmetry.
  const double amp2 = theta_.amplitude * theta_.amplitude;
  PosteriorField out;
  const Eigen::MatrixXd mean = amp2 * at * alpha_grid_ * ax.transpose();
  out.mean = flatten_rows(mean).array() * scale_ + ((order == 0) ? offset_ : 0.0);
  if (with_variance) {
    const double prior = prior_derivative_variance(theta_, dim, order);
    const Eigen::MatrixXd bt = (at * q_t_).cwiseAbs2();
    const Eigen::MatrixXd bx = (ax * q_x_).cwiseAbs2();
    const Eigen::MatrixXd red = bt * inv_spec_ * bx.transpose();
    out.variance = flatten_rows(((prior - amp2 * amp2 * red.array()) * scale_ * scale_).max(kVarianceFloor).matrix());
  }
  return out;
}

GpModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpConfig& cfg) {
  cfg.validate();
  require(x.cols() == y.size(), "inputs and targets disagree in size");
  require(y.size() >= 2, "at least two observations required to fit");
  require(x.allFinite() && y.allFinite(), "non-finite training data");
  const int d = static_cast<int>(x.rows());
  const detail::Standardizer st = detail::make_standardizer(y, cfg.standardize);
  const Eigen::VectorXd ys = (y.array() - st.offset) / st.scale;
  const std::vector<Eigen::Index> idx = even_stride_indices(y.size(), cfg.train_cap);
  Eigen::MatrixXd xt(d, static_cast<Eigen::Index>(idx.size()));
  Eigen::VectorXd yt(static_cast<Eigen::Index>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) {
    xt.col(k) = x.col(idx[k]);
    yt[k] = ys[idx[k]];
  }
  const double noise_lower = 0.5 * std::log(cfg.noise_floor);
  double spacing = 0.0;
  RpropResult best;
  if (ToeplitzObjective::applicable(xt, spacing)) {
    best = multistart(ToeplitzObjective(spacing, yt), d + 2, cfg, noise_lower);
  } else {
    best = multistart(DenseObjective(xt, yt), d + 2, cfg, noise_lower);
  }
  const SeHyperparams theta = SeHyperparams::from_log(best.best.head(d + 1));
  const double noise = std::exp(2.0 * best.best[d + 1]);
  const bool full = cfg.condition_on_full || idx.size() == static_cast<size_t>(y.size());
  Eigen::VectorXd yraw(xt.cols());
  for (size_t k = 0; k < idx.size(); ++k) yraw[k] = y[idx[k]];
  return full ? GpModel::condition(x, y, theta, noise, st.offset, st.scale)
              : GpModel::condition(xt, yraw, theta, noise, st.offset, st.scale);
}

GpModel fit(const TensorGrid& grid, const Eigen::VectorXd& y, const GpConfig& cfg) {
  cfg.validate();
  require(grid.size() == y.size(), "grid and targets disagree in size");
  require(y.size() >= 2, "at least two observations required to fit");
  if (!cfg.use_kronecker || grid.dims() != 2) return fit(grid.points(), y, cfg);
  require(y.allFinite(), "non-finite training data");
  const detail::Standardizer st = detail::make_standardizer(y, cfg.standardize);
  const Eigen::VectorXd ys = (y.array() - st.offset) / st.scale;
  const RpropResult best = multistart(KronObjective(grid, ys), 4, cfg, 0.5 * std::log(cfg.noise_floor));
  const SeHyperparams theta = SeHyperparams::from_log(best.best.head(3));
  return GpModel::condition(grid, y, theta, std::exp(2.0 * best.best[3]), st.offset, st.scale);
}

PosteriorEstimate posterior_state(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& xs) {
  return posterior_derivative(model, xs, 0, 0);
}

PosteriorEstimate posterior_derivative(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& xs,
                                       int dim, int order) {
  const PosteriorField f = model.predict(Eigen::MatrixXd(xs), dim, order, true);
  return {f.mean[0], f.variance[0]};
}

}  // namespace gpsindy
