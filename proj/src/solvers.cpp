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

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <fftw3.h>

#include "gpsindy/errors.hpp"
#include "gpsindy/simdata.hpp"

namespace gpsindy {

namespace {

using cplx = std::complex<double>;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n), real_(n), spec_(n / 2 + 1) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c_1d(n, real_.data(), reinterpret_cast<fftw_complex*>(spec_.data()), FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(spec_.data()), real_.data(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  void forward(const std::vector<double>& in, std::vector<cplx>& out) {
    real_ = in;
    fftw_execute(fwd_);
    out = spec_;
  }
  void inverse(const std::vector<cplx>& in, std::vector<double>& out) {
    spec_ = in;
    fftw_execute(inv_);
    out.resize(n_);
    for (int i = 0; i < n_; ++i) out[i] = real_[i] / n_;
  }

 private:
  int n_;
  std::vector<double> real_;
  std::vector<cplx> spec_;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

struct PeriodicLayout {
  Axis out_t, out_x;
  int modes = 0;        // unique solver points on the period
  int out_stride = 1;   // solver points per output spacing
  int substeps = 1;     // internal steps per output step
  double h = 0.0;
  double period = 0.0;
};

PeriodicLayout layout(const GridSpec& grid, double solver_dx, double max_dt) {
  require(grid.has_space(), "PDE grids need a spatial axis");
  const TensorGrid tg = grid.tensor();
  PeriodicLayout l;
  l.out_t = tg.axes[0];
  l.out_x = tg.axes[1];
  l.period = l.out_x.last() - l.out_x.start;
  const double dx = solver_dx > 0.0 ? solver_dx : l.out_x.step;
  const double ratio = l.out_x.step / dx;
  require(std::abs(ratio - std::round(ratio)) < 1e-9 * ratio, "output spacing must be a multiple of solver spacing");
  l.out_stride = static_cast<int>(std::llround(ratio));
  const double m = l.period / dx;
  require(std::abs(m - std::round(m)) < 1e-9 * m, "period must be a multiple of the solver spacing");
  l.modes = static_cast<int>(std::llround(m));
  require(l.modes >= 4 && l.modes % 2 == 0, "spectral solver needs an even number of points");
  require(max_dt > 0.0, "internal step must be positive");
  l.substeps = std::max(1, static_cast<int>(std::ceil(l.out_t.step / max_dt - 1e-9)));
  l.h = l.out_t.step / l.substeps;
  return l;
}

// ETDRK4 for v_t = L v - 0.5 i k FFT(u^2), contour-integral coefficients.
Dataset etdrk4(const GridSpec& grid, const std::vector<cplx>& lin, const InitialCondition& u0,
               const PeriodicLayout& l, const std::string& tag) {
  const int m = l.modes;
  const int nk = m / 2 + 1;
  const double h = l.h;
  std::vector<cplx> e(nk), e2(nk), q(nk), f1(nk), f2(nk), f3(nk), g(nk);
  constexpr int kContour = 64;
  for (int k = 0; k < nk; ++k) {
    e[k] = std::exp(h * lin[k]);
    e2[k] = std::exp(0.5 * h * lin[k]);
    cplx sq = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (int j = 0; j < kContour; ++j) {
      const cplx r = std::exp(cplx(0.0, 2.0 * std::numbers::pi * (j + 0.5) / kContour));
      const cplx z = h * lin[k] + r;
      const cplx ez = std::exp(z);
      const cplx z3 = z * z * z;
      sq += (std::exp(0.5 * z) - 1.0) / z;
      s1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
      s2 += (2.0 + z + ez * (-2.0 + z)) / z3;
      s3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
    }
    q[k] = h * sq / double(kContour);
    f1[k] = h * s1 / double(kContour);
    f2[k] = h * s2 / double(kContour);
    f3[k] = h * s3 / double(kContour);
    if (std::abs(lin[k]) == 0.0) {
      // Real parts of the limits at z = 0 are exact; drop contour round-off.
      q[k] = h / 2.0;
      f1[k] = h / 6.0;
      f2[k] = h / 6.0;
      f3[k] = h / 6.0;
    }
    const double wave = 2.0 * std::numbers::pi * k / l.period;
    g[k] = (k == m / 2) ? cplx(0.0) : cplx(0.0, -0.5 * wave);
  }

  RealFft fft(m);
  std::vector<double> u(m), work(m);
  for (int i = 0; i < m; ++i) u[i] = u0(l.out_x.start + l.period * i / m);
  double umax0 = 0.0;
  for (double v : u) umax0 = std::max(umax0, std::abs(v));
  const double limit = 10.0 * std::max(umax0, 1e-300);

  std::vector<cplx> v, nv, a, na, b, nb, c, nc;
  fft.forward(u, v);
  auto nonlinear = [&](const std::vector<cplx>& s, std::vector<cplx>& out) {
    fft.inverse(s, work);
    for (double& w : work) w *= w;
    fft.forward(work, out);
    for (int k = 0; k < nk; ++k) out[k] *= g[k];
  };

  Dataset ds;
  TensorGrid tg{{l.out_t, l.out_x}};
  ds.grid = tg;
  ds.inputs = tg.points();
  ds.values.resize(tg.size(), 1);
  ds.input_names = {"t", "x"};
  ds.channel_names = {"u"};
  ds.provenance = tag + " etdrk4 modes=" + std::to_string(m) + " dt=" + std::to_string(h);
  const Eigen::Index nxo = l.out_x.count;
  auto store = [&](Eigen::Index it) {
    fft.inverse(v, work);
    for (Eigen::Index j = 0; j < nxo; ++j) {
      const Eigen::Index src = (j * l.out_stride) % m;
      ds.values(it * nxo + j, 0) = work[src];
    }
    for (double w : work) {
      if (!std::isfinite(w) || std::abs(w) > limit) {
        fail(ErrorKind::SolverUnstable, tag + " solution exceeded 10x the initial maximum");
      }
    }
  };
  store(0);
  a.resize(nk);
  b.resize(nk);
  c.resize(nk);
  for (Eigen::Index it = 1; it < l.out_t.count; ++it) {
    for (int s = 0; s < l.substeps; ++s) {
      nonlinear(v, nv);
      for (int k = 0; k < nk; ++k) a[k] = e2[k] * v[k] + q[k] * nv[k];
      nonlinear(a, na);
      for (int k = 0; k < nk; ++k) b[k] = e2[k] * v[k] + q[k] * na[k];
      nonlinear(b, nb);
      for (int k = 0; k < nk; ++k) c[k] = e2[k] * a[k] + q[k] * (2.0 * nb[k] - nv[k]);
      nonlinear(c, nc);
      for (int k = 0; k < nk; ++k) v[k] = e[k] * v[k] + nv[k] * f1[k] + 2.0 * (na[k] + nb[k]) * f2[k] + nc[k] * f3[k];
      v[m / 2] = cplx(v[m / 2].real(), 0.0);
      v[0] = cplx(v[0].real(), 0.0);
    }
    store(it);
  }
  ds.clean = ds.values;
  (void)grid;
  return ds;
}

}  // namespace

Dataset solve_burgers_hf(const GridSpec& grid, double nu, const InitialCondition& u0, const SpectralOptions& opt) {
  require(nu >= 0.0, "viscosity must be non-negative");
  const PeriodicLayout l = layout(grid, opt.dx, opt.dt);
  std::vector<cplx> lin(l.modes / 2 + 1);
  for (int k = 0; k <= l.modes / 2; ++k) {
    const double wave = 2.0 * std::numbers::pi * k / l.period;
    lin[k] = -nu * wave * wave;
  }
  return etdrk4(grid, lin, u0, l, "burgers nu=" + std::to_string(nu));
}

Dataset solve_kdv_hf(const GridSpec& grid, const InitialCondition& u0, const SpectralOptions& opt) {
  const PeriodicLayout l = layout(grid, opt.dx, opt.dt);
  std::vector<cplx> lin(l.modes / 2 + 1);
  for (int k = 0; k <= l.modes / 2; ++k) {
    const double wave = 2.0 * std::numbers::pi * k / l.period;
    lin[k] = (k == l.modes / 2) ? cplx(0.0) : cplx(0.0, wave * wave * wave);
  }
  return etdrk4(grid, lin, u0, l, "kdv");
}

Dataset solve_burgers_lf(const GridSpec& coarse, double nu, const InitialCondition& u0, LowFidelityMode mode) {
  require(nu >= 0.0, "viscosity must be non-negative");
  require(coarse.has_space(), "PDE grids need a spatial axis");
  const TensorGrid tg = coarse.tensor();
  const Axis& ta = tg.axes[0];
  const Axis& xa = tg.axes[1];
  const Eigen::Index m = xa.count - 1;  // unique periodic points
  require(m >= 3, "coarse grid too small");
  const double dx = xa.step, dt = ta.step;
  const double period = xa.last() - xa.start;
  Eigen::VectorXd u(m);
  for (Eigen::Index i = 0; i < m; ++i) u[i] = u0(xa.at(i));
  const double limit = 10.0 * std::max(u.cwiseAbs().maxCoeff(), 1e-300);

  Dataset ds;
  ds.grid = tg;
  ds.inputs = tg.points();
  ds.values.resize(tg.size(), 1);
  ds.input_names = {"t", "x"};
  ds.channel_names = {"u"};
  ds.fidelity = Fidelity::Low;
  auto store = [&](Eigen::Index it, const Eigen::VectorXd& s) {
    for (Eigen::Index j = 0; j < xa.count; ++j) ds.values(it * xa.count + j, 0) = s[j % m];
    if (!s.allFinite() || s.cwiseAbs().maxCoeff() > limit) {
      fail(ErrorKind::SolverUnstable, "low-fidelity solution exceeded 10x the initial maximum");
    }
  };
  store(0, u);

  if (mode == LowFidelityMode::LinearHeat) {
    ds.provenance = "heat nu=" + std::to_string(nu) + " exact spectral, dx=" + std::to_string(dx);
    // Exact decay of each discrete Fourier mode.
    RealFft fft(static_cast<int>(m));
    std::vector<double> buf(u.data(), u.data() + m), out;
    std::vector<cplx> v0, v;
    fft.forward(buf, v0);
    for (Eigen::Index it = 1; it < ta.count; ++it) {
      const double t = ta.at(it) - ta.start;
      v = v0;
      for (size_t k = 0; k < v.size(); ++k) {
        const double wave = 2.0 * std::numbers::pi * static_cast<double>(k) / period;
        v[k] *= std::exp(-nu * wave * wave * t);
      }
      fft.inverse(v, out);
      store(it, Eigen::Map<const Eigen::VectorXd>(out.data(), m));
    }
    ds.clean = ds.values;
    return ds;
  }

  ds.provenance = "burgers coarse fd nu=" + std::to_string(nu) + " dx=" + std::to_string(dx) +
                  " dt=" + std::to_string(dt) + " (backward-Euler diffusion, upwind advection)";
  const double r = nu * dt / (dx * dx);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, i) = 1.0 + 2.0 * r;
    a(i, (i + 1) % m) -= r;
    a(i, (i + m - 1) % m) -= r;
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index it = 1; it < ta.count; ++it) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double ui = u[i];
      const double grad = ui > 0.0 ? (ui - u[(i + m - 1) % m]) / dx : (u[(i + 1) % m] - ui) / dx;
      rhs[i] = ui - dt * ui * grad;
    }
    u = lu.solve(rhs);
    store(it, u);
  }
  ds.clean = ds.values;
  return ds;
}

}  // namespace gpsindy
