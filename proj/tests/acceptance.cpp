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

// Acceptance suite: one PASS/FAIL line per criterion.
//   gpsindy_acceptance                  property criteria 7-13
//   gpsindy_acceptance --quantitative   also the protocol criteria 1-6

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gpsindy/errors.hpp"
#include "gpsindy/experiment.hpp"
#include "gpsindy/gp.hpp"
#include "gpsindy/kernels.hpp"
#include "gpsindy/metrics.hpp"
#include "gpsindy/mfgp.hpp"
#include "gpsindy/simdata.hpp"
#include "gpsindy/sparse.hpp"

namespace fs = std::filesystem;
using namespace gpsindy;

namespace {

// Tolerances pinned for the acceptance run.
constexpr double kLorenzSigma = 1.59742;
constexpr double kLorenzSigmaTol = 1e-5;
constexpr double kFdTolLow = 1e-6;   // orders 1-2, central step 1e-5
constexpr double kFdTolHigh = 1e-3;  // order 3, central step 1e-3
constexpr double kNlmlRelTol = 1e-10;
constexpr double kNlmlGradTol = 1e-5;
constexpr double kWlsTol = 1e-10;
constexpr double kMcSigmas = 3.0;
constexpr double kDegeneracyTol = 1e-8;
constexpr double kIdenticalLevelsTol = 0.05;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string num(double v, int prec = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

double rel_err(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

Eigen::MatrixXd gaussian(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Eigen::MatrixXd::NullaryExpr(r, c, [&] { return n(rng); });
}

// ---------------------------------------------------------------- criterion 7

Outcome noise_calibration() {
  GridSpec g;
  g.t_end = 10.0;
  g.dt = 0.001;
  const Dataset clean = lorenz_dataset(g);
  const double s = noise_sigma(clean.values, 0.1);
  return {std::abs(s - kLorenzSigma) <= kLorenzSigmaTol,
          "sigma=" + num(s, 8) + " want " + num(kLorenzSigma, 6) + " +- " + num(kLorenzSigmaTol)};
}

// ---------------------------------------------------------------- criterion 8

// Central difference of `below` along one coordinate of x or x'.
template <class K>
double central(const K& k, Eigen::VectorXd x, Eigen::VectorXd xp, bool on_second, int dim, double h) {
  Eigen::VectorXd& v = on_second ? xp : x;
  v[dim] += h;
  const double up = k(x, xp);
  v[dim] -= 2 * h;
  return (up - k(x, xp)) / (2 * h);
}

Outcome kernel_fd_suite() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> logu(std::log(0.3), std::log(3.0));
  std::uniform_real_distribution<double> box(-1.5, 1.5);
  std::normal_distribution<double> nrm;
  int draws = 0, checks = 0;
  double worst_low = 0, worst_high = 0;
  const Eigen::Vector2d w(1.1, -0.6);
  auto jet = [&](const Eigen::VectorXd& x) {
    const double p = w.dot(x);
    const double d[4] = {std::sin(p), std::cos(p), -std::sin(p), -std::cos(p)};
    LfJet j(d[0]);
    for (int s = 0; s < 2; ++s)
      for (int m = 1; m <= 3; ++m) j.set(s, m, std::pow(w[s], m) * d[m]);
    return j;
  };
  for (int k = 0; k < 100; ++k, ++draws) {
    SeHyperparams se(std::exp(logu(rng)), Eigen::Vector2d(std::exp(logu(rng)), std::exp(logu(rng))));
    MfgpHyperparams mf;
    mf.rho = SeHyperparams(std::exp(logu(rng)), Eigen::Vector2d(std::exp(logu(rng)), std::exp(logu(rng))));
    mf.f = SeHyperparams(std::exp(logu(rng)), Eigen::VectorXd::Constant(1, std::exp(logu(rng))));
    mf.delta = SeHyperparams(std::exp(logu(rng)), Eigen::Vector2d(std::exp(logu(rng)), std::exp(logu(rng))));
    Eigen::VectorXd x(2), xp(2);
    for (int s = 0; s < 2; ++s) {
      x[s] = box(rng);
      xp[s] = x[s] + 0.7 * nrm(rng);
    }
    for (int dim = 0; dim < 2; ++dim)
      for (int m = 1; m <= 3; ++m) {
        const double h = m == 3 ? 1e-3 : 1e-5;
        for (bool second : {false, true}) {
          const auto below = second ? DerivativeRequest::on_second(dim, m - 1) : DerivativeRequest::on_first(dim, m - 1);
          const auto req = second ? DerivativeRequest::on_second(dim, m) : DerivativeRequest::on_first(dim, m);
          const auto kse = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return se_partial(a, b, se, below); };
          const double e1 = rel_err(se_partial(x, xp, se, req), central(kse, x, xp, second, dim, h),
                                    1e-6 * se.amplitude * se.amplitude * std::pow(se.lengthscales[dim], -m));
          const auto kmf = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
            return mfgp_partial(a, b, jet(a), jet(b), mf, below);
          };
          const double e2 = rel_err(mfgp_partial(x, xp, jet(x), jet(xp), mf, req), central(kmf, x, xp, second, dim, h), 1e-6);
          (m == 3 ? worst_high : worst_low) = std::max({m == 3 ? worst_high : worst_low, e1, e2});
          checks += 2;
        }
      }
  }
  const bool ok = draws >= 100 && worst_low < kFdTolLow && worst_high < kFdTolHigh;
  return {ok, std::to_string(draws) + " draws, " + std::to_string(checks) + " checks; worst rel err orders 1-2 " +
                  num(worst_low) + " (tol " + num(kFdTolLow) + "), order 3 " + num(worst_high) + " (tol " +
                  num(kFdTolHigh) + ")"};
}

// ---------------------------------------------------------------- criterion 9

Outcome nlml_checks() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  double worst_value = 0, worst_grad = 0;
  for (int rep = 0; rep < 40; ++rep) {
    const int d = 1 + rep % 2, n = 6 + rep % 11;
    Eigen::MatrixXd x(d, n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = 3 * u(rng);
    Eigen::VectorXd y(n);
    for (auto& v : y) v = 2 * u(rng) - 1;
    SeHyperparams t(0.3 + 2 * u(rng), Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return 0.2 + u(rng); }));
    const double s2 = 0.01 + 0.2 * u(rng);
    // Dense oracle: explicit Gram matrix and LU.
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) k(i, j) = se_eval(x.col(i), x.col(j), t) + (i == j ? s2 : 0.0);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
    const double want = 0.5 * y.dot(lu.solve(y)) + 0.5 * lu.matrixLU().diagonal().array().abs().log().sum() +
                        0.5 * n * std::log(2 * std::numbers::pi);
    worst_value = std::max(worst_value, std::abs(nlml(t, s2, x, y) - want) / std::abs(want));
    // Finite differences over [log amp, log ls..., log noise std].
    Eigen::VectorXd p(d + 2);
    p[0] = std::log(t.amplitude);
    for (int s = 0; s < d; ++s) p[1 + s] = std::log(t.lengthscales[s]);
    p[d + 1] = 0.5 * std::log(s2);
    auto f = [&](const Eigen::VectorXd& q) {
      SeHyperparams tt(std::exp(q[0]), q.segment(1, d).array().exp().matrix());
      return nlml(tt, std::exp(2 * q[d + 1]), x, y);
    };
    const Eigen::VectorXd g = nlml_grad(t, s2, x, y);
    for (int i = 0; i < d + 2; ++i) {
      Eigen::VectorXd a = p, b = p;
      a[i] += 1e-6;
      b[i] -= 1e-6;
      const double fd = (f(a) - f(b)) / 2e-6;
      worst_grad = std::max(worst_grad, std::abs(g[i] - fd) / std::max(1e-3, std::abs(fd)));
    }
  }
  return {worst_value < kNlmlRelTol && worst_grad < kNlmlGradTol,
          "nlml vs dense LU rel " + num(worst_value) + " (tol " + num(kNlmlRelTol) + "); grad vs FD rel " +
              num(worst_grad) + " (tol " + num(kNlmlGradTol) + ")"};
}

// --------------------------------------------------------------- criterion 10

Outcome blue_checks() {
  std::mt19937_64 rng(10);
  // Reduction: W = I gives the ordinary least squares solution.
  const Eigen::MatrixXd phi = gaussian(25, 4, rng);
  const Eigen::VectorXd z = gaussian(25, 1, rng);
  const Eigen::VectorXd ols = phi.completeOrthogonalDecomposition().pseudoInverse() * z;
  const double red = (wls_solve(phi, z, Eigen::VectorXd::Ones(25)) - ols).cwiseAbs().maxCoeff();
  // Positive scaling of W leaves the argmin unchanged.
  const Eigen::VectorXd w = gaussian(25, 1, rng).array().exp();
  const Eigen::VectorXd c = wls_solve(phi, z, w);
  double scale = 0;
  for (double s : {1e-6, 0.25, 8.0, 1e6}) scale = std::max(scale, (wls_solve(phi, z, s * w) - c).norm() / (1 + c.norm()));
  // Monte Carlo unbiasedness under heteroscedastic noise with W = Sigma^-1.
  const int n = 30, p = 3, draws = 10000;
  const Eigen::MatrixXd a = gaussian(n, p, rng);
  const Eigen::Vector3d truth(0.7, -1.5, 2.0);
  std::uniform_real_distribution<double> ud(0.1, 3.0);
  Eigen::VectorXd sd(n);
  for (auto& v : sd) v = ud(rng);
  const Eigen::VectorXd wt = sd.array().square().inverse();
  std::normal_distribution<double> nd;
  Eigen::MatrixXd est(draws, p);
  for (int k = 0; k < draws; ++k) {
    Eigen::VectorXd zz = a * truth;
    for (int i = 0; i < n; ++i) zz[i] += sd[i] * nd(rng);
    est.row(k) = wls_solve(a, zz, wt).transpose();
  }
  const Eigen::RowVectorXd mean = est.colwise().mean();
  const Eigen::RowVectorXd esd = ((est.rowwise() - mean).array().square().colwise().sum() / (draws - 1)).sqrt();
  double worst_z = 0;
  for (int j = 0; j < p; ++j) worst_z = std::max(worst_z, std::abs(mean[j] - truth[j]) / (esd[j] / std::sqrt(draws)));
  const bool ok = red < kWlsTol && scale < kWlsTol && worst_z < kMcSigmas;
  return {ok, "W=I vs pinv " + num(red) + ", scaling drift " + num(scale) + " (tol " + num(kWlsTol) +
                  "); MC bias max " + num(worst_z, 3) + " SE over 1e4 draws (tol " + num(kMcSigmas) + ")"};
}

// --------------------------------------------------------------- criterion 11

Outcome stwls_brute_force() {
  int near = 0, monotone = 0;
  const int seeds = 50;
  for (int seed = 0; seed < seeds; ++seed) {
    std::mt19937_64 rng(5000 + seed);
    const int n = 40, nf = 8;
    const Eigen::MatrixXd phi = gaussian(n, nf, rng);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nf);
    std::uniform_int_distribution<int> pick(0, nf - 1);
    std::uniform_real_distribution<double> mag(1.0, 3.0);
    for (int t = 0; t < 3; ++t) c[pick(rng)] = (t % 2 ? -1 : 1) * mag(rng);
    const Eigen::VectorXd clean = phi * c;
    const double sd = std::sqrt(clean.squaredNorm() / n / 100.0);
    const Eigen::VectorXd z = clean + sd * gaussian(n, 1, rng);
    std::uniform_real_distribution<double> wd(0.5, 2.0);
    Eigen::VectorXd w(n);
    for (auto& v : w) v = wd(rng) / (sd * sd);
    const double eta = 5.0;
    const SparseSolution s = stwls(phi, z, w, StwlsConfig{{0.0, 0.1, 1.0}, eta, 20, 10});
    double best = std::numeric_limits<double>::infinity();
    unsigned best_mask = 0;
    const Eigen::VectorXd sw = w.cwiseSqrt();
    for (unsigned mask = 0; mask < (1u << nf); ++mask) {
      std::vector<int> idx;
      for (int j = 0; j < nf; ++j)
        if (mask & (1u << j)) idx.push_back(j);
      Eigen::VectorXd cc = Eigen::VectorXd::Zero(nf);
      if (!idx.empty()) {
        Eigen::MatrixXd sub(n, static_cast<Eigen::Index>(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = sw.cwiseProduct(phi.col(idx[j]));
        const Eigen::VectorXd sol = sub.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(sw.cwiseProduct(z));
        for (std::size_t j = 0; j < idx.size(); ++j) cc[idx[j]] = sol[static_cast<Eigen::Index>(j)];
      }
      const double loss = (phi * cc - z).cwiseAbs2().dot(w) + eta * static_cast<double>(idx.size());
      if (loss < best) {
        best = loss;
        best_mask = mask;
      }
    }
    unsigned mask = 0;
    for (int j : s.support) mask |= 1u << j;
    near += s.loss <= 1.0001 * best || mask == best_mask;
    monotone += std::is_sorted(s.accepted_losses.rbegin(), s.accepted_losses.rend());
  }
  return {near >= 45 && monotone == seeds, std::to_string(near) + "/50 within 1.0001x of the enumerated optimum "
                                               "(need 45); monotone acceptance " + std::to_string(monotone) + "/50"};
}

// --------------------------------------------------------------- criterion 12

Outcome mfgp_degeneracy() {
  auto one = [](double v) { return Eigen::VectorXd::Constant(1, v); };
  const Eigen::MatrixXd x1 = Eigen::RowVectorXd::LinSpaced(15, 0.0, 2 * std::numbers::pi);
  const Eigen::VectorXd y1 = x1.row(0).transpose().array().sin();
  const GpModel low = GpModel::condition(x1, y1, SeHyperparams(1.0, one(1.2)), 1e-6);
  const Eigen::MatrixXd x2 = Eigen::RowVectorXd::LinSpaced(10, 0.0, 6.0);
  const Eigen::VectorXd y2 = (0.8 * x2.row(0).transpose().array()).sin().matrix();
  const Eigen::MatrixXd xs = Eigen::RowVectorXd::LinSpaced(23, -1.0, 7.0);
  // Flat k_f: rho and delta with a shared lengthscale add in quadrature.
  MfgpHyperparams th;
  th.rho = SeHyperparams(0.8, one(1.1));
  th.f = SeHyperparams(1.0, one(1e12));
  th.delta = SeHyperparams(0.5, one(1.1));
  const MfgpModel m = MfgpModel::condition(low, x2, y2, th, 1e-4);
  const GpModel sf = GpModel::condition(x2, y2, SeHyperparams(std::sqrt(0.64 + 0.25), one(1.1)), 1e-4);
  double flat = 0;
  for (int order = 0; order <= 3; ++order) {
    const PosteriorField a = m.predict(xs, 0, order, true), b = sf.predict(xs, 0, order, true);
    flat = std::max({flat, (a.mean - b.mean).cwiseAbs().maxCoeff(), (a.variance - b.variance).cwiseAbs().maxCoeff()});
  }
  // Identical LF and HF data, both fitted.
  GpConfig g;
  g.seed = 3;
  g.restarts = 2;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd(0.0, 0.02);
  const Eigen::MatrixXd x = Eigen::RowVectorXd::LinSpaced(40, 0.0, 2 * std::numbers::pi);
  Eigen::VectorXd y = x.row(0).transpose().array().sin();
  for (auto& v : y) v += nd(rng);
  const MfgpModel mf = mfgp_fit(x, y, x, y, MfgpConfig{g, g});
  const GpModel sg = fit(x, y, g);
  const Eigen::MatrixXd xt = Eigen::RowVectorXd::LinSpaced(101, 0.1, 2 * std::numbers::pi - 0.1);
  const double same = (mf.predict(xt, 0, 0, false).mean - sg.predict(xt, 0, 0, false).mean).cwiseAbs().maxCoeff();
  return {flat < kDegeneracyTol && same < kIdenticalLevelsTol,
          "flat-k_f vs SF GP max diff " + num(flat) + " (tol " + num(kDegeneracyTol) + "); identical levels vs SF " +
              num(same) + " (tol " + num(kIdenticalLevelsTol) + ")"};
}

// --------------------------------------------------------------- criterion 13

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const fs::path& scratch, const std::string& config_dir) {
  std::vector<std::string> compared;
  bool ok = true;
  auto twice = [&](ExperimentConfig cfg, const std::string& tag) {
    for (int rep = 0; rep < 2; ++rep) {
      cfg.output_dir = (scratch / (tag + "-" + std::to_string(rep))).string();
      fs::remove_all(cfg.output_dir);
      write_outputs(cfg, run_experiment(cfg));
    }
    for (const fs::directory_entry& e : fs::recursive_directory_iterator(scratch / (tag + "-0"))) {
      if (!e.is_regular_file() || e.path().extension() != ".csv" || e.path().filename() == "timing.csv") continue;
      const fs::path rel = fs::relative(e.path(), scratch / (tag + "-0"));
      ok = ok && slurp(e.path()) == slurp(scratch / (tag + "-1") / rel);
      compared.push_back(tag + "/" + rel.string());
    }
  };
  ExperimentConfig sf = load_config(config_dir + "/burgers-sf.ini");
  sf.seeds = {3};
  sf.noise_ratios = {0.1};
  sf.emit_fields = true;
  twice(sf, "burgers-sf");
  ExperimentConfig lor = load_config(config_dir + "/lorenz.ini");
  lor.seeds = {1};
  lor.noise_ratios = {0.05};
  twice(lor, "lorenz");
  ExperimentConfig custom = load_config(config_dir + "/custom-decay.ini");
  custom.emit_fields = true;
  twice(custom, "custom");
  std::string list;
  for (const auto& c : compared) list += (list.empty() ? "" : ", ") + c;
  return {ok && compared.size() >= 6, std::to_string(compared.size()) + " CSVs byte-identical across repeats: " + list};
}

// ------------------------------------------------------------ criteria 1 to 6

struct Stats {
  int runs = 0, ok = 0, tpr_one = 0;
  double med_e2 = NAN, med_einf = NAN, med_tpr = NAN, runtime = 0;
};

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Stats stats(const ExperimentReport& r, double sigma) {
  Stats s;
  std::vector<double> e2, ei, tp;
  for (const RunRecord& run : r.runs) {
    if (run.noise_ratio != sigma) continue;
    ++s.runs;
    s.runtime += run.runtime_seconds;
    if (run.status != "ok" || !run.e_2) continue;
    ++s.ok;
    e2.push_back(*run.e_2);
    ei.push_back(*run.e_inf);
    tp.push_back(*run.tpr);
    s.tpr_one += *run.tpr == 1.0;
  }
  s.med_e2 = median(e2);
  s.med_einf = median(ei);
  s.med_tpr = median(tp);
  return s;
}

std::string describe(const Stats& s) {
  return "TPR=1 in " + std::to_string(s.tpr_one) + "/" + std::to_string(s.runs) + ", median E2 " + num(s.med_e2) +
         "%, median Einf " + num(s.med_einf) + "%, runtime " + num(s.runtime, 4) + " s";
}

struct Quantitative {
  std::string config_dir;
  fs::path out;
  std::vector<std::uint64_t> seeds;
  int workers = 1;

  ExperimentReport run(const std::string& preset_file, std::vector<double> sigmas) const {
    ExperimentConfig c = load_config(config_dir + "/" + preset_file);
    c.seeds = seeds;
    c.noise_ratios = std::move(sigmas);
    c.workers = workers;
    c.output_dir = (out / fs::path(preset_file).stem()).string();
    ExperimentReport r = run_experiment(c);
    write_outputs(c, r);
    return r;
  }
};

void quantitative(const Quantitative& q) {
  const int n = static_cast<int>(q.seeds.size());
  const ExperimentReport lorenz = q.run("lorenz.ini", {0.05, 0.1});
  report(1, "Lorenz GP-SINDy sigma_NR=0.05", [&] {
    const Stats s = stats(lorenz, 0.05);
    return Outcome{s.tpr_one * 10 >= 9 * n && s.med_e2 <= 1.5 && s.med_einf <= 4.0 && s.runtime <= 600.0,
                   describe(s) + " (need TPR=1 in >=9/10, E2<=1.5%, Einf<=4%, runtime<=600 s)"};
  });
  report(2, "Lorenz GP-SINDy sigma_NR=0.1", [&] {
    const Stats s = stats(lorenz, 0.1);
    return Outcome{s.tpr_one * 10 >= 8 * n && s.med_e2 <= 4.0, describe(s) + " (need TPR=1 in >=8/10, E2<=4%)"};
  });
  const ExperimentReport sf = q.run("burgers-sf.ini", {0.02, 0.1, 0.2});
  report(3, "Burgers SF GP-SINDy 41x65", [&] {
    const Stats a = stats(sf, 0.02), b = stats(sf, 0.1);
    const bool ok = a.tpr_one * 10 >= 8 * n && b.tpr_one * 10 >= 8 * n && a.med_e2 <= 2 * 1.57 && b.med_e2 <= 2 * 6.30;
    return Outcome{ok, "0.02: " + describe(a) + "; 0.1: " + describe(b) + " (need TPR=1 in >=8/10, E2<=3.14% / 12.6%)"};
  });
  const ExperimentReport mf = q.run("burgers-mf.ini", {0.1, 0.2});
  report(4, "Burgers MF MFGP-SINDy (41x65 HF, 51x81 LF)", [&] {
    const Stats a = stats(mf, 0.1), b = stats(mf, 0.2), s = stats(sf, 0.2);
    const bool ok = a.tpr_one * 10 >= 8 * n && b.tpr_one * 10 >= 8 * n && a.med_e2 <= 2.5 * 3.75 &&
                    b.med_e2 <= 2.5 * 6.75 && b.med_e2 < s.med_e2;
    return Outcome{ok, "0.1: " + describe(a) + "; 0.2: " + describe(b) + "; SF at 0.2 median E2 " + num(s.med_e2) +
                           "% (need TPR=1 in >=8/10, E2<=9.375% / 16.875%, MF<SF)"};
  });
  const ExperimentReport lf = q.run("burgers-lfonly.ini", {0.2});
  report(5, "GP-SINDy on LF-only Burgers 51x81 sigma_NR=0.2", [&] {
    const Stats s = stats(lf, 0.2);
    return Outcome{s.ok > 0 && s.med_tpr < 1.0, describe(s) + ", median TPR " + num(s.med_tpr) + " (need TPR<1)"};
  });
  const ExperimentReport ksf = q.run("kdv-sf.ini", {0.03});
  const ExperimentReport kmf = q.run("kdv-mf.ini", {0.03});
  report(6, "KdV sigma_NR=0.03 SF vs MF", [&] {
    const Stats a = stats(ksf, 0.03), b = stats(kmf, 0.03);
    const bool ok = a.tpr_one == n && b.tpr_one == n && n >= 10 && b.med_e2 <= a.med_e2;
    return Outcome{ok, "SF: " + describe(a) + "; MF: " + describe(b) +
                           " (need exact support in every seed for both, >=10 seeds, MF E2 <= SF E2)"};
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  bool quant = false;
  int seeds = 10, workers = 1;
  std::string config_dir = GPSINDY_CONFIG_DIR;
  std::string out = (fs::temp_directory_path() / "gpsindy-acceptance").string();
  app.add_flag("--quantitative", quant, "Also run the protocol criteria 1-6");
  app.add_option("--seeds", seeds, "Seeds per protocol criterion")->check(CLI::PositiveNumber);
  app.add_option("-j,--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--configs", config_dir, "Directory holding the preset configs");
  app.add_option("--out", out, "Scratch/output directory");
  CLI11_PARSE(app, argc, argv);

  fs::create_directories(out);
  if (quant) {
    Quantitative q{config_dir, fs::path(out) / "protocols", {}, workers};
    for (int s = 0; s < seeds; ++s) q.seeds.push_back(static_cast<std::uint64_t>(s));
    quantitative(q);
  }
  report(7, "noise calibration (Lorenz sigma_NR=0.1)", noise_calibration);
  report(8, "kernel-derivative finite differences (SE and MFGP, orders 1-3)", kernel_fd_suite);
  report(9, "nlml and nlml_grad vs dense oracle / finite differences", nlml_checks);
  report(10, "wls_solve BLUE checks", blue_checks);
  report(11, "STWLS brute-force agreement and monotone acceptance", stwls_brute_force);
  report(12, "MFGP degeneracy", mfgp_degeneracy);
  report(13, "end-to-end determinism", [&] { return determinism(fs::path(out) / "determinism", config_dir); });
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
