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

#include "gpsindy/simdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "gpsindy/errors.hpp"

namespace gpsindy {

void Dataset::validate() const {
  require(values.rows() >= 1, "dataset needs at least one sample");
  require(inputs.cols() == values.rows(), "inputs and values disagree in row count");
  require(inputs.rows() >= 1 && values.cols() >= 1, "dataset needs inputs and channels");
  if (clean) require(clean->rows() == values.rows() && clean->cols() == values.cols(), "clean twin shape mismatch");
  if (grid) require(grid->size() == values.rows(), "grid does not match the sample count");
  if (!input_names.empty()) require(static_cast<int>(input_names.size()) == dims(), "input name count mismatch");
  if (!channel_names.empty()) {
    require(static_cast<int>(channel_names.size()) == channels(), "channel name count mismatch");
  }
}

Dataset integrate_ode(const OdeRhs& rhs, const Eigen::VectorXd& u0, const GridSpec& grid, double tol) {
  require(tol > 0.0, "tolerance must be positive");
  require(!grid.has_space(), "ODE grids are time-only");
  const TensorGrid tg = grid.tensor();
  const Axis& ta = tg.axes[0];
  const Eigen::Index d = u0.size();

  // Dormand-Prince 5(4) tableau.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  Dataset ds;
  ds.inputs = ta.values().transpose();
  ds.values.resize(ta.count, d);
  ds.input_names = {"t"};
  ds.grid = tg;
  ds.provenance = "dopri5 tol=" + std::to_string(tol);
  Eigen::VectorXd u = u0;
  ds.values.row(0) = u.transpose();
  Eigen::VectorXd k1(d), k2(d), k3(d), k4(d), k5(d), k6(d), k7(d), tmp(d), un(d), err(d);
  double t = ta.start;
  double h = std::min(ta.step, 1e-3);
  rhs(t, u, k1);
  for (Eigen::Index i = 1; i < ta.count; ++i) {
    const double target = ta.at(i);
    while (t < target) {
      bool last = false;
      const double h_free = h;
      if (t + h >= target - 1e-12 * std::max(1.0, std::abs(target))) {
        h = target - t;
        last = true;
      }
      tmp = u + h * a21 * k1;
      rhs(t + c2 * h, tmp, k2);
      tmp = u + h * (a31 * k1 + a32 * k2);
      rhs(t + c3 * h, tmp, k3);
      tmp = u + h * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * h, tmp, k4);
      tmp = u + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * h, tmp, k5);
      tmp = u + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(t + h, tmp, k6);
      un = u + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      rhs(t + h, un, k7);
      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double en = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double sc = tol + tol * std::max(std::abs(u[j]), std::abs(un[j]));
        en += (err[j] / sc) * (err[j] / sc);
      }
      en = std::sqrt(en / static_cast<double>(d));
      if (!std::isfinite(en)) en = 1e10;
      if (en <= 1.0) {
        t = last ? target : t + h;
        u = un;
        k1 = k7;
      }
      const double fac = (en == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      if (en <= 1.0 && last) {
        h = std::max(h, h_free) * std::min(fac, 1.0);
      } else {
        h *= (en <= 1.0) ? fac : std::min(1.0, fac);
      }
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        fail(ErrorKind::IntegrationFailed, "step size underflow at t=" + std::to_string(t));
      }
    }
    ds.values.row(i) = u.transpose();
  }
  return ds;
}

OdeRhs lorenz_rhs(const LorenzParams& p) {
  return [p](double, const Eigen::VectorXd& u, Eigen::VectorXd& du) {
    du.resize(3);
    du[0] = p.sigma * (u[1] - u[0]);
    du[1] = u[0] * (p.rho - u[2]) - u[1];
    du[2] = u[0] * u[1] - p.beta * u[2];
  };
}

Dataset lorenz_dataset(const GridSpec& grid, const LorenzParams& p, double tol) {
  Dataset ds = integrate_ode(lorenz_rhs(p), p.u0, grid, tol);
  ds.channel_names = {"x", "y", "z"};
  ds.provenance = "lorenz " + ds.provenance;
  ds.clean = ds.values;
  return ds;
}

double noise_sigma(const Eigen::MatrixXd& clean, double noise_ratio) {
  return noise_ratio * clean.norm() / std::sqrt(static_cast<double>(clean.size()));
}

Dataset add_noise(const Dataset& clean, double noise_ratio, std::uint64_t seed) {
  require(noise_ratio >= 0.0, "noise ratio must be non-negative");
  Dataset out = clean;
  const Eigen::MatrixXd base = clean.clean ? *clean.clean : clean.values;
  out.clean = base;
  const double sigma = noise_sigma(base, noise_ratio);
  out.noise_sigma = sigma;
  out.values = base;
  if (sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, sigma);
    for (Eigen::Index i = 0; i < out.values.rows(); ++i)
      for (Eigen::Index j = 0; j < out.values.cols(); ++j) out.values(i, j) += n(rng);
  }
  return out;
}

namespace {

Dataset select_rows(const Dataset& ds, const std::vector<Eigen::Index>& rows) {
  Dataset out = ds;
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  out.inputs.resize(ds.dims(), m);
  out.values.resize(m, ds.channels());
  if (ds.clean) out.clean = Eigen::MatrixXd(m, ds.channels());
  for (Eigen::Index k = 0; k < m; ++k) {
    out.inputs.col(k) = ds.inputs.col(rows[k]);
    out.values.row(k) = ds.values.row(rows[k]);
    if (ds.clean) out.clean->row(k) = ds.clean->row(rows[k]);
  }
  return out;
}

}  // namespace

Dataset subsample(const Dataset& ds, const EvenStride& mode) {
  ds.validate();
  require(ds.grid.has_value(), "even-stride subsampling needs gridded data");
  const TensorGrid& g = *ds.grid;
  require(static_cast<int>(mode.counts.size()) == g.dims(), "one target count per axis required");
  TensorGrid sub = g;
  std::vector<Eigen::Index> strides(g.dims());
  for (int j = 0; j < g.dims(); ++j) {
    const Eigen::Index src = g.axes[j].count, tgt = mode.counts[j];
    require(tgt >= 1 && tgt <= src, "target count exceeds the source axis");
    if (tgt == 1) {
      strides[j] = 1;
    } else {
      if ((src - 1) % (tgt - 1) != 0) {
        fail(ErrorKind::InvalidArgument, "axis of " + std::to_string(src) + " points has no integer stride to " +
                                             std::to_string(tgt));
      }
      strides[j] = (src - 1) / (tgt - 1);
    }
    sub.axes[j].count = tgt;
    sub.axes[j].step = g.axes[j].step * static_cast<double>(strides[j]);
  }
  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<size_t>(sub.size()));
  std::vector<Eigen::Index> idx(g.dims(), 0);
  for (Eigen::Index k = 0; k < sub.size(); ++k) {
    Eigen::Index flat = 0;
    for (int j = 0; j < g.dims(); ++j) flat = flat * g.axes[j].count + idx[j] * strides[j];
    rows.push_back(flat);
    for (int j = g.dims() - 1; j >= 0; --j) {
      if (++idx[j] < sub.axes[j].count) break;
      idx[j] = 0;
    }
  }
  Dataset out = select_rows(ds, rows);
  out.grid = sub;
  return out;
}

Dataset subsample(const Dataset& ds, const RandomSubset& mode) {
  ds.validate();
  require(mode.n >= 1 && mode.n <= ds.size(), "random subset size out of range");
  std::vector<Eigen::Index> all(static_cast<size_t>(ds.size()));
  std::iota(all.begin(), all.end(), 0);
  std::mt19937_64 rng(mode.seed);
  // Partial Fisher-Yates with explicit draws for portability.
  for (Eigen::Index i = 0; i < mode.n; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, ds.size() - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(static_cast<size_t>(mode.n));
  std::sort(all.begin(), all.end());
  Dataset out = select_rows(ds, all);
  out.grid.reset();
  return out;
}

Dataset interpolate_lf(const Dataset& coarse, const TensorGrid& fine) {
  coarse.validate();
  require(coarse.grid.has_value(), "interpolation needs gridded coarse data");
  const TensorGrid& g = *coarse.grid;
  require(g.dims() == fine.dims() && g.dims() >= 1 && g.dims() <= 2, "1-D or 2-D grids with matching dims");
  const int d = g.dims();
  // Per-axis bracketing index and weight.
  std::vector<std::vector<std::pair<Eigen::Index, double>>> brackets(d);
  for (int j = 0; j < d; ++j) {
    const Axis& a = g.axes[j];
    const double tol = 1e-9 * std::max(1.0, std::abs(a.last() - a.start));
    for (Eigen::Index i = 0; i < fine.axes[j].count; ++i) {
      const double v = fine.axes[j].at(i);
      if (v < a.start - tol || v > a.last() + tol) {
        fail(ErrorKind::OutOfDomain, "interpolation point " + std::to_string(v) + " lies outside the coarse grid");
      }
      double s = (v - a.start) / a.step;
      s = std::clamp(s, 0.0, static_cast<double>(a.count - 1));
      Eigen::Index lo = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(s)), std::max<Eigen::Index>(a.count - 2, 0));
      double w = s - static_cast<double>(lo);
      if (a.count == 1) {
        lo = 0;
        w = 0.0;
      }
      if (std::abs(w) < 1e-12) w = 0.0;
      if (std::abs(w - 1.0) < 1e-12) w = 1.0;
      brackets[j].push_back({lo, w});
    }
  }
  Dataset out;
  out.grid = fine;
  out.inputs = fine.points();
  out.input_names = coarse.input_names;
  out.channel_names = coarse.channel_names;
  out.fidelity = coarse.fidelity;
  out.provenance = coarse.provenance + "; linear interpolation";
  out.noise_sigma = coarse.noise_sigma;
  auto interp = [&](const Eigen::MatrixXd& src) {
    Eigen::MatrixXd dst(fine.size(), src.cols());
    if (d == 1) {
      for (Eigen::Index i = 0; i < fine.axes[0].count; ++i) {
        const auto [lo, w] = brackets[0][i];
        const Eigen::Index hi = std::min(lo + 1, g.axes[0].count - 1);
        dst.row(i) = (1.0 - w) * src.row(lo) + w * src.row(hi);
      }
      return dst;
    }
    const Eigen::Index nxc = g.axes[1].count;
    for (Eigen::Index it = 0; it < fine.axes[0].count; ++it) {
      const auto [t0, wt] = brackets[0][it];
      const Eigen::Index t1 = std::min(t0 + 1, g.axes[0].count - 1);
      for (Eigen::Index ix = 0; ix < fine.axes[1].count; ++ix) {
        const auto [x0, wx] = brackets[1][ix];
        const Eigen::Index x1 = std::min(x0 + 1, nxc - 1);
        dst.row(it * fine.axes[1].count + ix) =
            (1.0 - wt) * ((1.0 - wx) * src.row(t0 * nxc + x0) + wx * src.row(t0 * nxc + x1)) +
            wt * ((1.0 - wx) * src.row(t1 * nxc + x0) + wx * src.row(t1 * nxc + x1));
      }
    }
    return dst;
  };
  out.values = interp(coarse.values);
  if (coarse.clean) out.clean = interp(*coarse.clean);
  return out;
}

void save_csv(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::InvalidArgument, "cannot open " + path + " for writing");
  if (!ds.provenance.empty()) f << "# " << ds.provenance << "\n";
  std::vector<std::string> in = ds.input_names, ch = ds.channel_names;
  if (in.empty()) in = ds.dims() == 1 ? std::vector<std::string>{"t"} : std::vector<std::string>{"t", "x"};
  f << "# inputs=" << ds.dims() << "\n";
  if (ch.empty())
    for (int j = 0; j < ds.channels(); ++j) ch.push_back("u" + std::to_string(j + 1));
  for (size_t i = 0; i < in.size(); ++i) f << (i ? "," : "") << in[i];
  for (const auto& c : ch) f << "," << c;
  f << "\n";
  char buf[64];
  for (Eigen::Index r = 0; r < ds.size(); ++r) {
    for (int i = 0; i < ds.dims(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.inputs(i, r));
      f << (i ? "," : "") << buf;
    }
    for (int j = 0; j < ds.channels(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.values(r, j));
      f << "," << buf;
    }
    f << "\n";
  }
  if (!f) fail(ErrorKind::InvalidArgument, "failed writing " + path);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::ParseError, "cannot open " + path);
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::string provenance = path;
  size_t lineno = 0;
  int declared_dims = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("# inputs=", 0) == 0) {
      declared_dims = std::atoi(line.c_str() + 9);
      if (declared_dims != 1 && declared_dims != 2) {
        fail(ErrorKind::ParseError, path + ":" + std::to_string(lineno) + ": inputs must be 1 or 2");
      }
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    auto cells = split_csv(line);
    if (header.empty()) {
      header = cells;
      if (header.size() < 2 || header[0] != "t") {
        fail(ErrorKind::ParseError, path + ":" + std::to_string(lineno) + ": header must start with t");
      }
      continue;
    }
    if (cells.size() != header.size()) {
      fail(ErrorKind::ParseError, path + ":" + std::to_string(lineno) + ": expected " +
                                      std::to_string(header.size()) + " columns, found " +
                                      std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (c.empty() || used != c.size()) {
        fail(ErrorKind::ParseError, path + ":" + std::to_string(lineno) + ": not a number: '" + c + "'");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (header.empty()) fail(ErrorKind::ParseError, path + ": missing header");
  if (rows.empty()) fail(ErrorKind::ParseError, path + ": no data rows");
  // Without a marker, "t,x,<one channel>" is read as a space-time field.
  const int dims = declared_dims ? declared_dims : (header.size() == 3 && header[1] == "x") ? 2 : 1;
  if (static_cast<int>(header.size()) <= dims) fail(ErrorKind::ParseError, path + ": no value columns");
  const int ch = static_cast<int>(header.size()) - dims;
  Dataset ds;
  ds.inputs.resize(dims, static_cast<Eigen::Index>(rows.size()));
  ds.values.resize(static_cast<Eigen::Index>(rows.size()), ch);
  for (size_t r = 0; r < rows.size(); ++r) {
    for (int i = 0; i < dims; ++i) ds.inputs(i, r) = rows[r][i];
    for (int j = 0; j < ch; ++j) ds.values(r, j) = rows[r][dims + j];
  }
  ds.input_names.assign(header.begin(), header.begin() + dims);
  ds.channel_names.assign(header.begin() + dims, header.end());
  ds.provenance = provenance;
  ds.grid = detect_grid(ds.inputs);
  return ds;
}

std::optional<TensorGrid> detect_grid(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.cols();
  if (n < 2) return std::nullopt;
  auto uniform = [](const std::vector<double>& v) -> std::optional<Axis> {
    if (v.size() == 1) return Axis{v[0], 1.0, 1};
    const double h = v[1] - v[0];
    if (!(h > 0.0)) return std::nullopt;
    for (size_t i = 1; i < v.size(); ++i) {
      if (std::abs(v[i] - (v[0] + h * static_cast<double>(i))) > 1e-9 * std::max(1.0, std::abs(v[i]))) return std::nullopt;
    }
    return Axis{v[0], h, static_cast<Eigen::Index>(v.size())};
  };
  if (x.rows() == 1) {
    std::vector<double> t(x.data(), x.data() + n);
    auto a = uniform(t);
    if (!a) return std::nullopt;
    return TensorGrid{{*a}};
  }
  if (x.rows() != 2) return std::nullopt;
  Eigen::Index nx = 1;
  while (nx < n && x(0, nx) == x(0, 0)) ++nx;
  if (n % nx != 0) return std::nullopt;
  std::vector<double> xs(nx), ts(n / nx);
  for (Eigen::Index j = 0; j < nx; ++j) xs[j] = x(1, j);
  for (Eigen::Index i = 0; i < n / nx; ++i) ts[i] = x(0, i * nx);
  auto at = uniform(ts), ax = uniform(xs);
  if (!at || !ax) return std::nullopt;
  TensorGrid g{{*at, *ax}};
  if (((g.points() - x).cwiseAbs().maxCoeff()) > 1e-9 * std::max(1.0, x.cwiseAbs().maxCoeff())) return std::nullopt;
  return g;
}

}  // namespace gpsindy
