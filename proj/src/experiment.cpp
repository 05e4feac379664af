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

#include "gpsindy/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gpsindy/errors.hpp"
#include "gpsindy/metrics.hpp"
#include "json.hpp"

namespace gpsindy {

namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names{
      {ExperimentKind::Lorenz, "lorenz"},
      {ExperimentKind::BurgersSf, "burgers-sf"},
      {ExperimentKind::BurgersMf, "burgers-mf"},
      {ExperimentKind::BurgersAltLf, "burgers-altlf"},
      {ExperimentKind::BurgersLfOnly, "burgers-lfonly"},
      {ExperimentKind::KdvSf, "kdv-sf"},
      {ExperimentKind::KdvMf, "kdv-mf"},
      {ExperimentKind::CustomFromFiles, "custom-from-files"},
  };
  return names;
}

const std::vector<std::string>& standard_library_names() {
  static const std::vector<std::string> names{"lorenz-poly3", "burgers-10", "kdv-15"};
  return names;
}

[[noreturn]] void config_error(const std::string& what) { fail(ErrorKind::ConfigError, what); }

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    config_error(key + ": expected a number, got '" + text + "'");
  }
}

long long parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    config_error(key + ": expected an integer, got '" + text + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  config_error(key + ": expected true or false, got '" + text + "'");
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ','))
    if (!item.empty()) out.push_back(parse_double(key, item));
  return out;
}

GridSize parse_size(const std::string& key, const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) config_error(key + ": expected ROWSxCOLS, got '" + text + "'");
  return {parse_int(key, trim(text.substr(0, x))), parse_int(key, trim(text.substr(x + 1)))};
}

double burgers_ic(double x) { return -std::sin(std::numbers::pi * x / 8.0); }
double kdv_ic(double x) {
  return std::exp(-std::numbers::pi * (x / 30.0) * (x / 30.0)) * std::cos(std::numbers::pi * x / 10.0);
}

constexpr double kBurgersNu = 0.5;

GridSpec time_only(double t_end, double dt) {
  GridSpec g;
  g.t_end = t_end;
  g.dt = dt;
  return g;
}

// Spacing that splits [a, b] into n - 1 equal steps.
double step_for(double a, double b, Eigen::Index n) { return (b - a) / static_cast<double>(n - 1); }

GridSpec training_grid(const DataSpec& d, const GridSize& s) {
  GridSpec g;
  g.t_end = d.t_end;
  g.dt = step_for(0.0, d.t_end, s.nt);
  g.x_start = d.x_start;
  g.x_end = d.x_end;
  g.dx = step_for(d.x_start, d.x_end, s.nx);
  g.periodic = true;
  return g;
}

GridSpec coarse_grid(const DataSpec& d) {
  GridSpec g;
  g.t_end = d.t_end;
  g.dt = d.lf_coarse_dt;
  g.x_start = d.x_start;
  g.x_end = d.x_end;
  g.dx = d.lf_coarse_dx;
  g.periodic = true;
  return g;
}

bool is_pde(ExperimentKind k) { return k != ExperimentKind::Lorenz && k != ExperimentKind::CustomFromFiles; }

bool uses_low(ExperimentKind k) {
  return k == ExperimentKind::BurgersMf || k == ExperimentKind::BurgersAltLf || k == ExperimentKind::BurgersLfOnly ||
         k == ExperimentKind::KdvMf;
}

std::uint64_t low_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

void check_keys(const pt::ptree& section, const std::string& name, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : section) {
    if (!value.empty()) config_error("[" + name + "] is not a section with plain keys");
    if (!allowed.count(key)) config_error("unknown key '" + key + "' in [" + name + "]");
  }
}

void apply_gp(const pt::ptree& s, const std::string& name, GpConfig& gp) {
  check_keys(s, name,
             {"restarts", "seed", "iterations", "train_cap", "condition_on_full", "noise_floor", "init_low",
              "init_high", "kronecker"});
  for (const auto& [key, value] : s) {
    const std::string v = trim(value.data());
    const std::string k = name + "." + key;
    if (key == "restarts") gp.restarts = static_cast<int>(parse_int(k, v));
    else if (key == "seed") gp.seed = static_cast<std::uint64_t>(parse_int(k, v));
    else if (key == "iterations") gp.rprop.iterations = static_cast<int>(parse_int(k, v));
    else if (key == "train_cap") gp.train_cap = parse_int(k, v);
    else if (key == "condition_on_full") gp.condition_on_full = parse_bool(k, v);
    else if (key == "noise_floor") gp.noise_floor = parse_double(k, v);
    else if (key == "init_low") gp.init_low = parse_double(k, v);
    else if (key == "init_high") gp.init_high = parse_double(k, v);
    else if (key == "kronecker") gp.use_kronecker = parse_bool(k, v);
  }
}

void validate_gp(const GpConfig& gp, const std::string& name) {
  try {
    gp.validate();
  } catch (const Error& e) {
    config_error(name + ": " + e.what());
  }
}

PredictionGrid prediction_grid(const ExperimentConfig& cfg, const Dataset& hf) {
  if (cfg.prediction.on_training) {
    if (hf.grid) return PredictionGrid::from_grid(*hf.grid);
    return PredictionGrid::from_points(hf.inputs);
  }
  GridSpec g;
  const Eigen::VectorXd t = hf.inputs.row(0).transpose();
  g.t_end = t.maxCoeff();
  g.dt = cfg.prediction.dt;
  if (hf.dims() == 2) {
    const Eigen::VectorXd x = hf.inputs.row(1).transpose();
    g.x_start = x.minCoeff();
    g.x_end = x.maxCoeff();
    g.dx = cfg.prediction.dx;
  }
  if (t.minCoeff() != 0.0) {
    // Shift so the grid starts at the first sample time.
    TensorGrid tg = g.has_space() ? GridSpec{t.maxCoeff() - t.minCoeff(), g.dt, g.x_start, g.x_end, g.dx, false}.tensor()
                                  : time_only(t.maxCoeff() - t.minCoeff(), g.dt).tensor();
    tg.axes[0].start = t.minCoeff();
    return PredictionGrid::from_grid(tg);
  }
  return PredictionGrid::from_spec(g);
}

void write_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + tmp.string());
    out << text;
    if (!out) fail(ErrorKind::InvalidArgument, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fields_csv(const RunRecord& r, const std::vector<std::string>& input_names) {
  const DiscoveryResult& d = *r.result;
  const InferredFields& f = d.fields;
  std::ostringstream out;
  const int dims = d.grid.dims();
  for (int j = 0; j < dims; ++j) out << (j ? "," : "") << (j < static_cast<int>(input_names.size()) ? input_names[j] : "x" + std::to_string(j));
  static const char* suffix[] = {"_x", "_xx", "_xxx"};
  for (std::size_t c = 0; c < d.channel_names.size(); ++c) {
    const std::string& n = d.channel_names[c];
    out << "," << n << "," << n << "_t," << n << "_t_var";
    for (int k = 0; k < kMaxSpatialOrder; ++k)
      if (f.bundle.spatial[k]) out << "," << n << suffix[k];
  }
  out << "\n";
  for (Eigen::Index i = 0; i < d.grid.size(); ++i) {
    for (int j = 0; j < dims; ++j) out << (j ? "," : "") << fmt(d.grid.points(j, i));
    for (std::size_t c = 0; c < d.channel_names.size(); ++c) {
      out << "," << fmt(f.bundle.state(i, c)) << "," << fmt(f.time_derivative(i, c)) << ","
          << fmt(f.time_variance(i, c));
      for (int k = 0; k < kMaxSpatialOrder; ++k)
        if (f.bundle.spatial[k]) out << "," << fmt((*f.bundle.spatial[k])(i, c));
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, n] : kind_names())
    if (k == kind) return n;
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (const auto& [k, n] : kind_names())
    if (n == name) return k;
  config_error("unknown experiment kind '" + name + "'");
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, n] : kind_names()) out.push_back(n);
  return out;
}

ExperimentConfig preset(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.name = to_string(kind);
  c.output_dir = "out/" + c.name;
  c.seeds.clear();
  for (std::uint64_t s = 0; s < 10; ++s) c.seeds.push_back(s);
  std::vector<double> half_steps;
  for (int i = 0; i <= 10; ++i) half_steps.push_back(i / 2.0);

  auto burgers = [&](GridSize hf) {
    c.data.t_end = 10.0;
    c.data.dt = 0.002;
    c.data.solver_dt = 0.002;
    c.data.x_start = -8.0;
    c.data.x_end = 8.0;
    c.data.dx = 0.00625;
    c.data.hf = hf;
    c.data.lf_coarse_dt = 0.25;
    c.data.lf_coarse_dx = 0.5;
    c.prediction = {false, 0.1, 0.0625};
    c.library = "burgers-10";
    c.truth = "burgers";
    c.stwls = StwlsConfig{half_steps, 150.0, 20, 10};
  };
  auto kdv = [&]() {
    c.data.t_end = 40.0;
    c.data.dt = 0.002;
    c.data.solver_dt = 0.002;
    c.data.x_start = -20.0;
    c.data.x_end = 20.0;
    c.data.dx = 0.015625;
    c.data.hf = {41, 81};
    c.data.lf = {41, 129};
    c.data.lf_coarse_dt = 0.1;
    c.data.lf_coarse_dx = 1.25;
    c.prediction = {false, 0.4, 0.15625};
    c.library = "kdv-15";
    c.truth = "kdv";
    c.stwls = StwlsConfig{half_steps, 150.0, 20, 10};
    c.noise_ratios = {0.03};
  };
  // Dense MFGP training above ~700 HF points does not fit the runtime budget.
  auto mf_caps = [&]() { c.gp.train_cap = 700; };

  switch (kind) {
    case ExperimentKind::Lorenz:
      c.data.t_end = 10.0;
      c.data.dt = 0.001;
      c.prediction.on_training = true;
      c.library = "lorenz-poly3";
      c.truth = "lorenz";
      c.stwls = StwlsConfig{{1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5}, 5.0, 20, 10};
      c.gp.train_cap = 626;
      c.gp.condition_on_full = false;
      c.noise_ratios = {0.05, 0.1};
      break;
    case ExperimentKind::BurgersSf:
      burgers({41, 65});
      c.noise_ratios = {0.02, 0.1, 0.2};
      break;
    case ExperimentKind::BurgersMf:
      burgers({41, 65});
      c.data.lf = {51, 81};
      c.noise_ratios = {0.1, 0.2};
      mf_caps();
      break;
    case ExperimentKind::BurgersAltLf:
      burgers({41, 33});
      c.data.lf = {41, 33};
      c.noise_ratios = {0.1};
      mf_caps();
      break;
    case ExperimentKind::BurgersLfOnly:
      burgers({41, 65});
      c.data.lf = {51, 81};
      c.noise_ratios = {0.2};
      break;
    case ExperimentKind::KdvSf:
      kdv();
      break;
    case ExperimentKind::KdvMf:
      kdv();
      mf_caps();
      break;
    case ExperimentKind::CustomFromFiles:
      c.prediction.on_training = true;
      c.noise_ratios = {0.0};
      c.seeds = {0};
      c.stwls = StwlsConfig{{0.0, 0.1, 1.0}, 1.0, 20, 10};
      break;
  }
  c.gp_low = c.gp;
  c.gp_low.train_cap = 0;
  return c;
}

bool ExperimentConfig::multi_fidelity() const {
  if (kind == ExperimentKind::CustomFromFiles) return !data.lf_file.empty();
  return kind == ExperimentKind::BurgersMf || kind == ExperimentKind::BurgersAltLf || kind == ExperimentKind::KdvMf;
}

Library ExperimentConfig::resolve_library() const {
  if (auto it = custom_libraries.find(library); it != custom_libraries.end()) return it->second;
  if (std::find(standard_library_names().begin(), standard_library_names().end(), library) !=
      standard_library_names().end())
    return standard_library(library);
  config_error("unknown library '" + library + "'");
}

void ExperimentConfig::validate() const {
  if (noise_ratios.empty()) config_error("experiment.noise_ratios: at least one value is required");
  for (double s : noise_ratios)
    if (!(s >= 0.0) || !std::isfinite(s)) config_error("experiment.noise_ratios: values must be finite and >= 0");
  if (seeds.empty()) config_error("experiment.seeds: at least one seed is required");
  if (workers < 1) config_error("experiment.workers must be >= 1");
  if (!(timeout_seconds >= 0.0)) config_error("experiment.timeout must be >= 0");
  if (output_dir.empty()) config_error("experiment.output must not be empty");
  stwls.validate();
  validate_gp(gp, "gp");
  validate_gp(gp_low, "gp_low");
  if (library.empty()) config_error("library.name is required");
  const Library lib = resolve_library();
  if (!truth.empty()) {
    const auto names = truth_preset_names();
    if (std::find(names.begin(), names.end(), truth) == names.end())
      config_error("unknown truth preset '" + truth + "'");
    const TruthSpec t = truth_preset(truth);
    if (t.library != lib.name || t.coefficients.rows() != static_cast<Eigen::Index>(lib.size()))
      config_error("truth preset '" + truth + "' is defined on library " + t.library + ", not " + lib.name);
  }
  if (!prediction.on_training) {
    if (!(prediction.dt > 0.0)) config_error("prediction.dt must be > 0");
    if (lib.max_derivative_order() > 0 || is_pde(kind))
      if (!(prediction.dx > 0.0)) config_error("prediction.dx must be > 0");
  }
  try {
    if (kind == ExperimentKind::CustomFromFiles) {
      if (data.hf_file.empty()) config_error("data.hf_file is required for custom-from-files");
      for (const std::string& f : {data.hf_file, data.lf_file})
        if (!f.empty() && !fs::is_regular_file(f)) config_error("data file not found: " + f);
    } else if (kind == ExperimentKind::Lorenz) {
      time_only(data.t_end, data.dt).validate();
      if (lib.state_names.size() != 3) config_error("lorenz data has 3 channels; library " + lib.name + " does not");
    } else {
      if (!(data.solver_dt > 0.0) || !(data.dx > 0.0)) config_error("data.solver_dt and data.dx must be > 0");
      if (lib.state_names.size() != 1) config_error("PDE data has one channel; library " + lib.name + " does not");
      if (kind != ExperimentKind::BurgersLfOnly) {
        if (data.hf.nt < 2 || data.hf.nx < 2) config_error("data.hf_size must be at least 2x2");
        const GridSpec g = training_grid(data, data.hf);
        g.validate();
        const double ratio = *g.dx / data.dx;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
          config_error("data.hf_size spacing is not a multiple of data.dx");
      }
      if (uses_low(kind)) {
        if (data.lf.nt < 2 || data.lf.nx < 2) config_error("data.lf_size must be at least 2x2");
        training_grid(data, data.lf).validate();
        coarse_grid(data).validate();
      }
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    config_error(std::string("data: ") + e.what());
  }
}

Library parse_custom_library(const std::string& name, const std::vector<std::string>& states,
                             const std::string& terms) {
  if (states.empty()) config_error("library." + name + ".states is empty");
  std::vector<FeatureDescriptor> feats;
  for (const std::string& term : split(terms, ';')) {
    if (term.empty()) continue;
    FeatureDescriptor f;
    const auto bar = term.find('|');
    const std::string key = "library." + name + ".terms";
    for (const std::string& p : split(term.substr(0, bar), ',')) f.powers.push_back(static_cast<int>(parse_int(key, p)));
    if (f.powers.size() != states.size())
      config_error(key + ": term '" + term + "' needs " + std::to_string(states.size()) + " state powers");
    if (bar != std::string::npos) {
      const auto q = split(term.substr(bar + 1), ',');
      if (q.size() > static_cast<std::size_t>(kMaxSpatialOrder))
        config_error(key + ": at most " + std::to_string(kMaxSpatialOrder) + " derivative powers");
      for (std::size_t k = 0; k < q.size(); ++k) f.derivative_powers[k] = static_cast<int>(parse_int(key, q[k]));
    }
    feats.push_back(f);
  }
  if (feats.empty()) config_error("library." + name + ".terms is empty");
  try {
    return custom_library(name, states, feats);
  } catch (const Error& e) {
    config_error("library." + name + ": " + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  pt::ptree root;
  try {
    pt::read_ini(path, root);
  } catch (const pt::ini_parser_error& e) {
    config_error(e.what());
  }
  const auto exp_it = root.find("experiment");
  if (exp_it == root.not_found()) config_error(path + ": missing [experiment] section");
  const pt::ptree& exp = exp_it->second;
  const auto kind_text = exp.get_optional<std::string>("kind");
  if (!kind_text) config_error(path + ": experiment.kind is required");
  ExperimentConfig c = preset(parse_experiment_kind(trim(*kind_text)));

  for (const auto& [section, body] : root) {
    if (body.empty() && !body.data().empty()) config_error("key '" + section + "' outside any section");
    auto value = [&](const std::string& key) { return trim(body.get<std::string>(key)); };
    if (section == "experiment") {
      check_keys(body, section, {"kind", "name", "noise_ratios", "seeds", "output", "workers", "timeout", "emit_fields"});
      for (const auto& [key, v] : body) {
        const std::string k = section + "." + key;
        const std::string t = trim(v.data());
        if (key == "name") c.name = t;
        else if (key == "noise_ratios") c.noise_ratios = parse_doubles(k, t);
        else if (key == "seeds") {
          c.seeds.clear();
          for (const auto& s : split(t, ','))
            if (!s.empty()) {
              const long long n = parse_int(k, s);
              if (n < 0) config_error(k + ": seeds must be non-negative");
              c.seeds.push_back(static_cast<std::uint64_t>(n));
            }
        } else if (key == "output") c.output_dir = t;
        else if (key == "workers") c.workers = static_cast<int>(parse_int(k, t));
        else if (key == "timeout") c.timeout_seconds = parse_double(k, t);
        else if (key == "emit_fields") c.emit_fields = parse_bool(k, t);
      }
    } else if (section == "data") {
      check_keys(body, section,
                 {"t_end", "dt", "x_start", "x_end", "dx", "solver_dt", "hf_size", "lf_size", "lf_coarse_dt",
                  "lf_coarse_dx", "hf_file", "lf_file"});
      DataSpec& d = c.data;
      for (const auto& [key, v] : body) {
        const std::string k = section + "." + key;
        const std::string t = trim(v.data());
        if (key == "t_end") d.t_end = parse_double(k, t);
        else if (key == "dt") d.dt = parse_double(k, t);
        else if (key == "x_start") d.x_start = parse_double(k, t);
        else if (key == "x_end") d.x_end = parse_double(k, t);
        else if (key == "dx") d.dx = parse_double(k, t);
        else if (key == "solver_dt") d.solver_dt = parse_double(k, t);
        else if (key == "hf_size") d.hf = parse_size(k, t);
        else if (key == "lf_size") d.lf = parse_size(k, t);
        else if (key == "lf_coarse_dt") d.lf_coarse_dt = parse_double(k, t);
        else if (key == "lf_coarse_dx") d.lf_coarse_dx = parse_double(k, t);
        else if (key == "hf_file" || key == "lf_file") {
          fs::path p(t);
          if (!t.empty() && p.is_relative()) p = fs::path(path).parent_path() / p;
          (key == "hf_file" ? d.hf_file : d.lf_file) = t.empty() ? "" : p.lexically_normal().string();
        }
      }
    } else if (section == "prediction") {
      check_keys(body, section, {"mode", "dt", "dx"});
      for (const auto& [key, v] : body) {
        const std::string k = section + "." + key;
        const std::string t = trim(v.data());
        if (key == "mode") {
          if (t != "grid" && t != "training") config_error(k + ": expected grid or training");
          c.prediction.on_training = t == "training";
        } else if (key == "dt") c.prediction.dt = parse_double(k, t);
        else if (key == "dx") c.prediction.dx = parse_double(k, t);
      }
    } else if (section == "library") {
      check_keys(body, section, {"name", "truth"});
      if (body.count("name")) c.library = value("name");
      if (body.count("truth")) {
        c.truth = value("truth");
        if (c.truth == "none") c.truth.clear();
      }
    } else if (section.rfind("library:", 0) == 0) {
      const std::string name = trim(section.substr(8));
      check_keys(body, section, {"states", "terms"});
      if (!body.count("states") || !body.count("terms")) config_error("[" + section + "] needs states and terms");
      std::vector<std::string> states;
      for (const auto& s : split(value("states"), ','))
        if (!s.empty()) states.push_back(s);
      if (std::find(standard_library_names().begin(), standard_library_names().end(), name) !=
          standard_library_names().end())
        config_error("custom library name '" + name + "' shadows a standard library");
      c.custom_libraries[name] = parse_custom_library(name, states, value("terms"));
    } else if (section == "stwls") {
      check_keys(body, section, {"lambdas", "eta", "outer", "inner"});
      for (const auto& [key, v] : body) {
        const std::string k = section + "." + key;
        const std::string t = trim(v.data());
        if (key == "lambdas") c.stwls.lambdas = parse_doubles(k, t);
        else if (key == "eta") c.stwls.eta = parse_double(k, t);
        else if (key == "outer") c.stwls.outer = static_cast<int>(parse_int(k, t));
        else if (key == "inner") c.stwls.inner = static_cast<int>(parse_int(k, t));
      }
    } else if (section == "gp") {
      apply_gp(body, section, c.gp);
      c.gp_low = c.gp;
      c.gp_low.train_cap = 0;
    } else if (section == "gp_low") {
    } else {
      config_error("unknown section [" + section + "]");
    }
  }
  // [gp_low] inherits from [gp] wherever it appears in the file.
  if (const auto low = root.find("gp_low"); low != root.not_found()) apply_gp(low->second, "gp_low", c.gp_low);
  c.validate();
  return c;
}

std::string list_presets(const ExperimentConfig* config, bool names_only) {
  std::ostringstream out;
  if (names_only) {
    for (const auto& n : preset_names()) out << n << "\n";
    return out.str();
  }
  out << "experiments:\n";
  for (const auto& n : preset_names()) {
    const ExperimentConfig c = preset(parse_experiment_kind(n));
    out << "  " << n;
    if (!c.library.empty()) out << "  (library " << c.library << ", truth " << (c.truth.empty() ? "none" : c.truth) << ")";
    out << "\n";
  }
  out << "libraries:\n";
  for (const auto& n : standard_library_names()) out << "  " << n << "  (" << standard_library(n).size() << " terms)\n";
  if (config)
    for (const auto& [n, lib] : config->custom_libraries) out << "  " << n << "  (" << lib.size() << " terms, custom)\n";
  out << "truth:\n";
  for (const auto& n : truth_preset_names()) out << "  " << n << "  (library " << truth_preset(n).library << ")\n";
  return out.str();
}

bool ExperimentReport::any_failed() const {
  return std::any_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.status != "ok"; });
}

CleanData generate_clean(const ExperimentConfig& cfg) {
  const DataSpec& d = cfg.data;
  CleanData out;
  switch (cfg.kind) {
    case ExperimentKind::Lorenz:
      out.high = lorenz_dataset(time_only(d.t_end, d.dt));
      out.high.channel_names = {"x", "y", "z"};
      break;
    case ExperimentKind::CustomFromFiles:
      out.high = load_csv(d.hf_file);
      if (!d.lf_file.empty()) out.low = load_csv(d.lf_file);
      break;
    case ExperimentKind::BurgersSf:
    case ExperimentKind::BurgersMf:
    case ExperimentKind::BurgersAltLf:
    case ExperimentKind::BurgersLfOnly: {
      const SpectralOptions opt{d.dx, d.solver_dt};
      if (cfg.kind != ExperimentKind::BurgersLfOnly)
        out.high = solve_burgers_hf(training_grid(d, d.hf), kBurgersNu, burgers_ic, opt);
      if (uses_low(cfg.kind)) {
        const LowFidelityMode mode =
            cfg.kind == ExperimentKind::BurgersAltLf ? LowFidelityMode::LinearHeat : LowFidelityMode::CoarseFd;
        Dataset coarse = solve_burgers_lf(coarse_grid(d), kBurgersNu, burgers_ic, mode);
        out.low = interpolate_lf(coarse, training_grid(d, d.lf).tensor());
      }
      if (cfg.kind == ExperimentKind::BurgersLfOnly) {
        out.high = *out.low;
        out.low.reset();
      }
      break;
    }
    case ExperimentKind::KdvSf:
    case ExperimentKind::KdvMf: {
      out.high = solve_kdv_hf(training_grid(d, d.hf), kdv_ic, SpectralOptions{d.dx, d.solver_dt});
      if (cfg.kind == ExperimentKind::KdvMf) {
        const Dataset coarse = solve_kdv_hf(coarse_grid(d), kdv_ic, SpectralOptions{d.lf_coarse_dx, d.lf_coarse_dt});
        out.low = interpolate_lf(coarse, training_grid(d, d.lf).tensor());
        out.low->fidelity = Fidelity::Low;
      }
      break;
    }
  }
  return out;
}

RunRecord run_single(const ExperimentConfig& cfg, const CleanData& clean, double noise_ratio, std::uint64_t seed) {
  RunRecord rec;
  rec.noise_ratio = noise_ratio;
  rec.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<Deadline> deadline;
  if (cfg.timeout_seconds > 0.0) deadline.emplace(cfg.timeout_seconds);
  try {
    const Library lib = cfg.resolve_library();
    GpConfig gp = cfg.gp;
    GpConfig gp_low = cfg.gp_low;
    gp.seed += seed;
    gp_low.seed += seed;
    gp.deadline = gp_low.deadline = deadline ? &*deadline : nullptr;

    const Dataset high = add_noise(clean.high, noise_ratio, seed);
    const PredictionGrid xp = prediction_grid(cfg, high);
    DiscoveryResult r;
    if (cfg.multi_fidelity()) {
      const Dataset low = add_noise(*clean.low, noise_ratio, low_seed(seed));
      r = mfgp_sindy(low, high, xp, lib, cfg.stwls, MfgpConfig{gp_low, gp});
    } else {
      r = gp_sindy(high, xp, lib, cfg.stwls, gp);
    }
    if (deadline) deadline->check("run");
    rec.coefficients = r.coefficients;
    if (!cfg.truth.empty()) {
      const TruthSpec t = truth_preset(cfg.truth);
      rec.e_inf = e_inf(r.coefficients, t.coefficients);
      rec.e_2 = e_2(r.coefficients, t.coefficients);
      rec.tpr = tpr(r.coefficients, t.coefficients);
    }
    if (cfg.emit_fields) rec.result = std::move(r);
  } catch (const Error& e) {
    rec.status = e.kind() == ErrorKind::Timeout ? "timeout" : "failed:" + std::string(to_string(e.kind()));
    rec.message = e.what();
  } catch (const std::exception& e) {
    rec.status = "failed:internal";
    rec.message = e.what();
  }
  rec.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  CleanData clean;
  try {
    clean = generate_clean(cfg);
  } catch (const Error& e) {
    if (cfg.kind == ExperimentKind::CustomFromFiles && e.kind() == ErrorKind::ParseError) config_error(e.what());
    throw;
  }
  const Library lib = cfg.resolve_library();
  if (clean.high.channels() != static_cast<int>(lib.state_names.size()))
    config_error("library " + lib.name + " expects " + std::to_string(lib.state_names.size()) +
                 " channels, data has " + std::to_string(clean.high.channels()));

  std::vector<std::pair<double, std::uint64_t>> jobs;
  for (double s : cfg.noise_ratios)
    for (std::uint64_t seed : cfg.seeds) jobs.emplace_back(s, seed);

  ExperimentReport report;
  report.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < jobs.size(); i = next++)
      report.runs[i] = run_single(cfg, clean, jobs[i].first, jobs[i].second);
  };
  const int n = std::min<int>(cfg.workers, static_cast<int>(jobs.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  report.feature_names = lib.names();
  report.channel_names = clean.high.channel_names.empty() ? lib.state_names : clean.high.channel_names;
  return report;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentReport& report) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  std::ostringstream coef;
  coef << "sigma_nr,seed,feature";
  for (const auto& c : report.channel_names) coef << "," << c;
  coef << "\n";
  std::ostringstream metrics;
  metrics << "sigma_nr,seed,status,e_inf,e_2,tpr\n";
  std::ostringstream timing;
  timing << "sigma_nr,seed,runtime_s\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const RunRecord& r : report.runs) {
    if (r.status == "ok") {
      for (Eigen::Index i = 0; i < r.coefficients.rows(); ++i) {
        coef << fmt(r.noise_ratio) << "," << r.seed << "," << report.feature_names[i];
        for (Eigen::Index c = 0; c < r.coefficients.cols(); ++c) coef << "," << fmt(r.coefficients(i, c));
        coef << "\n";
      }
    }
    metrics << fmt(r.noise_ratio) << "," << r.seed << "," << r.status << "," << fmt(r.e_inf.value_or(nan)) << ","
            << fmt(r.e_2.value_or(nan)) << "," << fmt(r.tpr.value_or(nan)) << "\n";
    timing << fmt(r.noise_ratio) << "," << r.seed << "," << fmt(r.runtime_seconds) << "\n";
  }
  write_atomic(dir / "coefficients.csv", coef.str());
  write_atomic(dir / "metrics.csv", metrics.str());
  write_atomic(dir / "timing.csv", timing.str());

  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (double s : cfg.noise_ratios) {
    std::vector<double> ei, e2, tp;
    for (const RunRecord& r : report.runs)
      if (r.noise_ratio == s && r.status == "ok" && r.e_2) {
        ei.push_back(*r.e_inf);
        e2.push_back(*r.e_2);
        tp.push_back(*r.tpr);
      }
    nlohmann::ordered_json row;
    row["experiment"] = cfg.name;
    row["sigma_nr"] = s;
    row["median_e_inf"] = ei.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(median(ei));
    row["median_e_2"] = e2.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(median(e2));
    row["median_tpr"] = tp.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(median(tp));
    row["n_seeds"] = e2.size();
    summary.push_back(row);
  }
  write_atomic(dir / "summary.json", summary.dump(2) + "\n");

  if (cfg.emit_fields) {
    const fs::path fdir = dir / "fields";
    fs::create_directories(fdir);
    const std::vector<std::string> inputs{"t", "x"};
    for (const RunRecord& r : report.runs)
      if (r.status == "ok" && r.result)
        write_atomic(fdir / ("sigma_" + short_fmt(r.noise_ratio) + "_seed_" + std::to_string(r.seed) + ".csv"),
                     fields_csv(r, inputs));
  }
}

}  // namespace gpsindy
