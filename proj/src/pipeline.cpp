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

#include "gpsindy/pipeline.hpp"

#include <cmath>

#include "gpsindy/errors.hpp"

namespace gpsindy {

namespace {

[[noreturn]] void rethrow_tagged(const Error& e, const std::string& tag) {
  fail(e.kind(), tag + ": " + e.what());
}

void check_inputs(const Dataset& data, const PredictionGrid& xp, const Library& lib) {
  data.validate();
  lib.validate();
  require(xp.size() >= 1, "prediction grid is empty");
  require(xp.dims() == data.dims(), "prediction grid dimension differs from the data");
  require(static_cast<int>(lib.state_names.size()) == data.channels(),
          "library " + lib.name + " expects " + std::to_string(lib.state_names.size()) + " channels, data has " +
              std::to_string(data.channels()));
  const int order = lib.max_derivative_order();
  if (order > 0) require(data.dims() == 2, "spatial derivative features need (t, x) inputs");
}

InferredFields allocate(Eigen::Index n, int channels, int max_order) {
  InferredFields f;
  f.bundle.state.resize(n, channels);
  for (int k = 0; k < max_order; ++k) f.bundle.spatial[k] = Eigen::MatrixXd(n, channels);
  f.time_derivative.resize(n, channels);
  f.time_variance.resize(n, channels);
  return f;
}

GpModel fit_channel(const Dataset& data, int c, const GpConfig& cfg) {
  const Eigen::VectorXd y = data.values.col(c);
  if (data.grid && data.grid->dims() == 2) return fit(*data.grid, y, cfg);
  return fit(data.inputs, y, cfg);
}

PosteriorField predict(const GpModel& m, const PredictionGrid& xp, int dim, int order, bool var) {
  if (m.backend() == GpModel::Backend::Kronecker && xp.grid) return m.predict(*xp.grid, dim, order, var);
  return m.predict(xp.points, dim, order, var);
}

std::string channel_tag(const Dataset& data, int c) {
  const std::string name = c < static_cast<int>(data.channel_names.size()) ? data.channel_names[c] : "";
  return "channel " + std::to_string(c) + (name.empty() ? "" : " (" + name + ")");
}

}  // namespace

PredictionGrid PredictionGrid::from_points(Eigen::MatrixXd points) {
  require(points.cols() >= 1 && points.allFinite(), "prediction points must be finite and non-empty");
  PredictionGrid g;
  g.points = std::move(points);
  return g;
}

PredictionGrid PredictionGrid::from_grid(const TensorGrid& grid) {
  PredictionGrid g;
  g.points = grid.points();
  g.grid = grid;
  require(g.points.cols() >= 1, "prediction grid is empty");
  return g;
}

DiscoveryResult discover(InferredFields fields, const PredictionGrid& xp, const Library& lib,
                         const StwlsConfig& stwls_cfg) {
  stwls_cfg.validate();
  const Eigen::MatrixXd phi = build_matrix(lib, fields.bundle);
  const int d = static_cast<int>(fields.time_derivative.cols());
  DiscoveryResult out;
  out.coefficients.resize(phi.cols(), d);
  for (int c = 0; c < d; ++c) {
    const Eigen::VectorXd var = fields.time_variance.col(c).cwiseMax(kVarianceFloor);
    const Eigen::VectorXd w = var.cwiseInverse();
    try {
      out.solutions.push_back(stwls(phi, fields.time_derivative.col(c), w, stwls_cfg));
    } catch (const Error& e) {
      rethrow_tagged(e, "channel " + std::to_string(c));
    }
    out.coefficients.col(c) = out.solutions.back().coefficients;
  }
  out.feature_names = lib.names();
  out.channel_names = lib.state_names;
  out.grid = xp;
  out.fields = std::move(fields);
  return out;
}

DiscoveryResult gp_sindy(const Dataset& data, const PredictionGrid& xp, const Library& lib,
                         const StwlsConfig& stwls_cfg, const GpConfig& gp_cfg) {
  check_inputs(data, xp, lib);
  stwls_cfg.validate();
  gp_cfg.validate();
  const int d = data.channels();
  const int max_order = lib.max_derivative_order();
  InferredFields fields = allocate(xp.size(), d, max_order);
  std::vector<SurrogateSummary> summaries;
  for (int c = 0; c < d; ++c) {
    try {
      const GpModel m = fit_channel(data, c, gp_cfg);
      fields.bundle.state.col(c) = predict(m, xp, 0, 0, false).mean;
      const PosteriorField dt = predict(m, xp, 0, 1, true);
      fields.time_derivative.col(c) = dt.mean;
      fields.time_variance.col(c) = dt.variance;
      for (int k = 1; k <= max_order; ++k) fields.bundle.spatial[k - 1]->col(c) = predict(m, xp, 1, k, false).mean;
      SurrogateSummary s;
      s.log_hyperparams = m.hyperparams().to_log();
      s.noise_variance = m.noise_variance();
      s.nlml = m.nlml_value();
      s.target_scale = m.scale();
      summaries.push_back(std::move(s));
    } catch (const Error& e) {
      rethrow_tagged(e, channel_tag(data, c));
    }
  }
  DiscoveryResult out = discover(std::move(fields), xp, lib, stwls_cfg);
  out.surrogates = std::move(summaries);
  if (!data.channel_names.empty()) out.channel_names = data.channel_names;
  return out;
}

DiscoveryResult mfgp_sindy(const Dataset& data_lf, const Dataset& data_hf, const PredictionGrid& xp,
                           const Library& lib, const StwlsConfig& stwls_cfg, const MfgpConfig& cfg) {
  check_inputs(data_hf, xp, lib);
  data_lf.validate();
  require(data_lf.dims() == data_hf.dims(), "LF and HF data differ in input dimension");
  require(data_lf.channels() == data_hf.channels(), "LF and HF data differ in channel count");
  stwls_cfg.validate();
  cfg.low.validate();
  cfg.high.validate();
  const int d = data_hf.channels();
  const int max_order = lib.max_derivative_order();
  InferredFields fields = allocate(xp.size(), d, max_order);
  std::vector<SurrogateSummary> summaries;
  for (int c = 0; c < d; ++c) {
    try {
      GpModel low;
      try {
        low = fit_channel(data_lf, c, cfg.low);
      } catch (const Error& e) {
        rethrow_tagged(e, "low-fidelity level");
      }
      const MfgpModel m = mfgp_fit(std::move(low), data_hf.inputs, data_hf.values.col(c), cfg, data_hf.grid);
      fields.bundle.state.col(c) = m.predict(xp.points, 0, 0, false).mean;
      const PosteriorField dt = m.predict(xp.points, 0, 1, true);
      fields.time_derivative.col(c) = dt.mean;
      fields.time_variance.col(c) = dt.variance;
      for (int k = 1; k <= max_order; ++k) fields.bundle.spatial[k - 1]->col(c) = m.predict(xp.points, 1, k, false).mean;
      SurrogateSummary s;
      s.log_hyperparams = m.hyperparams().to_log();
      s.noise_variance = m.noise_variance();
      s.low_noise_variance = m.low_noise_variance();
      s.nlml = m.nlml_value();
      s.target_scale = m.scale();
      summaries.push_back(std::move(s));
    } catch (const Error& e) {
      rethrow_tagged(e, channel_tag(data_hf, c));
    }
  }
  DiscoveryResult out = discover(std::move(fields), xp, lib, stwls_cfg);
  out.surrogates = std::move(summaries);
  if (!data_hf.channel_names.empty()) out.channel_names = data_hf.channel_names;
  return out;
}

}  // namespace gpsindy
