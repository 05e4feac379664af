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

#ifndef GPSINDY_SIMDATA_HPP
#define GPSINDY_SIMDATA_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpsindy/grid.hpp"

namespace gpsindy {

enum class Fidelity { High, Low };

struct Dataset {
  Eigen::MatrixXd inputs;  // D x N
  Eigen::MatrixXd values;  // N x d
  std::vector<std::string> input_names;
  std::vector<std::string> channel_names;
  Fidelity fidelity = Fidelity::High;
  std::string provenance;
  std::optional<Eigen::MatrixXd> clean;
  // Present when the rows form a time-major tensor grid.
  std::optional<TensorGrid> grid;
  double noise_sigma = 0.0;

  Eigen::Index size() const { return values.rows(); }
  int dims() const { return static_cast<int>(inputs.rows()); }
  int channels() const { return static_cast<int>(values.cols()); }
  void validate() const;
};

using OdeRhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Dormand-Prince 4(5) with abs = rel = tol, landing on every grid time.
Dataset integrate_ode(const OdeRhs& rhs, const Eigen::VectorXd& u0, const GridSpec& grid, double tol = 1e-8);

struct LorenzParams {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
  Eigen::Vector3d u0{-8.0, 7.0, 27.0};
};

OdeRhs lorenz_rhs(const LorenzParams& p);
Dataset lorenz_dataset(const GridSpec& grid, const LorenzParams& p = {}, double tol = 1e-8);

struct SpectralOptions {
  // Solver spacing; the output spacing must be an integer multiple. 0 uses the output spacing.
  double dx = 0.0;
  // Largest internal step; the step used divides the output step exactly.
  double dt = 0.002;
};

using InitialCondition = std::function<double(double)>;

/// u_t = nu u_xx - u u_x on a periodic interval, pseudo-spectral ETDRK4.
Dataset solve_burgers_hf(const GridSpec& grid, double nu, const InitialCondition& u0,
                         const SpectralOptions& opt = {});
/// u_t = -u_xxx - u u_x on a periodic interval, pseudo-spectral ETDRK4.
Dataset solve_kdv_hf(const GridSpec& grid, const InitialCondition& u0, const SpectralOptions& opt = {});

enum class LowFidelityMode { CoarseFd, LinearHeat };

/// Coarse-grid Burgers (implicit diffusion, explicit upwind advection) or the heat equation.
Dataset solve_burgers_lf(const GridSpec& coarse, double nu, const InitialCondition& u0, LowFidelityMode mode);

double noise_sigma(const Eigen::MatrixXd& clean, double noise_ratio);
Dataset add_noise(const Dataset& clean, double noise_ratio, std::uint64_t seed);

struct EvenStride {
  std::vector<Eigen::Index> counts;  // per axis
};
struct RandomSubset {
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
};

Dataset subsample(const Dataset& ds, const EvenStride& mode);
Dataset subsample(const Dataset& ds, const RandomSubset& mode);
Dataset interpolate_lf(const Dataset& coarse, const TensorGrid& fine);

void save_csv(const Dataset& ds, const std::string& path);
Dataset load_csv(const std::string& path);

/// Rebuilds the tensor grid of a dataset whose inputs are time-major and uniform.
std::optional<TensorGrid> detect_grid(const Eigen::MatrixXd& inputs);

}  // namespace gpsindy

#endif  // GPSINDY_SIMDATA_HPP
