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

#ifndef GPSINDY_FEATURES_HPP
#define GPSINDY_FEATURES_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gpsindy {

inline constexpr int kMaxSpatialOrder = 3;

/// Product of state powers and spatial-derivative powers of one channel.
struct FeatureDescriptor {
  std::vector<int> powers;
  std::array<int, kMaxSpatialOrder> derivative_powers{};
  int derivative_channel = 0;
  std::string name;

  int max_derivative_order() const;
  bool is_constant() const;
};

struct Library {
  std::string name;
  std::vector<std::string> state_names;
  std::vector<FeatureDescriptor> features;

  std::size_t size() const { return features.size(); }
  int max_derivative_order() const;
  int index_of(const std::string& feature) const;  // -1 when absent
  std::vector<std::string> names() const;
  void validate() const;
};

/// Canonical name such as "u*u_x", "x^2*y" or "1".
std::string canonical_name(const FeatureDescriptor& f, const std::vector<std::string>& state_names);

/// kind: lorenz-poly3, burgers-10, kdv-15. "custom" requires descriptors.
Library standard_library(const std::string& kind);
Library custom_library(const std::string& name, std::vector<std::string> state_names,
                       std::vector<FeatureDescriptor> features);

/// All monomials of the states up to total degree `degree`, graded order.
std::vector<FeatureDescriptor> polynomial_terms(int states, int degree);

struct FieldBundle {
  Eigen::MatrixXd state;                                         // N' x d
  std::array<std::optional<Eigen::MatrixXd>, kMaxSpatialOrder> spatial;  // N' x d per order

  Eigen::Index rows() const { return state.rows(); }
};

Eigen::MatrixXd build_matrix(const Library& lib, const FieldBundle& fields);

}  // namespace gpsindy

#endif
