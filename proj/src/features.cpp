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

#include "gpsindy/features.hpp"

#include <algorithm>
#include <set>

#include "gpsindy/errors.hpp"

namespace gpsindy {

namespace {

const char* kDerivSuffix[kMaxSpatialOrder] = {"_x", "_xx", "_xxx"};

void append_factor(std::string& out, const std::string& base, int power) {
  if (power <= 0) return;
  if (!out.empty()) out += "*";
  out += base;
  if (power > 1) out += "^" + std::to_string(power);
}

// Graded order: degree, then lexicographic with earlier states first.
void monomials(int states, int degree, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (degree == 0) {
    out.push_back(cur);
    return;
  }
  for (int s = start; s < states; ++s) {
    ++cur[s];
    monomials(states, degree - 1, s, cur, out);
    --cur[s];
  }
}

FeatureDescriptor pde_term(int u_power, std::array<int, kMaxSpatialOrder> d) {
  FeatureDescriptor f;
  f.powers = {u_power};
  f.derivative_powers = d;
  return f;
}

}  // namespace

int FeatureDescriptor::max_derivative_order() const {
  for (int k = kMaxSpatialOrder; k >= 1; --k)
    if (derivative_powers[k - 1] > 0) return k;
  return 0;
}

bool FeatureDescriptor::is_constant() const {
  return std::all_of(powers.begin(), powers.end(), [](int p) { return p == 0; }) && max_derivative_order() == 0;
}

std::string canonical_name(const FeatureDescriptor& f, const std::vector<std::string>& state_names) {
  std::string out;
  for (std::size_t s = 0; s < f.powers.size(); ++s) {
    const std::string base = s < state_names.size() ? state_names[s] : "u" + std::to_string(s + 1);
    append_factor(out, base, f.powers[s]);
  }
  const std::string dbase = static_cast<std::size_t>(f.derivative_channel) < state_names.size()
                                ? state_names[f.derivative_channel]
                                : "u" + std::to_string(f.derivative_channel + 1);
  for (int k = 0; k < kMaxSpatialOrder; ++k) append_factor(out, dbase + kDerivSuffix[k], f.derivative_powers[k]);
  return out.empty() ? "1" : out;
}

int Library::max_derivative_order() const {
  int m = 0;
  for (const auto& f : features) m = std::max(m, f.max_derivative_order());
  return m;
}

int Library::index_of(const std::string& feature) const {
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].name == feature) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> Library::names() const {
  std::vector<std::string> out;
  for (const auto& f : features) out.push_back(f.name);
  return out;
}

void Library::validate() const {
  require(!features.empty(), "library " + name + " is empty");
  require(!state_names.empty(), "library " + name + " has no states");
  std::set<std::string> seen;
  for (const auto& f : features) {
    require(f.powers.size() == state_names.size(), "feature " + f.name + " has wrong number of powers");
    for (int p : f.powers) require(p >= 0, "negative exponent in " + f.name);
    for (int p : f.derivative_powers) require(p >= 0, "negative exponent in " + f.name);
    require(f.derivative_channel >= 0 && f.derivative_channel < static_cast<int>(state_names.size()),
            "derivative channel out of range in " + f.name);
    require(seen.insert(f.name).second, "duplicate feature name " + f.name);
  }
}

std::vector<FeatureDescriptor> polynomial_terms(int states, int degree) {
  require(states >= 1 && degree >= 0, "polynomial_terms: bad arguments");
  std::vector<FeatureDescriptor> out;
  for (int deg = 0; deg <= degree; ++deg) {
    std::vector<std::vector<int>> ms;
    std::vector<int> cur(states, 0);
    monomials(states, deg, 0, cur, ms);
    for (auto& m : ms) {
      FeatureDescriptor f;
      f.powers = std::move(m);
      out.push_back(std::move(f));
    }
  }
  return out;
}

Library custom_library(const std::string& name, std::vector<std::string> state_names,
                       std::vector<FeatureDescriptor> features) {
  Library lib{name, std::move(state_names), std::move(features)};
  for (auto& f : lib.features)
    if (f.name.empty()) f.name = canonical_name(f, lib.state_names);
  lib.validate();
  return lib;
}

Library standard_library(const std::string& kind) {
  if (kind == "lorenz-poly3") return custom_library(kind, {"x", "y", "z"}, polynomial_terms(3, 3));
  if (kind == "burgers-10") {
    return custom_library(kind, {"u"},
                          {pde_term(0, {0, 0, 0}), pde_term(1, {0, 0, 0}), pde_term(0, {1, 0, 0}),
                           pde_term(0, {0, 1, 0}), pde_term(2, {0, 0, 0}), pde_term(1, {1, 0, 0}),
                           pde_term(1, {0, 1, 0}), pde_term(0, {2, 0, 0}), pde_term(0, {1, 1, 0}),
                           pde_term(0, {0, 2, 0})});
  }
  if (kind == "kdv-15") {
    return custom_library(
        kind, {"u"},
        {pde_term(0, {0, 0, 0}), pde_term(1, {0, 0, 0}), pde_term(0, {1, 0, 0}), pde_term(0, {0, 1, 0}),
         pde_term(0, {0, 0, 1}), pde_term(2, {0, 0, 0}), pde_term(1, {1, 0, 0}), pde_term(1, {0, 1, 0}),
         pde_term(1, {0, 0, 1}), pde_term(0, {2, 0, 0}), pde_term(0, {1, 1, 0}), pde_term(0, {1, 0, 1}),
         pde_term(0, {0, 2, 0}), pde_term(0, {0, 1, 1}), pde_term(0, {0, 0, 2})});
  }
  if (kind == "custom") fail(ErrorKind::InvalidArgument, "custom libraries need feature descriptors");
  fail(ErrorKind::InvalidArgument, "unknown library kind: " + kind);
}

Eigen::MatrixXd build_matrix(const Library& lib, const FieldBundle& fields) {
  const Eigen::Index n = fields.rows();
  const int d = static_cast<int>(lib.state_names.size());
  require(fields.state.cols() == d, "field bundle has " + std::to_string(fields.state.cols()) +
                                        " channels, library expects " + std::to_string(d));
  for (int k = 0; k < kMaxSpatialOrder; ++k) {
    if (fields.spatial[k]) {
      require(fields.spatial[k]->rows() == n && fields.spatial[k]->cols() == d,
              "spatial derivative field has wrong shape");
    }
  }
  Eigen::MatrixXd phi = Eigen::MatrixXd::Ones(n, static_cast<Eigen::Index>(lib.size()));
  for (std::size_t j = 0; j < lib.size(); ++j) {
    const auto& f = lib.features[j];
    auto col = phi.col(static_cast<Eigen::Index>(j)).array();
    for (int s = 0; s < d; ++s)
      for (int p = 0; p < f.powers[s]; ++p) col *= fields.state.col(s).array();
    for (int k = 0; k < kMaxSpatialOrder; ++k) {
      if (f.derivative_powers[k] == 0) continue;
      require(fields.spatial[k].has_value(),
              "feature " + f.name + " needs spatial derivative of order " + std::to_string(k + 1));
      const auto v = fields.spatial[k]->col(f.derivative_channel).array();
      for (int p = 0; p < f.derivative_powers[k]; ++p) col *= v;
    }
  }
  return phi;
}

}  // namespace gpsindy
