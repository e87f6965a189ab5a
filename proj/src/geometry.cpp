// Copyright 2026 The qpyramid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qpyr/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace qpyr {

namespace {
// Absorbs the rounding of r1 = (1 - r0)/(n - 1) when r0 is exactly 1/n.
constexpr double kShapeBand = 1e-14;
}  // namespace

PyramidShape PyramidParams::shape() const {
  if (r0 > r1 + kShapeBand) return PyramidShape::Acute;
  if (r0 < r1 - kShapeBand) return PyramidShape::Obtuse;
  return PyramidShape::Orthogonal;
}

std::string PyramidParams::shape_name() const {
  switch (shape()) {
    case PyramidShape::Acute:
      return is_no_base() ? "acute (no base)" : "acute";
    case PyramidShape::Orthogonal:
      return "orthogonal";
    case PyramidShape::Obtuse:
      return is_flat() ? "obtuse (flat)" : "obtuse";
  }
  return "unknown";
}

PyramidParams make_pyramid(int n, double r0) {
  if (n < 2) throw std::invalid_argument("make_pyramid: need at least 2 edges");
  if (!(r0 >= 0.0 && r0 <= 1.0))
    throw std::invalid_argument("make_pyramid: r0 must lie in [0, 1]");
  PyramidParams p;
  p.n = n;
  p.r0 = r0;
  p.r1 = (1.0 - r0) / (n - 1);
  return p;
}

std::vector<Ket> edge_kets(const PyramidParams& params) {
  const int n = params.n;
  const double diag = std::sqrt(n * params.r1);
  const double shift = (std::sqrt(params.r0) - std::sqrt(params.r1)) / std::sqrt(double(n));
  std::vector<Ket> edges;
  edges.reserve(n);
  for (int j = 0; j < n; ++j) {
    Ket e = Ket::Constant(n, shift);
    e(j) += diag;
    edges.push_back(std::move(e));
  }
  return edges;
}

Ket height_ket(const PyramidParams& params) {
  // (1/n) sum_j E_j collapses to sqrt(r0/n) (1,...,1).
  return Ket::Constant(params.n, std::sqrt(params.r0 / params.n));
}

std::vector<Ket> lifted_edges(const PyramidParams& params, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("lifted_edges: t must be >= 0");
  const int n = params.n;
  const double shift = (t - 1.0) / n;
  std::vector<Ket> lifted;
  lifted.reserve(n);
  for (int j = 0; j < n; ++j) {
    Ket e = Ket::Constant(n, shift);
    e(j) += 1.0;
    lifted.push_back(std::move(e));
  }
  return lifted;
}

PyramidParams lifted_shape(const PyramidParams& params, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("lifted_shape: t must be >= 0");
  const double n = params.n;
  return make_pyramid(params.n, t * t / (n - 1.0 + t * t));
}

std::vector<DifferenceKet> difference_kets(const PyramidParams& params) {
  if (params.is_no_base())
    throw std::invalid_argument("difference_kets: undefined for r1 = 0");
  const int n = params.n;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<DifferenceKet> diffs;
  diffs.reserve(n * (n - 1) / 2);
  for (int m = 0; m < n; ++m) {
    for (int k = m + 1; k < n; ++k) {
      Ket d = Ket::Zero(n);
      d(m) = inv_sqrt2;
      d(k) = -inv_sqrt2;
      diffs.push_back({m + 1, k + 1, std::move(d)});
    }
  }
  return diffs;
}

double volume(const PyramidParams& params) {
  const double n = params.n;
  double factorial = 1.0;
  for (int k = 2; k <= params.n; ++k) factorial *= k;
  return std::sqrt(n * params.r0) * std::pow(n * params.r1, (n - 1.0) / 2.0) / factorial;
}

Operator cyclic_unitary(const PyramidParams& params) {
  const int n = params.n;
  Operator u = Operator::Zero(n, n);
  for (int j = 0; j < n; ++j) u((j + 1) % n, j) = 1.0;
  return u;
}

Eigen::MatrixXd duality_overlap(const PyramidParams& params) {
  if (params.is_flat() || params.is_no_base())
    throw std::invalid_argument("duality_overlap: undefined for degenerate no-volume pyramids");
  const double t = std::sqrt(params.r1 / params.r0);
  const auto edges = edge_kets(params);
  const auto lifted = lifted_edges(params, t);
  Eigen::MatrixXd overlap(params.n, params.n);
  for (int j = 0; j < params.n; ++j)
    for (int k = 0; k < params.n; ++k) overlap(j, k) = edges[j].dot(lifted[k]);
  return overlap;
}

}  // namespace qpyr
