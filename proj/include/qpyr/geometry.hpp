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

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace qpyr {

using Ket = Eigen::VectorXd;
using Operator = Eigen::MatrixXd;

enum class PyramidShape { Acute, Orthogonal, Obtuse };

/// A symmetric ensemble of n unit kets whose pairwise overlaps all equal
/// r0 - r1.  The parameters obey r0 + (n - 1) r1 = 1 with r0, r1 >= 0;
/// r1 is always derived from (n, r0), never set independently.
struct PyramidParams {
  int n = 0;
  double r0 = 0.0;
  double r1 = 0.0;

  PyramidShape shape() const;
  bool is_flat() const { return r0 == 0.0; }     // no height, edges span the base
  bool is_no_base() const { return r1 == 0.0; }  // all edges collinear
  std::string shape_name() const;
};

/// Validates n >= 2 and r0 in [0, 1], derives r1.
PyramidParams make_pyramid(int n, double r0);

/// Edge kets E_j in the basis of the matching orthonormal pyramid:
///   E_j = sqrt(n r1) e_j + ((sqrt r0 - sqrt r1)/sqrt n) (1,...,1).
/// This direct form stays finite for flat pyramids (r0 = 0).
/// Gram matrix: <E_j|E_k> = r0 - r1 + n r1 delta_jk.
std::vector<Ket> edge_kets(const PyramidParams& params);

/// Symmetry axis H = (1/n) sum_j E_j; <H|H> = <E_j|H> = r0.
Ket height_ket(const PyramidParams& params);

/// Lifted orthonormal edges e_j + ((t - 1)/n)(1,...,1), t >= 0, kept
/// unnormalized.  Normalized copies form a pyramid with rbar0 = t^2 rbar1.
std::vector<Ket> lifted_edges(const PyramidParams& params, double t);

/// Shape parameters of the normalized lifted pyramid: rbar0 = t^2/(n - 1 + t^2).
PyramidParams lifted_shape(const PyramidParams& params, double t);

struct DifferenceKet {
  int m = 0;  // 1-based pair indices, m < n
  int n = 0;
  Ket ket;
};

/// The n(n-1)/2 unit kets (E_m - E_n)/sqrt(2 n r1), i.e. (e_m - e_n)/sqrt 2.
/// Their rank-1 sum scaled by 2/n is the projector onto the pyramid base.
/// Requires r1 > 0.
std::vector<DifferenceKet> difference_kets(const PyramidParams& params);

/// Euclidean volume (1/n!) (n r0)^{1/2} (n r1)^{(n-1)/2}.
double volume(const PyramidParams& params);

/// Real orthogonal U with U e_j = e_{j+1 mod n}; permutes the edge kets
/// cyclically and has period n.
Operator cyclic_unitary(const PyramidParams& params);

/// Overlap matrix <E_j | ebar_k> at the dual lift t = sqrt(r1/r0); equals
/// sqrt(n r1) * identity.  Requires r0 > 0 and r1 > 0.
Eigen::MatrixXd duality_overlap(const PyramidParams& params);

}  // namespace qpyr
