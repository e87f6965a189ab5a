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

#include <string>
#include <utility>
#include <vector>

#include "qpyr/geometry.hpp"

namespace qpyr {

enum class OutcomeKind { Edge, Diff, Inconclusive };

struct OutcomeLabel {
  OutcomeKind kind = OutcomeKind::Inconclusive;
  int k = 0;         // 1-based edge index when kind == Edge
  int m = 0, n = 0;  // 1-based pair, m < n, when kind == Diff

  static OutcomeLabel edge(int k) { return {OutcomeKind::Edge, k, 0, 0}; }
  static OutcomeLabel diff(int m, int n) { return {OutcomeKind::Diff, 0, m, n}; }
  static OutcomeLabel inconclusive() { return {}; }

  std::string str() const;
  friend bool operator==(const OutcomeLabel&, const OutcomeLabel&) = default;
};

struct Outcome {
  OutcomeLabel label;
  double weight = 0.0;  // scale recorded at construction (scheme weight, or trace)
  Operator op;
};

/// Probability operator measurement: nonnegative symmetric outcomes that
/// decompose the identity.  Symmetry is enforced when outcomes are added;
/// completeness and nonnegativity are checked by validate_pom.
struct Pom {
  std::vector<Outcome> outcomes;

  void add(OutcomeLabel label, double weight, const Operator& op);
  int dim() const { return outcomes.empty() ? 0 : int(outcomes.front().op.rows()); }
  std::size_t size() const { return outcomes.size(); }
  const Outcome* find(const OutcomeLabel& label) const;
  Operator sum() const;
};

struct PomReport {
  double completeness_residual = 0.0;  // spectral norm of (sum of outcomes - 1)
  double min_eigenvalue = 0.0;         // smallest eigenvalue over all outcomes
};

PomReport validate_pom(const Pom& pom);

enum class SchemeTag { Srm, Mud, MudRefined, Ims, Custom };

std::string scheme_name(SchemeTag tag);

/// Point in the unified measurement family: outcomes (w1/r0)|H><H|,
/// w2 |ebar_k><ebar_k| and (2 w3/n)|[mn]><[mn]| with
/// w1 + t^2 w2 = 1 and w2 + w3 = 1.  A zero weight switches its summand off
/// exactly; t may be infinite when w2 = 0.
struct SchemeSpec {
  double t = 1.0;
  double w1 = 0.0;
  double w2 = 1.0;
  double w3 = 0.0;
  SchemeTag tag = SchemeTag::Custom;

  void validate() const;  // throws std::invalid_argument on violation
};

SchemeSpec srm_spec();
SchemeSpec mud_spec(const PyramidParams& params, bool refined = false);
SchemeSpec ims_spec(const PyramidParams& params);  // obtuse side runs the t search
SchemeSpec custom_spec(double t, double w2);

/// Builds the POM for any valid spec.  Zero-weight summands are omitted, so
/// the outcome count is n, n + 1, or up to 1 + n(n+1)/2 depending on the
/// weights.  Throws on degenerate geometry (w1 > 0 with r0 = 0, or w3 > 0
/// with r1 = 0).
Pom unified_pom(const PyramidParams& params, const SchemeSpec& spec);

/// Square-root measurement for the pyramid ensemble: projectors onto the
/// orthonormal-pyramid edges.  Also the error-minimizing measurement.
Pom srm(const PyramidParams& params);

/// Generic square-root measurement Pi_k = rho^{-1/2} p_k rho_k rho^{-1/2}
/// with the inverse square root taken on the support of rho (eigenvalues
/// below 1e-12 are treated as zero).  When rho is rank deficient the
/// complement of its support is appended as an inconclusive outcome so the
/// result still decomposes the identity; it never fires on the ensemble.
Pom srm_from_ensemble(const std::vector<Operator>& states,
                      const std::vector<double>& priors);

/// Unambiguous discrimination: n conclusive outcomes that never misidentify
/// plus an inconclusive remainder.  The refined variant (obtuse only) splits
/// the inconclusive outcome into the n(n-1)/2 difference-ket outcomes.
/// Requires 0 < r0 < 1.
Pom mud(const PyramidParams& params, bool refined = false);

/// Information-maximizing scheme.  Acute side: lifted-edge projectors with
/// t = min{1, ((2n-2)/(n-2)) sqrt(r1/r0)} (t = 1 for n = 2) plus the height
/// outcome when t < 1.  Obtuse side: the t >= 1 family member found by the
/// numerical t search.  Flat pyramids get the t -> inf limit: difference
/// outcomes plus a never-firing axis outcome completing the identity.
std::pair<Pom, SchemeSpec> ims(const PyramidParams& params);

/// rho_j = |E_j><E_j| for the pyramid edges.
std::vector<Operator> pyramid_ensemble(const PyramidParams& params);

std::vector<double> uniform_priors(int n);

}  // namespace qpyr
