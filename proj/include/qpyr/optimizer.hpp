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

#include <cstdint>
#include <vector>

#include "qpyr/measurement.hpp"

namespace qpyr {

struct TOptimum {
  double t_star = 1.0;
  double info_bits = 0.0;
};

/// Maximizes the obtuse-family information over t in [1, T_max] with a
/// log-graded coarse grid refined by golden sections.  T_max is
/// 10/sqrt(n r0), which always brackets the unambiguous-discrimination dual
/// value.  A flat pyramid returns the t -> inf limit directly.
TOptimum optimize_t_obtuse(const PyramidParams& params);

struct ThresholdResult {
  bool found = false;
  double nr0 = 0.0;
  double width = 0.0;
};

/// Largest n r0 in (0, 1) below which the obtuse t search returns
/// t_star > 1 + 1e-6, bisected to absolute width 1e-5.  Requires n >= 3.
ThresholdResult threshold_nr0(int n);

struct AscentConfig {
  int max_iterations = 2000;
  double info_tolerance = 1e-13;       // bits; stop when one iteration gains less
  double completeness_tolerance = 1e-9;
  int restarts = 10;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct AscentResult {
  Pom pom;
  double info_bits = 0.0;
  double completeness_residual = 0.0;
  std::vector<double> trace;  // info after every accepted step of the best restart
};

/// Steepest-ascent search for the information-maximizing measurement.
/// Outcomes are kept nonnegative by construction: every candidate is a
/// congruence (1 + eps R_k) Pi_k (1 + eps R_k) renormalized through the
/// inverse square root of the outcome sum, so the iterate is always a valid
/// POM and the accepted information is monotone.  The step length is chosen
/// by a bracketing line search with golden refinement.  Best of `restarts`
/// random starts is returned; throws std::runtime_error when no restart
/// meets the completeness tolerance.
AscentResult steepest_ascent_ims(const std::vector<Operator>& states,
                                 const std::vector<double>& priors,
                                 int k_outcomes, const AscentConfig& config);

enum class SweepAxis { Nr0, Nr1 };

struct SweepRow {
  int n = 0;
  double nr0 = 0.0;  // always n * r0, regardless of the sweep axis
  SchemeTag scheme = SchemeTag::Srm;
  double info_bits = 0.0;
  double srm_info_bits = 0.0;
  double ratio_to_srm = 0.0;
  double t_opt = 1.0;
  double failure_prob = 0.0;  // probability of outcomes that name no single state
};

/// One row per (grid point, scheme), grid-major and scheme-minor.  With
/// axis = Nr0 a grid value g means r0 = g/n (obtuse-to-orthogonal side);
/// with axis = Nr1 it means r1 = g/n (acute side, r0 = 1 - (n-1) g/n).
/// Rows are merged by index, so the output is deterministic for any thread
/// count.
std::vector<SweepRow> sweep(int n, const std::vector<double>& nr0_grid,
                            const std::vector<SchemeTag>& schemes,
                            SweepAxis axis = SweepAxis::Nr0, int threads = 1);

}  // namespace qpyr
