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

#include <vector>

#include "qpyr/measurement.hpp"

namespace qpyr {

/// Joint distribution p_jk = p_j Tr(rho_j Pi_k) over (state, outcome) pairs.
/// Entries in (-1e-14, 0) are clamped to zero before the marginals are formed.
struct JointDistribution {
  Eigen::MatrixXd p;              // (state j, outcome k)
  Eigen::VectorXd row_marginals;  // p_{j.}
  Eigen::VectorXd column_marginals;

  double total() const { return p.sum(); }
};

JointDistribution joint_probabilities(const std::vector<Operator>& states,
                                      const std::vector<double>& priors,
                                      const Pom& pom);
JointDistribution joint_probabilities(const std::vector<Operator>& states,
                                      const std::vector<double>& priors,
                                      const std::vector<Operator>& outcomes);

/// Mutual information in bits; terms with p_jk = 0 are skipped (0 log 0 = 0).
double mutual_information(const JointDistribution& joint);

/// Information accessed by the square-root measurement, in closed form.
double srm_info(const PyramidParams& params);

/// Probability of guessing the signal right with the SRM/MEM:
/// (1/n)(sqrt r0 + (n-1) sqrt r1)^2.
double guess_odds(const PyramidParams& params);

/// Probability of the inconclusive outcome of the MUD:
/// (n r0 - 1)/(n - 1) on the acute side, 1 - n r0 on the obtuse side.
double mud_failure(const PyramidParams& params);

/// Information accessed by the MUD.  The refined flag adds the
/// (1 - n r0) log2(n/2) gain of the split inconclusive outcome (obtuse only).
double mud_info(const PyramidParams& params, bool refined = false);

/// Closed form for the information accessed by any unified-family member;
/// agrees with mutual_information over the numeric joint to 1e-10.
double unified_info(const PyramidParams& params, const SchemeSpec& spec);

/// Accessible information.  Acute side: srm_info below r0 = (4n-4)/n^2, and
/// ((n - n r0)/(n - 2)) log2(n - 1) above; n = 2 is always srm_info.
/// Obtuse side: the optimum of the t >= 1 family.
double ims_info(const PyramidParams& params);

/// Small-volume behaviour of srm_info, kept as separate evaluators so both
/// directions of the cross-check stay independent.
double srm_info_limit_narrow(const PyramidParams& params);  // r1 << 1/n
double srm_info_limit_flat(const PyramidParams& params);    // r0 << 1/n

/// Limits of mud_info/srm_info: (n/(2n-2)) ln n as r0 -> 1, and
/// (n/(n-2)) ln(n/2)/ln(n-1) as r0 -> 0.
double mud_srm_ratio_limit_narrow(int n);
double mud_srm_ratio_limit_flat(int n);

/// Information of the one-parameter obtuse family (w1 = 0, w2 = 1/t^2,
/// w3 = 1 - 1/t^2).  Analytic in t, so it can also be probed slightly below
/// t = 1 for derivative estimates; t = inf gives the flat-pyramid limit.
double obtuse_family_info(const PyramidParams& params, double t);

enum class ConditionMode { Ims, Mem };

/// Stationarity residual max_{k,l} || Pi_k R_k Pi_l - Pi_k R_l Pi_l ||
/// (spectral norm), with R_k = sum_j p_j rho_j log2(p_jk/(p_j p_k)) in Ims
/// mode and R_k = p_k rho_k in Mem mode.  Ims mode skips outcomes with zero
/// column marginal and zero-probability terms inside R_k.
double necessary_condition_residual(const std::vector<Operator>& states,
                                    const std::vector<double>& priors,
                                    const Pom& pom, ConditionMode mode);

}  // namespace qpyr
