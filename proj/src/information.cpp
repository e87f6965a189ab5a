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

#include "qpyr/information.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qpyr/optimizer.hpp"

namespace qpyr {

namespace {

void check_priors(const std::vector<Operator>& states, const std::vector<double>& priors) {
  if (states.empty()) throw std::invalid_argument("joint_probabilities: empty ensemble");
  if (states.size() != priors.size())
    throw std::invalid_argument("joint_probabilities: states/priors size mismatch");
  double sum = 0.0;
  for (double p : priors) {
    if (p < 0.0) throw std::invalid_argument("joint_probabilities: negative prior");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("joint_probabilities: priors must sum to 1");
}

JointDistribution build_joint(const std::vector<Operator>& states,
                              const std::vector<double>& priors,
                              const std::vector<const Operator*>& outcomes, bool strict) {
  check_priors(states, priors);
  const int rows = int(states.size());
  const int cols = int(outcomes.size());
  JointDistribution joint;
  joint.p.resize(rows, cols);
  for (int j = 0; j < rows; ++j) {
    for (int k = 0; k < cols; ++k) {
      double v = priors[j] * (states[j].cwiseProduct(*outcomes[k])).sum();
      if (v < 0.0) {
        if (strict && v < -1e-14)
          throw std::runtime_error("joint_probabilities: negative probability");
        v = 0.0;
      }
      joint.p(j, k) = v;
    }
  }
  joint.row_marginals = joint.p.rowwise().sum();
  joint.column_marginals = joint.p.colwise().sum();
  return joint;
}

/// Edge-outcome part of the unified closed form at unit weight.  Vanishing
/// squared amplitudes are skipped (the 0 log 0 convention).
double edge_bracket(const PyramidParams& params, double t) {
  const double n = params.n;
  const double a = t * std::sqrt(params.r0) + (n - 1.0) * std::sqrt(params.r1);
  const double b = t * std::sqrt(params.r0) - std::sqrt(params.r1);
  const double d = t * t * params.r0 + (n - 1.0) * params.r1;
  double info = 0.0;
  if (a * a > 0.0) info += a * a / n * std::log2(a * a / d);
  if (b * b > 0.0) info += (n - 1.0) / n * (b * b) * std::log2(b * b / d);
  return info;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  return m.jacobiSvd().singularValues()(0);
}

}  // namespace

JointDistribution joint_probabilities(const std::vector<Operator>& states,
                                      const std::vector<double>& priors,
                                      const Pom& pom) {
  std::vector<const Operator*> ops;
  ops.reserve(pom.size());
  for (const auto& o : pom.outcomes) ops.push_back(&o.op);
  return build_joint(states, priors, ops, /*strict=*/true);
}

JointDistribution joint_probabilities(const std::vector<Operator>& states,
                                      const std::vector<double>& priors,
                                      const std::vector<Operator>& outcomes) {
  // Lenient variant used on raw outcome lists (search iterates): roundoff
  // negatives are clamped without complaint.
  std::vector<const Operator*> ops;
  ops.reserve(outcomes.size());
  for (const auto& o : outcomes) ops.push_back(&o);
  return build_joint(states, priors, ops, /*strict=*/false);
}

double mutual_information(const JointDistribution& joint) {
  double info = 0.0;
  for (int j = 0; j < joint.p.rows(); ++j) {
    const double pj = joint.row_marginals(j);
    for (int k = 0; k < joint.p.cols(); ++k) {
      const double p = joint.p(j, k);
      if (p > 0.0) info += p * std::log2(p / (pj * joint.column_marginals(k)));
    }
  }
  return std::max(info, 0.0);
}

double srm_info(const PyramidParams& params) { return edge_bracket(params, 1.0); }

double guess_odds(const PyramidParams& params) {
  const double n = params.n;
  const double s = std::sqrt(params.r0) + (n - 1.0) * std::sqrt(params.r1);
  return s * s / n;
}

double mud_failure(const PyramidParams& params) {
  const double x = params.n * params.r0;
  if (x > 1.0) return (x - 1.0) / (params.n - 1.0);
  if (x < 1.0) return 1.0 - x;
  return 0.0;
}

double mud_info(const PyramidParams& params, bool refined) {
  const double log2n = std::log2(double(params.n));
  if (params.shape() != PyramidShape::Obtuse) return params.n * params.r1 * log2n;
  double info = params.n * params.r0 * log2n;
  if (refined) info += (1.0 - params.n * params.r0) * std::log2(params.n / 2.0);
  return info;
}

double unified_info(const PyramidParams& params, const SchemeSpec& spec) {
  spec.validate();
  double info = 0.0;
  if (spec.w2 > 0.0) info += spec.w2 * edge_bracket(params, spec.t);
  if (spec.w3 > 0.0) info += spec.w3 * (1.0 - params.r0) * std::log2(params.n / 2.0);
  return info;
}

double ims_info(const PyramidParams& params) {
  if (params.shape() != PyramidShape::Obtuse) {
    const double n = params.n;
    if (params.n > 2 && params.r0 > (4.0 * n - 4.0) / (n * n))
      return (n - n * params.r0) / (n - 2.0) * std::log2(n - 1.0);
    return srm_info(params);
  }
  return optimize_t_obtuse(params).info_bits;
}

double srm_info_limit_narrow(const PyramidParams& params) {
  return (2.0 * params.n - 2.0) * params.r1 / std::log(2.0);
}

double srm_info_limit_flat(const PyramidParams& params) {
  const double n = params.n;
  return std::log2(n - 1.0) / n * (n - 2.0 + 4.0 * std::sqrt((n - 1.0) * params.r0));
}

double mud_srm_ratio_limit_narrow(int n) {
  return n * std::log(double(n)) / (2.0 * n - 2.0);
}

double mud_srm_ratio_limit_flat(int n) {
  return n / (n - 2.0) * std::log(n / 2.0) / std::log(n - 1.0);
}

double obtuse_family_info(const PyramidParams& params, double t) {
  if (std::isinf(t)) return (1.0 - params.r0) * std::log2(params.n / 2.0);
  const double w2 = 1.0 / (t * t);
  return w2 * edge_bracket(params, t) +
         (1.0 - w2) * (1.0 - params.r0) * std::log2(params.n / 2.0);
}

double necessary_condition_residual(const std::vector<Operator>& states,
                                    const std::vector<double>& priors,
                                    const Pom& pom, ConditionMode mode) {
  const JointDistribution joint = joint_probabilities(states, priors, pom);
  const int k_count = int(pom.size());
  const int d = pom.dim();

  std::vector<Operator> r(k_count);
  std::vector<bool> included(k_count, true);
  if (mode == ConditionMode::Mem) {
    if (pom.size() != states.size())
      throw std::invalid_argument(
          "necessary_condition_residual: Mem mode needs one outcome per state");
    for (int k = 0; k < k_count; ++k) r[k] = priors[k] * states[k];
  } else {
    for (int k = 0; k < k_count; ++k) {
      const double col = joint.column_marginals(k);
      if (col <= 0.0) {
        included[k] = false;  // R_k is undefined on never-firing outcomes
        continue;
      }
      Operator rk = Operator::Zero(d, d);
      for (std::size_t j = 0; j < states.size(); ++j) {
        const double p = joint.p(int(j), k);
        if (p > 0.0)
          rk += priors[j] * states[j] * std::log2(p / (joint.row_marginals(int(j)) * col));
      }
      r[k] = std::move(rk);
    }
  }

  double residual = 0.0;
  for (int k = 0; k < k_count; ++k) {
    if (!included[k]) continue;
    const Operator& pik = pom.outcomes[k].op;
    for (int l = 0; l < k_count; ++l) {
      if (!included[l]) continue;
      const Operator& pil = pom.outcomes[l].op;
      residual = std::max(residual, spectral_norm(pik * r[k] * pil - pik * r[l] * pil));
    }
  }
  return residual;
}

}  // namespace qpyr
