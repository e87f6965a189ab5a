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

#include "qpyr/measurement.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qpyr/optimizer.hpp"

namespace qpyr {

namespace {

Operator rank1(const Ket& v) { return v * v.transpose(); }

void add_edge_outcomes(Pom& pom, const PyramidParams& params, double t, double w2) {
  const auto lifted = lifted_edges(params, t);
  const double scale = std::sqrt(w2);
  for (int k = 0; k < params.n; ++k)
    pom.add(OutcomeLabel::edge(k + 1), w2, rank1(scale * lifted[k]));
}

void add_diff_outcomes(Pom& pom, const PyramidParams& params, double w3) {
  const double weight = 2.0 * w3 / params.n;
  const double scale = std::sqrt(weight);
  for (const auto& d : difference_kets(params))
    pom.add(OutcomeLabel::diff(d.m, d.n), weight, rank1(scale * d.ket));
}

}  // namespace

std::string OutcomeLabel::str() const {
  switch (kind) {
    case OutcomeKind::Edge:
      return "edge(" + std::to_string(k) + ")";
    case OutcomeKind::Diff:
      return "diff(" + std::to_string(m) + "," + std::to_string(n) + ")";
    case OutcomeKind::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

void Pom::add(OutcomeLabel label, double weight, const Operator& op) {
  if (op.rows() != op.cols()) throw std::invalid_argument("Pom: outcome must be square");
  if (!outcomes.empty() && op.rows() != outcomes.front().op.rows())
    throw std::invalid_argument("Pom: outcome dimension mismatch");
  const double skew = (op - op.transpose()).cwiseAbs().maxCoeff();
  if (skew > 1e-14) throw std::invalid_argument("Pom: outcome is not symmetric");
  outcomes.push_back({label, weight, 0.5 * (op + op.transpose())});
}

const Outcome* Pom::find(const OutcomeLabel& label) const {
  for (const auto& o : outcomes)
    if (o.label == label) return &o;
  return nullptr;
}

Operator Pom::sum() const {
  if (outcomes.empty()) return Operator();
  Operator s = Operator::Zero(dim(), dim());
  for (const auto& o : outcomes) s += o.op;
  return s;
}

PomReport validate_pom(const Pom& pom) {
  PomReport report;
  if (pom.outcomes.empty()) {
    report.completeness_residual = 1.0;
    return report;
  }
  const int d = pom.dim();
  Eigen::SelfAdjointEigenSolver<Operator> sum_eig(pom.sum() - Operator::Identity(d, d),
                                                  Eigen::EigenvaluesOnly);
  report.completeness_residual = sum_eig.eigenvalues().cwiseAbs().maxCoeff();
  report.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& o : pom.outcomes) {
    Eigen::SelfAdjointEigenSolver<Operator> eig(o.op, Eigen::EigenvaluesOnly);
    report.min_eigenvalue = std::min(report.min_eigenvalue, eig.eigenvalues().minCoeff());
  }
  return report;
}

std::string scheme_name(SchemeTag tag) {
  switch (tag) {
    case SchemeTag::Srm: return "srm";
    case SchemeTag::Mud: return "mud";
    case SchemeTag::MudRefined: return "mud_refined";
    case SchemeTag::Ims: return "ims";
    case SchemeTag::Custom: return "custom";
  }
  return "?";
}

void SchemeSpec::validate() const {
  constexpr double tol = 1e-12;
  if (!(t >= 0.0)) throw std::invalid_argument("SchemeSpec: t must be >= 0");
  if (w1 < -tol || w2 < -tol || w3 < -tol)
    throw std::invalid_argument("SchemeSpec: weights must be nonnegative");
  // w2 = 0 admits the t -> inf limit, where t^2 w2 vanishes.
  const double lift_term = (w2 == 0.0) ? 0.0 : t * t * w2;
  if (std::abs(w1 + lift_term - 1.0) > tol)
    throw std::invalid_argument("SchemeSpec: w1 + t^2 w2 = 1 violated");
  if (std::abs(w2 + w3 - 1.0) > tol)
    throw std::invalid_argument("SchemeSpec: w2 + w3 = 1 violated");
}

SchemeSpec srm_spec() { return {1.0, 0.0, 1.0, 0.0, SchemeTag::Srm}; }

SchemeSpec mud_spec(const PyramidParams& params, bool refined) {
  if (!(params.r0 > 0.0 && params.r0 < 1.0))
    throw std::invalid_argument("mud_spec: requires 0 < r0 < 1");
  const SchemeTag tag = refined ? SchemeTag::MudRefined : SchemeTag::Mud;
  switch (params.shape()) {
    case PyramidShape::Acute:
      return {std::sqrt(params.r1 / params.r0), (params.r0 - params.r1) / params.r0,
              1.0, 0.0, tag};
    case PyramidShape::Orthogonal:
      return {1.0, 0.0, 1.0, 0.0, tag};
    case PyramidShape::Obtuse:
      return {std::sqrt(params.r1 / params.r0), 0.0, params.r0 / params.r1,
              (params.r1 - params.r0) / params.r1, tag};
  }
  throw std::logic_error("mud_spec: unreachable");
}

SchemeSpec ims_spec(const PyramidParams& params) {
  if (params.shape() != PyramidShape::Obtuse) {
    // Two symmetric pure states have no t < 1 regime; the formula below
    // divides by n - 2.
    double t = 1.0;
    if (params.n > 2) {
      const double candidate =
          (2.0 * params.n - 2.0) / (params.n - 2.0) * std::sqrt(params.r1 / params.r0);
      t = std::min(1.0, candidate);
    }
    return {t, 1.0 - t * t, 1.0, 0.0, SchemeTag::Ims};
  }
  if (params.is_flat())
    return {std::numeric_limits<double>::infinity(), 1.0, 0.0, 1.0, SchemeTag::Ims};
  const TOptimum opt = optimize_t_obtuse(params);
  const double w2 = 1.0 / (opt.t_star * opt.t_star);
  return {opt.t_star, 0.0, w2, 1.0 - w2, SchemeTag::Ims};
}

SchemeSpec custom_spec(double t, double w2) {
  SchemeSpec spec{t, 1.0 - t * t * w2, w2, 1.0 - w2, SchemeTag::Custom};
  if (w2 == 0.0) spec.w1 = 1.0;
  spec.validate();
  return spec;
}

Pom unified_pom(const PyramidParams& params, const SchemeSpec& spec) {
  spec.validate();
  if (spec.w1 > 0.0 && params.is_flat())
    throw std::invalid_argument("unified_pom: height outcome requires r0 > 0");
  if (spec.w3 > 0.0 && params.is_no_base())
    throw std::invalid_argument("unified_pom: difference outcomes require r1 > 0");
  Pom pom;
  if (spec.w2 > 0.0) add_edge_outcomes(pom, params, spec.t, spec.w2);
  if (spec.w3 > 0.0) add_diff_outcomes(pom, params, spec.w3);
  if (spec.w1 > 0.0) {
    const Ket h = height_ket(params) * (std::sqrt(spec.w1) / std::sqrt(params.r0));
    pom.add(OutcomeLabel::inconclusive(), spec.w1 / params.r0, rank1(h));
  }
  return pom;
}

Pom srm(const PyramidParams& params) { return unified_pom(params, srm_spec()); }

Pom srm_from_ensemble(const std::vector<Operator>& states,
                      const std::vector<double>& priors) {
  if (states.empty()) throw std::invalid_argument("srm_from_ensemble: empty ensemble");
  if (states.size() != priors.size())
    throw std::invalid_argument("srm_from_ensemble: states/priors size mismatch");
  const int d = int(states.front().rows());
  double prior_sum = 0.0;
  for (double p : priors) {
    if (p < 0.0) throw std::invalid_argument("srm_from_ensemble: negative prior");
    prior_sum += p;
  }
  if (std::abs(prior_sum - 1.0) > 1e-9)
    throw std::invalid_argument("srm_from_ensemble: priors must sum to 1");

  Operator rho = Operator::Zero(d, d);
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (states[j].rows() != d || states[j].cols() != d)
      throw std::invalid_argument("srm_from_ensemble: state dimension mismatch");
    rho += priors[j] * states[j];
  }

  Eigen::SelfAdjointEigenSolver<Operator> eig(rho);
  const Eigen::VectorXd lam = eig.eigenvalues();
  const Operator vec = eig.eigenvectors();
  constexpr double support_cut = 1e-12;
  Eigen::VectorXd inv_sqrt = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd on_support = Eigen::VectorXd::Zero(d);
  int rank = 0;
  for (int i = 0; i < d; ++i) {
    if (lam(i) > support_cut) {
      inv_sqrt(i) = 1.0 / std::sqrt(lam(i));
      on_support(i) = 1.0;
      ++rank;
    }
  }
  if (rank == 0) throw std::runtime_error("srm_from_ensemble: rho is numerically zero");

  const Operator z = vec * inv_sqrt.asDiagonal() * vec.transpose();
  const Operator proj = vec * on_support.asDiagonal() * vec.transpose();
  const Operator off_support = Operator::Identity(d, d) - proj;
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (priors[j] > 0.0 && (states[j].cwiseProduct(off_support)).sum() > 1e-10)
      throw std::runtime_error(
          "srm_from_ensemble: a signal state has weight on a near-zero eigenvalue of rho");
  }

  std::vector<Operator> outcomes;
  outcomes.reserve(states.size() + 1);
  for (std::size_t k = 0; k < states.size(); ++k) {
    Operator pi = z * (priors[k] * states[k]) * z;
    outcomes.push_back(0.5 * (pi + pi.transpose()));
  }
  if (rank < d) outcomes.push_back(off_support);

  // One renormalization pass absorbs the conditioning of rho; without it the
  // residual scales with the eigenvalue spread of the mixture.
  Operator total = Operator::Zero(d, d);
  for (const auto& pi : outcomes) total += pi;
  if ((total - Operator::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-13) {
    Eigen::SelfAdjointEigenSolver<Operator> fix(total);
    const Operator w = fix.eigenvectors() *
                       fix.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                       fix.eigenvectors().transpose();
    for (auto& pi : outcomes) {
      pi = w * pi * w;
      pi = 0.5 * (pi + pi.transpose()).eval();
    }
  }

  Pom pom;
  for (std::size_t k = 0; k < states.size(); ++k)
    pom.add(OutcomeLabel::edge(int(k) + 1), outcomes[k].trace(), outcomes[k]);
  if (rank < d)
    pom.add(OutcomeLabel::inconclusive(), outcomes.back().trace(), outcomes.back());
  return pom;
}

Pom mud(const PyramidParams& params, bool refined) {
  if (!(params.r0 > 0.0 && params.r0 < 1.0))
    throw std::invalid_argument("mud: requires 0 < r0 < 1");
  const bool obtuse = params.shape() == PyramidShape::Obtuse;
  if (refined && !obtuse)
    throw std::invalid_argument("mud: refined variant is defined for obtuse pyramids only");
  const SchemeSpec spec = mud_spec(params, refined);
  if (obtuse && !refined) {
    // Keep the inconclusive remainder in one piece: w3 times the projector
    // onto the pyramid base.
    Pom pom;
    add_edge_outcomes(pom, params, spec.t, spec.w2);
    const int n = params.n;
    const Operator base = Operator::Identity(n, n) - Operator::Constant(n, n, 1.0 / n);
    pom.add(OutcomeLabel::inconclusive(), spec.w3, spec.w3 * base);
    return pom;
  }
  return unified_pom(params, spec);
}

std::pair<Pom, SchemeSpec> ims(const PyramidParams& params) {
  const SchemeSpec spec = ims_spec(params);
  if (params.is_flat()) {
    // t -> inf limit of the obtuse family.  The height ket vanishes, so the
    // identity is completed by the projector onto the symmetry axis, which
    // has zero probability on every edge state.
    Pom pom;
    add_diff_outcomes(pom, params, spec.w3);
    const int n = params.n;
    const Ket axis = Ket::Constant(n, std::sqrt(spec.w1 / n));
    pom.add(OutcomeLabel::inconclusive(), spec.w1, rank1(axis));
    return {std::move(pom), spec};
  }
  return {unified_pom(params, spec), spec};
}

std::vector<Operator> pyramid_ensemble(const PyramidParams& params) {
  std::vector<Operator> states;
  states.reserve(params.n);
  for (const auto& e : edge_kets(params)) states.push_back(rank1(e));
  return states;
}

std::vector<double> uniform_priors(int n) {
  return std::vector<double>(n, 1.0 / n);
}

}  // namespace qpyr
