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

#include "qpyr/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>

#include "qpyr/information.hpp"

namespace qpyr {

namespace {

constexpr double kGolden = 0.6180339887498949;  // (sqrt 5 - 1)/2

/// Golden-section maximization on [lo, hi]; f must be unimodal-ish there.
template <typename F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, int iterations) {
  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iterations && b - a > 1e-14 * (1.0 + std::abs(b)); ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    }
  }
  const double mid = 0.5 * (a + b);
  const double fm = f(mid);
  if (f1 >= f2 && f1 >= fm) return {x1, f1};
  if (f2 >= fm) return {x2, f2};
  return {mid, fm};
}

}  // namespace

TOptimum optimize_t_obtuse(const PyramidParams& params) {
  if (params.shape() != PyramidShape::Obtuse)
    throw std::invalid_argument("optimize_t_obtuse: obtuse pyramids only");
  if (params.is_flat())
    return {std::numeric_limits<double>::infinity(),
            (1.0 - params.r0) * std::log2(params.n / 2.0)};

  const auto f = [&](double t) { return obtuse_family_info(params, t); };
  const double at_one = f(1.0);
  const double t_max = std::max(4.0, 10.0 / std::sqrt(params.n * params.r0));

  // Coarse grid with offsets t - 1 log-spaced down to 1e-9, so maxima that
  // detach from the t = 1 boundary near the threshold are still bracketed.
  const int grid_size = 1200;
  std::vector<double> ts(grid_size + 1);
  std::vector<double> fs(grid_size + 1);
  ts[0] = 1.0;
  fs[0] = at_one;
  const double lo_log = std::log(1e-9);
  const double hi_log = std::log(t_max - 1.0);
  for (int i = 0; i < grid_size; ++i) {
    ts[i + 1] = 1.0 + std::exp(lo_log + (hi_log - lo_log) * i / (grid_size - 1.0));
    fs[i + 1] = f(ts[i + 1]);
  }

  // Refine the best few interior local maxima; the landscape has at most a
  // couple of bumps, so three brackets are plenty.
  std::vector<int> peaks;
  for (int i = 1; i <= grid_size; ++i) {
    const double left = fs[i - 1];
    const double right = (i == grid_size) ? -std::numeric_limits<double>::infinity() : fs[i + 1];
    if (fs[i] >= left && fs[i] >= right) peaks.push_back(i);
  }
  std::sort(peaks.begin(), peaks.end(), [&](int a, int b) { return fs[a] > fs[b]; });
  if (peaks.size() > 3) peaks.resize(3);

  double best_t = 1.0, best_f = at_one;
  for (int i : peaks) {
    const double lo = ts[i - 1];
    const double hi = (i == grid_size) ? t_max : ts[i + 1];
    const auto [t, v] = golden_max(f, lo, hi, 200);
    if (v > best_f) {
      best_f = v;
      best_t = t;
    }
  }
  if (best_f > at_one) return {best_t, best_f};
  return {1.0, at_one};
}

ThresholdResult threshold_nr0(int n) {
  if (n < 3) throw std::invalid_argument("threshold_nr0: requires n >= 3");
  const auto exceeds = [&](double nr0) {
    return optimize_t_obtuse(make_pyramid(n, nr0 / n)).t_star > 1.0 + 1e-6;
  };
  double lo = 0.0, hi = 0.0;
  double prev = 1.0 - 1e-9;
  bool found = false;
  for (double x = 0.9; x > 1e-9; x *= 0.5) {
    if (exceeds(x)) {
      lo = x;
      hi = prev;
      found = true;
      break;
    }
    prev = x;
  }
  if (!found) return {};
  while (hi - lo > 1e-5) {
    const double mid = 0.5 * (lo + hi);
    (exceeds(mid) ? lo : hi) = mid;
  }
  return {true, 0.5 * (lo + hi), hi - lo};
}

void AscentConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("AscentConfig: max_iterations >= 1");
  if (!(info_tolerance > 0.0)) throw std::invalid_argument("AscentConfig: info_tolerance > 0");
  if (!(completeness_tolerance > 0.0))
    throw std::invalid_argument("AscentConfig: completeness_tolerance > 0");
  if (restarts < 1) throw std::invalid_argument("AscentConfig: restarts >= 1");
}

namespace {

// The ascent state is the list of square-root factors C_k with
// sum_k C_k^T C_k = 1.  Every outcome Pi_k = C_k^T C_k is a fresh Gram
// matrix, so nonnegativity is exact and cannot drift across iterations.

void outcomes_from_factors(const std::vector<Operator>& factors,
                           std::vector<Operator>& pis) {
  for (std::size_t k = 0; k < factors.size(); ++k)
    pis[k].noalias() = factors[k].transpose() * factors[k];
}

/// S^{-1/2} of a positive matrix; false when too ill-conditioned to trust.
bool inverse_sqrt(const Operator& s, Operator& out) {
  Eigen::SelfAdjointEigenSolver<Operator> eig(s);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  if (!(lam.maxCoeff() > 0.0) || lam.minCoeff() < 1e-8 * lam.maxCoeff()) return false;
  out = eig.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
        eig.eigenvectors().transpose();
  return true;
}

/// Renormalizes factors in place so that sum C^T C = 1; false if singular.
bool renormalize_factors(std::vector<Operator>& factors) {
  const int d = int(factors.front().rows());
  Operator s = Operator::Zero(d, d);
  for (const auto& c : factors) s.noalias() += c.transpose() * c;
  Operator w;
  if (!inverse_sqrt(s, w)) return false;
  Operator tmp(d, d);
  for (auto& c : factors) {
    tmp.noalias() = c * w;
    c.swap(tmp);
  }
  return true;
}

struct EnsembleView {
  const std::vector<Operator>* states;
  const std::vector<double>* priors;
};

double factors_info(const EnsembleView& ens, const std::vector<Operator>& factors,
                    std::vector<Operator>& pis_scratch) {
  outcomes_from_factors(factors, pis_scratch);
  const auto& states = *ens.states;
  const auto& priors = *ens.priors;
  const int rows = int(states.size());
  const int cols = int(pis_scratch.size());
  thread_local Eigen::MatrixXd p;
  thread_local Eigen::VectorXd row_sum, col_sum;
  p.resize(rows, cols);
  for (int j = 0; j < rows; ++j)
    for (int k = 0; k < cols; ++k)
      p(j, k) = std::max(priors[j] * (states[j].cwiseProduct(pis_scratch[k])).sum(), 0.0);
  row_sum = p.rowwise().sum();
  col_sum = p.colwise().sum();
  double info = 0.0;
  for (int j = 0; j < rows; ++j)
    for (int k = 0; k < cols; ++k)
      if (p(j, k) > 0.0) info += p(j, k) * std::log2(p(j, k) / (row_sum(j) * col_sum(k)));
  return std::max(info, 0.0);
}

/// Gradient-like operators R_k = sum_j p_j rho_j log2(p_jk/(p_j p_k)), with
/// the logs clamped to +-50 so directions stay finite near zero-error points.
void ascent_directions(const EnsembleView& ens, const std::vector<Operator>& pis,
                       std::vector<Operator>& r_out) {
  const auto& states = *ens.states;
  const auto& priors = *ens.priors;
  const JointDistribution joint = joint_probabilities(states, priors, pis);
  const int d = int(pis.front().rows());
  const int k_count = int(pis.size());
  for (int k = 0; k < k_count; ++k) {
    r_out[k].setZero(d, d);
    const double col = joint.column_marginals(k);
    if (col <= 0.0) continue;
    for (std::size_t j = 0; j < states.size(); ++j) {
      const double p = joint.p(int(j), k);
      const double log_term =
          (p <= 0.0) ? -50.0
                     : std::clamp(std::log2(p / (joint.row_marginals(int(j)) * col)), -50.0, 50.0);
      r_out[k] += priors[j] * log_term * states[j];
    }
  }
}

/// Recentres directions by the POM-weighted mean; that removes the part of
/// the step the subsequent renormalization would cancel anyway.
void recentre(const std::vector<Operator>& pis, std::vector<Operator>& r) {
  const int d = int(pis.front().rows());
  Operator mean = Operator::Zero(d, d);
  for (std::size_t k = 0; k < pis.size(); ++k)
    mean += 0.5 * (pis[k] * r[k] + r[k] * pis[k]);
  for (auto& rk : r) rk -= mean;
}

/// One candidate step C_k -> C_k (1 + eps R_k), renormalized.  Returns the
/// information, or -inf when the renormalization is untrustworthy.
double try_step(const EnsembleView& ens, const std::vector<Operator>& factors,
                const std::vector<Operator>& r, double eps,
                std::vector<Operator>& factors_out, std::vector<Operator>& pis_scratch) {
  for (std::size_t k = 0; k < factors.size(); ++k) {
    factors_out[k].resize(factors[k].rows(), factors[k].cols());
    factors_out[k].noalias() = factors[k] * r[k];
    factors_out[k] = factors[k] + eps * factors_out[k];
  }
  if (!renormalize_factors(factors_out)) return -std::numeric_limits<double>::infinity();
  return factors_info(ens, factors_out, pis_scratch);
}

struct LineSearchResult {
  bool improved = false;
  double eps = 0.0;
  double info = 0.0;
};

/// Bracketing line search along +-eps with golden refinement; only improving
/// candidates are accepted, which keeps the outer ascent monotone.
LineSearchResult line_search(const EnsembleView& ens, const std::vector<Operator>& factors,
                             const std::vector<Operator>& r, double eps0, double info0,
                             std::vector<Operator>& best_out, std::vector<Operator>& trial,
                             std::vector<Operator>& pis_scratch) {
  LineSearchResult result;
  result.info = info0;
  for (double sign : {1.0, -1.0}) {
    double e = sign * eps0;
    double v = try_step(ens, factors, r, e, trial, pis_scratch);
    if (v > result.info) {
      best_out.swap(trial);
      result = {true, e, v};
      while (std::abs(e) < 1e6) {
        const double v2 = try_step(ens, factors, r, 2.0 * e, trial, pis_scratch);
        if (!(v2 > result.info)) break;
        e *= 2.0;
        best_out.swap(trial);
        result = {true, e, v2};
      }
    } else {
      while (std::abs(e) > 1e-17) {
        e *= 0.25;
        v = try_step(ens, factors, r, e, trial, pis_scratch);
        if (v > result.info) {
          best_out.swap(trial);
          result = {true, e, v};
          break;
        }
      }
    }
    if (result.improved) break;
  }
  if (!result.improved) return result;

  // golden refinement of the step length inside [eps/4, 2 eps]
  double a = 0.25 * result.eps, b = 2.0 * result.eps;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = try_step(ens, factors, r, x1, trial, pis_scratch);
  if (f1 > result.info) {
    best_out.swap(trial);
    result = {true, x1, f1};
  }
  double f2 = try_step(ens, factors, r, x2, trial, pis_scratch);
  if (f2 > result.info) {
    best_out.swap(trial);
    result = {true, x2, f2};
  }
  for (int i = 0; i < 6; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = try_step(ens, factors, r, x2, trial, pis_scratch);
      if (f2 > result.info) {
        best_out.swap(trial);
        result = {true, x2, f2};
      }
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = try_step(ens, factors, r, x1, trial, pis_scratch);
      if (f1 > result.info) {
        best_out.swap(trial);
        result = {true, x1, f1};
      }
    }
  }
  return result;
}

/// Monotone ascent loop at a fixed slot count; trace records the accepted
/// information values when requested.
double ascend(const EnsembleView& ens, std::vector<Operator>& factors, int max_iterations,
              double info_tolerance, std::vector<double>* trace) {
  const int k = int(factors.size());
  std::vector<Operator> pis(k), r(k), best_out(k), trial(k), pis_scratch(k);
  double info = factors_info(ens, factors, pis_scratch);
  if (trace) trace->push_back(info);
  double eps = 0.1;
  for (int iter = 0; iter < max_iterations; ++iter) {
    outcomes_from_factors(factors, pis);
    ascent_directions(ens, pis, r);
    recentre(pis, r);
    LineSearchResult ls = line_search(ens, factors, r, eps, info, best_out, trial, pis_scratch);
    if (!ls.improved) {
      // the recentred direction can stall on a ridge; retry with the raw one
      ascent_directions(ens, pis, r);
      ls = line_search(ens, factors, r, eps, info, best_out, trial, pis_scratch);
      if (!ls.improved) break;
    }
    factors.swap(best_out);
    const double gain = ls.info - info;
    info = ls.info;
    eps = std::clamp(std::abs(ls.eps), 1e-12, 1e4);
    if (trace) trace->push_back(info);
    if (gain < info_tolerance) break;
  }
  return info;
}

}  // namespace

AscentResult steepest_ascent_ims(const std::vector<Operator>& states,
                                 const std::vector<double>& priors, int k_outcomes,
                                 const AscentConfig& config) {
  config.validate();
  if (states.empty()) throw std::invalid_argument("steepest_ascent_ims: empty ensemble");
  if (k_outcomes < int(states.size()))
    throw std::invalid_argument("steepest_ascent_ims: need at least one outcome per state");
  const int d = int(states.front().rows());
  const EnsembleView ens{&states, &priors};

  std::optional<AscentResult> best;
  for (int restart = 0; restart < config.restarts; ++restart) {
    std::mt19937_64 rng(config.rng_seed + 0x9E3779B97F4A7C15ull * (restart + 1));
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Exploration pass with spare outcome slots.  Random starts at the exact
    // slot count routinely lock into sub-optimal outcome assignments; the
    // spare slots let the right structure emerge, and whatever survives is
    // pruned back to the requested budget before the reported run.
    const int k_explore = 2 * k_outcomes;
    std::vector<Operator> explore(k_explore);
    for (int k = 0; k < k_explore; ++k) {
      explore[k].resize(d, d);
      if (restart % 2 == 0) {
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) explore[k](i, j) = gauss(rng);
      } else {
        Ket u(d), w(d);
        for (int i = 0; i < d; ++i) u(i) = gauss(rng);
        for (int i = 0; i < d; ++i) w(i) = gauss(rng);
        explore[k] = u * w.transpose();  // rank-1 start
      }
    }
    if (!renormalize_factors(explore)) continue;  // vanishing chance
    ascend(ens, explore, config.max_iterations, config.info_tolerance, nullptr);

    // Consolidate the exploration result into at most k_outcomes outcomes.
    // Proportional outcomes are merged first (the mutual information is
    // invariant under that), because the spare slots usually hold the same
    // physical outcome split over several slots.
    std::vector<Operator> explored_pis(k_explore);
    outcomes_from_factors(explore, explored_pis);
    std::vector<int> order(k_explore);
    for (int k = 0; k < k_explore; ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return explored_pis[a].trace() > explored_pis[b].trace();
    });
    std::vector<Operator> merged;
    for (int idx : order) {
      const Operator& pi = explored_pis[idx];
      const double tr = pi.trace();
      if (tr < 1e-14) continue;  // dead slot
      bool absorbed = false;
      for (Operator& m : merged) {
        if ((m / m.trace() - pi / tr).norm() < 1e-3) {
          m += pi;
          absorbed = true;
          break;
        }
      }
      if (!absorbed) merged.push_back(pi);
    }
    if (int(merged.size()) > k_outcomes) merged.resize(k_outcomes);
    std::vector<Operator> factors(k_outcomes, Operator::Zero(d, d));
    for (std::size_t k = 0; k < merged.size(); ++k) {
      Eigen::SelfAdjointEigenSolver<Operator> sqrt_eig(merged[k]);
      factors[k] = sqrt_eig.eigenvectors() *
                   sqrt_eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                   sqrt_eig.eigenvectors().transpose();
    }
    if (!renormalize_factors(factors)) continue;

    std::vector<double> trace;
    const double info =
        ascend(ens, factors, config.max_iterations, config.info_tolerance, &trace);

    std::vector<Operator> pis(k_outcomes);
    outcomes_from_factors(factors, pis);
    Operator sum = Operator::Zero(d, d);
    for (const auto& pi : pis) sum += pi;
    Eigen::SelfAdjointEigenSolver<Operator> eig(sum - Operator::Identity(d, d),
                                                Eigen::EigenvaluesOnly);
    const double residual = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (residual > config.completeness_tolerance) continue;
    if (!best || info > best->info_bits) {
      AscentResult result;
      for (int k = 0; k < k_outcomes; ++k) {
        const Operator pi = 0.5 * (pis[k] + pis[k].transpose()).eval();
        result.pom.add(OutcomeLabel::edge(k + 1), pi.trace(), pi);
      }
      result.info_bits = info;
      result.completeness_residual = residual;
      result.trace = std::move(trace);
      best = std::move(result);
    }
  }
  if (!best)
    throw std::runtime_error("steepest_ascent_ims: no restart met the completeness tolerance");
  return *best;
}

namespace {

SweepRow sweep_row(int n, double grid_value, SweepAxis axis, SchemeTag scheme) {
  const PyramidParams params = (axis == SweepAxis::Nr0)
                                   ? make_pyramid(n, grid_value / n)
                                   : make_pyramid(n, 1.0 - (n - 1.0) * grid_value / n);
  SweepRow row;
  row.n = n;
  row.nr0 = n * params.r0;
  row.scheme = scheme;
  row.srm_info_bits = srm_info(params);
  switch (scheme) {
    case SchemeTag::Srm:
      row.info_bits = row.srm_info_bits;
      row.t_opt = 1.0;
      row.failure_prob = 0.0;
      break;
    case SchemeTag::Mud:
    case SchemeTag::MudRefined: {
      row.info_bits = mud_info(params, scheme == SchemeTag::MudRefined);
      if (params.is_flat())
        row.t_opt = std::numeric_limits<double>::infinity();
      else
        row.t_opt = std::sqrt(params.r1 / params.r0);
      row.failure_prob = mud_failure(params);
      break;
    }
    case SchemeTag::Ims: {
      if (params.shape() == PyramidShape::Obtuse) {
        const TOptimum opt = optimize_t_obtuse(params);
        row.info_bits = opt.info_bits;
        row.t_opt = opt.t_star;
        const double w3 =
            std::isinf(opt.t_star) ? 1.0 : 1.0 - 1.0 / (opt.t_star * opt.t_star);
        row.failure_prob = w3 * (1.0 - params.r0);
      } else {
        const SchemeSpec spec = ims_spec(params);
        row.info_bits = ims_info(params);
        row.t_opt = spec.t;
        row.failure_prob = spec.w1 * params.r0;
      }
      break;
    }
    case SchemeTag::Custom:
      throw std::invalid_argument("sweep: custom scheme has no free-standing definition");
  }
  row.ratio_to_srm = row.srm_info_bits > 0.0
                         ? row.info_bits / row.srm_info_bits
                         : std::numeric_limits<double>::quiet_NaN();
  return row;
}

}  // namespace

std::vector<SweepRow> sweep(int n, const std::vector<double>& nr0_grid,
                            const std::vector<SchemeTag>& schemes, SweepAxis axis,
                            int threads) {
  for (double g : nr0_grid)
    if (!(g >= 0.0 && g <= 1.0))
      throw std::invalid_argument("sweep: grid values must lie in [0, 1]");
  const std::size_t scheme_count = schemes.size();
  std::vector<SweepRow> rows(nr0_grid.size() * scheme_count);
  const int worker_count =
      std::max(1, std::min<int>(threads, int(nr0_grid.size() ? nr0_grid.size() : 1)));

  const auto work = [&](int worker) {
    for (std::size_t i = worker; i < nr0_grid.size(); i += worker_count)
      for (std::size_t s = 0; s < scheme_count; ++s)
        rows[i * scheme_count + s] = sweep_row(n, nr0_grid[i], axis, schemes[s]);
  };
  if (worker_count == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (int w = 0; w < worker_count; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  return rows;
}

}  // namespace qpyr
