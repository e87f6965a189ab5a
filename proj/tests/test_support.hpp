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

#include <random>
#include <vector>

#include "qpyr/geometry.hpp"
#include "qpyr/measurement.hpp"

namespace qtest {

using namespace qpyr;

inline double spectral_norm(const Eigen::MatrixXd& m) {
  return m.jacobiSvd().singularValues()(0);
}

inline Eigen::MatrixXd gram(const std::vector<Ket>& kets) {
  const int n = int(kets.size());
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = kets[i].dot(kets[j]);
  return g;
}

inline PyramidParams random_params(std::mt19937_64& rng, int n_min = 2, int n_max = 30) {
  std::uniform_int_distribution<int> pick_n(n_min, n_max);
  std::uniform_real_distribution<double> pick_r0(0.0, 1.0);
  return make_pyramid(pick_n(rng), pick_r0(rng));
}

inline PyramidParams random_params_open(std::mt19937_64& rng, int n_min = 2, int n_max = 30,
                                        double r0_min = 1e-6, double r0_max = 1.0 - 1e-6) {
  std::uniform_int_distribution<int> pick_n(n_min, n_max);
  std::uniform_real_distribution<double> pick_r0(r0_min, r0_max);
  return make_pyramid(pick_n(rng), pick_r0(rng));
}

/// Valid random scheme; intended zero weights are exact so degenerate
/// geometry never sees a spurious summand.
inline SchemeSpec random_spec(std::mt19937_64& rng, const PyramidParams& params) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SchemeSpec spec;
  spec.tag = SchemeTag::Custom;
  if (params.is_no_base()) {
    // difference outcomes unavailable: w3 = 0, w2 = 1, t <= 1
    spec.t = unit(rng);
    spec.w2 = 1.0;
    spec.w3 = 0.0;
    spec.w1 = 1.0 - spec.t * spec.t;
    return spec;
  }
  if (params.is_flat()) {
    // height outcome unavailable: w1 = 0, so w2 = 1/t^2 with t >= 1
    spec.t = 1.0 + 2.0 * unit(rng);
    spec.w1 = 0.0;
    spec.w2 = 1.0 / (spec.t * spec.t);
    spec.w3 = 1.0 - spec.w2;
    return spec;
  }
  const double t = 3.0 * unit(rng);
  const double w2_cap = t > 1.0 ? 1.0 / (t * t) : 1.0;
  spec.t = t;
  spec.w2 = w2_cap * unit(rng);
  spec.w1 = 1.0 - t * t * spec.w2;
  spec.w3 = 1.0 - spec.w2;
  return spec;
}

}  // namespace qtest
