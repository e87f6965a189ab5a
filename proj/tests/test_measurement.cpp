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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "qpyr/information.hpp"
#include "test_support.hpp"

using namespace qtest;

namespace {

double entrywise_distance(const Pom& a, const Pom& b) {
  REQUIRE(a.size() == b.size());
  double dist = 0.0;
  for (const auto& oa : a.outcomes) {
    const Outcome* ob = b.find(oa.label);
    REQUIRE(ob != nullptr);
    dist = std::max(dist, (oa.op - ob->op).cwiseAbs().maxCoeff());
  }
  return dist;
}

}  // namespace

TEST_CASE("scheme spec validation") {
  CHECK_NOTHROW(srm_spec().validate());
  CHECK_THROWS_AS(custom_spec(2.0, 1.0), std::invalid_argument);  // w1 would be negative
  SchemeSpec bad{1.0, 0.5, 1.0, 0.0, SchemeTag::Custom};          // w1 + t^2 w2 != 1
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  SchemeSpec bad2{1.0, 0.0, 0.5, 0.2, SchemeTag::Custom};  // w2 + w3 != 1
  CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
  // t -> inf limit is admitted when the edge weight vanishes
  SchemeSpec flat_limit{std::numeric_limits<double>::infinity(), 1.0, 0.0, 1.0,
                        SchemeTag::Custom};
  CHECK_NOTHROW(flat_limit.validate());
}

TEST_CASE("unified family construction") {
  SUBCASE("srm row gives the basis projectors") {
    const auto params = make_pyramid(4, 0.3);
    const auto pom = unified_pom(params, srm_spec());
    REQUIRE(pom.size() == 4);
    for (int k = 0; k < 4; ++k) {
      Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
      expected(k, k) = 1.0;
      CHECK((pom.outcomes[k].op - expected).cwiseAbs().maxCoeff() <= 1e-15);
      CHECK(pom.outcomes[k].label == OutcomeLabel::edge(k + 1));
    }
  }
  SUBCASE("random specs decompose the identity") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 200; ++trial) {
      const auto params = random_params(rng);
      const auto pom = unified_pom(params, random_spec(rng, params));
      const auto report = validate_pom(pom);
      REQUIRE(report.completeness_residual <= 1e-12);
      REQUIRE(report.min_eigenvalue >= -1e-12);
    }
  }
  SUBCASE("height plus difference outcomes complete without edges") {
    const auto params = make_pyramid(4, 0.3);
    const SchemeSpec spec = custom_spec(0.0, 0.0);  // t = 0, w2 = 0 -> w1 = 1, w3 = 1
    const auto pom = unified_pom(params, spec);
    CHECK(pom.size() == 1 + 6);
    CHECK(validate_pom(pom).completeness_residual <= 1e-12);
  }
  SUBCASE("degenerate geometry conflicts are rejected") {
    const auto flat = make_pyramid(3, 0.0);
    SchemeSpec needs_height{0.5, 0.75, 0.25, 0.75, SchemeTag::Custom};
    CHECK_THROWS_AS(unified_pom(flat, needs_height), std::invalid_argument);
    const auto no_base = make_pyramid(3, 1.0);
    CHECK_THROWS_AS(unified_pom(no_base, custom_spec(1.0, 0.5)), std::invalid_argument);
  }
}

TEST_CASE("srm") {
  SUBCASE("orthogonal pyramid projects onto the edge states themselves") {
    const auto params = make_pyramid(3, 1.0 / 3.0);
    const auto pom = srm(params);
    const auto edges = edge_kets(params);
    for (int k = 0; k < 3; ++k) {
      const Eigen::MatrixXd proj = edges[k] * edges[k].transpose();
      CHECK((pom.outcomes[k].op - proj).cwiseAbs().maxCoeff() <= 1e-14);
    }
  }
  SUBCASE("rank-1 orthogonal projectors that sum to the identity") {
    const auto pom = srm(make_pyramid(3, 0.6));
    const auto report = validate_pom(pom);
    CHECK(report.completeness_residual <= 1e-13);
    CHECK(report.min_eigenvalue >= -1e-14);
    for (const auto& o : pom.outcomes) {
      Eigen::SelfAdjointEigenSolver<Operator> eig(o.op, Eigen::EigenvaluesOnly);
      const auto& ev = eig.eigenvalues();
      CHECK(ev(2) == doctest::Approx(1.0).epsilon(1e-13));  // rank 1, unit weight
      CHECK(std::abs(ev(1)) <= 1e-13);
    }
  }
  SUBCASE("definitional equality with the unified family") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      const auto params = random_params(rng);
      CHECK(entrywise_distance(srm(params), unified_pom(params, srm_spec())) <= 1e-14);
    }
  }
}

TEST_CASE("srm_from_ensemble") {
  SUBCASE("matches the pyramid closed form") {
    const auto params = make_pyramid(3, 0.2);
    const auto direct = srm(params);
    const auto generic = srm_from_ensemble(pyramid_ensemble(params), uniform_priors(3));
    REQUIRE(generic.size() == 3);
    for (int k = 0; k < 3; ++k)
      CHECK((generic.outcomes[k].op - direct.outcomes[k].op).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("two orthogonal pure states give their projectors") {
    std::vector<Operator> states(2, Operator::Zero(2, 2));
    states[0](0, 0) = 1.0;
    states[1](1, 1) = 1.0;
    const auto pom = srm_from_ensemble(states, {0.5, 0.5});
    REQUIRE(pom.size() == 2);
    CHECK((pom.outcomes[0].op - states[0]).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((pom.outcomes[1].op - states[1]).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("random qutrit ensembles stay complete") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Operator> states;
      for (int j = 0; j < 3; ++j) {
        Ket v(3);
        for (int i = 0; i < 3; ++i) v(i) = gauss(rng);
        v.normalize();
        states.push_back(v * v.transpose());
      }
      const auto pom = srm_from_ensemble(states, uniform_priors(3));
      REQUIRE(validate_pom(pom).completeness_residual <= 1e-10);
    }
  }
  SUBCASE("flat pyramid: support-restricted construction, same statistics") {
    const auto params = make_pyramid(3, 0.0);
    const auto states = pyramid_ensemble(params);
    const auto priors = uniform_priors(3);
    const auto generic = srm_from_ensemble(states, priors);
    // rank-deficient mixture: an inconclusive completion appears and never fires
    REQUIRE(generic.size() == 4);
    CHECK(validate_pom(generic).completeness_residual <= 1e-12);
    const auto joint_generic = joint_probabilities(states, priors, generic);
    CHECK(joint_generic.column_marginals(3) <= 1e-14);
    const auto joint_direct = joint_probabilities(states, priors, srm(params));
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        CHECK(std::abs(joint_generic.p(j, k) - joint_direct.p(j, k)) <= 1e-12);
  }
  SUBCASE("signal weight on a near-zero eigenvalue is a numerical failure") {
    std::vector<Operator> states(2, Operator::Zero(2, 2));
    states[0](0, 0) = 1.0;
    states[1](1, 1) = 1.0;
    CHECK_THROWS_AS(srm_from_ensemble(states, {1.0 - 1e-13, 1e-13}), std::runtime_error);
  }
}

TEST_CASE("mud") {
  SUBCASE("orthogonal pyramid reduces to the srm with no inconclusive outcome") {
    const auto params = make_pyramid(3, 1.0 / 3.0);
    const auto pom = mud(params);
    CHECK(pom.size() == 3);
    CHECK(entrywise_distance(pom, srm(params)) <= 1e-12);
  }
  SUBCASE("refined obtuse variant carries edge and difference labels") {
    const auto params = make_pyramid(3, 0.1);
    const auto pom = mud(params, true);
    REQUIRE(pom.size() == 6);
    CHECK(pom.find(OutcomeLabel::edge(1)) != nullptr);
    CHECK(pom.find(OutcomeLabel::edge(3)) != nullptr);
    CHECK(pom.find(OutcomeLabel::diff(1, 2)) != nullptr);
    CHECK(pom.find(OutcomeLabel::diff(2, 3)) != nullptr);
    CHECK(validate_pom(pom).completeness_residual <= 1e-12);
  }
  SUBCASE("conclusive outcomes never misidentify") {
    const auto params = make_pyramid(5, 0.5);
    const auto pom = mud(params);
    const auto edges = edge_kets(params);
    double max_cross = 0.0;
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k) {
        if (j == k) continue;
        max_cross = std::max(
            max_cross, edges[j].dot(pom.outcomes[k].op * edges[j]));
      }
    CHECK(max_cross <= 1e-12);
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(mud(make_pyramid(3, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(mud(make_pyramid(3, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(mud(make_pyramid(3, 0.8), true), std::invalid_argument);
  }
}

TEST_CASE("ims") {
  SUBCASE("acute closed-form t, checked against a 1-D scan of the family") {
    const auto params = make_pyramid(10, 0.5);
    const auto spec = ims_spec(params);
    CHECK(spec.t == doctest::Approx(0.75).epsilon(1e-12));
    // independent scan over the acute family (w2 = 1, w1 = 1 - t^2)
    double best_t = 1.0, best_info = -1.0;
    for (double t = 0.01; t <= 1.0; t += 1e-4) {
      const double info = unified_info(params, custom_spec(t, 1.0));
      if (info > best_info) {
        best_info = info;
        best_t = t;
      }
    }
    CHECK(std::abs(best_t - 0.75) <= 1e-3);
    CHECK(best_info <= unified_info(params, spec) + 1e-9);
  }
  SUBCASE("obtuse above the threshold collapses to the srm") {
    const auto params = make_pyramid(3, 0.1);  // n r0 = 0.3
    const auto [pom, spec] = ims(params);
    CHECK(spec.t == 1.0);
    CHECK(entrywise_distance(pom, srm(params)) <= 1e-12);
  }
  SUBCASE("srm branch inside 1 < n r0 < 4 - 4/n") {
    std::mt19937_64 rng(19);
    std::uniform_int_distribution<int> pick_n(3, 12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = pick_n(rng);
      const double lo = 1.0, hi = 4.0 - 4.0 / n;
      const double nr0 = lo + (hi - lo) * unit(rng);
      const auto spec = ims_spec(make_pyramid(n, nr0 / n));
      REQUIRE(spec.t == 1.0);
    }
  }
  SUBCASE("flat pyramid gets the difference outcomes plus a dead axis outcome") {
    const auto params = make_pyramid(4, 0.0);
    const auto [pom, spec] = ims(params);
    CHECK(std::isinf(spec.t));
    CHECK(spec.w2 == 0.0);
    CHECK(spec.w3 == 1.0);
    REQUIRE(pom.size() == 6 + 1);
    CHECK(validate_pom(pom).completeness_residual <= 1e-12);
    const auto joint = joint_probabilities(pyramid_ensemble(params), uniform_priors(4), pom);
    CHECK(joint.column_marginals(6) <= 1e-14);  // the axis outcome never fires
  }
  SUBCASE("n = 2 keeps t = 1") {
    CHECK(ims_spec(make_pyramid(2, 0.9)).t == 1.0);
    CHECK(ims_spec(make_pyramid(2, 0.55)).t == 1.0);
  }
}

TEST_CASE("validate_pom") {
  const auto params = make_pyramid(4, 0.35);
  SUBCASE("named schemes validate cleanly") {
    CHECK(validate_pom(srm(params)).completeness_residual <= 1e-12);
    CHECK(validate_pom(srm(params)).min_eigenvalue >= -1e-14);
    const auto refined = mud(make_pyramid(4, 0.05), true);
    CHECK(validate_pom(refined).completeness_residual <= 1e-12);
  }
  SUBCASE("a missing outcome is detected") {
    Pom broken = srm(params);
    broken.outcomes.pop_back();
    CHECK(validate_pom(broken).completeness_residual == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("named schemes stay valid over random shapes") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto any = random_params(rng);
    const auto srm_report = validate_pom(srm(any));
    REQUIRE(srm_report.completeness_residual <= 1e-10);
    REQUIRE(srm_report.min_eigenvalue >= -1e-10);

    const auto inner = random_params_open(rng);
    const bool obtuse = inner.shape() == PyramidShape::Obtuse;
    const auto mud_report = validate_pom(mud(inner, obtuse && trial % 2 == 0));
    REQUIRE(mud_report.completeness_residual <= 1e-10);
    REQUIRE(mud_report.min_eigenvalue >= -1e-10);

    const auto [ims_pom, ims_sp] = ims(random_params(rng, 2, 12));
    const auto ims_report = validate_pom(ims_pom);
    REQUIRE(ims_report.completeness_residual <= 1e-10);
    REQUIRE(ims_report.min_eigenvalue >= -1e-10);
  }
}

TEST_CASE("table of unified-family rows reproduces the named schemes") {
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 150; ++trial) {
    const auto params = random_params_open(rng, 2, 12);
    CHECK(entrywise_distance(srm(params), unified_pom(params, srm_spec())) <= 1e-12);
    const bool obtuse = params.shape() == PyramidShape::Obtuse;
    CHECK(entrywise_distance(mud(params, obtuse),
                             unified_pom(params, mud_spec(params, obtuse))) <= 1e-12);
    if (trial % 5 == 0) {
      const auto [pom, spec] = ims(params);
      CHECK(entrywise_distance(pom, unified_pom(params, spec)) <= 1e-12);
    }
  }
}

TEST_CASE("mud zero-error and failure probability") {
  std::mt19937_64 rng(606);
  for (int trial = 0; trial < 300; ++trial) {
    const auto params = random_params_open(rng, 2, 15);
    const bool obtuse = params.shape() == PyramidShape::Obtuse;
    const bool refined = obtuse && trial % 2 == 0;
    const auto pom = mud(params, refined);
    const auto edges = edge_kets(params);
    const int n = params.n;

    double max_cross = 0.0;
    double failure = 0.0;
    for (const auto& o : pom.outcomes) {
      if (o.label.kind == OutcomeKind::Edge) {
        for (int j = 0; j < n; ++j)
          if (j != o.label.k - 1)
            max_cross = std::max(max_cross, edges[j].dot(o.op * edges[j]));
      } else {
        for (int j = 0; j < n; ++j) failure += edges[j].dot(o.op * edges[j]) / n;
      }
    }
    REQUIRE(max_cross <= 1e-12);
    REQUIRE(std::abs(failure - mud_failure(params)) <= 1e-12);
  }
}

TEST_CASE("the acute ims lift always exceeds the unambiguous dual value") {
  std::mt19937_64 rng(707);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<int> pick_n(2, 20);
    const int n = pick_n(rng);
    std::uniform_real_distribution<double> pick_r0(1.0 / n + 1e-9, 1.0 - 1e-9);
    const auto params = make_pyramid(n, pick_r0(rng));
    REQUIRE(params.shape() == PyramidShape::Acute);
    const double t_dual = std::sqrt(params.r1 / params.r0);
    REQUIRE(ims_spec(params).t > t_dual);
  }
}

TEST_CASE("cyclic covariance of the edge outcomes") {
  std::mt19937_64 rng(808);
  for (int trial = 0; trial < 100; ++trial) {
    const auto params = random_params_open(rng, 2, 10);
    const auto u = cyclic_unitary(params);
    const int n = params.n;
    std::vector<Pom> poms;
    poms.push_back(srm(params));
    poms.push_back(mud(params, params.shape() == PyramidShape::Obtuse));
    if (trial % 5 == 0) poms.push_back(ims(params).first);
    for (const auto& pom : poms) {
      for (int k = 1; k <= n; ++k) {
        const Outcome* here = pom.find(OutcomeLabel::edge(k));
        const Outcome* next = pom.find(OutcomeLabel::edge(k % n + 1));
        REQUIRE(here != nullptr);
        REQUIRE(next != nullptr);
        REQUIRE(spectral_norm(u * here->op * u.transpose() - next->op) <= 1e-12);
      }
    }
  }
}
