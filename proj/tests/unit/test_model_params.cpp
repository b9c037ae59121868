#include <cmath>

#include "doctest.h"
#include "fixtures/oracle_fixtures.hpp"
#include "mangled/errors.hpp"
#include "mangled/model_params.hpp"

using namespace mangled;

TEST_CASE("binary_event_stats at p = 0.6") {
  const auto s = binary_event_stats(0.6);
  CHECK(s.xhat1 == doctest::Approx(fixtures::kXhat1P06).epsilon(1e-14));
  CHECK(s.sigma1 * s.sigma1 == doctest::Approx(fixtures::kSigma1SqP06).epsilon(1e-13));
  CHECK(s.xtilde1 == doctest::Approx(fixtures::kXtilde1P06).epsilon(1e-14));
  CHECK(s.xtilde1 == s.xhat1 - s.sigma1 * s.sigma1);
}

TEST_CASE("binary_event_stats at p = 1/2") {
  const auto s = binary_event_stats(0.5);
  CHECK(s.xhat1 == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK(s.sigma1 == 0.0);
  CHECK(s.xtilde1 == s.xhat1);
}

TEST_CASE("binary_event_stats near p = 1") {
  const auto s = binary_event_stats(1.0 - 1e-12);
  CHECK(std::fabs(s.xhat1) < 1e-10);
  CHECK(s.sigma1 < 1e-4);
}

TEST_CASE("branch labels are immaterial") {
  for (double p = 0.01; p < 0.5; p += 0.01) {
    const auto a = binary_event_stats(p);
    const auto b = binary_event_stats(1.0 - p);
    CHECK(a.xhat1 == doctest::Approx(b.xhat1).epsilon(1e-14));
    CHECK(a.sigma1 == doctest::Approx(b.sigma1).epsilon(1e-13));
    CHECK(a.xtilde1 == doctest::Approx(b.xtilde1).epsilon(1e-14));
    CHECK(a.sigma1 > 0.0);
    CHECK(a.xtilde1 < a.xhat1);
    CHECK(a.xhat1 < 0.0);
  }
}

TEST_CASE("domain errors") {
  for (double p : {0.0, 1.0, -0.2, 1.5, std::nan("")}) {
    CHECK_THROWS_AS(binary_event_stats(p), DomainError);
    CHECK_THROWS_AS(count_walk_stats(p), DomainError);
    CHECK_THROWS_AS(DecoherenceParams(p, 1.0), DomainError);
  }
  CHECK_THROWS_AS(DecoherenceParams(0.6, 0.0), DomainError);
  CHECK_THROWS_AS(DecoherenceParams(0.6, 1.0, -1), DomainError);
  CHECK_THROWS_AS(DiffusionParams(0.0, 0.5, 0.1), DomainError);
  CHECK_THROWS_AS(DiffusionParams(1.0, -0.5, 0.1), DomainError);
  CHECK_THROWS_AS(DiffusionParams(1.0, 0.5, 0.0), DomainError);
  CHECK_THROWS_AS(to_diffusion(DecoherenceParams(0.6, 1.0), 0.0), DomainError);
}

TEST_CASE("to_diffusion at p = 0.6") {
  const DiffusionParams dp = to_diffusion(DecoherenceParams(0.6, 1.0), 0.1);
  CHECK(dp.v() == doctest::Approx(-fixtures::kXtilde1P06).epsilon(1e-14));
  CHECK(dp.w() == doctest::Approx(fixtures::kSigma1SqP06).epsilon(1e-13));
  CHECK(dp.eps() == 0.1);
  CHECK(dp.survival_regime());
  CHECK_FALSE(dp.degenerate());
}

TEST_CASE("p = 1/2 is degenerate") {
  const DecoherenceParams d(0.5, 1.0);
  CHECK(d.degenerate());
  const DiffusionParams dp = to_diffusion(d, 0.1);
  CHECK(dp.w() == 0.0);
  CHECK(dp.degenerate());
  CHECK_THROWS_AS(dp.require_diffusive("test"), DomainError);
}

TEST_CASE("v - w = -r xhat1") {
  for (double r : {0.1, 1.0, 7.5}) {
    for (double p = 0.05; p < 1.0; p += 0.05) {
      const DiffusionParams dp = to_diffusion(DecoherenceParams(p, r), 0.1);
      const double expected = -r * binary_event_stats(p).xhat1;
      CHECK(std::fabs((dp.v() - dp.w()) - expected) <= 1e-12 * expected);
    }
  }
}

TEST_CASE("homogeneous in r") {
  const DiffusionParams a = to_diffusion(DecoherenceParams(0.7, 1.0), 0.2);
  const DiffusionParams b = to_diffusion(DecoherenceParams(0.7, 3.0), 0.2);
  CHECK(b.v() == doctest::Approx(3.0 * a.v()).epsilon(1e-15));
  CHECK(b.w() == doctest::Approx(3.0 * a.w()).epsilon(1e-15));
}

TEST_CASE("survival regime flag") {
  CHECK(DiffusionParams(1.0, 0.5, 0.1).survival_regime());
  CHECK_FALSE(DiffusionParams(0.4, 0.5, 0.1).survival_regime());
  CHECK_FALSE(DiffusionParams(0.5, 0.5, 0.1).survival_regime());
}

TEST_CASE("count_walk_stats") {
  const auto half = count_walk_stats(0.5);
  CHECK(half.mean == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK(half.var == 0.0);
  const auto s = count_walk_stats(0.6);
  CHECK(s.mean == doctest::Approx(fixtures::kCountMeanP06).epsilon(1e-14));
  CHECK(s.var == doctest::Approx(fixtures::kCountVarP06).epsilon(1e-13));
  for (int i = 51; i <= 99; ++i) {
    const double p = i / 100.0;
    const double s2 = std::pow(binary_event_stats(p).sigma1, 2);
    const double var = count_walk_stats(p).var;
    CHECK(var > s2);
    CHECK(var / s2 == doctest::Approx(1.0 / (4.0 * p * (1.0 - p))).epsilon(1e-12));
  }
}
