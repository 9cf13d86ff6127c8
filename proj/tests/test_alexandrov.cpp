#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "curvflow/alexandrov.hpp"
#include "curvflow/error.hpp"
#include "oracles.hpp"

using namespace curvflow;
using namespace curvflow::alexandrov;
using namespace oracle;

TEST_CASE("unit ball is the equality case") {
  const auto r = lhs_rhs(RadialSurface::ball(24), 0.5);
  CHECK(std::abs(r.lhs) < 1e-12);
  CHECK(r.rhs < 1e-14);
  CHECK(r.ratio == 0.0);
  CHECK(r.admissible);
  CHECK(std::abs(kTwoBallPerimeter - 4 * kPi * std::cbrt(2.0)) < 1e-12);
}

TEST_CASE("Y20 perturbation against dense quadrature") {
  const auto r = lhs_rhs(RadialSurface::mode(24, 2, 0, 0.1), 0.5);
  Profile p{[](double t) { return 1.0 + 0.1 * y20(t); }, [](double t) { return 0.1 * y20_t(t); },
            [](double t) { return 0.1 * y20_tt(t); }};
  const auto d = dense_report(p, 4096);
  // Normalizing by dilation multiplies P by (|B1|/V)^(2/3) and leaves osc unchanged.
  const double pn = d.P * std::pow(4 * kPi / 3 / d.V, 2.0 / 3.0);
  const double lhs = pn - 4 * kPi;
  CHECK(r.lhs > 0.0);
  CHECK(r.rhs > 0.0);
  CHECK(std::isfinite(r.ratio));
  CHECK(std::abs(r.lhs - lhs) / lhs < 1e-6);
  CHECK(std::abs(r.rhs - d.osc) / d.osc < 1e-6);
}

TEST_CASE("admissibility threshold") {
  // A strongly deformed surface has P above the two-ball threshold minus delta0.
  const auto big = lhs_rhs(RadialSurface::mode(24, 6, 0, 0.5), 0.1);
  CHECK(big.perimeter > kTwoBallPerimeter - 0.1);
  CHECK_FALSE(big.admissible);
  const auto r = lhs_rhs(RadialSurface::mode(24, 2, 0, 0.1), 0.1);
  CHECK(r.admissible == (r.perimeter <= kTwoBallPerimeter - 0.1));
}

TEST_CASE("invariances") {
  RadialSurface s;
  s.w = s2::random_band_limited(8, 2, 6, 0.15, 24);
  const auto a = lhs_rhs(s, 0.5);
  const auto b = lhs_rhs(s.translated({0.4, -1.0, 2.5}), 0.5);
  CHECK(std::abs(a.lhs - b.lhs) < 1e-10);
  CHECK(std::abs(a.rhs - b.rhs) < 1e-10);
  for (double alpha : {0.5, 2.0}) {
    const auto c = lhs_rhs(s.dilated(alpha), 0.5);
    CHECK(std::abs(c.rhs - a.rhs) / a.rhs < 1e-8);
    CHECK(std::abs(c.lhs - a.lhs) / a.lhs < 1e-8);
  }
}

TEST_CASE("sweep") {
  SweepConfig c;
  c.n_samples = 40;
  const auto res = sweep(c);
  CHECK(res.records.size() == 40);
  CHECK(res.summary.admissible + res.summary.excluded == 40);
  CHECK(std::isfinite(res.summary.max_ratio));
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    const auto& r = res.records[i];
    CHECK(r.seed == c.seed + i);
    CHECK(r.lhs >= -1e-9);
    CHECK(r.rhs >= 0.0);
    if (r.admissible) CHECK(r.lhs <= res.summary.max_ratio * r.rhs + 1e-15);
  }
  CHECK(sweep(c).records[7].lhs == res.records[7].lhs);

  c.amplitude = 0.0;
  const auto zero = sweep(c);
  for (const auto& r : zero.records) {
    CHECK(std::abs(r.lhs) < 1e-12);
    CHECK(std::abs(r.rhs) < 1e-20);
  }

  c.amplitude = 0.05;
  c.n_samples = 50;
  const double small = sweep(c).summary.max_ratio;
  c.amplitude = 0.10;
  const double large = sweep(c).summary.max_ratio;
  CHECK(small / large < 4.0);
  CHECK(large / small < 4.0);

  c.delta0 = 10.0;
  CHECK_THROWS_AS(sweep(c), ValidationError);
  c.n_samples = 0;
  CHECK_THROWS_AS(sweep(c), ValidationError);
}

TEST_CASE("sharpness probe") {
  const auto t = sharpness_probe(2, 0, {0.10, 0.05, 0.025}, 1.25);
  REQUIRE(t.rows.size() == 3);
  double lo = 1e300, hi = 0;
  for (const auto& r : t.rows) {
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  CHECK(hi / lo <= 2.0);
  CHECK(t.rows[1].ratio_p > t.rows[0].ratio_p);
  CHECK(t.rows[2].ratio_p > t.rows[1].ratio_p);
  CHECK(t.rows[2].ratio_p / t.rows[0].ratio_p >= 1.4);

  const auto one = sharpness_probe(2, 0, {0.10, 0.05, 0.025}, 1.0);
  for (const auto& r : one.rows) CHECK(r.ratio_p == doctest::Approx(r.ratio).epsilon(1e-14));

  for (const auto& amps : {std::vector<double>{0.12, 0.07, 0.03}, std::vector<double>{0.1, 0.09, 0.021},
                           std::vector<double>{0.05, 0.04, 0.03}}) {
    const auto s = sharpness_probe(2, 0, amps, 1.25);
    CHECK(s.rows[1].ratio_p > s.rows[0].ratio_p);
    CHECK(s.rows[2].ratio_p > s.rows[1].ratio_p);
  }

  CHECK_THROWS_AS(sharpness_probe(2, 0, {0.05, 0.1}, 1.25), ValidationError);
  CHECK_THROWS_AS(sharpness_probe(2, 0, {0.3}, 1.25), ValidationError);
  CHECK_THROWS_AS(sharpness_probe(2, 0, {0.1}, 0.5), ValidationError);
}

TEST_CASE("multiball check") {
  const double r = std::cbrt(0.5);
  const auto exact = multiball_check(
      {RadialSurface::ball(16, r, {1.5, 0, 0}), RadialSurface::ball(16, r, {-1.5, 0, 0})}, 0.1);
  CHECK(exact.count == 2);
  CHECK(std::abs(exact.lhs) < 1e-8);
  CHECK(std::abs(exact.rhs) < 1e-10);
  CHECK(exact.radii_ok);
  CHECK(std::abs(exact.margin - (3.0 - 2 * r)) < 1e-12);

  auto a = RadialSurface::ball(16, r, {1.5, 0, 0});
  a.w(2, 0) += 0.05;
  const auto pert = multiball_check({a, RadialSurface::ball(16, r, {-1.5, 0, 0})}, 0.1);
  CHECK(pert.lhs > 0.0);
  CHECK(pert.rhs > 0.0);
  CHECK(std::isfinite(pert.ratio));
  double total = 0.0;
  for (double x : pert.radii) total += x * x * x;
  CHECK(std::abs(total - 1.0) < 1e-12);

  CHECK_THROWS_AS(multiball_check({RadialSurface::ball(16, r, {0.5, 0, 0}), RadialSurface::ball(16, r, {-0.5, 0, 0})}, 0.1),
                  ValidationError);
  CHECK_THROWS_AS(multiball_check({RadialSurface::ball(16, r, {0.85, 0, 0}), RadialSurface::ball(16, r, {-0.85, 0, 0})}, 0.2),
                  ValidationError);
}

TEST_CASE("radii power-mean inequality") {
  const double r2 = std::cbrt(1.0 - 0.9 * 0.9 * 0.9);
  double lhs = 0, bound = 0;
  CHECK(radii_inequality({0.9, r2}, &lhs, &bound));
  CHECK(std::abs(bound - std::cbrt(2.0)) < 1e-14);
  CHECK(lhs <= bound);
  CHECK(radii_inequality({0.5, 0.5, 0.5}));
}
