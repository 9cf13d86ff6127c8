#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "curvflow/error.hpp"
#include "curvflow/vpmcf.hpp"
#include "oracles.hpp"

using namespace curvflow;
using namespace curvflow::vpmcf;
using oracle::kPi;

namespace {

// Composite Simpson rule on [a, b] with n (even) intervals.
template <class F>
double simpson(F f, double a, double b, int n = 2000) {
  const double dx = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * dx);
  return s * dx / 3.0;
}

double coeff_distance(const RadialSurface& a, const RadialSurface& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.w.a.size(); ++i) s += std::pow(a.w.a[i] - b.w.a[i], 2);
  return std::sqrt(s);
}

const RadialSurface& y20_start() {
  static const RadialSurface s = surface::normalize(RadialSurface::mode(16, 2, 0, 0.1));
  return s;
}

}  // namespace

TEST_CASE("dissipation between concentric balls") {
  const auto E = RadialSurface::ball(16);
  const double inner = 4 * kPi * simpson([](double s) { return (1 - s) * s * s; }, 0.9, 1.0);
  const double outer = 4 * kPi * simpson([](double s) { return (s - 1) * s * s; }, 1.0, 1.1);
  CHECK(std::abs(inner - 0.054768) < 5e-7);
  CHECK(std::abs(outer - 4 * kPi * (std::pow(1.1, 4) / 4 - std::pow(1.1, 3) / 3 + 1.0 / 12)) < 1e-12);
  CHECK(std::abs(dissipation(RadialSurface::ball(16, 0.9), E) - inner) < 1e-12);
  CHECK(std::abs(dissipation(RadialSurface::ball(16, 1.1), E) - outer) < 1e-12);
  CHECK(dissipation(E, E) == 0.0);
}

TEST_CASE("dissipation preconditions") {
  CHECK_THROWS_AS(dissipation(RadialSurface::ball(16, 1.0, {0.1, 0, 0}), RadialSurface::ball(16)), ValidationError);
  CHECK_THROWS_AS(dissipation(RadialSurface::mode(16, 2, 0, -3.0), RadialSurface::ball(16)), ValidationError);
}

TEST_CASE("minimizing step fixes the ball") {
  MmConfig c;
  c.h = 0.01;
  const auto r = mm_step(RadialSurface::ball(16), c);
  CHECK(coeff_distance(r.surface, RadialSurface::ball(16)) < 1e-6);
  CHECK(std::abs(r.diag.lambda - 2.0) < 1e-3);
  CHECK(r.diag.dissipation == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("minimizing step from a Y20 perturbation") {
  MmConfig c;
  c.h = 0.01;
  const auto& E = y20_start();
  const auto r = mm_step(E, c);
  const auto& d = r.diag;
  CHECK(d.converged);
  CHECK(d.perimeter_after < d.perimeter_before);
  CHECK(d.perimeter_after + d.dissipation / c.h <= d.perimeter_before + 1e-10);
  CHECK(std::abs(d.perimeter_before - surface::perimeter(E)) < 1e-12);
  CHECK(std::abs(d.perimeter_after - surface::perimeter(r.surface)) < 1e-12);
  CHECK(d.dissipation > 0.0);
  CHECK(d.volume_drift < 1e-13);
  CHECK(std::abs(surface::volume(r.surface) - surface::volume(E)) / surface::volume(E) < 1e-13);
  CHECK(d.el_residual < 1e-9);
  CHECK(std::abs(d.lambda - 2.0) < 1e-2);
  // The objective's dissipation against direct radial quadrature.
  const double D = dissipation(r.surface, E);
  CHECK(std::abs(D - d.dissipation) / D < 1e-8);
  // Near the boundary |d| grows linearly so int d^2 is about 2 D.
  CHECK(d.distance_sq / d.dissipation == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("Euler-Lagrange residual shrinks with the optimizer tolerance") {
  MmConfig c;
  c.h = 0.01;
  double prev = 1e300;
  for (double tol : {1e-5, 1e-7, 1e-9}) {
    c.grad_tol = tol;
    const double res = mm_step(y20_start(), c).diag.el_residual;
    CHECK(res < prev);
    prev = res;
  }
  CHECK(prev < 1e-7);
}

TEST_CASE("minimizing and semi-implicit steps agree to second order") {
  MmConfig c;
  std::vector<double> dev;
  for (double h : {0.02, 0.01, 0.005}) {
    c.h = h;
    dev.push_back(coeff_distance(mm_step(y20_start(), c).surface, direct_step(y20_start(), h)));
  }
  CHECK(dev[1] / dev[0] <= 0.75);
  CHECK(dev[2] / dev[1] <= 0.75);
}

TEST_CASE("semi-implicit step") {
  for (double r : {1.0, 0.9}) {
    const auto b = RadialSurface::ball(16, r, {0.3, 0, 0});
    CHECK(coeff_distance(direct_step(b, 0.01), b) < 1e-13);
    CHECK((direct_step(b, 0.01).center - b.center).norm() == 0.0);
  }
  // Decay of a small Y20 amplitude against the linearized rate.
  const double mu = oracle::y20_linear_rate();
  CHECK(std::abs(mu + 4.0) < 1e-4);
  const double dt = 1e-3;
  const auto s = RadialSurface::mode(16, 2, 0, 1e-3);
  const auto n = direct_step(s, dt);
  const double rate = std::log(n.w(2, 0) / s.w(2, 0)) / dt;
  CHECK(std::abs(rate - mu) / std::abs(mu) < 0.1);
  CHECK(std::abs(surface::volume(n) - surface::volume(s)) / surface::volume(s) < 1e-14);
  CHECK_THROWS_AS(direct_step(s, -1.0), ValidationError);
}

TEST_CASE("run from the ball") {
  MmConfig c;
  c.h = 0.01;
  const auto tr = run(RadialSurface::ball(16), c, 0.05, Scheme::mm);
  REQUIRE(tr.entries.size() >= 2);
  for (const auto& e : tr.entries) CHECK(coeff_distance(e.surface, RadialSurface::ball(16)) < 1e-12);
  const auto L = dissipation_ledger(tr);
  CHECK(L.dissipation_over_h == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(L.cumulative_osc < 1e-20);
  CHECK_THROWS_AS(run(RadialSurface::ball(16), c, 0.001, Scheme::mm), ValidationError);
}

TEST_CASE("run ledger on a mixed perturbation") {
  MmConfig c;
  c.h = 0.01;
  RadialSurface s;
  s.w = s2::random_band_limited(3, 2, 4, 0.1, 16);
  const auto E0 = surface::normalize(s);
  const auto tr = run(E0, c, 0.1, Scheme::mm);
  CHECK(tr.entries.size() == 11);
  const auto L = dissipation_ledger(tr);
  CHECK(L.comparison_holds(1e-10));
  CHECK(L.max_perimeter_increase < 0.0);
  CHECK(L.max_volume_drift < 1e-12);
  CHECK(L.telescoping_slack <= 1e-10);
  CHECK(L.distance_constant > 0.0);
  CHECK(std::isfinite(L.distance_constant));
  CHECK(L.cumulative_osc > 0.0);
  for (std::size_t k = 1; k < tr.entries.size(); ++k) {
    CHECK(tr.entries[k].t == doctest::Approx(k * c.h));
    CHECK(tr.entries[k].report.perimeter < tr.entries[k - 1].report.perimeter);
  }

  const auto td = run(E0, c, 0.05, Scheme::direct);
  CHECK(td.entries.size() == 6);
  const auto Ld = dissipation_ledger(td);
  CHECK(Ld.max_volume_drift < 1e-12);
  CHECK(Ld.max_perimeter_increase < 0.0);
}

TEST_CASE("deficit decay rate at a finer step") {
  MmConfig c;
  c.h = 0.005;
  c.band_limit = 8;
  const auto E = surface::normalize(RadialSurface::mode(8, 2, 0, 0.05));
  const auto tr = run(E, c, 1.0, Scheme::mm);
  const auto f = fit_rate(tr, Observable::perimeter_deficit);
  const double expected = 2.0 * oracle::y20_linear_rate();
  CHECK(std::abs(f.rate - expected) / std::abs(expected) < 0.3);
  CHECK(f.r_squared >= 0.95);
}

TEST_CASE("fit_rate") {
  std::vector<double> t, y;
  for (int k = 0; k <= 40; ++k) {
    t.push_back(0.05 * k);
    y.push_back(3.0 * std::exp(-4.0 * t.back()));
  }
  auto f = fit_rate(t, y);
  CHECK(std::abs(f.rate + 4.0) < 1e-6);
  CHECK(std::abs(f.intercept - std::log(3.0)) < 1e-9);
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  f = fit_rate(t, std::vector<double>(t.size(), 0.25));
  CHECK(f.rate == 0.0);
  CHECK(std::isnan(f.r_squared));
  y[3] = 0.0;
  CHECK_THROWS_AS(fit_rate(t, y), ValidationError);
  CHECK(parse_observable("osc") == Observable::osc);
  CHECK_THROWS_AS(parse_observable("volume"), ValidationError);
}

TEST_CASE("geometric decay check") {
  std::vector<double> a;
  for (int k = 0; k < 30; ++k) a.push_back(std::pow(0.5, k));
  const auto ok = geometric_decay_check(a, 2.0);
  CHECK(ok.hypothesis);
  CHECK(ok.conclusion);
  CHECK(ok.witness == -1);
  REQUIRE(ok.tails.size() == a.size());
  double S = 0;
  for (double x : a) S += x;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double tail = 0;
    for (std::size_t k = i + 1; k < a.size(); ++k) tail += a[k];
    CHECK(ok.tails[i] == doctest::Approx(tail).epsilon(1e-14));
    CHECK(tail <= std::pow(0.5, i + 1.0) * S * (1 + 1e-12));
  }
  const auto bad = geometric_decay_check({1, 1, 1, 1}, 2.0);
  CHECK_FALSE(bad.hypothesis);
  CHECK(bad.witness == 0);
  CHECK_THROWS_AS(geometric_decay_check(a, 1.0), ValidationError);
}

TEST_CASE("Hausdorff distance to a ball union") {
  const auto unit = surface::BallUnion::make({Vec3::Zero()}, 1.0);
  CHECK(hausdorff_to_union({RadialSurface::ball(16)}, unit) < 1e-4);
  const auto shifted = surface::BallUnion::make({Vec3(0.2, 0, 0)}, 1.0);
  CHECK(std::abs(hausdorff_to_union({RadialSurface::ball(16)}, shifted) - 0.2) < 1e-3);

  // rho = 1 + eps Y_{3,1}: the sup is max |rho - 1| over the sphere.
  const double eps = 0.05;
  const auto s = RadialSurface::mode(16, 3, 1, eps);
  const double norm = std::sqrt(2.0) * std::sqrt(7.0 / (4 * kPi) * 2.0 / 24.0);
  double brute = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double x = std::cos(kPi * i / 4000);
    for (int j = 0; j < 64; ++j) {
      const double phi = 2 * kPi * j / 64;
      brute = std::max(brute, std::abs(eps * norm * std::assoc_legendre(3, 1, x) * std::cos(phi)));
    }
  }
  CHECK(std::abs(hausdorff_to_union({s}, unit) - brute) < 1e-4);
  CHECK(hausdorff_to_union({s}, unit, 11) == hausdorff_to_union({s}, unit, 11));
}
