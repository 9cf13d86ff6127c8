#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "curvflow/error.hpp"
#include "curvflow/mullins.hpp"
#include "oracles.hpp"

using namespace curvflow;
using namespace curvflow::mullins;
using oracle::kPi;

namespace {

TorusGrid grid(int n, double R = 8.0) {
  TorusGrid g;
  g.n = n;
  g.R = R;
  return g;
}

template <class F>
Field sample(const TorusGrid& g, F f) {
  Field out(g.size());
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      for (int k = 0; k < g.n; ++k) out[g.index(i, j, k)] = f(g.center(i, j, k));
  return out;
}

const Vec3 kMid(4.0, 4.0, 4.0);

MsConfig config(int n, double h = 0.01) {
  MsConfig c;
  c.grid = grid(n);
  c.h = h;
  return c;
}

}  // namespace

TEST_CASE("torus grid validation") {
  CHECK_NOTHROW(grid(32).validate());
  CHECK_THROWS_AS(grid(48).validate(), ValidationError);
  CHECK_THROWS_AS(grid(512).validate(), ValidationError);
  CHECK_THROWS_AS(grid(64, 0.5).validate(), ValidationError);
}

TEST_CASE("Poisson solve of a single mode") {
  const auto g = grid(64);
  const double k = 2 * kPi / g.R;
  const auto rhs = sample(g, [&](const Vec3& x) { return std::cos(k * x.x()); });
  const auto p = torus::poisson_solve(g, rhs);
  double err = 0.0, ref = 0.0;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      for (int l = 0; l < g.n; ++l) {
        const double exact = std::cos(k * g.center(i, j, l).x()) / (k * k);
        err = std::max(err, std::abs(p.U[g.index(i, j, l)] - exact));
        ref = std::max(ref, std::abs(exact));
      }
    }
  }
  CHECK(err / ref < 1e-10);
  CHECK(p.residual < 1e-10);
  CHECK(std::abs(torus::mean(p.U)) <= 1e-12 * torus::max_abs(p.U));

  const auto zero = torus::poisson_solve(g, Field(g.size(), 0.0));
  CHECK(torus::max_abs(zero.U) == 0.0);
  CHECK_THROWS_AS(torus::poisson_solve(g, Field(g.size(), 1.0)), ValidationError);
  CHECK_THROWS_AS(torus::poisson_solve(g, Field(10, 0.0)), ValidationError);
}

TEST_CASE("Poisson energy against the mode-sum closed form") {
  // rhs = sum a_j cos(k_j . x + p_j) over distinct wave vectors (no +- pairs):
  // int |DU|^2 = sum a_j^2 / |k_j|^2 * R^3 / 2.
  const auto g = grid(32, 3.0);
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> wave(-5, 5);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), phase(0.0, 2 * kPi);
  struct Mode {
    Eigen::Vector3d k;
    double a, p;
  };
  std::vector<Mode> modes;
  std::vector<Eigen::Vector3i> seen;
  while (modes.size() < 12) {
    Eigen::Vector3i m(wave(rng), wave(rng), wave(rng));
    if (m.isZero()) continue;
    bool dup = false;
    for (const auto& s : seen) dup = dup || s == m || s == -m;
    if (dup) continue;
    seen.push_back(m);
    modes.push_back({2 * kPi / g.R * m.cast<double>(), amp(rng), phase(rng)});
  }
  const auto rhs = sample(g, [&](const Vec3& x) {
    double s = 0.0;
    for (const auto& m : modes) s += m.a * std::cos(m.k.dot(x) + m.p);
    return s;
  });
  double energy = 0.0, hm1 = 0.0;
  for (const auto& m : modes) {
    energy += m.a * m.a / m.k.squaredNorm() * std::pow(g.R, 3) / 2;
    hm1 += m.a * m.a / m.k.squaredNorm() * std::pow(g.R, 3) / 2;
  }
  const auto p = torus::poisson_solve(g, rhs);
  CHECK(p.residual < 1e-10);
  CHECK(std::abs(torus::dirichlet_energy(g, p.U) - energy) / energy < 1e-9);
  CHECK(std::abs(torus::hminus1_norm(g, rhs) - std::sqrt(hm1)) / std::sqrt(hm1) < 1e-9);
}

TEST_CASE("H^-1 norm of a single mode") {
  const auto g = grid(64);
  const double k = 2 * kPi / g.R;
  const auto f = sample(g, [&](const Vec3& x) { return std::cos(k * x.x()); });
  const double expected = g.R / (2 * kPi) * std::sqrt(std::pow(g.R, 3) / 2);
  CHECK(std::abs(torus::hminus1_norm(g, f) - expected) / expected < 1e-12);
  CHECK(torus::hminus1_norm(g, Field(g.size(), 0.0)) == 0.0);
  CHECK_THROWS_AS(torus::hminus1_norm(g, Field(g.size(), 0.5)), ValidationError);
}

TEST_CASE("rasterization") {
  const auto g = grid(128);
  const auto chi = rasterize({RadialSurface::ball(8, 1.0, kMid)}, g);
  CHECK(std::abs(chi.mass() - 4 * kPi / 3) / (4 * kPi / 3) < 1e-4);
  CHECK(std::abs(chi.shift) < 0.01 * g.spacing());
  double lo = 1.0, hi = 0.0;
  for (double x : chi.occupancy) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);

  // The blended raster must be at least as close to a 16^3 point-sampled
  // indicator as plain 4^3 point sampling is.
  const double dx = g.spacing();
  auto sampled = [&](const Vec3& c, int m) {
    int in = 0;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int e = 0; e < m; ++e)
          in += (c + dx * (Vec3(a + 0.5, b + 0.5, e + 0.5) / m - Vec3::Constant(0.5)) - kMid).norm() < 1.0;
    return in / double(m * m * m);
  };
  double l1_raster = 0.0, l1_points = 0.0;
  int mismatched = 0;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      for (int k = 0; k < g.n; ++k) {
        const Vec3 c = g.center(i, j, k);
        const double r = (c - kMid).norm();
        const double v = chi.occupancy[g.index(i, j, k)];
        if (std::abs(r - 1.0) >= dx) {
          mismatched += v != (r < 1.0 ? 1.0 : 0.0);
          continue;
        }
        const double ref = sampled(c, 16);
        l1_raster += std::abs(v - ref);
        l1_points += std::abs(sampled(c, 4) - ref);
      }
    }
  }
  CHECK(mismatched == 0);
  CHECK(l1_raster < l1_points);

  const auto empty = rasterize(std::vector<RadialSurface>{}, g);
  CHECK(torus::max_abs(empty.occupancy) == 0.0);

  const auto a = RadialSurface::ball(8, 0.6, Vec3(2.5, 4, 4)), b = RadialSurface::ball(8, 0.8, Vec3(5.0, 4, 4));
  const auto ga = grid(64);
  const double both = rasterize({a, b}, ga).mass();
  CHECK(std::abs(both - rasterize({a}, ga).mass() - rasterize({b}, ga).mass()) < 1e-8 * both);

  CHECK_THROWS_AS(rasterize({RadialSurface::ball(8, 1.0, Vec3(1.1, 4, 4))}, ga), ValidationError);
  CHECK_THROWS_AS(rasterize({RadialSurface::ball(8, 1.0, kMid), RadialSurface::ball(8, 1.0, kMid + Vec3(1.5, 0, 0))}, ga),
                  ValidationError);
  const auto u = surface::BallUnion::make({Vec3(2.5, 4, 4), Vec3(5.5, 4, 4)}, 0.7);
  CHECK(std::abs(rasterize(u, ga).mass() - 2 * 4 * kPi / 3 * std::pow(0.7, 3)) < 1e-12);
}

TEST_CASE("symmetric difference and sparse occupancies") {
  const auto g = grid(64);
  const auto a = rasterize({RadialSurface::ball(8, 1.0, kMid)}, g);
  const auto b = rasterize({RadialSurface::ball(8, 1.0, kMid + Vec3(0.3, 0, 0))}, g);
  const double d = symmetric_difference(a, b);
  CHECK(d > 0.0);
  CHECK(std::abs(SparseChi::from(a).l1_distance(SparseChi::from(b)) * g.cell_volume() - d) < 1e-12);
  CHECK(SparseChi::from(a).l1_distance(SparseChi::from(a)) == 0.0);
  // Two unit balls a distance s apart: |A delta B| = 2 (4pi/3 - lens), lens
  // = pi (4 + s)(2 - s)^2 / 12.
  const double s = 0.3, lens = kPi * (4 + s) * (2 - s) * (2 - s) / 12;
  CHECK(std::abs(d - 2 * (4 * kPi / 3 - lens)) < 0.01);
}

TEST_CASE("MS dissipation") {
  const auto g = grid(64);
  const auto E = rasterize({RadialSurface::ball(8, 1.0, kMid)}, g);
  const auto same = ms_dissipation(E, E, 0.01);
  CHECK(same.D == 0.0);
  CHECK(torus::max_abs(same.U.U) == 0.0);

  const auto F = rasterize({RadialSurface::ball(8, 1.0, kMid + Vec3(g.spacing(), 0, 0))}, g);
  const double h = 0.01;
  const auto d = ms_dissipation(F, E, h);
  CHECK(d.D > 0.0);
  CHECK(d.U.residual < 1e-10);
  // Integration by parts: int |DU|^2 = int U (chi_F - chi_E) / h.
  double ibp = 0.0;
  Field f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    f[i] = F.occupancy[i] - E.occupancy[i];
    ibp += d.U.U[i] * f[i] / h;
  }
  ibp *= g.cell_volume();
  CHECK(std::abs(ibp - d.D) / d.D < 1e-8);
  const double hm = torus::hminus1_norm(g, f);
  CHECK(std::abs(hm * hm - h * h * d.D) / (h * h * d.D) < 1e-10);
  CHECK(std::abs(ms_dissipation(F, E, h / 2).D - 4 * d.D) / d.D < 1e-12);

  const auto G = rasterize({RadialSurface::ball(8, 1.01, kMid)}, g);
  CHECK_THROWS_AS(ms_dissipation(G, E, h), ValidationError);
  CHECK_THROWS_AS(ms_dissipation(F, E, 0.0), ValidationError);
}

TEST_CASE("MS step fixes a ball") {
  const auto c = config(64);
  const auto E = RadialSurface::ball(8, 1.0, kMid);
  const auto r = ms_mm_step({E}, c);
  REQUIRE(r.components.size() == 1);
  double dist = 0.0;
  for (std::size_t i = 0; i < E.w.a.size(); ++i) dist = std::max(dist, std::abs(r.components[0].w.a[i] - E.w.a[i]));
  CHECK(dist < 1e-4);
  CHECK(std::abs(r.diag.lambda - 2.0) < 1e-3);
  CHECK(r.diag.dissipation < 1e-20);
  CHECK(r.diag.mass_drift < 1e-8);
}

TEST_CASE("MS step keeps two equal balls in place") {
  auto c = config(64);
  const double r = std::cbrt(0.5);
  const Vec3 a(4.0 - r - 0.3, 4, 4), b(4.0 + r + 0.3, 4, 4);
  const auto res = ms_mm_step({RadialSurface::ball(8, r, a), RadialSurface::ball(8, r, b)}, c);
  CHECK(res.diag.displacement <= 10 * c.grad_tol);
  CHECK(res.diag.mass_drift < 1e-8);
  const auto rec = ms_alexandrov_check(res.components, res.U);
  CHECK(rec.count == 2);
  CHECK(std::abs(rec.deficit) < 1e-10);
  CHECK_THROWS_AS(ms_mm_step({RadialSurface::ball(8, r, a), RadialSurface::ball(8, r, a + Vec3(2 * r + 0.1, 0, 0))}, c),
                  NumericalError);
}

TEST_CASE("MS step from a Y20 perturbation") {
  const auto c = config(64);
  const double eps = 0.02;
  const auto E = RadialSurface::mode(8, 2, 0, eps, kMid);
  const auto r = ms_mm_step({E}, c);
  const auto& d = r.diag;
  CHECK(d.converged);
  CHECK(d.perimeter_after < d.perimeter_before);
  CHECK(d.perimeter_after + 0.5 * c.h * d.dissipation <= d.perimeter_before + 1e-10);
  CHECK(std::abs(d.perimeter_after - surface::perimeter(r.components[0])) < 1e-12);
  CHECK(d.el_residual < 1e-6);
  CHECK(std::abs(d.hminus1_sq - c.h * c.h * d.dissipation) / d.hminus1_sq < 1e-8);
  CHECK(d.mass_drift < 1e-8);
  CHECK(d.poisson_residual < 1e-10);
  CHECK(std::abs(surface::volume(r.components[0]) - surface::volume(E)) / surface::volume(E) < 1e-13);
  // Linearization about the unit sphere: the single-layer potential of Y_l
  // is Y_l / (2l + 1) and H changes by (l - 1)(l + 2) a, so one implicit step
  // scales the amplitude by 1 / (1 + h (2l + 1)(l - 1)(l + 2)).
  const double expected = 1.0 / (1.0 + c.h * 5 * 4);
  CHECK(r.components[0].w(2, 0) / eps == doctest::Approx(expected).epsilon(0.03));
  CHECK(std::abs(d.lambda - 2.0) < 0.02);

  const auto rec = ms_alexandrov_check(r.components, r.U);
  CHECK(rec.count == 1);
  CHECK(rec.deficit > 0.0);
  CHECK(rec.energy > 0.0);
  CHECK(std::isfinite(rec.ratio));
  CHECK(rec.energy == doctest::Approx(d.dissipation).epsilon(1e-12));
}

TEST_CASE("MS run from a stationary ball") {
  auto c = config(32);
  c.halt_cmc = 0.0;
  const auto tr = ms_run({RadialSurface::ball(8, 1.0, kMid)}, c, 0.03);
  REQUIRE(tr.entries.size() == 4);
  for (std::size_t k = 1; k < tr.entries.size(); ++k) CHECK(tr.entries[k].diag.dissipation < 1e-20);
  const auto hr = holder_continuity_report(tr);
  CHECK(hr.constant < 1e-12);  // round-off in the optimizer step only
  CHECK(hr.pairs == 6);
  CHECK_THROWS_AS(ms_run({RadialSurface::ball(8, 1.0, kMid)}, c, 0.001), ValidationError);
}

TEST_CASE("MS run ledger and Hoelder report") {
  const auto c = config(64);
  RadialSurface s;
  s.w = s2::random_band_limited(3, 2, 4, 0.08, 8);
  const auto E0 = surface::normalize(s).translated(kMid);
  const auto tr = ms_run({E0}, c, 0.06);
  REQUIRE(tr.entries.size() == 7);
  const auto L = ms_ledger(tr);
  CHECK(L.max_comparison_slack <= 1e-10);
  CHECK(L.max_perimeter_increase < 0.0);
  CHECK(L.max_mass_drift < 1e-8);
  CHECK(L.max_identity_error < 1e-8);
  CHECK(L.max_poisson_residual < 1e-10);
  CHECK(L.telescoping_slack <= 1e-10);
  CHECK(L.half_h_dissipation <= tr.entries[0].perimeter);
  for (std::size_t k = 1; k < tr.entries.size(); ++k) {
    CHECK(std::abs(tr.entries[k].mass - tr.entries[0].volume) / tr.entries[0].volume < 1e-8);
    CHECK(tr.entries[k].t == doctest::Approx(k * c.h));
  }

  const auto hr = holder_continuity_report(tr);
  CHECK(hr.constant > 0.0);
  CHECK(std::isfinite(hr.constant));
  CHECK(hr.pairs == 21);
  // Every pair of the 2x subsample is a pair of the full trace.
  MsTrace sub = tr;
  sub.entries.clear();
  for (std::size_t k = 0; k < tr.entries.size(); k += 2) sub.entries.push_back(tr.entries[k]);
  const auto hs = holder_continuity_report(sub);
  CHECK(hs.constant <= hr.constant * (1 + 1e-12));
  CHECK(hs.pairs == 6);

  // A whole-voxel shift of the data shifts every field.
  const auto ts = ms_run({E0.translated(Vec3(2 * c.grid.spacing(), 0, 0))}, c, 0.03);
  for (std::size_t k = 1; k < ts.entries.size(); ++k) {
    CHECK(std::abs(ts.entries[k].diag.dissipation - tr.entries[k].diag.dissipation) / tr.entries[k].diag.dissipation < 1e-6);
    CHECK(std::abs(ts.entries[k].perimeter - tr.entries[k].perimeter) < 1e-10);
  }
}

TEST_CASE("density estimate") {
  const double rho = 0.5;
  const auto rep = density_estimate_report({RadialSurface::ball(8, 1.0, kMid)}, {rho, 0.25});
  // Spherical cap within chord distance rho: half-angle 2 asin(rho / 2).
  const double alpha = 2 * std::asin(rho / 2);
  const double cap = 2 * kPi * (1 - std::cos(alpha));
  CHECK(std::abs(rep.min[0] * rho * rho - cap) < 1e-6);
  CHECK(std::abs(rep.max[0] - rep.min[0]) < 1e-6);
  CHECK(std::abs(area_in_ball(RadialSurface::ball(8), Vec3(0, 0, 1), rho) - cap) < 1e-10);

  const auto pert = density_estimate_report({RadialSurface::mode(8, 3, 1, 0.1, kMid)}, {0.2, 0.5});
  CHECK(pert.overall_min > 0.0);
  CHECK(pert.overall_max > pert.overall_min);
  CHECK_THROWS_AS(density_estimate_report({RadialSurface::ball(8)}, {1.0}), ValidationError);
}

TEST_CASE("Alexandrov record for exact balls") {
  const auto g = grid(32);
  torus::Potential zero{g, Field(g.size(), 0.0), 0.0};
  const auto rec = ms_alexandrov_check({RadialSurface::ball(8, 1.0, kMid)}, zero);
  CHECK(rec.count == 1);
  CHECK(std::abs(rec.deficit) < 1e-12);
  CHECK(rec.energy == 0.0);
  CHECK(std::isnan(rec.ratio));
  CHECK_THROWS_AS(ms_alexandrov_check({RadialSurface::mode(8, 2, 0, 0.6, kMid)}, zero), ValidationError);
}

TEST_CASE("MS configuration validation") {
  auto c = config(64);
  c.h = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = config(64);
  c.band_limit = 1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = config(64);
  c.halt_cmc = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK_THROWS_AS(ms_mm_step({}, config(64)), ValidationError);
}
