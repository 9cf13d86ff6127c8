#pragma once

// Independent reference computations shared by the test binaries.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

inline double y20(double t) { return std::sqrt(5.0 / (16.0 * kPi)) * (3.0 * std::cos(t) * std::cos(t) - 1.0); }
inline double y20_t(double t) { return -std::sqrt(5.0 / (16.0 * kPi)) * 6.0 * std::cos(t) * std::sin(t); }
inline double y20_tt(double t) { return -std::sqrt(5.0 / (16.0 * kPi)) * 6.0 * std::cos(2.0 * t); }

// Axisymmetric radial profile rho(theta) with two derivatives.
struct Profile {
  std::function<double(double)> r, dr, d2r;
};

struct Curvatures {
  double k_meridian, k_parallel, area_density;
};

// Principal curvatures of the surface of revolution generated by the polar
// profile (rho sin t, rho cos t), outward normal.
inline Curvatures revolution_curvatures(const Profile& p, double t) {
  const double r = p.r(t), r1 = p.dr(t), r2 = p.d2r(t);
  const double s = std::sin(t), c = std::cos(t);
  const double R1 = r1 * s + r * c, Z1 = r1 * c - r * s;
  const double R2 = r2 * s + 2 * r1 * c - r * s, Z2 = r2 * c - 2 * r1 * s - r * c;
  const double speed = std::hypot(R1, Z1);
  Curvatures k;
  k.k_meridian = (Z1 * R2 - R1 * Z2) / (speed * speed * speed);
  k.k_parallel = -Z1 / (speed * r * s);
  k.area_density = r * speed;
  return k;
}

struct DenseReport {
  double P = 0, V = 0, int_h = 0, hbar = 0, osc = 0, h2 = 0, traceless = 0, gauss = 0;
};

// Composite Simpson in theta on `n` intervals (phi integral is 2 pi).
inline DenseReport dense_report(const Profile& p, int n) {
  DenseReport d;
  const double dt = kPi / n;
  auto weight = [&](int k) { return (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0); };
  // Endpoints contribute zero (sin theta factor) but the parallel curvature
  // is singular there numerically; skip them.
  for (int pass = 0; pass < 2; ++pass) {
    for (int k = 1; k < n; ++k) {
      const double t = k * dt;
      const auto c = revolution_curvatures(p, t);
      const double w = weight(k) * dt / 3.0 * 2.0 * kPi * std::sin(t);
      const double H = c.k_meridian + c.k_parallel;
      const double da = w * c.area_density;
      if (pass == 0) {
        d.P += da;
        d.V += w * std::pow(p.r(t), 3) / 3.0;
        d.int_h += da * H;
        d.h2 += da * H * H;
        d.traceless += da * 0.5 * std::pow(c.k_meridian - c.k_parallel, 2);
        d.gauss += da * c.k_meridian * c.k_parallel;
      } else {
        d.osc += da * (H - d.hbar) * (H - d.hbar);
      }
    }
    d.hbar = d.int_h / d.P;
  }
  return d;
}

// Linearized decay rate of the Y_{2,0} amplitude under V = Hbar - H on the unit
// sphere: a central finite difference of the projected radial speed of
// rho = 1 + eps Y_{2,0}, integrated by Simpson's rule. The perimeter deficit,
// quadratic in the amplitude, decays at twice this rate.
inline double y20_linear_rate(double eps = 1e-4, int n = 2000) {
  auto projected = [&](double e) {
    Profile p{[e](double t) { return 1.0 + e * y20(t); }, [e](double t) { return e * y20_t(t); },
              [e](double t) { return e * y20_tt(t); }};
    const double dt = kPi / n;
    double area = 0, ih = 0;
    for (int k = 1; k < n; ++k) {
      const double t = k * dt, w = (k % 2 ? 4.0 : 2.0) * std::sin(t);
      const auto c = revolution_curvatures(p, t);
      area += w * c.area_density;
      ih += w * c.area_density * (c.k_meridian + c.k_parallel);
    }
    const double hbar = ih / area;
    double proj = 0;
    for (int k = 1; k < n; ++k) {
      const double t = k * dt, w = (k % 2 ? 4.0 : 2.0) * std::sin(t) * dt / 3.0 * 2.0 * kPi;
      const auto c = revolution_curvatures(p, t);
      const double speed = (hbar - c.k_meridian - c.k_parallel) * c.area_density / (p.r(t) * p.r(t));
      proj += w * speed * y20(t);
    }
    return proj;
  };
  return (projected(eps) - projected(-eps)) / (2.0 * eps);
}

}  // namespace oracle
