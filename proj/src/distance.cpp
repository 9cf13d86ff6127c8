#include "curvflow/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

namespace curvflow::surface {

namespace {

constexpr double kPi = std::numbers::pi;

struct Embedding {
  Vec3 f, ft, fp, ftt, ftp, fpp;
};

Embedding embed(const Vec3& c, const s2::PointValue& r, double theta, double phi) {
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  const Vec3 x(st * cp, st * sp, ct);
  const Vec3 et(ct * cp, ct * sp, -st);
  const Vec3 ep(-sp, cp, 0.0);
  Embedding e;
  e.f = c + r.f * x;
  e.ft = r.f_t * x + r.f * et;
  e.fp = r.f_p * x + r.f * st * ep;
  e.ftt = r.f_tt * x + 2.0 * r.f_t * et - r.f * x;
  e.ftp = r.f_tp * x + r.f_t * st * ep + r.f_p * et + r.f * ct * ep;
  e.fpp = r.f_pp * x + 2.0 * r.f_p * st * ep + r.f * Vec3(-st * cp, -st * sp, 0.0);
  return e;
}

Vec3 point_at(const RadialSurface& s, const s2::ShCoeffs& rho, const Vec3& u) {
  double t = 0.0, p = 0.0;
  s2::angles(u, t, p);
  return s.center + s2::sh_evaluate(rho, t, p, 0).f * u;
}

}  // namespace

DistanceQuery::DistanceQuery(const RadialSurface& s, int sample_band_limit)
    : s_(s), rho_(s.radius_coeffs()) {
  const int Ls = sample_band_limit > 0 ? sample_band_limit : std::max(2 * s.band_limit(), 32);
  const s2::Grid& g = s2::Grid::cached(std::min(Ls, s2::Grid::kMaxBandLimit));
  const auto r = s2::sh_synthesize(rho_, g).values;
  samples_.reserve(g.size());
  for (int i = 0; i < g.n_theta(); ++i) {
    for (int j = 0; j < g.n_phi(); ++j) {
      samples_.push_back(s.center + r[static_cast<std::size_t>(i) * g.n_phi() + j] * g.node(i, j));
      sample_theta_.push_back(g.theta()[i]);
      sample_phi_.push_back(g.phi()[j]);
    }
  }
}

double DistanceQuery::sign_of(const Vec3& p) const { return s_.contains(p) ? -1.0 : 1.0; }

NearestPoint DistanceQuery::refine(const Vec3& p, double theta, double phi, bool with_sign) const {
  // Newton on (1/2)|f(theta, phi) - p|^2 in spherical parameters away from the
  // poles; a finite-difference Newton in a local tangent chart otherwise.
  bool chart = false;
  for (int it = 0; it < 40; ++it) {
    if (std::sin(theta) < 0.1) {
      chart = true;
      break;
    }
    const auto r = s2::sh_evaluate(rho_, theta, phi, 2);
    const Embedding e = embed(s_.center, r, theta, phi);
    const Vec3 d = e.f - p;
    const Eigen::Vector2d g(d.dot(e.ft), d.dot(e.fp));
    Eigen::Matrix2d H;
    H(0, 0) = e.ft.dot(e.ft) + d.dot(e.ftt);
    H(0, 1) = H(1, 0) = e.ft.dot(e.fp) + d.dot(e.ftp);
    H(1, 1) = e.fp.dot(e.fp) + d.dot(e.fpp);
    if (g.norm() < 1e-15) break;
    if (H(0, 0) <= 0.0 || H.determinant() <= 0.0) {
      chart = true;
      break;
    }
    Eigen::Vector2d step = -(H.inverse() * g);
    const double big = step.cwiseAbs().maxCoeff();
    if (big > 0.2) step *= 0.2 / big;
    const double f0 = 0.5 * d.squaredNorm();
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      const double th = theta + t * step(0), ph = phi + t * step(1);
      const Vec3 q = s_.center + s2::sh_evaluate(rho_, th, ph, 0).f * s2::direction(th, ph);
      if (0.5 * (q - p).squaredNorm() <= f0 + 1e-4 * t * g.dot(step)) {
        theta = th;
        phi = ph;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted || (t * step).norm() < 1e-13) break;
  }
  Vec3 u = s2::direction(theta, phi);
  if (chart) {
    constexpr double hs = 1e-4;
    for (int it = 0; it < 60; ++it) {
      Vec3 e1 = (std::abs(u.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY()).cross(u).normalized();
      Vec3 e2 = u.cross(e1);
      auto F = [&](double a, double b) {
        const Vec3 v = (u + a * e1 + b * e2).normalized();
        return 0.5 * (point_at(s_, rho_, v) - p).squaredNorm();
      };
      const double f00 = F(0, 0);
      const double fpa = F(hs, 0), fma = F(-hs, 0), fpb = F(0, hs), fmb = F(0, -hs);
      const double fpp = F(hs, hs), fpm = F(hs, -hs), fmp = F(-hs, hs), fmm = F(-hs, -hs);
      const Eigen::Vector2d g((fpa - fma) / (2 * hs), (fpb - fmb) / (2 * hs));
      Eigen::Matrix2d H;
      H(0, 0) = (fpa - 2 * f00 + fma) / (hs * hs);
      H(1, 1) = (fpb - 2 * f00 + fmb) / (hs * hs);
      H(0, 1) = H(1, 0) = (fpp - fpm - fmp + fmm) / (4 * hs * hs);
      Eigen::Vector2d step;
      if (H(0, 0) > 0.0 && H.determinant() > 0.0) {
        step = -(H.inverse() * g);
      } else {
        step = -g;
      }
      if (step.norm() > 0.2) step *= 0.2 / step.norm();
      double t = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 30; ++ls) {
        if (F(t * step(0), t * step(1)) <= f00 + 1e-4 * t * g.dot(step)) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) break;
      u = (u + t * step(0) * e1 + t * step(1) * e2).normalized();
      if (t * step.norm() < 1e-11) break;
    }
    s2::angles(u, theta, phi);
  }
  NearestPoint out;
  out.theta = theta;
  out.phi = phi;
  out.point = point_at(s_, rho_, u);
  out.distance = (with_sign ? sign_of(p) : 1.0) * (out.point - p).norm();
  return out;
}

NearestPoint DistanceQuery::global(const Vec3& p) const {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    const double d = (samples_[k] - p).squaredNorm();
    if (d < bd) {
      bd = d;
      best = k;
    }
  }
  return refine(p, sample_theta_[best], sample_phi_[best]);
}

NearestPoint DistanceQuery::nearest(const Vec3& p) const {
  NearestPoint a = global(p);
  const Vec3 d = p - s_.center;
  if (d.norm() > 0.0) {
    double t = 0.0, ph = 0.0;
    s2::angles(d, t, ph);
    const NearestPoint b = refine(p, t, ph);
    if (std::abs(b.distance) < std::abs(a.distance)) a = b;
  }
  return a;
}

NearestPoint DistanceQuery::nearest_from(const Vec3& p, double theta0, double phi0) const {
  NearestPoint out = refine(p, theta0, phi0);
  // The surface point on the ray through p bounds the distance from above; a
  // local result beyond that bound means the guess sat in the wrong basin.
  const Vec3 d = p - s_.center;
  const double r = d.norm();
  if (r > 0.0) {
    const double gap = std::abs(r - s_.radius_along(d / r));
    if (std::abs(out.distance) > gap + 1e-12) return nearest(p);
  }
  return out;
}

NearestPoint DistanceQuery::local_unsigned(const Vec3& p, double theta0, double phi0) const {
  return refine(p, theta0, phi0, false);
}

double signed_distance(const RadialSurface& s, const Vec3& p) { return DistanceQuery(s)(p); }

}  // namespace curvflow::surface
