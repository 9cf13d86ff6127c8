#include "curvflow/surface.hpp"

#include <algorithm>
#include <cmath>

#include "curvflow/error.hpp"

namespace curvflow::surface {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt4Pi = std::sqrt(4.0 * kPi);

const s2::Grid& default_grid(const RadialSurface& s) { return s2::Grid::cached(s.band_limit()); }

// Radius of the (old) surface along the ray b + t x, measured about the old
// center c. Solves |b + t x - c| = rho(dir(b + t x - c)) for t > 0 by secant.
double ray_radius(const RadialSurface& s, const Vec3& b, const Vec3& x) {
  auto g = [&](double t) {
    const Vec3 q = b + t * x - s.center;
    const double r = q.norm();
    if (r == 0.0) return -s.radius_along(x);
    return r - s.radius_along(q / r);
  };
  double t0 = s.radius_along(x) - (b - s.center).dot(x);
  double t1 = t0 + 1e-4;
  double g0 = g(t0), g1 = g(t1);
  for (int it = 0; it < 60 && std::abs(g1) > 1e-15; ++it) {
    const double denom = g1 - g0;
    if (denom == 0.0) break;
    const double t2 = t1 - g1 * (t1 - t0) / denom;
    t0 = t1;
    g0 = g1;
    t1 = t2;
    g1 = g(t1);
  }
  if (!(t1 > 0.0) || std::abs(g1) > 1e-10) throw ValidationError("star-shapedness lost after recentering");
  return t1;
}

RadialSurface recentered(const RadialSurface& s, const Vec3& b) {
  const s2::Grid& grid = default_grid(s);
  s2::ScalarField rho(grid);
  for (int i = 0; i < grid.n_theta(); ++i) {
    for (int j = 0; j < grid.n_phi(); ++j) rho(i, j) = ray_radius(s, b, grid.node(i, j));
  }
  return RadialSurface::from_radius(s2::sh_analyze(rho), b);
}

}  // namespace

RadialSurface RadialSurface::ball(int band_limit, double radius, const Vec3& center) {
  if (!(radius > 0.0)) throw ValidationError("ball radius must be positive");
  RadialSurface s;
  s.center = center;
  s.w = s2::ShCoeffs(band_limit);
  s.w(0, 0) = (radius - 1.0) * kSqrt4Pi;
  return s;
}

RadialSurface RadialSurface::mode(int band_limit, int l, int m, double amplitude, const Vec3& center) {
  if (l < 0 || l > band_limit || std::abs(m) > l) throw ValidationError("mode outside band limit");
  RadialSurface s = ball(band_limit, 1.0, center);
  s.w(l, m) += amplitude;
  return s;
}

RadialSurface RadialSurface::from_radius(const s2::ShCoeffs& rho, const Vec3& center) {
  RadialSurface s;
  s.center = center;
  s.w = rho;
  s.w(0, 0) -= kSqrt4Pi;
  return s;
}

s2::ShCoeffs RadialSurface::radius_coeffs() const {
  s2::ShCoeffs rho = w;
  rho(0, 0) += kSqrt4Pi;
  return rho;
}

std::vector<double> RadialSurface::radius_values(const s2::Grid& grid) const {
  return s2::sh_synthesize(radius_coeffs(), grid).values;
}

double RadialSurface::radius_at(double theta, double phi) const {
  return 1.0 + s2::sh_evaluate(w, theta, phi, 0).f;
}

double RadialSurface::radius_along(const Vec3& u) const {
  double theta = 0.0, phi = 0.0;
  s2::angles(u, theta, phi);
  return radius_at(theta, phi);
}

bool RadialSurface::contains(const Vec3& p) const {
  const Vec3 d = p - center;
  const double r = d.norm();
  if (r == 0.0) return true;
  return r <= radius_along(d / r);
}

RadialSurface RadialSurface::dilated(double factor) const {
  if (!(factor > 0.0)) throw ValidationError("dilation factor must be positive");
  RadialSurface out = *this;
  for (double& a : out.w.a) a *= factor;
  out.w(0, 0) += (factor - 1.0) * kSqrt4Pi;
  return out;
}

RadialSurface RadialSurface::translated(const Vec3& shift) const {
  RadialSurface out = *this;
  out.center += shift;
  return out;
}

CurvatureFields curvature_fields(const RadialSurface& s) { return curvature_fields(s, default_grid(s)); }

CurvatureFields curvature_fields(const RadialSurface& s, const s2::Grid& grid) {
  const auto d = s2::sh_synthesize_derivatives(s.radius_coeffs(), grid, 2);
  const std::size_t n = grid.size();
  CurvatureFields out(grid);
  for (auto* v : {&out.g11, &out.g12, &out.g22, &out.a11, &out.a12, &out.a22, &out.mean, &out.gauss,
                  &out.second_form_sq, &out.traceless_sq, &out.k1, &out.k2, &out.area_density, &out.radius}) {
    v->resize(n);
  }
  out.position.resize(n);
  out.normal.resize(n);
  const int np = grid.n_phi();
  for (int i = 0; i < grid.n_theta(); ++i) {
    const double st = grid.sin_theta()[i], ct = grid.cos_theta()[i];
    for (int j = 0; j < np; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * np + j;
      const double rho = d.f[k];
      if (!(rho > 0.0)) throw ValidationError("star-shapedness violated: 1 + w <= 0 at a grid node");
      const double cp = std::cos(grid.phi()[j]), sp = std::sin(grid.phi()[j]);
      const Vec3 x(st * cp, st * sp, ct);
      const Vec3 et(ct * cp, ct * sp, -st);
      const Vec3 ep(-sp, cp, 0.0);
      const double rt = d.f_t[k], rp = d.f_p[k];
      const Vec3 ft = rt * x + rho * et;
      const Vec3 fp = rp * x + rho * st * ep;
      const Vec3 ftt = d.f_tt[k] * x + 2.0 * rt * et - rho * x;
      const Vec3 ftp = d.f_tp[k] * x + rt * st * ep + rp * et + rho * ct * ep;
      const Vec3 fpp = d.f_pp[k] * x + 2.0 * rp * st * ep + rho * Vec3(-st * cp, -st * sp, 0.0);
      const double g11 = ft.dot(ft), g12 = ft.dot(fp), g22 = fp.dot(fp);
      const double det = g11 * g22 - g12 * g12;
      if (!(det >= 1e-12)) throw NumericalError("near-degenerate metric (det g below 1e-12)");
      const Vec3 nu = ft.cross(fp) / std::sqrt(det);
      const double a11 = -ftt.dot(nu), a12 = -ftp.dot(nu), a22 = -fpp.dot(nu);
      const double H = (g22 * a11 - 2.0 * g12 * a12 + g11 * a22) / det;
      const double K = (a11 * a22 - a12 * a12) / det;
      const double disc = std::sqrt(std::max(0.25 * H * H - K, 0.0));
      const double k1 = 0.5 * H - disc, k2 = 0.5 * H + disc;
      out.g11[k] = g11;
      out.g12[k] = g12;
      out.g22[k] = g22;
      out.a11[k] = a11;
      out.a12[k] = a12;
      out.a22[k] = a22;
      out.mean[k] = H;
      out.gauss[k] = K;
      out.k1[k] = k1;
      out.k2[k] = k2;
      out.second_form_sq[k] = k1 * k1 + k2 * k2;
      out.traceless_sq[k] = 0.5 * (k2 - k1) * (k2 - k1);
      out.area_density[k] = std::sqrt(det) / st;
      out.radius[k] = rho;
      out.position[k] = s.center + rho * x;
      out.normal[k] = nu;
    }
  }
  return out;
}

GeometricReport report(const RadialSurface& s) { return report(s, curvature_fields(s)); }

GeometricReport report(const RadialSurface& s, const CurvatureFields& f) {
  const auto w = f.grid.weights();
  const std::size_t n = f.grid.size();
  GeometricReport r;
  double int_h = 0.0;
  Vec3 first = Vec3::Zero();
  for (std::size_t k = 0; k < n; ++k) {
    const double da = w[k] * f.area_density[k];
    const double rho = f.radius[k];
    const Vec3 x = (f.position[k] - s.center) / rho;
    r.perimeter += da;
    r.volume += w[k] * rho * rho * rho / 3.0;
    r.volume_divergence += da * f.normal[k].dot(f.position[k] - s.center) / 3.0;
    int_h += da * f.mean[k];
    r.mean_curvature_sq += da * f.mean[k] * f.mean[k];
    r.traceless_energy += da * f.traceless_sq[k];
    r.total_gauss_curvature += da * f.gauss[k];
    first += (w[k] * rho * rho * rho * rho / 4.0) * x;
  }
  r.mean_curvature_avg = int_h / r.perimeter;
  for (std::size_t k = 0; k < n; ++k) {
    const double dh = f.mean[k] - r.mean_curvature_avg;
    r.oscillation += w[k] * f.area_density[k] * dh * dh;
  }
  r.willmore = 0.25 * r.mean_curvature_sq;
  r.barycenter = s.center + first / r.volume;
  double diam2 = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) diam2 = std::max(diam2, (f.position[a] - f.position[b]).squaredNorm());
  }
  r.diameter = std::sqrt(diam2);
  return r;
}

double perimeter(const RadialSurface& s) {
  const s2::Grid& grid = default_grid(s);
  const auto d = s2::sh_synthesize_derivatives(s.radius_coeffs(), grid, 1);
  const auto w = grid.weights();
  const int np = grid.n_phi();
  double p = 0.0;
  for (int i = 0; i < grid.n_theta(); ++i) {
    const double st = grid.sin_theta()[i];
    for (int j = 0; j < np; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * np + j;
      const double rho = d.f[k], rt = d.f_t[k], rp = d.f_p[k] / st;
      p += w[k] * rho * std::sqrt(rho * rho + rt * rt + rp * rp);
    }
  }
  return p;
}

double volume(const RadialSurface& s) {
  const s2::Grid& grid = default_grid(s);
  const auto rho = s.radius_values(grid);
  const auto w = grid.weights();
  double v = 0.0;
  for (std::size_t k = 0; k < rho.size(); ++k) v += w[k] * rho[k] * rho[k] * rho[k];
  return v / 3.0;
}

Vec3 barycenter(const RadialSurface& s) {
  const s2::Grid& grid = default_grid(s);
  const auto rho = s.radius_values(grid);
  const auto w = grid.weights();
  const int np = grid.n_phi();
  double v = 0.0;
  Vec3 m = Vec3::Zero();
  for (int i = 0; i < grid.n_theta(); ++i) {
    for (int j = 0; j < np; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * np + j;
      const double r3 = rho[k] * rho[k] * rho[k];
      v += w[k] * r3 / 3.0;
      m += (w[k] * r3 * rho[k] / 4.0) * grid.node(i, j);
    }
  }
  return s.center + m / v;
}

double canham_helfrich(const RadialSurface& s, double c0) {
  const auto f = curvature_fields(s);
  const auto w = f.grid.weights();
  double e = 0.0;
  for (std::size_t k = 0; k < f.grid.size(); ++k) {
    const double d = f.mean[k] - c0;
    e += w[k] * f.area_density[k] * d * d;
  }
  return 0.25 * e;
}

RadialSurface normalize(const RadialSurface& s) {
  RadialSurface cur = s;
  for (int it = 0; it < 20; ++it) {
    cur = cur.dilated(std::cbrt(kUnitBallVolume / volume(cur)));
    const Vec3 b = barycenter(cur);
    if ((b - cur.center).norm() <= 1e-9) break;
    cur = recentered(cur, b);
  }
  // Final dilation so that the volume constraint holds regardless of the
  // recentering truncation.
  cur = cur.dilated(std::cbrt(kUnitBallVolume / volume(cur)));
  return cur;
}

bool is_normalized(const RadialSurface& s, double rel_tol) {
  if (std::abs(volume(s) / kUnitBallVolume - 1.0) > rel_tol) return false;
  return (barycenter(s) - s.center).norm() <= 1e-6;
}

double j_epsilon(const RadialSurface& s, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  if (!is_normalized(s)) throw ValidationError("unnormalized surface");
  const auto r = report(s);
  return r.oscillation - eps * r.perimeter;
}

CmcDeficit cmc_deficit(const RadialSurface& s) {
  const auto f = curvature_fields(s);
  return cmc_deficit(s, f, report(s, f));
}

CmcDeficit cmc_deficit(const RadialSurface&, const CurvatureFields& f, const GeometricReport& rep) {
  CmcDeficit out;
  out.h0 = 2.0 * rep.perimeter / (3.0 * rep.volume);
  for (double h : f.mean) out.deficit = std::max(out.deficit, std::abs(h / out.h0 - 1.0));
  return out;
}

BallUnion BallUnion::make(std::vector<Vec3> centers, double radius) {
  if (!(radius > 0.0)) throw ValidationError("ball radius must be positive");
  BallUnion u;
  u.centers = std::move(centers);
  u.radius = radius;
  for (std::size_t i = 0; i < u.centers.size(); ++i) {
    for (std::size_t j = i + 1; j < u.centers.size(); ++j) {
      u.margin = std::min(u.margin, (u.centers[i] - u.centers[j]).norm() - 2.0 * radius);
    }
  }
  // For equal balls H = 2/r everywhere.
  u.rho = radius;
  u.count_mismatch = std::abs(u.count() - std::pow(u.rho, -3.0));
  return u;
}

double BallUnion::boundary_distance(const Vec3& p) const {
  // Inside the union the nearest boundary point is on the sphere of the ball
  // containing p (balls are disjoint); outside it is the nearest sphere.
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& c : centers) {
    const double r = (p - c).norm();
    if (r <= radius) return radius - r;
    best = std::min(best, r - radius);
  }
  return best;
}

bool BallUnion::contains(const Vec3& p) const {
  return std::any_of(centers.begin(), centers.end(), [&](const Vec3& c) { return (p - c).norm() <= radius; });
}

BallUnion detect_ball_configuration(const std::vector<RadialSurface>& components, double cmc_threshold) {
  BallUnion u;
  if (components.empty()) throw ValidationError("no components");
  double total_p = 0.0, total_h = 0.0, sum_r = 0.0;
  for (const auto& c : components) {
    const auto f = curvature_fields(c);
    const auto rep = report(c, f);
    if (cmc_deficit(c, f, rep).deficit > cmc_threshold) {
      throw ValidationError("component cmc deficit above threshold");
    }
    total_p += rep.perimeter;
    total_h += rep.mean_curvature_avg * rep.perimeter;
    sum_r += std::cbrt(rep.volume / kUnitBallVolume);
    u.centers.push_back(rep.barycenter);
  }
  u.radius = sum_r / components.size();
  for (std::size_t i = 0; i < u.centers.size(); ++i) {
    for (std::size_t j = i + 1; j < u.centers.size(); ++j) {
      u.margin = std::min(u.margin, (u.centers[i] - u.centers[j]).norm() - 2.0 * u.radius);
    }
  }
  u.rho = 2.0 / (total_h / total_p);
  u.count_mismatch = std::abs(u.count() - std::pow(u.rho, -3.0));
  return u;
}

}  // namespace curvflow::surface
