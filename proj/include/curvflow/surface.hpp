#pragma once

// Closed star-shaped surfaces written as radial graphs over S^2, their
// fundamental forms and curvature functionals.

#include <limits>
#include <numbers>
#include <vector>

#include "curvflow/s2.hpp"

namespace curvflow::surface {

using s2::Vec3;

inline constexpr double kUnitBallVolume = 4.0 * std::numbers::pi / 3.0;
inline constexpr double kUnitSpherePerimeter = 4.0 * std::numbers::pi;

/// Boundary {c + (1 + w(x)) x : x in S^2}, with w given by its harmonic
/// coefficients.
struct RadialSurface {
  Vec3 center = Vec3::Zero();
  s2::ShCoeffs w;

  int band_limit() const { return w.band_limit; }

  /// Ball of the given radius at `center`.
  static RadialSurface ball(int band_limit, double radius = 1.0, const Vec3& center = Vec3::Zero());
  /// Unit sphere perturbed by amplitude * Y_{l,m}.
  static RadialSurface mode(int band_limit, int l, int m, double amplitude, const Vec3& center = Vec3::Zero());
  /// Surface with the given radius function rho = 1 + w.
  static RadialSurface from_radius(const s2::ShCoeffs& rho, const Vec3& center = Vec3::Zero());

  /// Coefficients of rho = 1 + w.
  s2::ShCoeffs radius_coeffs() const;
  /// Radius function at grid nodes.
  std::vector<double> radius_values(const s2::Grid& grid) const;
  /// Radius in direction (theta, phi).
  double radius_at(double theta, double phi) const;
  /// Radius in the direction of the unit vector u.
  double radius_along(const Vec3& u) const;

  /// True when p lies in the closed region bounded by the surface.
  bool contains(const Vec3& p) const;

  RadialSurface dilated(double factor) const;
  RadialSurface translated(const Vec3& shift) const;
};

/// Per-node geometry of a radial surface on a grid. `area_density` is the
/// surface area element relative to the sphere measure (sqrt(det g)/sin theta),
/// so that the area of the surface is the sphere quadrature of area_density.
struct CurvatureFields {
  explicit CurvatureFields(s2::Grid g) : grid(std::move(g)) {}

  s2::Grid grid;
  std::vector<double> g11, g12, g22;
  std::vector<double> a11, a12, a22;
  std::vector<double> mean, gauss, second_form_sq, traceless_sq, k1, k2;
  std::vector<double> area_density;
  std::vector<double> radius;
  std::vector<Vec3> position, normal;
};

struct GeometricReport {
  double perimeter = 0;
  double volume = 0;
  /// Volume from minus one third of the integral of (inner normal . position).
  double volume_divergence = 0;
  double mean_curvature_avg = 0;
  /// Integral of (H - Hbar)^2 over the boundary.
  double oscillation = 0;
  double traceless_energy = 0;
  double willmore = 0;
  double mean_curvature_sq = 0;
  double total_gauss_curvature = 0;
  Vec3 barycenter = Vec3::Zero();
  double diameter = 0;
};

/// Throws ValidationError on 1 + w <= 0 at a node and NumericalError on a
/// metric with det g < 1e-12.
CurvatureFields curvature_fields(const RadialSurface& s, const s2::Grid& grid);
/// Grid at the surface's band limit.
CurvatureFields curvature_fields(const RadialSurface& s);

GeometricReport report(const RadialSurface& s);
GeometricReport report(const RadialSurface& s, const CurvatureFields& fields);

/// Perimeter only (area element from first derivatives).
double perimeter(const RadialSurface& s);
/// Enclosed volume (1/3) int rho^3.
double volume(const RadialSurface& s);
/// Barycenter of the enclosed region.
Vec3 barycenter(const RadialSurface& s);

/// (1/4) int (H - c0)^2.
double canham_helfrich(const RadialSurface& s, double spontaneous_curvature);

/// Rescales to |E| = |B_1| and moves the center to the barycenter of the
/// enclosed region (re-expanding w about the new center at the same band limit).
RadialSurface normalize(const RadialSurface& s);
bool is_normalized(const RadialSurface& s, double rel_tol = 1e-8);

/// int |H - Hbar|^2 - eps P; requires eps in (0, 1) and a normalized surface.
double j_epsilon(const RadialSurface& s, double eps);

struct CmcDeficit {
  double h0 = 0;     ///< 2 P / (3 |E|)
  double deficit = 0;  ///< max over nodes of |H / h0 - 1|
};
CmcDeficit cmc_deficit(const RadialSurface& s);
CmcDeficit cmc_deficit(const RadialSurface& s, const CurvatureFields& fields, const GeometricReport& rep);

/// Signed distance (negative inside). See distance.hpp for the reusable query.
double signed_distance(const RadialSurface& s, const Vec3& p);

/// N balls of common radius with separation margin
/// min_{i != j} |x_i - x_j| - 2r (+infinity for a single ball).
struct BallUnion {
  std::vector<Vec3> centers;
  double radius = 0;
  double margin = std::numeric_limits<double>::infinity();
  /// 2 / Hbar of the union.
  double rho = 0;
  /// |N - rho^-3|.
  double count_mismatch = 0;

  int count() const { return static_cast<int>(centers.size()); }
  static BallUnion make(std::vector<Vec3> centers, double radius);
  /// Distance from p to the union's boundary.
  double boundary_distance(const Vec3& p) const;
  bool contains(const Vec3& p) const;
};

/// Reads N, the common radius, and centers off nearly-CMC components. Throws
/// ValidationError when a component's cmc deficit exceeds the threshold.
BallUnion detect_ball_configuration(const std::vector<RadialSurface>& components, double cmc_threshold = 0.2);

}  // namespace curvflow::surface
