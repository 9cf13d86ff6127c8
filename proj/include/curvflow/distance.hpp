#pragma once

// Signed distance to a radial surface by nearest-point search.

#include <vector>

#include "curvflow/surface.hpp"

namespace curvflow::surface {

struct NearestPoint {
  double distance = 0;  ///< signed, negative inside
  double theta = 0, phi = 0;
  Vec3 point = Vec3::Zero();
};

/// Reusable distance oracle. Global queries seed Newton from the closest point
/// of a dense surface sampling; local queries refine from a caller-provided
/// parameter guess (useful for lattices of nearby points).
class DistanceQuery {
 public:
  /// sample_band_limit 0 selects max(2L, 32).
  explicit DistanceQuery(const RadialSurface& s, int sample_band_limit = 0);

  double operator()(const Vec3& p) const { return nearest(p).distance; }
  NearestPoint nearest(const Vec3& p) const;
  NearestPoint nearest_from(const Vec3& p, double theta0, double phi0) const;
  /// Local refinement only: the distance is unsigned and no global fallback is
  /// attempted. Callers that know the sign and a distance bound use this.
  NearestPoint local_unsigned(const Vec3& p, double theta0, double phi0) const;

  const RadialSurface& surface() const { return s_; }

 private:
  NearestPoint refine(const Vec3& p, double theta, double phi, bool with_sign = true) const;
  NearestPoint global(const Vec3& p) const;
  double sign_of(const Vec3& p) const;

  RadialSurface s_;
  s2::ShCoeffs rho_;
  std::vector<Vec3> samples_;
  std::vector<double> sample_theta_, sample_phi_;
};

}  // namespace curvflow::surface
