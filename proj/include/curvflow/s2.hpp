#pragma once

// Spectral substrate on the unit sphere: Gauss-Legendre x trapezoid grids,
// real orthonormal spherical harmonics, and coefficient-space differentiation.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace curvflow::s2 {

using Vec3 = Eigen::Vector3d;

/// Immutable tensor-product grid on S^2 for band limit L.
///
/// Colatitudes are Gauss-Legendre nodes in cos(theta) (n_theta = 2(L+1)),
/// longitudes are uniform on [0, 2pi) (n_phi = 4(L+1)). Node (i, j) has flat
/// index i * n_phi + j. Copies share the underlying tables.
class Grid {
 public:
  static constexpr int kMinBandLimit = 2;
  static constexpr int kMaxBandLimit = 256;

  /// Throws ValidationError("band limit out of range") outside [2, 256].
  static Grid build(int band_limit);

  /// Same as build() but memoized per band limit.
  static const Grid& cached(int band_limit);

  int band_limit() const { return impl_->band_limit; }
  int n_theta() const { return impl_->n_theta; }
  int n_phi() const { return impl_->n_phi; }
  std::size_t size() const { return static_cast<std::size_t>(impl_->n_theta) * impl_->n_phi; }

  std::span<const double> theta() const { return impl_->theta; }
  std::span<const double> cos_theta() const { return impl_->cos_theta; }
  std::span<const double> sin_theta() const { return impl_->sin_theta; }
  /// Gauss-Legendre weights in cos(theta); they sum to 2.
  std::span<const double> theta_weights() const { return impl_->theta_weights; }
  std::span<const double> phi() const { return impl_->phi; }
  double phi_weight() const { return impl_->phi_weight; }

  /// Full quadrature weight of node (i, j) for the surface measure of S^2.
  double weight(int i, int j) const;
  std::span<const double> weights() const { return impl_->weights; }

  Vec3 node(int i, int j) const;

  /// Real trig factor T_m(phi_j) for m in [-L, L], stored row-major by m + L.
  double trig(int m, int j) const { return trig_row(m)[j]; }
  const double* trig_row(int m) const {
    return impl_->trig.data() + static_cast<std::size_t>(m + impl_->band_limit) * impl_->n_phi;
  }

  bool operator==(const Grid& other) const { return band_limit() == other.band_limit(); }

 private:
  struct Impl {
    int band_limit = 0;
    int n_theta = 0;
    int n_phi = 0;
    std::vector<double> theta, cos_theta, sin_theta, theta_weights, phi, weights, trig;
    double phi_weight = 0.0;
  };
  explicit Grid(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// One real value per grid node.
struct ScalarField {
  Grid grid;
  std::vector<double> values;

  ScalarField(Grid g, std::vector<double> v);
  explicit ScalarField(Grid g, double fill = 0.0);

  double& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * grid.n_phi() + j]; }
  double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.n_phi() + j]; }
};

/// Real spherical-harmonic coefficients a_{l,m}, 0 <= l <= L, -l <= m <= l,
/// stored at l*l + l + m.
struct ShCoeffs {
  int band_limit = 0;
  std::vector<double> a;

  ShCoeffs() = default;
  explicit ShCoeffs(int L) : band_limit(L), a(static_cast<std::size_t>(L + 1) * (L + 1), 0.0) {}

  static std::size_t index(int l, int m) { return static_cast<std::size_t>(l * l + l + m); }
  static std::size_t count(int L) { return static_cast<std::size_t>(L + 1) * (L + 1); }

  double& operator()(int l, int m) { return a[index(l, m)]; }
  double operator()(int l, int m) const { return a[index(l, m)]; }

  /// Same coefficients at a different band limit (zero padded or truncated).
  ShCoeffs resized(int L) const;
};

/// Orthonormalized associated Legendre values P̄_l^m(cos theta) (no
/// Condon-Shortley phase) for 0 <= m <= l <= L at index l(l+1)/2 + m, such that
/// Y_{l,m} = P̄_l^{|m|} T_m(phi) with T_0 = 1, T_m = sqrt2 cos(m phi),
/// T_{-m} = sqrt2 sin(m phi). Optional theta-derivatives of first and second
/// order (both require sin(theta) != 0).
struct LegendreRow {
  std::vector<double> p, dp, d2p;
  static std::size_t index(int l, int m) { return static_cast<std::size_t>(l * (l + 1) / 2 + m); }
};
void legendre_row(int L, double cos_theta, double sin_theta, int derivative_order, LegendreRow& out);

/// Value of the real harmonic Y_{l,m} at (theta, phi).
double harmonic(int l, int m, double theta, double phi);

double integrate(const ScalarField& f);

ShCoeffs sh_analyze(const ScalarField& f);
ShCoeffs sh_analyze(const ScalarField& f, int band_limit);
ScalarField sh_synthesize(const ShCoeffs& c, const Grid& grid);

/// Synthesized field together with its partial derivatives, all exact for the
/// band-limited function represented by the coefficients.
struct FieldDerivatives {
  std::vector<double> f, f_t, f_p, f_tt, f_tp, f_pp;
};
/// order 0: f only; 1: adds f_t, f_p; 2: adds second partials.
FieldDerivatives sh_synthesize_derivatives(const ShCoeffs& c, const Grid& grid, int order);

/// Transpose of synthesis (no quadrature weights):
/// out_{l,m} = sum_n v_n Y + v_t,n dY/dtheta + v_p,n dY/dphi at the grid nodes.
/// Empty spans are skipped.
ShCoeffs sh_synthesize_adjoint(const Grid& grid, int band_limit, std::span<const double> v,
                               std::span<const double> v_t, std::span<const double> v_p);

/// Pointwise evaluation with partials up to second order.
struct PointValue {
  double f = 0, f_t = 0, f_p = 0, f_tt = 0, f_tp = 0, f_pp = 0;
};
PointValue sh_evaluate(const ShCoeffs& c, double theta, double phi, int order);

/// Coefficient map a_{l,m} -> -l(l+1) a_{l,m}.
ShCoeffs laplace_beltrami(const ShCoeffs& c);

struct Partials {
  ScalarField d_theta;
  ScalarField d_phi;
};
/// Derivatives of the band-limited projection of f, computed in coefficient space.
Partials partials(const ScalarField& f);

/// Random coefficients on l in [l_min, l_max], i.i.d. uniform in [-1, 1] and
/// scaled so sum_l ||a_l|| sqrt((2l+1)/4pi), an upper bound on the sup-norm of
/// the synthesized field, equals amplitude. Degrees 0 and 1 need
/// allow_low_degrees.
ShCoeffs random_band_limited(std::uint64_t seed, int l_min, int l_max, double amplitude, int band_limit,
                             bool allow_low_degrees = false);

/// Sup-norm upper bound used by random_band_limited.
double sup_norm_bound(const ShCoeffs& c);

/// Unit vector for spherical angles, and the inverse.
Vec3 direction(double theta, double phi);
void angles(const Vec3& u, double& theta, double& phi);

}  // namespace curvflow::s2
