#pragma once

// Periodic grid fields on the flat torus [0, R)^3 and spectral Poisson
// inversion.

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace curvflow::torus {

using Vec3 = Eigen::Vector3d;
using Field = std::vector<double>;

/// Cubic grid of n^3 voxels of side R / n. Voxel (i, j, k) has center
/// ((i, j, k) + 1/2) R / n and flat index (i n + j) n + k.
struct TorusGrid {
  double R = 8.0;
  int n = 128;

  double spacing() const { return R / n; }
  double cell_volume() const { return spacing() * spacing() * spacing(); }
  std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n + j) * n + static_cast<std::size_t>(k);
  }
  Vec3 center(int i, int j, int k) const { return spacing() * Vec3(i + 0.5, j + 0.5, k + 0.5); }

  /// Throws ValidationError unless n is a power of two in [32, 256] and R >= 1.
  void validate() const;
  bool operator==(const TorusGrid& o) const { return R == o.R && n == o.n; }
};

/// sum f * cell volume.
double integrate(const TorusGrid& g, const Field& f);
double mean(const Field& f);
double max_abs(const Field& f);

/// Zero-mean Phi with -Laplace Phi = f - mean(f), scaled by `scale`. No mean
/// check; callers that require a compatible right-hand side test it first.
Field inverse_laplacian(const TorusGrid& g, const Field& f, double scale = 1.0);
/// Spectral Laplacian.
Field laplacian(const TorusGrid& g, const Field& u);
/// int |Du|^2 by spectral quadrature.
double dirichlet_energy(const TorusGrid& g, const Field& u);
/// Squared H^-1 norm of the zero-mean part of f, sum_k |f_k|^2 / |k|^2.
double hminus1_norm_sq(const TorusGrid& g, const Field& f);

/// sqrt(int |D Phi|^2) with -Laplace Phi = f. Throws ValidationError when
/// |mean(f)| > 1e-10 max|f|.
double hminus1_norm(const TorusGrid& g, const Field& f);

struct Potential {
  TorusGrid grid;
  Field U;
  /// ||Laplace U + rhs - mean(rhs)||_2 / ||rhs||_2.
  double residual = 0.0;
};

/// ||Laplace u + rhs - mean(rhs)||_2 / ||rhs||_2 (0 for rhs = 0).
double poisson_residual(const TorusGrid& g, const Field& u, const Field& rhs);

/// Solves -Laplace U = rhs with periodic conditions and zero-mean U. Throws
/// ValidationError on a size mismatch or |mean(rhs)| > 1e-10 max|rhs|.
Potential poisson_solve(const TorusGrid& g, const Field& rhs);

}  // namespace curvflow::torus
