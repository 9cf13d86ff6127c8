#pragma once

// Mullins-Sekerka flat flow on the torus. Interfaces stay sharp (one radial
// graph per component); the potential lives on a periodic voxel grid, and the
// two are coupled through an anti-aliased, mass-exact rasterization.

#include <cstdint>
#include <functional>
#include <vector>

#include "curvflow/surface.hpp"
#include "curvflow/torus.hpp"
#include "curvflow/vpmcf.hpp"

namespace curvflow::mullins {

using surface::RadialSurface;
using surface::Vec3;
using torus::Field;
using torus::Potential;
using torus::TorusGrid;

/// Voxel occupancy of a set. The occupancy mass equals `volume`, the exact
/// volume of the sharp geometry, up to the tolerance of the shift solve.
struct ChiSet {
  TorusGrid grid;
  Field occupancy;
  double volume = 0;
  /// Radial offset added to every interface so that the mass is exact.
  double shift = 0;

  double mass() const { return torus::integrate(grid, occupancy); }
};

/// Nonzero occupancies only, sorted by voxel index.
struct SparseChi {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  static SparseChi from(const ChiSet& c);
  /// sum |a - b| over voxels (multiply by the cell volume for |A delta B|).
  double l1_distance(const SparseChi& other) const;
};

/// Occupancy from 4^3 subcell samples per boundary voxel, each blended over
/// one subcell width. Throws ValidationError when the geometry comes within
/// 2 voxels of the fundamental domain's faces or components overlap.
ChiSet rasterize(const std::vector<RadialSurface>& components, const TorusGrid& grid);
ChiSet rasterize(const surface::BallUnion& balls, const TorusGrid& grid);

/// |A delta B| as the L1 distance of occupancies.
double symmetric_difference(const ChiSet& a, const ChiSet& b);

struct MsDissipation {
  double D = 0;
  Potential U;
};

/// D(F, E) = int |DU|^2 with -Laplace U = (chi_F - chi_E) / h. Throws
/// ValidationError when the masses differ by more than 1e-8 relative.
MsDissipation ms_dissipation(const ChiSet& F, const ChiSet& E, double h);

struct MsConfig {
  double h = 0.01;
  TorusGrid grid;
  /// Band limit of the iterates; 0 keeps the largest band limit of the input.
  int band_limit = 0;
  double grad_tol = 1e-8;
  int max_iterations = 300;
  /// Volume enforced on the new set; 0 uses |E|.
  double target_volume = 0.0;
  /// ms_run stops once every component's cmc deficit is below this (0: never).
  double halt_cmc = 1e-7;

  void validate() const;
};

struct MsStepDiag {
  double dissipation = 0;
  /// ||chi_F - chi_E||^2 in H^-1, from its own solve.
  double hminus1_sq = 0;
  double lambda = 0;
  /// Norm of the volume-projected coefficient gradient of the objective,
  /// i.e. of the band-limited projection of (U + H_F - lambda) on dF.
  double el_residual = 0;
  double perimeter_before = 0;
  double perimeter_after = 0;
  double mass = 0;
  double mass_drift = 0;
  double poisson_residual = 0;
  /// max |rho_F - rho_E| over sample directions, across components.
  double displacement = 0;
  int iterations = 0;
  bool converged = true;
};

struct MsStepResult {
  std::vector<RadialSurface> components;
  ChiSet chi;
  Potential U;
  MsStepDiag diag;
};

/// Minimizes P(F) + (h/2) int |D U_{F,E}|^2 over the radial coefficients of
/// all components with |F| fixed. Throws NumericalError on non-convergence or
/// when two interfaces come within 2 voxels.
MsStepResult ms_mm_step(const std::vector<RadialSurface>& E, const MsConfig& config);

struct MsTraceEntry {
  double t = 0;
  std::vector<RadialSurface> components;
  SparseChi chi;
  MsStepDiag diag;
  double perimeter = 0;
  double volume = 0;
  double mass = 0;
  /// P - 4 pi N^{1/3} (|E| / |B_1|)^{2/3} with N components.
  double deficit = 0;
  double delta_cmc = 0;
};

struct MsTrace {
  double h = 0;
  TorusGrid grid;
  bool converged = false;
  std::vector<MsTraceEntry> entries;
};

using MsObserver = std::function<void(const MsTraceEntry&)>;

MsTrace ms_run(const std::vector<RadialSurface>& initial, const MsConfig& config, double T,
               const MsObserver& observer = {});

struct MsLedger {
  /// P_{k+1} + (h/2) D_k - P_k per step.
  std::vector<double> comparison_slack;
  double max_comparison_slack = 0;
  double max_perimeter_increase = 0;
  double max_mass_drift = 0;
  /// max |hminus1_sq - h^2 D| / (h^2 D).
  double max_identity_error = 0;
  double max_poisson_residual = 0;
  double max_el_residual = 0;
  double half_h_dissipation = 0;
  double perimeter_drop = 0;
  /// sum (h/2) D_k - (P_0 - P_final).
  double telescoping_slack = 0;
};

MsLedger ms_ledger(const MsTrace& trace);

/// Log-linear fit of the deficit over the trailing half, values above 1e-12.
vpmcf::RateFit ms_fit_rate(const MsTrace& trace);

struct HolderReport {
  double constant = 0;
  int pairs = 0;
  double s = 0, t = 0;  ///< maximizing pair
};

/// sup |E(t) delta E(s)| / (t - s)^{1/4} over entries with h <= t - s <= 1.
/// Throws ValidationError on a trace with fewer than 3 steps.
HolderReport holder_continuity_report(const MsTrace& trace);

struct DensityReport {
  std::vector<double> radii;
  /// Extremes of area(dE within B_rho(x)) / rho^2 per radius.
  std::vector<double> min, max;
  double overall_min = 0, overall_max = 0;
};

/// Samples 64 interface points (Fibonacci directions, dealt round-robin to
/// the components). Radii must lie in (0, 1).
DensityReport density_estimate_report(const std::vector<RadialSurface>& components, const std::vector<double>& radii);

/// Area of the part of dE inside B_radius(x).
double area_in_ball(const RadialSurface& s, const Vec3& x, double radius);

struct AlexandrovRecord {
  int count = 0;
  /// P - 4 pi N^{1/3} (|E| / |B_1|)^{2/3}.
  double deficit = 0;
  /// int |DU|^2.
  double energy = 0;
  /// deficit / energy, NaN when the energy vanishes.
  double ratio = 0;
};

AlexandrovRecord ms_alexandrov_check(const std::vector<RadialSurface>& F, const Potential& U);

}  // namespace curvflow::mullins
