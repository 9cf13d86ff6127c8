#pragma once

// Volume-preserving mean curvature flow on radial graphs: the incremental
// minimization (minimizing movements) scheme, a semi-implicit spectral stepper
// used for cross-validation, and trace diagnostics.

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "curvflow/surface.hpp"

namespace curvflow::vpmcf {

using surface::RadialSurface;
using surface::Vec3;

struct MmConfig {
  double h = 0.01;
  /// Band limit of the iterates; 0 keeps the band limit of the initial surface.
  int band_limit = 0;
  double grad_tol = 1e-11;
  int max_iterations = 400;
  /// Relative volume error tolerated after the final dilation.
  double volume_tol = 1e-12;
  /// Volume enforced on the new set; 0 uses |E|. run() pins it to the initial
  /// volume so rounding does not accumulate over many steps.
  double target_volume = 0.0;

  void validate() const;
};

struct StepDiag {
  double lambda = 0;
  double dissipation = 0;
  /// L2 norm of the band-limited projection of (d_E / h + H_F - lambda) rho_F^2,
  /// i.e. the constrained gradient of the discrete objective.
  double el_residual = 0;
  /// Pointwise L2(dF) norm of d_E / h + H_F - lambda at the grid nodes.
  double el_residual_pointwise = 0;
  /// int_{dF} d_E^2.
  double distance_sq = 0;
  double perimeter_before = 0;
  double perimeter_after = 0;
  double volume_drift = 0;
  int iterations = 0;
  bool converged = true;
};

struct StepResult {
  RadialSurface surface;
  StepDiag diag;
};

/// D(F, E) = int over the symmetric difference of dist(., dE), by radial
/// Gauss-Legendre quadrature along every grid direction.
double dissipation(const RadialSurface& F, const RadialSurface& E, int radial_nodes = 16);

/// One step of the scheme: minimize P(F) + D(F, E) / h over radial graphs with
/// |F| = |E|, starting from E.
StepResult mm_step(const RadialSurface& E, const MmConfig& config);

/// Semi-implicit step of V = Hbar - H followed by a volume-restoring dilation.
/// Throws NumericalError when the perimeter grows by more than 1e-6.
RadialSurface direct_step(const RadialSurface& E, double dt, bool renormalize = true, double target_volume = 0.0);

enum class Scheme { mm, direct };
Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme s);

struct TraceEntry {
  double t = 0;
  RadialSurface surface;
  StepDiag diag;  ///< diagnostics of the step that produced this entry
  surface::GeometricReport report;
  double delta_cmc = 0;
};

struct FlowTrace {
  double h = 0;
  Scheme scheme = Scheme::mm;
  bool converged = false;  ///< halted early on delta_cmc < 1e-7
  std::vector<TraceEntry> entries;  ///< entries[0] is the initial surface
};

/// Optional per-step callback, called after each entry is appended.
using StepObserver = std::function<void(const TraceEntry&)>;

FlowTrace run(const RadialSurface& initial, const MmConfig& config, double T, Scheme scheme,
              const StepObserver& observer = {});

struct LedgerReport {
  /// P(E_{k+1}) + D_k / h - P(E_k), per step.
  std::vector<double> comparison_slack;
  double max_comparison_slack = -std::numeric_limits<double>::infinity();
  double max_perimeter_increase = -std::numeric_limits<double>::infinity();
  /// sum_k h osc(E_k) over the steps after the first.
  double cumulative_osc = 0;
  double dissipation_over_h = 0;
  double perimeter_drop = 0;
  /// sum D_k / h - (P(E_0) - P(E_final)).
  double telescoping_slack = 0;
  /// max_k int d^2 / D_k over steps with D_k > 0.
  double distance_constant = 0;
  double dissipation_to_perimeter = 0;
  double max_volume_drift = 0;

  bool comparison_holds(double tol) const { return max_comparison_slack <= tol; }
};

LedgerReport dissipation_ledger(const FlowTrace& trace);

enum class Observable { perimeter_deficit, hausdorff, osc };
Observable parse_observable(const std::string& name);

struct RateFit {
  double rate = 0;
  double intercept = 0;
  /// NaN when the data are constant.
  double r_squared = 0;
  int points = 0;
};

/// Least-squares fit of log(y) against t. Throws ValidationError on a
/// non-positive value.
RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& y);
/// Fit over the trailing half of the trace, keeping values above 1e-12.
RateFit fit_rate(const FlowTrace& trace, Observable observable);

struct DecayCheck {
  bool hypothesis = false;
  bool conclusion = false;
  /// First index where the hypothesis fails, or where the conclusion fails
  /// when the hypothesis holds; -1 otherwise.
  int witness = -1;
  /// tail_{k > i} and (1 - 1/C)^{i+1} S per index (0-based i).
  std::vector<double> tails, bounds;
};

/// With 0-based indices: hypothesis sum_{k >= i} a_k <= C a_i for all i, and
/// conclusion sum_{k > i} a_k <= (1 - 1/C)^{i+1} sum_k a_k.
DecayCheck geometric_decay_check(const std::vector<double>& a, double C);

/// Sup of dist(., dF) over the symmetric difference of the region bounded by
/// the components and the ball union F. Half of the samples lie on the
/// boundary (a randomly rotated Fibonacci lattice, locally refined), the rest
/// are uniform in a bounding box.
double hausdorff_to_union(const std::vector<RadialSurface>& components, const surface::BallUnion& target,
                          std::uint64_t seed = 7, int samples = 100000);

}  // namespace curvflow::vpmcf
