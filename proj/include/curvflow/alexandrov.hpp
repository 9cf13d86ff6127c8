#pragma once

// Measurement harness for the quantitative Alexandrov inequality
// P(E) - P(B_1) <= C ||H - Hbar||^2_{L^2}, its sharpness in the exponent, and
// the multi-ball variant.

#include <cstdint>
#include <limits>
#include <vector>

#include "curvflow/surface.hpp"

namespace curvflow::alexandrov {

using surface::RadialSurface;

/// 4 pi 2^(1/3): perimeter of two disjoint balls of total volume |B_1|.
inline const double kTwoBallPerimeter = surface::kUnitSpherePerimeter * 1.2599210498948731647672106;

struct SweepRecord {
  std::uint64_t seed = 0;
  int l_min = 0, l_max = 0;
  double amplitude = 0;
  double perimeter = 0;
  double lhs = 0;    ///< P - 4 pi after normalization
  double rhs = 0;    ///< int (H - Hbar)^2
  double ratio = 0;  ///< lhs / rhs, 0 when rhs < 1e-14
  bool admissible = false;
};

/// Normalizes s and evaluates both sides. Admissible when P <= 4 pi 2^(1/3) - delta0.
SweepRecord lhs_rhs(const RadialSurface& s, double delta0);

struct SweepConfig {
  int n_samples = 200;
  std::uint64_t seed = 42;
  int l_min = 2, l_max = 6;
  double amplitude = 0.15;
  double delta0 = 0.5;
  int band_limit = 24;
};

struct SweepSummary {
  double max_ratio = 0;
  double min_ratio = 0;
  /// Empirical constant: the max ratio over admissible samples.
  double empirical_c = 0;
  int admissible = 0;
  int excluded = 0;
};

struct SweepResult {
  std::vector<SweepRecord> records;  ///< all samples in seed order
  SweepSummary summary;
};

/// Sample i uses seed config.seed + i. Throws ValidationError when no sample is
/// admissible.
SweepResult sweep(const SweepConfig& config);

struct SharpnessRow {
  double amplitude = 0, lhs = 0, rhs = 0, ratio = 0, ratio_p = 0;
};
struct SharpnessTable {
  int l = 0, m = 0;
  double p = 1;
  std::vector<SharpnessRow> rows;
};

/// w = eps Y_{l,m}, normalized, for each eps. ratio_p = lhs / rhs^p.
SharpnessTable sharpness_probe(int l, int m, const std::vector<double>& amplitudes, double p, int band_limit = 24);

struct MultiballRecord {
  int count = 0;
  double perimeter = 0;
  double hbar = 0;
  double lhs = 0;  ///< P(E) - 4 pi N^(1/3)
  double rhs = 0;  ///< sum over components of int (H - Hbar)^2, Hbar of the union
  double ratio = 0;
  double margin = std::numeric_limits<double>::infinity();
  std::vector<double> radii;
  double radii_sum_sq = 0;
  double radii_bound = 0;  ///< N^(1/3) (sum r_i^3)^(2/3)
  bool radii_ok = false;
};

/// Jointly rescales the union to |B_1| (a dilation about the origin) and
/// evaluates both sides. Throws ValidationError on overlap or on a margin
/// below delta1.
MultiballRecord multiball_check(const std::vector<RadialSurface>& components, double delta1);

/// Power-mean check sum r_i^2 <= N^(1/3) (sum r_i^3)^(2/3).
bool radii_inequality(const std::vector<double>& radii, double* lhs = nullptr, double* bound = nullptr);

}  // namespace curvflow::alexandrov
