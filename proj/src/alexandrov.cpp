#include "curvflow/alexandrov.hpp"

#include <algorithm>
#include <cmath>

#include "curvflow/error.hpp"
#include "curvflow/parallel.hpp"

namespace curvflow::alexandrov {

namespace {

struct Sides {
  double perimeter = 0, int_h = 0, volume = 0;
};

Sides integrals(const surface::CurvatureFields& f) {
  const auto w = f.grid.weights();
  Sides s;
  for (std::size_t k = 0; k < f.grid.size(); ++k) {
    const double da = w[k] * f.area_density[k];
    s.perimeter += da;
    s.int_h += da * f.mean[k];
    s.volume += w[k] * f.radius[k] * f.radius[k] * f.radius[k] / 3.0;
  }
  return s;
}

double oscillation(const surface::CurvatureFields& f, double hbar) {
  const auto w = f.grid.weights();
  double osc = 0.0;
  for (std::size_t k = 0; k < f.grid.size(); ++k) {
    const double d = f.mean[k] - hbar;
    osc += w[k] * f.area_density[k] * d * d;
  }
  return osc;
}

double max_radius(const RadialSurface& s) {
  const auto r = s.radius_values(s2::Grid::cached(s.band_limit()));
  return *std::max_element(r.begin(), r.end());
}

}  // namespace

SweepRecord lhs_rhs(const RadialSurface& s, double delta0) {
  // P and the oscillation are translation invariant, so the volume dilation is
  // the only part of the normalization that affects the record.
  const double v = surface::volume(s);
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("normalization failure: non-positive volume");
  const RadialSurface n = s.dilated(std::cbrt(surface::kUnitBallVolume / v));
  const auto f = surface::curvature_fields(n);
  const Sides sides = integrals(f);
  SweepRecord r;
  r.perimeter = sides.perimeter;
  r.lhs = sides.perimeter - surface::kUnitSpherePerimeter;
  r.rhs = oscillation(f, sides.int_h / sides.perimeter);
  r.ratio = r.rhs < 1e-14 ? 0.0 : r.lhs / r.rhs;
  r.admissible = r.perimeter <= kTwoBallPerimeter - delta0;
  return r;
}

SweepResult sweep(const SweepConfig& c) {
  if (c.n_samples < 1) throw ValidationError("n_samples must be at least 1");
  SweepResult out;
  out.records.resize(c.n_samples);
  parallel_for(0, c.n_samples, [&](std::size_t i) {
    const std::uint64_t seed = c.seed + i;
    RadialSurface s;
    s.w = s2::random_band_limited(seed, c.l_min, c.l_max, c.amplitude, c.band_limit);
    SweepRecord r = lhs_rhs(s, c.delta0);
    r.seed = seed;
    r.l_min = c.l_min;
    r.l_max = c.l_max;
    r.amplitude = c.amplitude;
    out.records[i] = r;
  });
  bool first = true;
  for (const auto& r : out.records) {
    if (!r.admissible) {
      ++out.summary.excluded;
      continue;
    }
    ++out.summary.admissible;
    out.summary.max_ratio = first ? r.ratio : std::max(out.summary.max_ratio, r.ratio);
    out.summary.min_ratio = first ? r.ratio : std::min(out.summary.min_ratio, r.ratio);
    first = false;
  }
  if (out.summary.admissible == 0) throw ValidationError("zero admissible samples");
  out.summary.empirical_c = out.summary.max_ratio;
  return out;
}

SharpnessTable sharpness_probe(int l, int m, const std::vector<double>& amplitudes, double p, int band_limit) {
  if (amplitudes.empty()) throw ValidationError("empty amplitude list");
  if (!(p >= 1.0)) throw ValidationError("probe exponent must be at least 1");
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    if (!(amplitudes[i] > 0.0 && amplitudes[i] <= 0.2)) throw ValidationError("amplitudes must lie in (0, 0.2]");
    if (i > 0 && !(amplitudes[i] < amplitudes[i - 1])) throw ValidationError("amplitudes must be strictly decreasing");
  }
  SharpnessTable t;
  t.l = l;
  t.m = m;
  t.p = p;
  for (double eps : amplitudes) {
    const auto r = lhs_rhs(RadialSurface::mode(band_limit, l, m, eps), 0.0);
    SharpnessRow row;
    row.amplitude = eps;
    row.lhs = r.lhs;
    row.rhs = r.rhs;
    row.ratio = r.ratio;
    row.ratio_p = r.rhs < 1e-14 ? 0.0 : r.lhs / std::pow(r.rhs, p);
    t.rows.push_back(row);
  }
  return t;
}

bool radii_inequality(const std::vector<double>& radii, double* lhs, double* bound) {
  double s2 = 0.0, s3 = 0.0;
  for (double r : radii) {
    s2 += r * r;
    s3 += r * r * r;
  }
  const double b = std::cbrt(static_cast<double>(radii.size())) * std::pow(s3, 2.0 / 3.0);
  if (lhs) *lhs = s2;
  if (bound) *bound = b;
  return s2 <= b * (1.0 + 1e-12);
}

MultiballRecord multiball_check(const std::vector<RadialSurface>& components, double delta1) {
  if (components.empty()) throw ValidationError("no components");
  double total_v = 0.0;
  for (const auto& c : components) total_v += surface::volume(c);
  const double alpha = std::cbrt(surface::kUnitBallVolume / total_v);
  std::vector<RadialSurface> scaled;
  for (const auto& c : components) {
    RadialSurface s = c.dilated(alpha);
    s.center = alpha * c.center;
    scaled.push_back(std::move(s));
  }

  MultiballRecord r;
  r.count = static_cast<int>(scaled.size());
  // Conservative separation: distance between centers minus the largest radii.
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    for (std::size_t j = i + 1; j < scaled.size(); ++j) {
      const double gap = (scaled[i].center - scaled[j].center).norm() - max_radius(scaled[i]) - max_radius(scaled[j]);
      r.margin = std::min(r.margin, gap);
    }
  }
  if (r.margin < 0.0) throw ValidationError("overlap detected between components");
  if (r.margin < delta1) throw ValidationError("separation margin below delta1");

  std::vector<surface::CurvatureFields> fields;
  double int_h = 0.0;
  for (const auto& s : scaled) {
    fields.push_back(surface::curvature_fields(s));
    const Sides sides = integrals(fields.back());
    r.perimeter += sides.perimeter;
    int_h += sides.int_h;
    r.radii.push_back(std::cbrt(sides.volume / surface::kUnitBallVolume));
  }
  r.hbar = int_h / r.perimeter;
  for (const auto& f : fields) r.rhs += oscillation(f, r.hbar);
  r.lhs = r.perimeter - surface::kUnitSpherePerimeter * std::cbrt(static_cast<double>(r.count));
  r.ratio = r.rhs < 1e-14 ? 0.0 : r.lhs / r.rhs;
  r.radii_ok = radii_inequality(r.radii, &r.radii_sum_sq, &r.radii_bound);
  return r;
}

}  // namespace curvflow::alexandrov
