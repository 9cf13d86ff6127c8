#include "curvflow/s2.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

#include "curvflow/error.hpp"

namespace curvflow::s2 {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes (descending in x, i.e. north to south) and weights.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

// Per-ring sums over l for every m in [-L, L] (layout: m + L).
struct RingSums {
  std::vector<double> f, ft, ftt;
};

void ring_sums(const ShCoeffs& c, const LegendreRow& row, int order, RingSums& out) {
  const int L = c.band_limit;
  out.f.assign(2 * L + 1, 0.0);
  if (order >= 1) out.ft.assign(2 * L + 1, 0.0);
  if (order >= 2) out.ftt.assign(2 * L + 1, 0.0);
  for (int m = -L; m <= L; ++m) {
    const int am = std::abs(m);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (int l = am; l <= L; ++l) {
      const double a = c.a[ShCoeffs::index(l, m)];
      if (a == 0.0) continue;
      const std::size_t k = LegendreRow::index(l, am);
      s0 += a * row.p[k];
      if (order >= 1) s1 += a * row.dp[k];
      if (order >= 2) s2 += a * row.d2p[k];
    }
    out.f[m + L] = s0;
    if (order >= 1) out.ft[m + L] = s1;
    if (order >= 2) out.ftt[m + L] = s2;
  }
}

void check_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ValidationError("non-finite values");
  }
}

}  // namespace

Grid Grid::build(int band_limit) {
  if (band_limit < kMinBandLimit || band_limit > kMaxBandLimit) {
    throw ValidationError("band limit out of range");
  }
  auto impl = std::make_shared<Impl>();
  impl->band_limit = band_limit;
  impl->n_theta = 2 * (band_limit + 1);
  impl->n_phi = 4 * (band_limit + 1);
  gauss_legendre(impl->n_theta, impl->cos_theta, impl->theta_weights);
  impl->theta.resize(impl->n_theta);
  impl->sin_theta.resize(impl->n_theta);
  for (int i = 0; i < impl->n_theta; ++i) {
    impl->theta[i] = std::acos(impl->cos_theta[i]);
    impl->sin_theta[i] = std::sqrt((1.0 - impl->cos_theta[i]) * (1.0 + impl->cos_theta[i]));
  }
  impl->phi_weight = 2.0 * kPi / impl->n_phi;
  impl->phi.resize(impl->n_phi);
  for (int j = 0; j < impl->n_phi; ++j) impl->phi[j] = impl->phi_weight * j;
  impl->weights.resize(static_cast<std::size_t>(impl->n_theta) * impl->n_phi);
  for (int i = 0; i < impl->n_theta; ++i) {
    for (int j = 0; j < impl->n_phi; ++j) {
      impl->weights[static_cast<std::size_t>(i) * impl->n_phi + j] = impl->theta_weights[i] * impl->phi_weight;
    }
  }
  const int L = band_limit;
  impl->trig.resize(static_cast<std::size_t>(2 * L + 1) * impl->n_phi);
  for (int m = -L; m <= L; ++m) {
    for (int j = 0; j < impl->n_phi; ++j) {
      double t = 1.0;
      if (m > 0) t = std::numbers::sqrt2 * std::cos(m * impl->phi[j]);
      if (m < 0) t = std::numbers::sqrt2 * std::sin(-m * impl->phi[j]);
      impl->trig[static_cast<std::size_t>(m + L) * impl->n_phi + j] = t;
    }
  }
  return Grid(std::move(impl));
}

const Grid& Grid::cached(int band_limit) {
  static std::mutex mutex;
  static std::map<int, Grid> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(band_limit);
  if (it == cache.end()) it = cache.emplace(band_limit, build(band_limit)).first;
  return it->second;
}

double Grid::weight(int i, int j) const { return impl_->weights[static_cast<std::size_t>(i) * impl_->n_phi + j]; }

Vec3 Grid::node(int i, int j) const {
  const double s = impl_->sin_theta[i];
  return {s * std::cos(impl_->phi[j]), s * std::sin(impl_->phi[j]), impl_->cos_theta[i]};
}

ScalarField::ScalarField(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.size()) throw ValidationError("field size does not match grid");
}

ScalarField::ScalarField(Grid g, double fill) : grid(std::move(g)), values(grid.size(), fill) {}

ShCoeffs ShCoeffs::resized(int L) const {
  ShCoeffs out(L);
  const int lmax = std::min(L, band_limit);
  for (int l = 0; l <= lmax; ++l) {
    for (int m = -l; m <= l; ++m) out(l, m) = (*this)(l, m);
  }
  return out;
}

namespace {

// Recurrence coefficients for the normalized Legendre functions. They do not
// depend on the evaluation point or the band limit, so one table serves all.
struct RecurrenceTable {
  std::vector<double> a, b, c;
  RecurrenceTable() {
    const int L = Grid::kMaxBandLimit;
    const std::size_t n = static_cast<std::size_t>(L + 1) * (L + 2) / 2;
    a.assign(n, 0.0);
    b.assign(n, 0.0);
    c.assign(n, 0.0);
    for (int m = 0; m <= L; ++m) {
      for (int l = m + 1; l <= L; ++l) {
        const std::size_t k = LegendreRow::index(l, m);
        const double ll = static_cast<double>(l) * l, mm = static_cast<double>(m) * m;
        c[k] = std::sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0) * (ll - mm));
        if (l >= m + 2) {
          a[k] = std::sqrt((4.0 * ll - 1.0) / (ll - mm));
          b[k] = std::sqrt((static_cast<double>(l - 1) * (l - 1) - mm) / (4.0 * (l - 1) * (l - 1) - 1.0));
        }
      }
    }
  }
};

const RecurrenceTable& recurrence() {
  static const RecurrenceTable t;
  return t;
}

}  // namespace

void legendre_row(int L, double x, double s, int order, LegendreRow& out) {
  const RecurrenceTable& r = recurrence();
  const std::size_t n = static_cast<std::size_t>(L + 1) * (L + 2) / 2;
  out.p.resize(n);
  double pmm = 1.0 / std::sqrt(4.0 * kPi);
  for (int m = 0; m <= L; ++m) {
    if (m > 0) pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    double* p = out.p.data();
    p[LegendreRow::index(m, m)] = pmm;
    if (m + 1 <= L) p[LegendreRow::index(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * pmm;
    for (int l = m + 2; l <= L; ++l) {
      const std::size_t k = LegendreRow::index(l, m);
      p[k] = r.a[k] * (x * p[LegendreRow::index(l - 1, m)] - r.b[k] * p[LegendreRow::index(l - 2, m)]);
    }
  }
  if (order < 1) return;
  out.dp.resize(n);
  const double inv_s = 1.0 / s;
  for (int m = 0; m <= L; ++m) {
    for (int l = m; l <= L; ++l) {
      const std::size_t k = LegendreRow::index(l, m);
      const double prev = (l > m) ? r.c[k] * out.p[LegendreRow::index(l - 1, m)] : 0.0;
      out.dp[k] = (l * x * out.p[k] - prev) * inv_s;
    }
  }
  if (order < 2) return;
  out.d2p.resize(n);
  const double cot = x / s;
  const double inv_s2 = 1.0 / (s * s);
  for (int m = 0; m <= L; ++m) {
    for (int l = m; l <= L; ++l) {
      const std::size_t k = LegendreRow::index(l, m);
      out.d2p[k] = -cot * out.dp[k] - (l * (l + 1.0) - m * m * inv_s2) * out.p[k];
    }
  }
}

double harmonic(int l, int m, double theta, double phi) {
  LegendreRow row;
  legendre_row(l, std::cos(theta), std::sin(theta), 0, row);
  const double p = row.p[LegendreRow::index(l, std::abs(m))];
  if (m > 0) return p * std::numbers::sqrt2 * std::cos(m * phi);
  if (m < 0) return p * std::numbers::sqrt2 * std::sin(-m * phi);
  return p;
}

double integrate(const ScalarField& f) {
  check_finite(f.values);
  const auto w = f.grid.weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) sum += w[k] * f.values[k];
  return sum;
}

ShCoeffs sh_analyze(const ScalarField& f) { return sh_analyze(f, f.grid.band_limit()); }

ShCoeffs sh_analyze(const ScalarField& f, int band_limit) {
  const Grid& g = f.grid;
  if (band_limit > g.band_limit() || band_limit < 0) throw ValidationError("band limit mismatch between grid and coefficients");
  const int L = band_limit;
  const int nt = g.n_theta(), np = g.n_phi();
  ShCoeffs out(L);
  LegendreRow row;
  std::vector<double> gm(2 * L + 1);
  for (int i = 0; i < nt; ++i) {
    const double* fi = f.values.data() + static_cast<std::size_t>(i) * np;
    for (int m = -L; m <= L; ++m) {
      double s = 0.0;
      for (int j = 0; j < np; ++j) s += fi[j] * g.trig(m, j);
      gm[m + L] = s * g.phi_weight();
    }
    legendre_row(L, g.cos_theta()[i], g.sin_theta()[i], 0, row);
    const double wi = g.theta_weights()[i];
    for (int l = 0; l <= L; ++l) {
      for (int m = -l; m <= l; ++m) {
        out.a[ShCoeffs::index(l, m)] += wi * row.p[LegendreRow::index(l, std::abs(m))] * gm[m + L];
      }
    }
  }
  return out;
}

FieldDerivatives sh_synthesize_derivatives(const ShCoeffs& c, const Grid& g, int order) {
  if (c.band_limit > g.band_limit()) throw ValidationError("band limit mismatch between grid and coefficients");
  const int L = c.band_limit;
  const int nt = g.n_theta(), np = g.n_phi();
  const std::size_t n = g.size();
  FieldDerivatives out;
  out.f.assign(n, 0.0);
  if (order >= 1) {
    out.f_t.assign(n, 0.0);
    out.f_p.assign(n, 0.0);
  }
  if (order >= 2) {
    out.f_tt.assign(n, 0.0);
    out.f_tp.assign(n, 0.0);
    out.f_pp.assign(n, 0.0);
  }
  LegendreRow row;
  RingSums rs;
  for (int i = 0; i < nt; ++i) {
    legendre_row(L, g.cos_theta()[i], g.sin_theta()[i], order, row);
    ring_sums(c, row, order, rs);
    const std::size_t base = static_cast<std::size_t>(i) * np;
    for (int m = -L; m <= L; ++m) {
      const double s0 = rs.f[m + L];
      const double s1 = order >= 1 ? rs.ft[m + L] : 0.0;
      const double s2 = order >= 2 ? rs.ftt[m + L] : 0.0;
      if (s0 == 0.0 && s1 == 0.0 && s2 == 0.0) continue;
      // d/dphi T_m = -m T_{-m} for m > 0 and |m| T_{|m|} for m < 0.
      const int mp = -m;
      const double dfac = (m > 0) ? -static_cast<double>(m) : static_cast<double>(-m);
      const double* tm = g.trig_row(m);
      const double* tmp = g.trig_row(mp);
      for (int j = 0; j < np; ++j) {
        out.f[base + j] += s0 * tm[j];
        if (order >= 1) {
          out.f_t[base + j] += s1 * tm[j];
          if (m != 0) out.f_p[base + j] += s0 * dfac * tmp[j];
        }
        if (order >= 2) {
          out.f_tt[base + j] += s2 * tm[j];
          if (m != 0) out.f_tp[base + j] += s1 * dfac * tmp[j];
          out.f_pp[base + j] -= static_cast<double>(m) * m * s0 * tm[j];
        }
      }
    }
  }
  return out;
}

ScalarField sh_synthesize(const ShCoeffs& c, const Grid& grid) {
  auto d = sh_synthesize_derivatives(c, grid, 0);
  return ScalarField(grid, std::move(d.f));
}

ShCoeffs sh_synthesize_adjoint(const Grid& g, int L, std::span<const double> v, std::span<const double> v_t,
                               std::span<const double> v_p) {
  if (L > g.band_limit()) throw ValidationError("band limit mismatch between grid and coefficients");
  const int nt = g.n_theta(), np = g.n_phi();
  const bool has_v = !v.empty(), has_t = !v_t.empty(), has_p = !v_p.empty();
  ShCoeffs out(L);
  LegendreRow row;
  std::vector<double> gv(2 * L + 1), gt(2 * L + 1), gp(2 * L + 1);
  for (int i = 0; i < nt; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * np;
    for (int m = -L; m <= L; ++m) {
      const double* tm = g.trig_row(m);
      const double* tmp = g.trig_row(-m);
      const double dfac = (m > 0) ? -static_cast<double>(m) : static_cast<double>(-m);
      double sv = 0.0, st = 0.0, sp = 0.0;
      for (int j = 0; j < np; ++j) {
        if (has_v) sv += v[base + j] * tm[j];
        if (has_t) st += v_t[base + j] * tm[j];
        if (has_p && m != 0) sp += v_p[base + j] * tmp[j];
      }
      gv[m + L] = sv;
      gt[m + L] = st;
      gp[m + L] = sp * dfac;
    }
    legendre_row(L, g.cos_theta()[i], g.sin_theta()[i], has_t ? 1 : 0, row);
    for (int l = 0; l <= L; ++l) {
      for (int m = -l; m <= l; ++m) {
        const std::size_t k = LegendreRow::index(l, std::abs(m));
        double acc = row.p[k] * (gv[m + L] + gp[m + L]);
        if (has_t) acc += row.dp[k] * gt[m + L];
        out.a[ShCoeffs::index(l, m)] += acc;
      }
    }
  }
  return out;
}

PointValue sh_evaluate(const ShCoeffs& c, double theta, double phi, int order) {
  thread_local LegendreRow row;
  const int L = c.band_limit;
  legendre_row(L, std::cos(theta), std::sin(theta), order, row);
  PointValue out;
  const double c1 = std::cos(phi), s1 = std::sin(phi);
  double cm = 1.0, sm = 0.0;  // cos(m phi), sin(m phi)
  for (int m = 0; m <= L; ++m) {
    if (m > 0) {
      const double cn = cm * c1 - sm * s1;
      sm = sm * c1 + cm * s1;
      cm = cn;
    }
    for (int sign : {1, -1}) {
      if (m == 0 && sign < 0) break;
      double t = 1.0, dt = 0.0;
      if (m > 0 && sign > 0) {
        t = std::numbers::sqrt2 * cm;
        dt = -std::numbers::sqrt2 * m * sm;
      } else if (sign < 0) {
        t = std::numbers::sqrt2 * sm;
        dt = std::numbers::sqrt2 * m * cm;
      }
      const int mm = sign * m;
      double s0 = 0.0, s1v = 0.0, s2 = 0.0;
      for (int l = m; l <= L; ++l) {
        const double a = c.a[ShCoeffs::index(l, mm)];
        if (a == 0.0) continue;
        const std::size_t k = LegendreRow::index(l, m);
        s0 += a * row.p[k];
        if (order >= 1) s1v += a * row.dp[k];
        if (order >= 2) s2 += a * row.d2p[k];
      }
      out.f += s0 * t;
      if (order >= 1) {
        out.f_t += s1v * t;
        out.f_p += s0 * dt;
      }
      if (order >= 2) {
        out.f_tt += s2 * t;
        out.f_tp += s1v * dt;
        out.f_pp -= static_cast<double>(m) * m * s0 * t;
      }
    }
  }
  return out;
}

ShCoeffs laplace_beltrami(const ShCoeffs& c) {
  ShCoeffs out(c.band_limit);
  for (int l = 0; l <= c.band_limit; ++l) {
    for (int m = -l; m <= l; ++m) out(l, m) = -static_cast<double>(l) * (l + 1) * c(l, m);
  }
  return out;
}

Partials partials(const ScalarField& f) {
  const ShCoeffs c = sh_analyze(f);
  auto d = sh_synthesize_derivatives(c, f.grid, 1);
  return {ScalarField(f.grid, std::move(d.f_t)), ScalarField(f.grid, std::move(d.f_p))};
}

double sup_norm_bound(const ShCoeffs& c) {
  double bound = 0.0;
  for (int l = 0; l <= c.band_limit; ++l) {
    double norm2 = 0.0;
    for (int m = -l; m <= l; ++m) norm2 += c(l, m) * c(l, m);
    bound += std::sqrt(norm2) * std::sqrt((2.0 * l + 1.0) / (4.0 * kPi));
  }
  return bound;
}

ShCoeffs random_band_limited(std::uint64_t seed, int l_min, int l_max, double amplitude, int band_limit,
                             bool allow_low_degrees) {
  if (l_min < 2 && !allow_low_degrees) throw ValidationError("l_min below 2 requires allow_low_degrees");
  if (l_min < 0 || l_min > l_max || l_max > band_limit) throw ValidationError("invalid degree range");
  if (!(amplitude >= 0.0)) throw ValidationError("amplitude must be non-negative");
  ShCoeffs out(band_limit);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  for (int l = l_min; l <= l_max; ++l) {
    for (int m = -l; m <= l; ++m) out(l, m) = uniform(rng);
  }
  const double bound = sup_norm_bound(out);
  const double scale = bound > 0.0 ? amplitude / bound : 0.0;
  for (double& a : out.a) a *= scale;
  return out;
}

Vec3 direction(double theta, double phi) {
  const double s = std::sin(theta);
  return {s * std::cos(phi), s * std::sin(phi), std::cos(theta)};
}

void angles(const Vec3& u, double& theta, double& phi) {
  const double r = u.norm();
  theta = std::acos(std::clamp(u.z() / r, -1.0, 1.0));
  phi = std::atan2(u.y(), u.x());
  if (phi < 0.0) phi += 2.0 * kPi;
}

}  // namespace curvflow::s2
