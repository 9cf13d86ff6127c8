#include "curvflow/mullins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "curvflow/error.hpp"
#include "curvflow/lbfgs.hpp"

namespace curvflow::mullins {

namespace {

constexpr int kSub = 4;
constexpr int kSubCount = kSub * kSub * kSub;
// Voxels whose centers lie within kBand voxels (radially) of the reference
// interface are supersampled; everything deeper is constant. The interface
// may move kMaxMove voxels before the classification could go stale.
constexpr double kBand = 3.0;
constexpr double kMaxMove = 1.0;
constexpr double kCollisionGap = 2.0;

// C^1 blend across one subcell; its slope is the hat function, whose integer
// translates sum to one.
double blend(double z) {
  if (z <= -1.0) return 0.0;
  if (z >= 1.0) return 1.0;
  return z < 0.0 ? 0.5 * (1.0 + z) * (1.0 + z) : 1.0 - 0.5 * (1.0 - z) * (1.0 - z);
}
double blend_slope(double z) { return std::max(0.0, 1.0 - std::abs(z)); }

Eigen::VectorXd to_vec(const s2::ShCoeffs& c) { return Eigen::Map<const Eigen::VectorXd>(c.a.data(), c.a.size()); }

s2::ShCoeffs to_coeffs(const double* v, int L) {
  s2::ShCoeffs c(L);
  std::copy(v, v + c.a.size(), c.a.begin());
  return c;
}

// Equiangular samples on S^2 (both poles included) with bilinear lookup.
class SphereSampler {
 public:
  struct Stencil {
    std::uint32_t i0, j0, j1;
    float ft, fp;
  };

  explicit SphereSampler(int L) : L_(L), nt_(std::max(64, 8 * L)), np_(2 * nt_) {
    const std::size_t tri = static_cast<std::size_t>(L + 1) * (L + 2) / 2;
    legendre_.resize((nt_ + 1) * tri);
    s2::LegendreRow row;
    for (int i = 0; i <= nt_; ++i) {
      const double t = std::numbers::pi * i / nt_;
      s2::legendre_row(L, std::cos(t), std::sin(t), 0, row);
      std::copy(row.p.begin(), row.p.begin() + tri, legendre_.begin() + i * tri);
    }
    trig_.resize(static_cast<std::size_t>(2 * L + 1) * np_);
    for (int m = -L; m <= L; ++m) {
      for (int j = 0; j < np_; ++j) {
        const double p = 2.0 * std::numbers::pi * j / np_;
        trig_[(m + L) * np_ + j] = m == 0 ? 1.0 : m > 0 ? std::sqrt(2.0) * std::cos(m * p) : std::sqrt(2.0) * std::sin(-m * p);
      }
    }
  }

  static const SphereSampler& cached(int L) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<SphereSampler>> cache;
    std::lock_guard lock(mu);
    auto& p = cache[L];
    if (!p) p = std::make_unique<SphereSampler>(L);
    return *p;
  }

  std::size_t size() const { return static_cast<std::size_t>(nt_ + 1) * np_; }

  std::vector<double> synthesize(const double* c) const {
    const std::size_t tri = static_cast<std::size_t>(L_ + 1) * (L_ + 2) / 2;
    std::vector<double> out(size(), 0.0);
    std::vector<double> am(2 * L_ + 1);
    for (int i = 0; i <= nt_; ++i) {
      const double* P = legendre_.data() + i * tri;
      for (int m = -L_; m <= L_; ++m) {
        double s = 0.0;
        for (int l = std::abs(m); l <= L_; ++l) s += c[l * l + l + m] * P[s2::LegendreRow::index(l, std::abs(m))];
        am[m + L_] = s;
      }
      double* row = out.data() + static_cast<std::size_t>(i) * np_;
      for (int m = -L_; m <= L_; ++m) {
        const double a = am[m + L_];
        if (a == 0.0) continue;
        const double* T = trig_.data() + (m + L_) * np_;
        for (int j = 0; j < np_; ++j) row[j] += a * T[j];
      }
    }
    return out;
  }

  // out += transpose of synthesize applied to q.
  void adjoint(const std::vector<double>& q, double* out) const {
    const std::size_t tri = static_cast<std::size_t>(L_ + 1) * (L_ + 2) / 2;
    for (int i = 0; i <= nt_; ++i) {
      const double* row = q.data() + static_cast<std::size_t>(i) * np_;
      const double* P = legendre_.data() + i * tri;
      for (int m = -L_; m <= L_; ++m) {
        const double* T = trig_.data() + (m + L_) * np_;
        double b = 0.0;
        for (int j = 0; j < np_; ++j) b += row[j] * T[j];
        if (b == 0.0) continue;
        for (int l = std::abs(m); l <= L_; ++l) out[l * l + l + m] += b * P[s2::LegendreRow::index(l, std::abs(m))];
      }
    }
  }

  Stencil locate(const Vec3& u) const {
    const double t = std::acos(std::clamp(u.z(), -1.0, 1.0));
    double p = std::atan2(u.y(), u.x());
    if (p < 0.0) p += 2.0 * std::numbers::pi;
    const double ti = t / std::numbers::pi * nt_;
    const int i0 = std::min(static_cast<int>(ti), nt_ - 1);
    const double tj = p / (2.0 * std::numbers::pi) * np_;
    const int j = static_cast<int>(tj);
    Stencil s;
    s.i0 = static_cast<std::uint32_t>(i0);
    s.j0 = static_cast<std::uint32_t>(j % np_);
    s.j1 = static_cast<std::uint32_t>((j + 1) % np_);
    s.ft = static_cast<float>(ti - i0);
    s.fp = static_cast<float>(tj - j);
    return s;
  }

  double interpolate(const std::vector<double>& v, const Stencil& s) const {
    const double* a = v.data() + static_cast<std::size_t>(s.i0) * np_;
    const double* b = a + np_;
    const double ft = s.ft, fp = s.fp;
    return (1.0 - ft) * ((1.0 - fp) * a[s.j0] + fp * a[s.j1]) + ft * ((1.0 - fp) * b[s.j0] + fp * b[s.j1]);
  }

  void scatter(std::vector<double>& q, const Stencil& s, double x) const {
    double* a = q.data() + static_cast<std::size_t>(s.i0) * np_;
    double* b = a + np_;
    const double ft = s.ft, fp = s.fp;
    a[s.j0] += (1.0 - ft) * (1.0 - fp) * x;
    a[s.j1] += (1.0 - ft) * fp * x;
    b[s.j0] += ft * (1.0 - fp) * x;
    b[s.j1] += ft * fp * x;
  }

 private:
  int L_, nt_, np_;
  std::vector<double> legendre_, trig_;
};

struct Subcell {
  double r;
  SphereSampler::Stencil st;
};

struct ComponentPlan {
  Vec3 center = Vec3::Zero();
  std::vector<std::uint32_t> band;
  std::vector<Subcell> cells;  // kSubCount consecutive entries per band voxel
  std::vector<std::uint32_t> interior;
  std::vector<double> rho_ref;
};

struct RasterPlan {
  TorusGrid grid;
  int L = 0;
  const SphereSampler* sampler = nullptr;
  std::vector<ComponentPlan> comps;

  std::size_t interior_count() const {
    std::size_t n = 0;
    for (const auto& c : comps) n += c.interior.size();
    return n;
  }
};

void check_domain(const Vec3& c, double rho_max, const TorusGrid& g) {
  const double margin = 2.0 * g.spacing();
  for (int a = 0; a < 3; ++a) {
    if (c[a] - rho_max < margin || c[a] + rho_max > g.R - margin) throw ValidationError("geometry exceeds domain");
  }
}

RasterPlan build_plan(const std::vector<RadialSurface>& comps, const TorusGrid& grid, int L) {
  RasterPlan plan;
  plan.grid = grid;
  plan.L = L;
  plan.sampler = &SphereSampler::cached(L);
  const SphereSampler& S = *plan.sampler;
  const double dx = grid.spacing();
  const int n = grid.n;
  for (const auto& s : comps) {
    ComponentPlan cp;
    cp.center = s.center;
    cp.rho_ref = S.synthesize(s.radius_coeffs().a.data());
    const auto [lo, hi] = std::minmax_element(cp.rho_ref.begin(), cp.rho_ref.end());
    if (!(*lo > 0.0)) throw ValidationError("star-shapedness violation");
    check_domain(s.center, *hi, grid);
    const double reach = (kBand + 1.0) * dx;
    int lo_idx[3], hi_idx[3];
    for (int a = 0; a < 3; ++a) {
      lo_idx[a] = static_cast<int>(std::floor((s.center[a] - *hi - reach) / dx));
      hi_idx[a] = static_cast<int>(std::floor((s.center[a] + *hi + reach) / dx));
    }
    auto wrap = [n](int i) { return static_cast<int>(((i % n) + n) % n); };
    for (int i = lo_idx[0]; i <= hi_idx[0]; ++i) {
      for (int j = lo_idx[1]; j <= hi_idx[1]; ++j) {
        for (int k = lo_idx[2]; k <= hi_idx[2]; ++k) {
          const Vec3 d = grid.center(i, j, k) - s.center;
          const double r = d.norm();
          if (r > *hi + reach) continue;
          const auto idx = static_cast<std::uint32_t>(grid.index(wrap(i), wrap(j), wrap(k)));
          if (r < *lo - reach) {
            cp.interior.push_back(idx);
            continue;
          }
          const Vec3 u = r > 0.0 ? Vec3(d / r) : Vec3::UnitZ();
          const double off = r - S.interpolate(cp.rho_ref, S.locate(u));
          if (off < -kBand * dx) {
            cp.interior.push_back(idx);
          } else if (off <= kBand * dx) {
            cp.band.push_back(idx);
            for (int a = 0; a < kSub; ++a) {
              for (int b = 0; b < kSub; ++b) {
                for (int c = 0; c < kSub; ++c) {
                  const Vec3 q = d + dx * (Vec3(a + 0.5, b + 0.5, c + 0.5) / kSub - Vec3::Constant(0.5));
                  const double rq = q.norm();
                  cp.cells.push_back({rq, S.locate(rq > 0.0 ? Vec3(q / rq) : Vec3::UnitZ())});
                }
              }
            }
          }
        }
      }
    }
    plan.comps.push_back(std::move(cp));
  }
  return plan;
}

// Band occupancies of a configuration on a plan, with the shift solved so
// that the occupancy mass equals `volume`.
struct RasterEval {
  double shift = 0.0;
  std::vector<std::vector<double>> base;   // rho(u_s) - r_s
  std::vector<std::vector<double>> chi;    // per band voxel
  std::vector<std::vector<double>> slope;  // d blend / d rho per subcell
};

void rasterize_band(const RasterPlan& plan, const std::vector<std::vector<double>>& rho, double volume, RasterEval& out) {
  const SphereSampler& S = *plan.sampler;
  const double dx = plan.grid.spacing(), w = dx / kSub, dv = plan.grid.cell_volume();
  const std::size_t nc = plan.comps.size();
  out.base.resize(nc);
  out.chi.resize(nc);
  out.slope.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& cells = plan.comps[c].cells;
    auto& base = out.base[c];
    base.resize(cells.size());
    for (std::size_t s = 0; s < cells.size(); ++s) base[s] = S.interpolate(rho[c], cells[s].st) - cells[s].r;
  }
  const double interior = static_cast<double>(plan.interior_count());
  auto mass_at = [&](double eta, double& dmass) {
    double m = 0.0, dm = 0.0;
    for (const auto& base : out.base) {
      for (double b : base) {
        const double z = (b + eta) / w;
        m += blend(z);
        dm += blend_slope(z);
      }
    }
    dmass = dm / (kSubCount * w) * dv;
    return (interior + m / kSubCount) * dv;
  };

  // Safeguarded Newton on the monotone mass function.
  double eta = 0.0, lo = -std::numeric_limits<double>::infinity(), hi = -lo, g = 0.0;
  for (int it = 0; it < 100; ++it) {
    double dg = 0.0;
    g = mass_at(eta, dg) - volume;
    if (std::abs(g) <= 1e-14 * volume) break;
    (g < 0.0 ? lo : hi) = eta;
    double next = dg > 0.0 ? eta - g / dg : std::numeric_limits<double>::quiet_NaN();
    if (!(next > lo && next < hi)) {
      next = (std::isfinite(lo) && std::isfinite(hi)) ? 0.5 * (lo + hi) : eta + (g < 0.0 ? dx : -dx);
    }
    if (next == eta) break;
    eta = next;
  }
  if (std::abs(g) > 1e-10 * std::max(volume, dv)) throw NumericalError("mass correction failed");
  out.shift = eta;

  for (std::size_t c = 0; c < nc; ++c) {
    const auto& base = out.base[c];
    auto& chi = out.chi[c];
    auto& slope = out.slope[c];
    chi.assign(plan.comps[c].band.size(), 0.0);
    slope.resize(base.size());
    for (std::size_t v = 0; v < chi.size(); ++v) {
      double sum = 0.0;
      for (int s = 0; s < kSubCount; ++s) {
        const std::size_t k = v * kSubCount + s;
        const double z = (base[k] + eta) / w;
        sum += blend(z);
        slope[k] = blend_slope(z) / w;
      }
      chi[v] = sum / kSubCount;
    }
  }
}

Field assemble(const RasterPlan& plan, const RasterEval& r) {
  Field occ(plan.grid.size(), 0.0);
  for (std::size_t c = 0; c < plan.comps.size(); ++c) {
    for (auto v : plan.comps[c].interior) occ[v] += 1.0;
    const auto& band = plan.comps[c].band;
    for (std::size_t k = 0; k < band.size(); ++k) occ[band[k]] += r.chi[c][k];
  }
  for (double x : occ) {
    if (x > 1.0 + 1e-12) throw ValidationError("components overlap");
  }
  return occ;
}

double total_volume(const std::vector<RadialSurface>& comps) {
  double v = 0.0;
  for (const auto& s : comps) v += surface::volume(s);
  return v;
}

std::vector<RadialSurface> at_band_limit(const std::vector<RadialSurface>& comps, int L) {
  std::vector<RadialSurface> out = comps;
  for (auto& s : out) {
    if (s.band_limit() != L) s.w = s.w.resized(L);
  }
  return out;
}

// Smallest radial gap from one component's grid nodes to another component.
double min_interface_gap(const std::vector<RadialSurface>& comps) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const s2::Grid& grid = s2::Grid::cached(comps[i].band_limit());
    const auto rho = comps[i].radius_values(grid);
    for (std::size_t j = 0; j < comps.size(); ++j) {
      if (j == i) continue;
      for (int a = 0; a < grid.n_theta(); ++a) {
        for (int b = 0; b < grid.n_phi(); ++b) {
          const Vec3 p = comps[i].center + rho[a * grid.n_phi() + b] * grid.node(a, b);
          const Vec3 d = p - comps[j].center;
          const double r = d.norm();
          gap = std::min(gap, r > 0.0 ? r - comps[j].radius_along(d / r) : -1.0);
        }
      }
    }
  }
  return gap;
}

double deficit_of(double perimeter, double volume, std::size_t count) {
  if (count == 0) return 0.0;
  return perimeter - surface::kUnitSpherePerimeter * std::cbrt(static_cast<double>(count)) *
                         std::pow(volume / surface::kUnitBallVolume, 2.0 / 3.0);
}

// Phi(y) = P(y) - P(E) + (1/2) sum U f dv with f = chi(y) - chi_E and
// -Laplace U = f / h, over the stacked radial coefficients of all components.
class MsObjective {
 public:
  MsObjective(const RasterPlan& plan, const RasterEval& ref, double perimeter_e, double h, double volume)
      : plan_(plan), ref_(ref), grid_(s2::Grid::cached(plan.L)), perimeter_e_(perimeter_e), h_(h), volume_(volume) {}

  struct Eval {
    double value = 0, perimeter = 0, volume = 0, e2 = 0, displacement = 0;
    RasterEval raster;
    Field f, U;
    Eigen::VectorXd grad_phi, grad_v;
  };

  std::size_t block() const { return s2::ShCoeffs::count(plan_.L); }

  bool evaluate(const Eigen::VectorXd& y, Eval& e) const {
    const int L = plan_.L;
    const std::size_t K = block(), nc = plan_.comps.size();
    const SphereSampler& S = *plan_.sampler;
    const double dx = plan_.grid.spacing(), dv = plan_.grid.cell_volume();
    e.grad_phi.setZero(y.size());
    e.grad_v.setZero(y.size());
    e.perimeter = e.volume = e.displacement = 0.0;

    const auto w = grid_.weights();
    const std::size_t N = grid_.size();
    const int nphi = grid_.n_phi();
    std::vector<double> vr(N), vt(N), vp(N), vv(N);
    std::vector<std::vector<double>> rho(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      const double* yc = y.data() + c * K;
      const auto fd = s2::sh_synthesize_derivatives(to_coeffs(yc, L), grid_, 1);
      for (std::size_t k = 0; k < N; ++k) {
        const double r = fd.f[k];
        if (!(r > 0.0)) return false;
        const double s = grid_.sin_theta()[k / nphi];
        const double rt = fd.f_t[k], rp = fd.f_p[k] / s;
        const double sq = std::sqrt(r * r + rt * rt + rp * rp);
        e.perimeter += w[k] * r * sq;
        e.volume += w[k] * r * r * r / 3.0;
        vr[k] = w[k] * (sq + r * r / sq);
        vt[k] = w[k] * r * rt / sq;
        vp[k] = w[k] * r * rp / (sq * s);
        vv[k] = w[k] * r * r;
      }
      e.grad_phi.segment(c * K, K) = to_vec(s2::sh_synthesize_adjoint(grid_, L, vr, vt, vp));
      e.grad_v.segment(c * K, K) = to_vec(s2::sh_synthesize_adjoint(grid_, L, vv, {}, {}));
      rho[c] = S.synthesize(yc);
      const auto& ref = plan_.comps[c].rho_ref;
      for (std::size_t k = 0; k < ref.size(); ++k) e.displacement = std::max(e.displacement, std::abs(rho[c][k] - ref[k]));
    }
    if (e.displacement > kMaxMove * dx) return false;

    rasterize_band(plan_, rho, e.volume, e.raster);
    e.f.assign(plan_.grid.size(), 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& band = plan_.comps[c].band;
      for (std::size_t k = 0; k < band.size(); ++k) e.f[band[k]] += e.raster.chi[c][k] - ref_.chi[c][k];
    }
    e.U = torus::inverse_laplacian(plan_.grid, e.f, 1.0 / h_);
    double e2 = 0.0;
    for (std::size_t k = 0; k < e.f.size(); ++k) e2 += e.U[k] * e.f[k];
    e.e2 = 0.5 * e2 * dv;
    e.value = e.perimeter - perimeter_e_ + e.e2;

    // Occupancy sensitivities; the shift's response to the volume constraint
    // subtracts the slope-weighted mean of U and adds it back along grad V.
    const double m0 = dv / kSubCount;
    double A = 0.0, M = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& band = plan_.comps[c].band;
      const auto& slope = e.raster.slope[c];
      for (std::size_t s = 0; s < slope.size(); ++s) {
        A += e.U[band[s / kSubCount]] * slope[s];
        M += slope[s];
      }
    }
    const double ubar = M > 0.0 ? A / M : 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& cp = plan_.comps[c];
      const auto& slope = e.raster.slope[c];
      std::vector<double> q(S.size(), 0.0);
      for (std::size_t s = 0; s < slope.size(); ++s) {
        if (slope[s] == 0.0) continue;
        S.scatter(q, cp.cells[s].st, (e.U[cp.band[s / kSubCount]] - ubar) * slope[s] * m0);
      }
      Eigen::VectorXd g = Eigen::VectorXd::Zero(K);
      S.adjoint(q, g.data());
      e.grad_phi.segment(c * K, K) += g;
    }
    e.grad_phi += ubar * e.grad_v;
    return true;
  }

  double volume_of(const Eigen::VectorXd& c) const {
    const std::size_t K = block();
    const auto w = grid_.weights();
    double v = 0.0;
    for (std::size_t k = 0; k < plan_.comps.size(); ++k) {
      const auto r = s2::sh_synthesize(to_coeffs(c.data() + k * K, plan_.L), grid_).values;
      for (std::size_t n = 0; n < r.size(); ++n) {
        if (!(r[n] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        v += w[n] * r[n] * r[n] * r[n];
      }
    }
    return v / 3.0;
  }

  double dilation(const Eigen::VectorXd& c) const { return std::cbrt(volume_ / volume_of(c)); }

  double operator()(const Eigen::VectorXd& c, Eigen::VectorXd& grad) const {
    const double alpha = dilation(c);
    if (!std::isfinite(alpha)) return std::numeric_limits<double>::infinity();
    Eval e;
    if (!evaluate(alpha * c, e)) return std::numeric_limits<double>::infinity();
    const double lambda = (alpha * c).dot(e.grad_phi) / (3.0 * e.volume);
    grad = alpha * (e.grad_phi - lambda * e.grad_v);
    return e.value;
  }

 private:
  const RasterPlan& plan_;
  const RasterEval& ref_;
  const s2::Grid& grid_;
  double perimeter_e_, h_, volume_;
};

std::vector<std::vector<double>> reference_samples(const RasterPlan& plan) {
  std::vector<std::vector<double>> rho;
  for (const auto& c : plan.comps) rho.push_back(c.rho_ref);
  return rho;
}

int common_band_limit(const std::vector<RadialSurface>& comps, int requested) {
  if (requested > 0) return requested;
  int L = s2::Grid::kMinBandLimit;
  for (const auto& s : comps) L = std::max(L, s.band_limit());
  return L;
}

}  // namespace

SparseChi SparseChi::from(const ChiSet& c) {
  SparseChi s;
  for (std::size_t i = 0; i < c.occupancy.size(); ++i) {
    if (c.occupancy[i] != 0.0) {
      s.index.push_back(static_cast<std::uint32_t>(i));
      s.value.push_back(c.occupancy[i]);
    }
  }
  return s;
}

double SparseChi::l1_distance(const SparseChi& o) const {
  double d = 0.0;
  std::size_t a = 0, b = 0;
  while (a < index.size() || b < o.index.size()) {
    if (b == o.index.size() || (a < index.size() && index[a] < o.index[b])) {
      d += std::abs(value[a++]);
    } else if (a == index.size() || o.index[b] < index[a]) {
      d += std::abs(o.value[b++]);
    } else {
      d += std::abs(value[a++] - o.value[b++]);
    }
  }
  return d;
}

ChiSet rasterize(const std::vector<RadialSurface>& components, const TorusGrid& grid) {
  grid.validate();
  ChiSet out;
  out.grid = grid;
  if (components.empty()) {
    out.occupancy.assign(grid.size(), 0.0);
    return out;
  }
  const int L = common_band_limit(components, 0);
  const auto comps = at_band_limit(components, L);
  if (comps.size() > 1 && min_interface_gap(comps) <= 0.0) throw ValidationError("components overlap");
  const RasterPlan plan = build_plan(comps, grid, L);
  RasterEval r;
  out.volume = total_volume(comps);
  rasterize_band(plan, reference_samples(plan), out.volume, r);
  out.shift = r.shift;
  out.occupancy = assemble(plan, r);
  return out;
}

ChiSet rasterize(const surface::BallUnion& balls, const TorusGrid& grid) {
  std::vector<RadialSurface> comps;
  for (const auto& c : balls.centers) comps.push_back(RadialSurface::ball(s2::Grid::kMinBandLimit, balls.radius, c));
  return rasterize(comps, grid);
}

double symmetric_difference(const ChiSet& a, const ChiSet& b) {
  if (!(a.grid == b.grid)) throw ValidationError("grid mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.occupancy.size(); ++i) d += std::abs(a.occupancy[i] - b.occupancy[i]);
  return d * a.grid.cell_volume();
}

MsDissipation ms_dissipation(const ChiSet& F, const ChiSet& E, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("time step h must be positive");
  if (!(F.grid == E.grid)) throw ValidationError("grid mismatch");
  const double mf = F.mass(), me = E.mass();
  if (std::abs(mf - me) > 1e-8 * std::max(std::abs(mf), std::abs(me))) throw ValidationError("mass mismatch");
  Field rhs(F.occupancy.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = (F.occupancy[i] - E.occupancy[i]) / h;
  MsDissipation d;
  d.U.grid = F.grid;
  d.U.U = torus::inverse_laplacian(F.grid, rhs);
  d.U.residual = torus::poisson_residual(F.grid, d.U.U, rhs);
  d.D = torus::dirichlet_energy(F.grid, d.U.U);
  return d;
}

void MsConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("time step h must be positive");
  grid.validate();
  if (band_limit != 0 && (band_limit < s2::Grid::kMinBandLimit || band_limit > s2::Grid::kMaxBandLimit)) {
    throw ValidationError("band limit out of range");
  }
  if (!(grad_tol > 0.0)) throw ValidationError("tolerances must be positive");
  if (max_iterations < 1) throw ValidationError("max_iterations must be at least 1");
  if (!(target_volume >= 0.0)) throw ValidationError("target volume must be non-negative");
  if (!(halt_cmc >= 0.0)) throw ValidationError("halt_cmc must be non-negative");
}

MsStepResult ms_mm_step(const std::vector<RadialSurface>& E_in, const MsConfig& config) {
  config.validate();
  if (E_in.empty()) throw ValidationError("empty interface state");
  const int L = common_band_limit(E_in, config.band_limit);
  const auto E = at_band_limit(E_in, L);
  const TorusGrid& grid = config.grid;
  if (E.size() > 1 && min_interface_gap(E) < kCollisionGap * grid.spacing()) throw NumericalError("component collision");

  const RasterPlan plan = build_plan(E, grid, L);
  const double volume_e = total_volume(E);
  const double volume = config.target_volume > 0.0 ? config.target_volume : volume_e;
  RasterEval ref;
  rasterize_band(plan, reference_samples(plan), volume_e, ref);
  double perimeter_e = 0.0;
  for (const auto& s : E) perimeter_e += surface::perimeter(s);

  const MsObjective obj(plan, ref, perimeter_e, config.h, volume);
  const std::size_t K = obj.block();
  Eigen::VectorXd c(K * E.size());
  for (std::size_t k = 0; k < E.size(); ++k) c.segment(k * K, K) = to_vec(E[k].radius_coeffs());

  LbfgsOptions opt;
  opt.grad_tol = config.grad_tol;
  opt.max_iterations = config.max_iterations;
  opt.initial_scale = config.h;
  opt.f_noise = 1e-13 * (1.0 + perimeter_e);
  const LbfgsResult res = lbfgs_minimize(obj, c, opt);
  if (!res.converged && res.grad_norm > 1e3 * config.grad_tol) {
    throw NumericalError("optimizer did not converge: " + res.status);
  }
  const double alpha = obj.dilation(res.x);
  if (!std::isfinite(alpha)) throw NumericalError("star-shapedness lost");
  const Eigen::VectorXd y = alpha * res.x;
  MsObjective::Eval e;
  if (!obj.evaluate(y, e)) throw NumericalError("step left the rasterization band");

  MsStepResult out;
  for (std::size_t k = 0; k < E.size(); ++k) {
    out.components.push_back(RadialSurface::from_radius(to_coeffs(y.data() + k * K, L), E[k].center));
  }
  if (E.size() > 1 && min_interface_gap(out.components) < kCollisionGap * grid.spacing()) {
    throw NumericalError("component collision");
  }
  out.chi.grid = grid;
  out.chi.volume = e.volume;
  out.chi.shift = e.raster.shift;
  out.chi.occupancy = assemble(plan, e.raster);

  auto& d = out.diag;
  d.iterations = res.iterations;
  d.converged = res.converged;
  d.lambda = y.dot(e.grad_phi) / (3.0 * e.volume);
  d.el_residual = (e.grad_phi - d.lambda * e.grad_v).norm();
  d.perimeter_before = perimeter_e;
  d.perimeter_after = e.perimeter;
  d.displacement = e.displacement;
  d.dissipation = torus::dirichlet_energy(grid, e.U);
  d.hminus1_sq = torus::hminus1_norm_sq(grid, e.f);
  d.mass = out.chi.mass();
  d.mass_drift = std::abs(d.mass - volume) / volume;
  Field rhs = e.f;
  for (double& x : rhs) x /= config.h;
  d.poisson_residual = torus::poisson_residual(grid, e.U, rhs);
  if (d.perimeter_after + 0.5 * config.h * d.dissipation > perimeter_e + 1e-8 * (1.0 + perimeter_e)) {
    throw NumericalError("energy comparison violated");
  }
  out.U.grid = grid;
  out.U.U = std::move(e.U);
  out.U.residual = d.poisson_residual;
  return out;
}

MsTrace ms_run(const std::vector<RadialSurface>& initial, const MsConfig& config, double T, const MsObserver& observer) {
  config.validate();
  if (!(T >= config.h)) throw ValidationError("T must be at least h");
  if (initial.empty()) throw ValidationError("empty interface state");
  MsTrace trace;
  trace.h = config.h;
  trace.grid = config.grid;
  const int L = common_band_limit(initial, config.band_limit);

  auto push = [&](double t, std::vector<RadialSurface> comps, const ChiSet& chi, const MsStepDiag& d) {
    MsTraceEntry e;
    e.t = t;
    e.diag = d;
    e.chi = SparseChi::from(chi);
    e.mass = chi.mass();
    for (const auto& s : comps) {
      const auto f = surface::curvature_fields(s);
      const auto rep = surface::report(s, f);
      e.perimeter += rep.perimeter;
      e.volume += rep.volume;
      e.delta_cmc = std::max(e.delta_cmc, surface::cmc_deficit(s, f, rep).deficit);
    }
    e.deficit = deficit_of(e.perimeter, e.volume, comps.size());
    e.components = std::move(comps);
    trace.entries.push_back(std::move(e));
    if (observer) observer(trace.entries.back());
  };

  const auto start = at_band_limit(initial, L);
  const ChiSet chi0 = rasterize(start, config.grid);
  MsStepDiag d0;
  d0.mass = chi0.mass();
  push(0.0, start, chi0, d0);
  trace.entries[0].diag.perimeter_before = trace.entries[0].diag.perimeter_after = trace.entries[0].perimeter;

  MsConfig cfg = config;
  cfg.band_limit = L;
  cfg.target_volume = config.target_volume > 0.0 ? config.target_volume : trace.entries[0].volume;
  const int steps = static_cast<int>(std::floor(T / config.h + 1e-9));
  for (int k = 1; k <= steps; ++k) {
    MsStepResult r = ms_mm_step(trace.entries.back().components, cfg);
    push(k * config.h, std::move(r.components), r.chi, r.diag);
    if (config.halt_cmc > 0.0 && trace.entries.back().delta_cmc < config.halt_cmc) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

MsLedger ms_ledger(const MsTrace& trace) {
  if (trace.entries.empty()) throw ValidationError("empty trace");
  MsLedger L;
  const auto& e0 = trace.entries.front();
  const double v0 = e0.volume;
  L.max_comparison_slack = L.max_perimeter_increase = -std::numeric_limits<double>::infinity();
  for (const auto& e : trace.entries) {
    if (v0 > 0.0) L.max_mass_drift = std::max(L.max_mass_drift, std::abs(e.mass - v0) / v0);
  }
  for (std::size_t k = 1; k < trace.entries.size(); ++k) {
    const auto& a = trace.entries[k - 1];
    const auto& b = trace.entries[k];
    const double hd = 0.5 * trace.h * b.diag.dissipation;
    const double slack = b.perimeter + hd - a.perimeter;
    L.comparison_slack.push_back(slack);
    L.max_comparison_slack = std::max(L.max_comparison_slack, slack);
    L.max_perimeter_increase = std::max(L.max_perimeter_increase, b.perimeter - a.perimeter);
    L.half_h_dissipation += hd;
    const double h2d = trace.h * trace.h * b.diag.dissipation;
    const double err = std::abs(b.diag.hminus1_sq - h2d);
    if (err > 0.0) L.max_identity_error = std::max(L.max_identity_error, err / std::max(h2d, b.diag.hminus1_sq));
    L.max_poisson_residual = std::max(L.max_poisson_residual, b.diag.poisson_residual);
    L.max_el_residual = std::max(L.max_el_residual, b.diag.el_residual);
  }
  if (trace.entries.size() < 2) L.max_comparison_slack = L.max_perimeter_increase = 0.0;
  L.perimeter_drop = e0.perimeter - trace.entries.back().perimeter;
  L.telescoping_slack = L.half_h_dissipation - L.perimeter_drop;
  return L;
}

vpmcf::RateFit ms_fit_rate(const MsTrace& trace) {
  std::vector<double> t, y;
  for (std::size_t k = trace.entries.size() / 2; k < trace.entries.size(); ++k) {
    const auto& e = trace.entries[k];
    if (e.deficit > 1e-12) {
      t.push_back(e.t);
      y.push_back(e.deficit);
    }
  }
  if (t.size() < 2) throw ValidationError("observable non-positive on window");
  return vpmcf::fit_rate(t, y);
}

HolderReport holder_continuity_report(const MsTrace& trace) {
  if (trace.entries.size() < 4) throw ValidationError("trace too short");
  HolderReport r;
  const double dv = trace.grid.cell_volume();
  const double tol = 1e-9 * trace.h;
  for (std::size_t i = 0; i < trace.entries.size(); ++i) {
    for (std::size_t j = i + 1; j < trace.entries.size(); ++j) {
      const double dt = trace.entries[j].t - trace.entries[i].t;
      if (dt < trace.h - tol) continue;
      if (dt > 1.0 + tol) break;
      const double q = trace.entries[i].chi.l1_distance(trace.entries[j].chi) * dv / std::pow(dt, 0.25);
      ++r.pairs;
      if (q > r.constant) {
        r.constant = q;
        r.s = trace.entries[i].t;
        r.t = trace.entries[j].t;
      }
    }
  }
  return r;
}

double area_in_ball(const RadialSurface& s, const Vec3& x, double radius) {
  const Vec3 u0 = (x - s.center).normalized();
  const Vec3 e1 = u0.unitOrthogonal(), e2 = u0.cross(e1);
  const auto rho = s.radius_coeffs();
  auto dir = [&](double beta, double psi) {
    return Vec3(std::cos(beta) * u0 + std::sin(beta) * (std::cos(psi) * e1 + std::sin(psi) * e2));
  };
  auto gap = [&](double beta, double psi) {
    const Vec3 u = dir(beta, psi);
    return (s.center + s.radius_along(u) * u - x).norm() - radius;
  };
  // Gauss-Legendre nodes in [-1, 1] from a 24-point grid.
  const s2::Grid& gl = s2::Grid::cached(11);
  const auto nodes = gl.cos_theta(), weights = gl.theta_weights();
  constexpr int kPsi = 64;
  double area = 0.0;
  for (int j = 0; j < kPsi; ++j) {
    const double psi = 2.0 * std::numbers::pi * j / kPsi;
    double lo = 0.0, hi = 0.0;
    const double step = 0.02;
    while (hi < std::numbers::pi && gap(hi, psi) <= 0.0) {
      lo = hi;
      hi = std::min(std::numbers::pi, hi + step);
    }
    double bmax = std::numbers::pi;
    if (gap(hi, psi) > 0.0) {
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid, psi) > 0.0 ? hi : lo) = mid;
      }
      bmax = 0.5 * (lo + hi);
    }
    double ring = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double beta = 0.5 * bmax * (nodes[k] + 1.0);
      const Vec3 u = dir(beta, psi);
      double th = 0.0, ph = 0.0;
      s2::angles(u, th, ph);
      const auto pv = s2::sh_evaluate(rho, th, ph, 1);
      const double st = std::sin(th);
      const double rp = st > 0.0 ? pv.f_p / st : 0.0;
      ring += weights[k] * pv.f * std::sqrt(pv.f * pv.f + pv.f_t * pv.f_t + rp * rp) * std::sin(beta);
    }
    area += 0.5 * bmax * ring;
  }
  return area * 2.0 * std::numbers::pi / kPsi;
}

DensityReport density_estimate_report(const std::vector<RadialSurface>& components, const std::vector<double>& radii) {
  if (components.empty()) throw ValidationError("empty interface state");
  for (double r : radii) {
    if (!(r > 0.0 && r < 1.0)) throw ValidationError("density radius must lie in (0, 1)");
  }
  constexpr int kPoints = 64;
  const std::size_t nc = components.size();
  DensityReport rep;
  rep.radii = radii;
  rep.min.assign(radii.size(), std::numeric_limits<double>::infinity());
  rep.max.assign(radii.size(), 0.0);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int p = 0; p < kPoints; ++p) {
    const std::size_t c = p % nc;
    const int q = p / static_cast<int>(nc);
    const int count = (kPoints - static_cast<int>(c) + static_cast<int>(nc) - 1) / static_cast<int>(nc);
    const double z = 1.0 - (2.0 * q + 1.0) / count;
    const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 u(rr * std::cos(golden * q), rr * std::sin(golden * q), z);
    const auto& s = components[c];
    const Vec3 x = s.center + s.radius_along(u) * u;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      const double ratio = area_in_ball(s, x, radii[k]) / (radii[k] * radii[k]);
      rep.min[k] = std::min(rep.min[k], ratio);
      rep.max[k] = std::max(rep.max[k], ratio);
    }
  }
  rep.overall_min = radii.empty() ? 0.0 : *std::min_element(rep.min.begin(), rep.min.end());
  rep.overall_max = radii.empty() ? 0.0 : *std::max_element(rep.max.begin(), rep.max.end());
  return rep;
}

AlexandrovRecord ms_alexandrov_check(const std::vector<RadialSurface>& F, const Potential& U) {
  const auto balls = surface::detect_ball_configuration(F);
  AlexandrovRecord r;
  r.count = balls.count();
  double P = 0.0, V = 0.0;
  for (const auto& s : F) {
    P += surface::perimeter(s);
    V += surface::volume(s);
  }
  r.deficit = deficit_of(P, V, static_cast<std::size_t>(r.count));
  r.energy = torus::dirichlet_energy(U.grid, U.U);
  r.ratio = r.energy > 0.0 ? r.deficit / r.energy : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace curvflow::mullins
