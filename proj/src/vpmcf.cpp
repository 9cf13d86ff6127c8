#include "curvflow/vpmcf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "curvflow/distance.hpp"
#include "curvflow/error.hpp"
#include "curvflow/lbfgs.hpp"
#include "curvflow/parallel.hpp"

namespace curvflow::vpmcf {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCmcHalt = 1e-7;

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = std::legendre(n, z), pm = std::legendre(n - 1, z);
      dp = n * (z * p - pm) / (z * z - 1.0);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    dp = n * (z * std::legendre(n, z) - std::legendre(n - 1, z)) / (z * z - 1.0);
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

Eigen::VectorXd to_vec(const s2::ShCoeffs& c) { return Eigen::Map<const Eigen::VectorXd>(c.a.data(), c.a.size()); }

s2::ShCoeffs to_coeffs(const Eigen::VectorXd& v, int L) {
  s2::ShCoeffs c(L);
  Eigen::Map<Eigen::VectorXd>(c.a.data(), c.a.size()) = v;
  return c;
}

double quadrature_volume(const s2::Grid& g, const std::vector<double>& rho) {
  const auto w = g.weights();
  double v = 0.0;
  for (std::size_t n = 0; n < rho.size(); ++n) v += w[n] * rho[n] * rho[n] * rho[n];
  return v / 3.0;
}

// Distance to dE along each grid ray, frozen for one step. Within the band
// rho_E - delta <= s <= rho_E + delta the signed distance is represented as
// d = t q(t) with t = (s - rho_E) / delta and q a polynomial interpolating at
// Chebyshev nodes, so d vanishes exactly on dE and keeps the sign of t.
class DistanceBand {
 public:
  static constexpr int kNodes = 6;

  DistanceBand(const RadialSurface& E, const s2::Grid& grid, const std::vector<double>& rho_e, double delta)
      : delta_(delta), rho_e_(rho_e), q_(rho_e.size()), g_(rho_e.size()) {
    std::array<double, kNodes> t;
    Eigen::MatrixXd V(kNodes, kNodes);
    for (int k = 0; k < kNodes; ++k) {
      t[k] = std::cos(kPi * (k + 0.5) / kNodes);
      for (int j = 0; j < kNodes; ++j) V(k, j) = std::pow(t[k], j);
    }
    const Eigen::MatrixXd Vinv = V.fullPivLu().inverse();
    const surface::DistanceQuery dq(E);
    const int nphi = grid.n_phi();
    parallel_for(0, rho_e.size(), [&](std::size_t n) {
      const int i = static_cast<int>(n) / nphi, j = static_cast<int>(n) % nphi;
      const Vec3 x = grid.node(i, j);
      double th = grid.theta()[i], ph = grid.phi()[j];
      Eigen::Matrix<double, kNodes, 1> qv;
      // Walk outward from the node closest to the surface so warm starts stay
      // in the right basin.
      for (int side : {1, -1}) {
        th = grid.theta()[i];
        ph = grid.phi()[j];
        for (int k = side > 0 ? kNodes / 2 - 1 : kNodes / 2; k >= 0 && k < kNodes; k -= side) {
          const Vec3 p = E.center + (rho_e[n] + delta * t[k]) * x;
          auto np = dq.local_unsigned(p, th, ph);
          // The radial gap bounds the distance; beyond it Newton left the basin.
          if (np.distance > delta * std::abs(t[k]) + 1e-12) np = dq.nearest(p);
          th = np.theta;
          ph = np.phi;
          qv(k) = std::abs(np.distance) / std::abs(t[k]);
        }
      }
      Eigen::Matrix<double, kNodes, 1> q = Vinv * qv;
      std::copy(q.data(), q.data() + kNodes, q_[n].begin());
      // G(t) = delta int_0^t tau q(tau) (rho_E + delta tau)^2 dtau.
      const double a0 = rho_e[n] * rho_e[n], a1 = 2.0 * rho_e[n] * delta, a2 = delta * delta;
      auto& g = g_[n];
      g.fill(0.0);
      for (int k = 0; k < kNodes; ++k) {
        g[k + 2] += q(k) * a0 / (k + 2);
        g[k + 3] += q(k) * a1 / (k + 3);
        g[k + 4] += q(k) * a2 / (k + 4);
      }
      for (double& c : g) c *= delta;
    });
  }

  double delta() const { return delta_; }
  double t_of(std::size_t n, double rho) const { return (rho - rho_e_[n]) / delta_; }

  /// Signed distance to dE at radius rho on ray n.
  double distance(std::size_t n, double rho) const {
    const double t = t_of(n, rho);
    const auto& q = q_[n];
    double v = q[kNodes - 1];
    for (int k = kNodes - 2; k >= 0; --k) v = v * t + q[k];
    return t * v;
  }

  /// int_{rho_E}^{rho} d(s x) s^2 ds on ray n.
  double primitive(std::size_t n, double rho) const {
    const double t = t_of(n, rho);
    const auto& g = g_[n];
    double v = g[kNodes + 3];
    for (int k = kNodes + 2; k >= 0; --k) v = v * t + g[k];
    return v;
  }

 private:
  double delta_;
  std::vector<double> rho_e_;
  std::vector<std::array<double, kNodes>> q_;
  std::vector<std::array<double, kNodes + 4>> g_;
};

// Discrete objective P(F) - P(E) + (1/h) sum_n w_n G_n(rho_F) and its
// coefficient gradient, with the volume constraint eliminated by dilation.
class MmObjective {
 public:
  MmObjective(const s2::Grid& grid, const std::vector<double>& area_e, const DistanceBand& band, double h,
              double volume)
      : grid_(grid), area_e_(area_e), band_(band), h_(h), volume_(volume) {}

  struct Eval {
    double value = 0, perimeter = 0, dissipation = 0, volume = 0;
    std::vector<double> rho;
    Eigen::VectorXd grad_phi, grad_v;
  };

  /// Objective, gradient and auxiliaries at the coefficients y (no dilation).
  bool evaluate(const Eigen::VectorXd& y, Eval& e) const {
    const int L = grid_.band_limit();
    const auto fd = s2::sh_synthesize_derivatives(to_coeffs(y, L), grid_, 1);
    const auto w = grid_.weights();
    const std::size_t N = grid_.size();
    const int nphi = grid_.n_phi();
    std::vector<double> vr(N), vt(N), vp(N), vv(N);
    e.value = e.perimeter = e.dissipation = e.volume = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      const double r = fd.f[n];
      if (!(r > 0.0)) return false;
      const double s = grid_.sin_theta()[n / nphi];
      const double rt = fd.f_t[n], rp = fd.f_p[n] / s;
      const double sq = std::sqrt(r * r + rt * rt + rp * rp);
      const double a = r * sq;
      const double g = band_.primitive(n, r);
      e.perimeter += w[n] * a;
      e.value += w[n] * (a - area_e_[n]);
      e.dissipation += w[n] * g;
      e.volume += w[n] * r * r * r;
      vr[n] = w[n] * (sq + r * r / sq + band_.distance(n, r) * r * r / h_);
      vt[n] = w[n] * r * rt / sq;
      vp[n] = w[n] * r * rp / (sq * s);
      vv[n] = w[n] * r * r;
    }
    e.volume /= 3.0;
    e.value += e.dissipation / h_;
    e.rho = fd.f;
    e.grad_phi = to_vec(s2::sh_synthesize_adjoint(grid_, L, vr, vt, vp));
    e.grad_v = to_vec(s2::sh_synthesize_adjoint(grid_, L, vv, {}, {}));
    return true;
  }

  double dilation(const Eigen::VectorXd& c) const {
    const auto r = s2::sh_synthesize(to_coeffs(c, grid_.band_limit()), grid_).values;
    for (double x : r) {
      if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    }
    return std::cbrt(volume_ / quadrature_volume(grid_, r));
  }

  /// Reduced objective Psi(c) = Phi(alpha(c) c) with alpha fixing the volume.
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
  const s2::Grid& grid_;
  const std::vector<double>& area_e_;
  const DistanceBand& band_;
  double h_;
  double volume_;
};

double mean_curvature_avg(const surface::CurvatureFields& f) {
  const auto w = f.grid.weights();
  double a = 0.0, ih = 0.0;
  for (std::size_t n = 0; n < f.grid.size(); ++n) {
    a += w[n] * f.area_density[n];
    ih += w[n] * f.area_density[n] * f.mean[n];
  }
  return ih / a;
}

RadialSurface at_band_limit(const RadialSurface& s, int L) {
  RadialSurface out = s;
  if (L > 0 && L != s.band_limit()) out.w = s.w.resized(L);
  return out;
}

}  // namespace

void MmConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("time step h must be positive");
  if (!(target_volume >= 0.0)) throw ValidationError("target volume must be non-negative");
  if (!(grad_tol > 0.0) || !(volume_tol > 0.0)) throw ValidationError("tolerances must be positive");
  if (max_iterations < 1) throw ValidationError("max_iterations must be at least 1");
  if (band_limit != 0 && (band_limit < s2::Grid::kMinBandLimit || band_limit > s2::Grid::kMaxBandLimit)) {
    throw ValidationError("band limit out of range");
  }
}

double dissipation(const RadialSurface& F, const RadialSurface& E, int radial_nodes) {
  if ((F.center - E.center).norm() > 1e-12) throw ValidationError("center mismatch");
  if (radial_nodes < 1) throw ValidationError("radial_nodes must be positive");
  const int L = std::max(F.band_limit(), E.band_limit());
  const s2::Grid& grid = s2::Grid::cached(L);
  const auto rf = F.radius_values(grid), re = E.radius_values(grid);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (!(rf[n] > 0.0) || !(re[n] > 0.0)) throw ValidationError("star-shapedness violation");
  }
  std::vector<double> gx, gw;
  gauss_legendre(radial_nodes, gx, gw);
  const surface::DistanceQuery dq(E);
  const int nphi = grid.n_phi();
  std::vector<double> per_ray(grid.size());
  parallel_for(0, grid.size(), [&](std::size_t n) {
    const double a = std::min(rf[n], re[n]), b = std::max(rf[n], re[n]);
    if (b - a <= 0.0) {
      per_ray[n] = 0.0;
      return;
    }
    const int i = static_cast<int>(n) / nphi, j = static_cast<int>(n) % nphi;
    const Vec3 x = grid.node(i, j);
    double th = grid.theta()[i], ph = grid.phi()[j], sum = 0.0;
    for (int k = 0; k < radial_nodes; ++k) {
      const double s = 0.5 * (a + b) + 0.5 * (b - a) * gx[k];
      const auto np = dq.nearest_from(E.center + s * x, th, ph);
      th = np.theta;
      ph = np.phi;
      sum += gw[k] * std::abs(np.distance) * s * s;
    }
    per_ray[n] = 0.5 * (b - a) * sum;
  });
  const auto w = grid.weights();
  double d = 0.0;
  for (std::size_t n = 0; n < grid.size(); ++n) d += w[n] * per_ray[n];
  return d;
}

StepResult mm_step(const RadialSurface& E_in, const MmConfig& config) {
  config.validate();
  const RadialSurface E = at_band_limit(E_in, config.band_limit);
  const int L = E.band_limit();
  const s2::Grid& grid = s2::Grid::cached(L);
  const auto fe = surface::curvature_fields(E, grid);
  const std::vector<double>& rho_e = fe.radius;
  std::vector<double> area_e = fe.area_density;
  const double volume_e = quadrature_volume(grid, rho_e);
  const double volume = config.target_volume > 0.0 ? config.target_volume : volume_e;

  // Expected normal displacement is about h |H - Hbar|; the band covers a
  // few times that.
  const double hbar = mean_curvature_avg(fe);
  double vmax = 0.0;
  for (double hk : fe.mean) vmax = std::max(vmax, std::abs(hk - hbar));
  double delta = std::max(1e-4, 3.0 * config.h * vmax);

  LbfgsOptions opt;
  opt.grad_tol = config.grad_tol;
  opt.max_iterations = config.max_iterations;
  opt.initial_scale = config.h;
  opt.f_noise = 1e-13 * (1.0 + surface::kUnitSpherePerimeter * std::pow(volume / surface::kUnitBallVolume, 2.0 / 3.0));

  Eigen::VectorXd c = to_vec(E.radius_coeffs());
  StepDiag diag;
  for (int attempt = 0;; ++attempt) {
    const DistanceBand band(E, grid, rho_e, delta);
    const MmObjective obj(grid, area_e, band, config.h, volume);
    const LbfgsResult res = lbfgs_minimize(obj, c, opt);
    if (!res.converged && res.grad_norm > 1e3 * config.grad_tol) {
      throw NumericalError("optimizer did not converge: " + res.status);
    }
    const double alpha = obj.dilation(res.x);
    if (!std::isfinite(alpha)) throw NumericalError("star-shapedness lost");
    c = alpha * res.x;
    MmObjective::Eval e;
    if (!obj.evaluate(c, e)) throw NumericalError("star-shapedness lost");

    double tmax = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n) tmax = std::max(tmax, std::abs(band.t_of(n, e.rho[n])));
    if (tmax > 0.95) {
      if (attempt >= 6) throw NumericalError("step left the distance band");
      delta *= 2.0 * tmax;
      continue;
    }

    diag.iterations += res.iterations;
    diag.converged = res.converged;
    diag.lambda = c.dot(e.grad_phi) / (3.0 * e.volume);
    diag.el_residual = (e.grad_phi - diag.lambda * e.grad_v).norm();
    diag.dissipation = e.dissipation;
    diag.perimeter_after = e.perimeter;
    diag.volume_drift = std::abs(e.volume - volume) / volume;
    if (diag.volume_drift > config.volume_tol) throw NumericalError("volume constraint violated");

    const RadialSurface F = RadialSurface::from_radius(to_coeffs(c, L), E.center);
    const auto ff = surface::curvature_fields(F, grid);
    const auto w = grid.weights();
    double res2 = 0.0, d2 = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n) {
      const double d = band.distance(n, e.rho[n]);
      const double r = d / config.h + ff.mean[n] - diag.lambda;
      res2 += w[n] * ff.area_density[n] * r * r;
      d2 += w[n] * ff.area_density[n] * d * d;
    }
    diag.el_residual_pointwise = std::sqrt(res2);
    diag.distance_sq = d2;
    double pe = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n) pe += w[n] * area_e[n];
    diag.perimeter_before = pe;
    return {F, diag};
  }
}

RadialSurface direct_step(const RadialSurface& E, double dt, bool renormalize, double target_volume) {
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  const int L = E.band_limit();
  const s2::Grid& grid = s2::Grid::cached(L);
  const auto fe = surface::curvature_fields(E, grid);
  const double hbar = mean_curvature_avg(fe);
  const s2::ShCoeffs rho = E.radius_coeffs();
  const auto fd = s2::sh_synthesize_derivatives(rho, grid, 1);
  const int nphi = grid.n_phi();
  s2::ScalarField vel(grid);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const double s = grid.sin_theta()[n / nphi];
    const double r = fd.f[n], rp = fd.f_p[n] / s;
    // Radial speed of the normal velocity Hbar - H.
    vel.values[n] = (hbar - fe.mean[n]) * std::sqrt(r * r + fd.f_t[n] * fd.f_t[n] + rp * rp) / r;
  }
  const s2::ShCoeffs v = s2::sh_analyze(vel, L);
  const double volume = quadrature_volume(grid, fe.radius);
  const double rbar = std::cbrt(volume / surface::kUnitBallVolume);

  s2::ShCoeffs next(L);
  for (int l = 0; l <= L; ++l) {
    // Linearization about the sphere of radius rbar: V ~ (Delta u + 2u) / rbar^2.
    const double lam = l == 0 ? 0.0 : (2.0 - l * (l + 1.0)) / (rbar * rbar);
    for (int m = -l; m <= l; ++m) next(l, m) = (rho(l, m) + dt * (v(l, m) - lam * rho(l, m))) / (1.0 - dt * lam);
  }
  RadialSurface F = RadialSurface::from_radius(next, E.center);
  if (renormalize) {
    const auto r = F.radius_values(grid);
    for (double x : r) {
      if (!(x > 0.0)) throw NumericalError("star-shapedness lost");
    }
    F = F.dilated(std::cbrt((target_volume > 0.0 ? target_volume : volume) / quadrature_volume(grid, r)));
  }
  if (surface::perimeter(F) > surface::perimeter(E) + 1e-6) throw NumericalError("dt too large: perimeter increased");
  return F;
}

Scheme parse_scheme(const std::string& name) {
  if (name == "mm") return Scheme::mm;
  if (name == "direct") return Scheme::direct;
  throw ValidationError("unknown scheme '" + name + "'");
}

std::string to_string(Scheme s) { return s == Scheme::mm ? "mm" : "direct"; }

FlowTrace run(const RadialSurface& initial, const MmConfig& config, double T, Scheme scheme,
              const StepObserver& observer) {
  config.validate();
  if (!(T >= config.h)) throw ValidationError("T must be at least h");
  FlowTrace trace;
  trace.h = config.h;
  trace.scheme = scheme;
  double v0 = 0.0;
  // Direct steps have no optimizer diagnostics; theirs are read off the report.
  auto entry = [&](double t, RadialSurface s, const StepDiag& d, bool from_report) {
    TraceEntry e;
    e.t = t;
    e.surface = std::move(s);
    e.diag = d;
    const auto f = surface::curvature_fields(e.surface);
    e.report = surface::report(e.surface, f);
    e.delta_cmc = surface::cmc_deficit(e.surface, f, e.report).deficit;
    if (from_report) {
      e.diag.perimeter_after = e.report.perimeter;
      e.diag.lambda = e.report.mean_curvature_avg;
      if (v0 > 0.0) e.diag.volume_drift = std::abs(e.report.volume - v0) / v0;
    }
    trace.entries.push_back(std::move(e));
    if (observer) observer(trace.entries.back());
  };
  StepDiag d0;
  const RadialSurface start = at_band_limit(initial, config.band_limit);
  d0.perimeter_before = surface::perimeter(start);
  entry(0.0, start, d0, true);
  v0 = trace.entries[0].report.volume;

  MmConfig cfg = config;
  cfg.target_volume = v0;
  const int steps = static_cast<int>(std::floor(T / config.h + 1e-9));
  for (int k = 1; k <= steps; ++k) {
    const RadialSurface& E = trace.entries.back().surface;
    if (scheme == Scheme::mm) {
      StepResult r = mm_step(E, cfg);
      entry(k * config.h, std::move(r.surface), r.diag, false);
    } else {
      RadialSurface F = direct_step(E, config.h, true, v0);
      StepDiag d;
      d.perimeter_before = trace.entries.back().report.perimeter;
      d.dissipation = dissipation(F, E, 4);
      d.el_residual = d.el_residual_pointwise = std::numeric_limits<double>::quiet_NaN();
      d.distance_sq = std::numeric_limits<double>::quiet_NaN();
      entry(k * config.h, std::move(F), d, true);
    }
    if (trace.entries.back().delta_cmc < kCmcHalt) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

LedgerReport dissipation_ledger(const FlowTrace& trace) {
  LedgerReport r;
  if (trace.entries.empty()) throw ValidationError("empty trace");
  const double v0 = trace.entries[0].report.volume;
  double dsum = 0.0;
  for (std::size_t k = 1; k < trace.entries.size(); ++k) {
    const auto& prev = trace.entries[k - 1];
    const auto& cur = trace.entries[k];
    const double D = cur.diag.dissipation;
    const double slack = cur.report.perimeter + D / trace.h - prev.report.perimeter;
    r.comparison_slack.push_back(slack);
    r.max_comparison_slack = std::max(r.max_comparison_slack, slack);
    r.max_perimeter_increase = std::max(r.max_perimeter_increase, cur.report.perimeter - prev.report.perimeter);
    r.cumulative_osc += trace.h * cur.report.oscillation;
    dsum += D;
    if (D > 0.0 && std::isfinite(cur.diag.distance_sq)) r.distance_constant = std::max(r.distance_constant, cur.diag.distance_sq / D);
    r.max_volume_drift = std::max(r.max_volume_drift, std::abs(cur.report.volume - v0) / v0);
  }
  r.dissipation_over_h = dsum / trace.h;
  r.perimeter_drop = trace.entries.front().report.perimeter - trace.entries.back().report.perimeter;
  r.telescoping_slack = r.dissipation_over_h - r.perimeter_drop;
  r.dissipation_to_perimeter = r.dissipation_over_h / trace.entries.front().report.perimeter;
  return r;
}

Observable parse_observable(const std::string& name) {
  if (name == "perimeter_deficit") return Observable::perimeter_deficit;
  if (name == "hausdorff") return Observable::hausdorff;
  if (name == "osc") return Observable::osc;
  throw ValidationError("unknown observable '" + name + "'");
}

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size()) throw ValidationError("fit_rate: size mismatch");
  if (t.size() < 2) throw ValidationError("fit_rate: need at least two points");
  const std::size_t n = t.size();
  double mt = 0.0, ml = 0.0;
  std::vector<double> ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0.0)) throw ValidationError("observable non-positive on window");
    ly[i] = std::log(y[i]);
    mt += t[i];
    ml += ly[i];
  }
  mt /= n;
  ml /= n;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    stl += (t[i] - mt) * (ly[i] - ml);
    sll += (ly[i] - ml) * (ly[i] - ml);
  }
  if (!(stt > 0.0)) throw ValidationError("fit_rate: all times equal");
  RateFit f;
  f.points = static_cast<int>(n);
  f.rate = stl / stt;
  f.intercept = ml - f.rate * mt;
  if (sll <= 1e-28 * n) {
    f.rate = 0.0;
    f.intercept = ml;
    f.r_squared = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  f.r_squared = stl * stl / (stt * sll);
  return f;
}

RateFit fit_rate(const FlowTrace& trace, Observable observable) {
  std::vector<double> t, y;
  for (std::size_t k = trace.entries.size() / 2; k < trace.entries.size(); ++k) {
    const auto& e = trace.entries[k];
    double v = 0.0;
    switch (observable) {
      case Observable::perimeter_deficit:
        v = e.report.perimeter -
            surface::kUnitSpherePerimeter * std::pow(e.report.volume / surface::kUnitBallVolume, 2.0 / 3.0);
        break;
      case Observable::osc:
        v = e.report.oscillation;
        break;
      case Observable::hausdorff: {
        const auto target = surface::BallUnion::make({e.report.barycenter},
                                                     std::cbrt(e.report.volume / surface::kUnitBallVolume));
        v = hausdorff_to_union({e.surface}, target, 7, 20000);
        break;
      }
    }
    if (v > 1e-12) {
      t.push_back(e.t);
      y.push_back(v);
    }
  }
  if (t.size() < 2) throw ValidationError("observable non-positive on window");
  return fit_rate(t, y);
}

DecayCheck geometric_decay_check(const std::vector<double>& a, double C) {
  if (!(C > 1.0)) throw ValidationError("decay constant C must exceed 1");
  for (double x : a) {
    if (!(x >= 0.0)) throw ValidationError("sequence must be non-negative");
  }
  DecayCheck out;
  const std::size_t K = a.size();
  std::vector<double> suffix(K + 1, 0.0);
  for (std::size_t i = K; i-- > 0;) suffix[i] = suffix[i + 1] + a[i];
  const double S = suffix[0];
  constexpr double rel = 1e-12;
  for (std::size_t i = 0; i < K; ++i) {
    if (suffix[i] > C * a[i] * (1.0 + rel)) {
      out.witness = static_cast<int>(i);
      return out;
    }
  }
  out.hypothesis = true;
  out.conclusion = true;
  for (std::size_t i = 0; i < K; ++i) {
    out.tails.push_back(suffix[i + 1]);
    out.bounds.push_back(std::pow(1.0 - 1.0 / C, static_cast<double>(i + 1)) * S);
    if (out.conclusion && out.tails.back() > out.bounds.back() * (1.0 + rel)) {
      out.conclusion = false;
      out.witness = static_cast<int>(i);
    }
  }
  return out;
}

double hausdorff_to_union(const std::vector<RadialSurface>& components, const surface::BallUnion& target,
                          std::uint64_t seed, int samples) {
  if (components.empty() || target.centers.empty()) throw ValidationError("empty input");
  if (samples < 2) throw ValidationError("too few samples");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
  q.normalize();
  const Eigen::Matrix3d rot = q.toRotationMatrix();

  auto on_boundary = [&](const RadialSurface& s, const Vec3& u) {
    return target.boundary_distance(s.center + s.radius_along(u) * u);
  };

  double best = 0.0;
  const int per = std::max(1, samples / 2 / static_cast<int>(components.size()));
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  const double spacing = std::sqrt(4.0 * kPi / per);
  for (const auto& s : components) {
    std::vector<std::pair<double, Vec3>> top;
    for (int k = 0; k < per; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / per;
      const double r = std::sqrt(1.0 - z * z);
      const Vec3 u = rot * Vec3(r * std::cos(golden * k), r * std::sin(golden * k), z);
      const double d = on_boundary(s, u);
      top.emplace_back(d, u);
    }
    const std::size_t keep = std::min<std::size_t>(8, top.size());
    std::partial_sort(top.begin(), top.begin() + keep, top.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; k < keep; ++k) {
      // Compass search in a tangent chart around the sample.
      Vec3 u = top[k].second;
      double f = top[k].first;
      for (double step = spacing; step > 1e-9;) {
        const Vec3 e1 = (std::abs(u.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY()).cross(u).normalized();
        const Vec3 e2 = u.cross(e1);
        bool moved = false;
        for (const Vec3& dir : {e1, Vec3(-e1), e2, Vec3(-e2)}) {
          const Vec3 v = (u + step * dir).normalized();
          const double fv = on_boundary(s, v);
          if (fv > f) {
            f = fv;
            u = v;
            moved = true;
            break;
          }
        }
        if (!moved) step *= 0.5;
      }
      best = std::max(best, f);
    }
  }

  // Interior samples catch maxima away from the boundary of E.
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (const auto& s : components) {
    const auto r = s.radius_values(s2::Grid::cached(s.band_limit()));
    const double rmax = *std::max_element(r.begin(), r.end()) * 1.05;
    lo = lo.cwiseMin(s.center - Vec3::Constant(rmax));
    hi = hi.cwiseMax(s.center + Vec3::Constant(rmax));
  }
  for (const Vec3& c : target.centers) {
    lo = lo.cwiseMin(c - Vec3::Constant(target.radius));
    hi = hi.cwiseMax(c + Vec3::Constant(target.radius));
  }
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int interior = samples - per * static_cast<int>(components.size());
  for (int k = 0; k < interior; ++k) {
    const Vec3 p(lo.x() + (hi.x() - lo.x()) * uni(rng), lo.y() + (hi.y() - lo.y()) * uni(rng),
                 lo.z() + (hi.z() - lo.z()) * uni(rng));
    const bool in_e = std::any_of(components.begin(), components.end(), [&](const auto& s) { return s.contains(p); });
    if (in_e != target.contains(p)) best = std::max(best, target.boundary_distance(p));
  }
  return best;
}

}  // namespace curvflow::vpmcf
