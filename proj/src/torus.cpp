#include "curvflow/torus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "curvflow/error.hpp"

namespace curvflow::torus {

namespace {

// One r2c/c2r plan pair per resolution. FFTW_ESTIMATE keeps the algorithm
// choice independent of timing, so repeated runs agree bitwise.
struct FftPlan {
  int n = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr, bwd = nullptr;

  explicit FftPlan(int n_) : n(n_) {
    const std::size_t N = static_cast<std::size_t>(n) * n * n;
    real = fftw_alloc_real(N);
    spec = fftw_alloc_complex(static_cast<std::size_t>(n) * n * (n / 2 + 1));
    fwd = fftw_plan_dft_r2c_3d(n, n, n, real, spec, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_3d(n, n, n, spec, real, FFTW_ESTIMATE);
    if (!real || !spec || !fwd || !bwd) throw NumericalError("FFT plan creation failed");
  }
  ~FftPlan() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(real);
    fftw_free(spec);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
};

std::mutex& fft_mutex() {
  static std::mutex m;
  return m;
}

// Caller holds fft_mutex().
FftPlan& plan_for(int n) {
  static std::map<int, std::unique_ptr<FftPlan>> plans;
  auto& p = plans[n];
  if (!p) p = std::make_unique<FftPlan>(n);
  return *p;
}

void check_size(const TorusGrid& g, const Field& f) {
  g.validate();
  if (f.size() != g.size()) throw ValidationError("field size does not match the grid");
}

// Visits the half spectrum as (flat index, |k|^2, Parseval multiplicity).
template <class F>
void for_each_mode(const TorusGrid& g, F&& f) {
  const int n = g.n, nc = n / 2 + 1;
  const double k0 = 2.0 * std::numbers::pi / g.R;
  auto wave = [n](int i) { return i <= n / 2 ? i : i - n; };
  std::size_t idx = 0;
  for (int a = 0; a < n; ++a) {
    const double ka = k0 * wave(a);
    for (int b = 0; b < n; ++b) {
      const double kb = k0 * wave(b);
      for (int c = 0; c < nc; ++c, ++idx) {
        const double kc = k0 * c;
        f(idx, ka * ka + kb * kb + kc * kc, (c == 0 || c == n / 2) ? 1.0 : 2.0);
      }
    }
  }
}

void forward(FftPlan& p, const Field& f) {
  std::copy(f.begin(), f.end(), p.real);
  fftw_execute(p.fwd);
}

Field backward(FftPlan& p) {
  fftw_execute(p.bwd);
  return Field(p.real, p.real + static_cast<std::size_t>(p.n) * p.n * p.n);
}

// Multiplies every mode by symbol(|k|^2) / N and transforms back.
template <class S>
Field apply_symbol(const TorusGrid& g, const Field& f, S&& symbol) {
  check_size(g, f);
  std::lock_guard lock(fft_mutex());
  FftPlan& p = plan_for(g.n);
  forward(p, f);
  const double inv_n = 1.0 / static_cast<double>(g.size());
  for_each_mode(g, [&](std::size_t i, double k2, double) {
    const double s = symbol(k2) * inv_n;
    p.spec[i][0] *= s;
    p.spec[i][1] *= s;
  });
  return backward(p);
}

template <class S>
double spectral_sum(const TorusGrid& g, const Field& f, S&& symbol) {
  check_size(g, f);
  std::lock_guard lock(fft_mutex());
  FftPlan& p = plan_for(g.n);
  forward(p, f);
  double s = 0.0;
  for_each_mode(g, [&](std::size_t i, double k2, double mult) {
    if (k2 == 0.0) return;
    s += mult * symbol(k2) * (p.spec[i][0] * p.spec[i][0] + p.spec[i][1] * p.spec[i][1]);
  });
  return s * g.cell_volume() / static_cast<double>(g.size());
}

double norm2(const Field& f) {
  double s = 0.0;
  for (double x : f) s += x * x;
  return std::sqrt(s);
}

void check_mean(const Field& f) {
  if (std::abs(mean(f)) > 1e-10 * max_abs(f)) throw ValidationError("right-hand side has nonzero mean");
}

}  // namespace

void TorusGrid::validate() const {
  if (n < 32 || n > 256 || (n & (n - 1)) != 0) throw ValidationError("grid resolution must be a power of two in [32, 256]");
  if (!(R >= 1.0) || !std::isfinite(R)) throw ValidationError("torus side must be at least 1");
}

double integrate(const TorusGrid& g, const Field& f) {
  double s = 0.0;
  for (double x : f) s += x;
  return s * g.cell_volume();
}

double mean(const Field& f) {
  if (f.empty()) return 0.0;
  double s = 0.0;
  for (double x : f) s += x;
  return s / static_cast<double>(f.size());
}

double max_abs(const Field& f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, std::abs(x));
  return m;
}

Field inverse_laplacian(const TorusGrid& g, const Field& f, double scale) {
  return apply_symbol(g, f, [scale](double k2) { return k2 == 0.0 ? 0.0 : scale / k2; });
}

Field laplacian(const TorusGrid& g, const Field& u) {
  return apply_symbol(g, u, [](double k2) { return -k2; });
}

double dirichlet_energy(const TorusGrid& g, const Field& u) {
  return spectral_sum(g, u, [](double k2) { return k2; });
}

double hminus1_norm_sq(const TorusGrid& g, const Field& f) {
  return spectral_sum(g, f, [](double k2) { return 1.0 / k2; });
}

double hminus1_norm(const TorusGrid& g, const Field& f) {
  check_size(g, f);
  check_mean(f);
  return std::sqrt(hminus1_norm_sq(g, f));
}

double poisson_residual(const TorusGrid& g, const Field& u, const Field& rhs) {
  check_size(g, rhs);
  const double rn = norm2(rhs);
  if (rn == 0.0) return norm2(u) == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  const Field lu = laplacian(g, u);
  const double m = mean(rhs);
  double s = 0.0;
  for (std::size_t i = 0; i < lu.size(); ++i) s += std::pow(lu[i] + rhs[i] - m, 2);
  return std::sqrt(s) / rn;
}

Potential poisson_solve(const TorusGrid& g, const Field& rhs) {
  check_size(g, rhs);
  check_mean(rhs);
  Potential p;
  p.grid = g;
  p.U = inverse_laplacian(g, rhs);
  p.residual = poisson_residual(g, p.U, rhs);
  return p;
}

}  // namespace curvflow::torus
