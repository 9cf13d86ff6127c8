#include "curvflow/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <vector>

#include "curvflow/error.hpp"

namespace curvflow {

namespace {

struct Pair {
  Eigen::VectorXd s, y;
  double rho;
};

Eigen::VectorXd two_loop(const std::deque<Pair>& mem, const Eigen::VectorXd& g, double scale) {
  if (mem.empty()) return -scale * g;
  Eigen::VectorXd q = g;
  std::vector<double> alpha(mem.size());
  for (std::size_t i = mem.size(); i-- > 0;) {
    alpha[i] = mem[i].rho * mem[i].s.dot(q);
    q -= alpha[i] * mem[i].y;
  }
  q *= mem.back().s.dot(mem.back().y) / mem.back().y.squaredNorm();
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const double beta = mem[i].rho * mem[i].y.dot(q);
    q += (alpha[i] - beta) * mem[i].s;
  }
  return -q;
}

}  // namespace

LbfgsResult lbfgs_minimize(const LbfgsObjective& objective, Eigen::VectorXd x0, const LbfgsOptions& o) {
  if (o.memory < 1 || o.max_iterations < 0 || !(o.grad_tol > 0.0)) throw ValidationError("invalid optimizer options");
  LbfgsResult r;
  r.x = std::move(x0);
  Eigen::VectorXd g(r.x.size());
  r.f = objective(r.x, g);
  r.evaluations = 1;
  if (!std::isfinite(r.f)) throw NumericalError("optimizer started at an infeasible point");
  r.grad_norm = g.cwiseAbs().maxCoeff();

  std::deque<Pair> mem;
  Eigen::VectorXd gt(r.x.size()), xt(r.x.size());
  bool restarted = false;
  while (true) {
    if (r.grad_norm <= o.grad_tol) {
      r.converged = true;
      r.status = "gradient tolerance reached";
      return r;
    }
    if (r.iterations >= o.max_iterations) {
      r.status = "iteration limit reached";
      return r;
    }
    Eigen::VectorXd d = two_loop(mem, g, o.initial_scale);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      mem.clear();
      d = -o.initial_scale * g;
      slope = g.dot(d);
    }
    double t = 1.0;
    if (mem.empty()) t = std::min(1.0, o.max_step / d.cwiseAbs().maxCoeff());
    const double noise = o.f_noise > 0.0 ? o.f_noise : 1e-13 * (1.0 + std::abs(r.f));

    bool accepted = false;
    double ft = 0.0;
    for (int k = 0; k < o.max_backtracks; ++k) {
      xt = r.x + t * d;
      ft = objective(xt, gt);
      ++r.evaluations;
      if (std::isfinite(ft)) {
        const double slope_t = gt.dot(d);
        const bool armijo = ft <= r.f + o.armijo * t * slope;
        // Gradient-only test, meaningful when ft - f is lost in rounding.
        const bool approx_wolfe = ft <= r.f + noise && slope_t >= o.wolfe * slope && slope_t <= -0.8 * slope;
        if (armijo || approx_wolfe) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!restarted && !mem.empty()) {
        // Retry once along the steepest descent direction.
        mem.clear();
        restarted = true;
        continue;
      }
      r.status = "line search failed";
      return r;
    }
    restarted = false;
    Pair p{xt - r.x, gt - g, 0.0};
    const double sy = p.s.dot(p.y);
    if (sy > 1e-16 * p.s.norm() * p.y.norm()) {
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (static_cast<int>(mem.size()) > o.memory) mem.pop_front();
    }
    r.x.swap(xt);
    g.swap(gt);
    r.f = ft;
    r.grad_norm = g.cwiseAbs().maxCoeff();
    ++r.iterations;
  }
}

}  // namespace curvflow
