#include "qmlsel/optimize.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace qmlsel {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kFirstStepCap = 0.1;  // max coordinate move of a steepest-descent step
constexpr int kMaxBacktracks = 40;

}  // namespace

double projected_gradient_norm(const ConstraintSet& constraints, const VectorXd& x, const VectorXd& g) {
  return (x - constraints.project(x - g)).lpNorm<Eigen::Infinity>();
}

OptimizerResult projected_bfgs(const ValueGradient& objective, const ConstraintSet& constraints,
                               const VectorXd& start, const OptimizerOptions& options) {
  const Index d = start.size();
  OptimizerResult res;
  res.x = constraints.project(start);
  auto [f, g] = objective(res.x);
  res.value = f;
  if (!std::isfinite(f) || !g.allFinite()) {
    res.line_search_failed = true;
    res.pg_norm = std::numeric_limits<double>::infinity();
    return res;
  }

  MatrixXd hinv = MatrixXd::Identity(d, d);
  bool identity_model = true;

  for (res.iterations = 0; res.iterations < options.max_iter; ++res.iterations) {
    res.pg_norm = projected_gradient_norm(constraints, res.x, g);
    if (res.pg_norm <= options.grad_tol) break;

    // Freeze coordinates pinned at a bound by an outward gradient.
    std::vector<Index> free;
    for (Index i = 0; i < d; ++i) {
      const double span = 1e-12 * std::max(1.0, std::abs(res.x[i]));
      const bool at_lower = res.x[i] <= constraints.lower[i] + span && g[i] > 0;
      const bool at_upper = res.x[i] >= constraints.upper[i] - span && g[i] < 0;
      if (!at_lower && !at_upper) free.push_back(i);
    }

    VectorXd dir = VectorXd::Zero(d);
    for (std::size_t a = 0; a < free.size(); ++a) {
      double acc = 0.0;
      for (std::size_t b = 0; b < free.size(); ++b) acc -= hinv(free[a], free[b]) * g[free[b]];
      dir[free[a]] = acc;
    }
    if (free.empty() || g.dot(dir) >= 0.0) {
      hinv.setIdentity();
      identity_model = true;
      dir = -g;
    }

    double step = 1.0;
    if (identity_model) {
      const double norm = dir.lpNorm<Eigen::Infinity>();
      if (norm > kFirstStepCap) step = kFirstStepCap / norm;
    }

    bool accepted = false;
    VectorXd x_new, g_new;
    double f_new = 0.0;
    for (int ls = 0; ls < kMaxBacktracks; ++ls, step *= 0.5) {
      x_new = constraints.project(res.x + step * dir);
      const VectorXd s = x_new - res.x;
      if (s.lpNorm<Eigen::Infinity>() == 0.0) break;
      auto [ft, gt] = objective(x_new);
      if (std::isfinite(ft) && gt.allFinite() && ft <= f + kArmijo * g.dot(s)) {
        f_new = ft;
        g_new = std::move(gt);
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      if (!identity_model) {
        hinv.setIdentity();
        identity_model = true;
        continue;
      }
      res.line_search_failed = true;
      break;
    }

    const VectorXd s = x_new - res.x;
    const VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      if (identity_model) hinv *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const VectorXd hy = hinv * y;
      // (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ expanded.
      hinv += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
      identity_model = false;
    }
    res.x = x_new;
    f = f_new;
    g = std::move(g_new);
  }

  res.value = f;
  res.pg_norm = projected_gradient_norm(constraints, res.x, g);
  res.converged = res.pg_norm <= options.grad_tol;
  return res;
}

}  // namespace qmlsel
