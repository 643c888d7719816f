#pragma once

#include <functional>
#include <utility>

#include <Eigen/Core>

#include "qmlsel/constraints.hpp"

namespace qmlsel {

struct OptimizerOptions {
  int max_iter = 500;
  double grad_tol = 1e-6;  // ∞-norm of the projected gradient
};

struct OptimizerResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double pg_norm = 0.0;  // ‖x − P(x − ∇f)‖∞
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
};

using ValueGradient = std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>;

/// Projected BFGS with Armijo backtracking along the projection arc.
/// Coordinates sitting on a box bound with the gradient pointing outward are
/// frozen for the quasi-Newton step; when the quasi-Newton step fails the
/// inverse-Hessian model is reset to a steepest-descent step.
OptimizerResult projected_bfgs(const ValueGradient& objective, const ConstraintSet& constraints,
                               const Eigen::VectorXd& start, const OptimizerOptions& options);

/// ‖x − P(x − g)‖∞.
double projected_gradient_norm(const ConstraintSet& constraints, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& g);

}  // namespace qmlsel
