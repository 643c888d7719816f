#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Core>

#include "qmlsel/model.hpp"

namespace qmlsel {

/// γ̂(θ, X_t) = (X_t − f̂_t)²/Ĥ_t + log Ĥ_t and its aggregates.
struct ContrastEval {
  double gamma_bar = 0.0;     // γ̂_n(θ), mean of per_t
  Eigen::VectorXd per_t;
  double loglik = 0.0;        // L̂_n(θ) = −(n/2)·γ̂_n(θ)
};

struct DerivEval {
  Eigen::VectorXd gradient;   // ∂γ̂_n/∂θ
  Eigen::MatrixXd hessian;    // ∂²γ̂_n/∂θ², symmetric
};

ContrastEval contrast(const ParamVector& theta, const Trajectory& x);

/// γ̂_n(θ) only; no per-t storage.
double gamma_bar(const ParamVector& theta, const Eigen::Ref<const Eigen::VectorXd>& x);

/// ARMA (including white noise) and GARCH have closed-form gradient recursions.
bool has_analytic_gradient(const ModelSpec& spec);

/// Finite-difference step for a coordinate of value v.
inline double fd_step(double v) { return std::max(1e-5, 1e-5 * std::abs(v)); }

/// γ̂_n(θ) together with ∂γ̂_n/∂θ. Analytic where available, otherwise
/// central differences that fall back to one-sided ones at box bounds.
/// No interior requirement: this is what the optimizer calls.
std::pair<double, Eigen::VectorXd> value_and_gradient(const ParamVector& theta,
                                                      const Eigen::Ref<const Eigen::VectorXd>& x);

/// Per-observation gradients, row t = ∂γ̂(θ, X_t)/∂θ.
Eigen::MatrixXd per_t_gradients(const ParamVector& theta, const Trajectory& x);

/// Central-difference gradient of γ̂_n regardless of family (cross-check path).
Eigen::VectorXd fd_gradient(const ParamVector& theta, const Trajectory& x);

/// Gradient plus central-difference Hessian of the gradient. Requires the
/// whole difference stencil to lie in the constraint set, otherwise throws
/// BoundaryTooClose.
DerivEval derivatives(const ParamVector& theta, const Trajectory& x);

/// Standardized residuals ξ̂_t = (X_t − f̂_t)/√Ĥ_t.
Eigen::VectorXd residuals(const ParamVector& theta, const Trajectory& x);

/// Scale-free fourth moment mean(ξ⁴)/mean(ξ²)²; always ≥ 1.
double mu4_hat(const Eigen::Ref<const Eigen::VectorXd>& residuals);

}  // namespace qmlsel
