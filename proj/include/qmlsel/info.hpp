#pragma once

#include <Eigen/Core>

#include "qmlsel/estimator.hpp"
#include "qmlsel/model.hpp"

namespace qmlsel {

/// Plug-in estimates of F_m and G_m at θ̂_m.
///   f_hat = −½ ∂²γ̂_n(θ̂)                 (negative definite at an interior minimum)
///   g_hat = (1/4n) Σ_t ∂γ̂_t ∂γ̂_tᵀ        (outer-product estimator)
///   logdet_negF = log det(−f_hat)
///   trace_pen = −(2/n)·Trace(f_hat⁻¹ g_hat)
struct InfoMatrices {
  Eigen::MatrixXd f_hat;
  Eigen::MatrixXd g_hat;
  double logdet_negF = 0.0;
  double trace_pen = 0.0;
};

/// Builds InfoMatrices from a Hessian of γ̂_n and the n × d per-observation
/// gradients. Throws SingularF when λ_min(−f_hat) < 1e-10·λ_max(−f_hat).
InfoMatrices info_from_derivatives(const Eigen::MatrixXd& hessian, const Eigen::MatrixXd& per_t_gradients);

/// Requires a converged fit with θ̂ far enough inside the constraint set for
/// the difference stencil (BoundaryTooClose otherwise).
InfoMatrices info_matrices(const FitResult& fit, const Trajectory& x);

struct ClosedFormTrace {
  double value = 0.0;           // −2·Trace(F_m⁻¹ G_m)
  bool offset_unknown = false;  // AR-ARCH: value omits the model-independent −2c(θ*)
};

/// Closed-form −2·Trace(F_m⁻¹ G_m) for m ⊇ m*, in terms of the innovation
/// fourth moment μ₄:
///   ARMA(p,q), σ estimated: 2(p+q) + (μ₄ − 1);  σ known: 2(p+q)
///   GARCH(p,q): (μ₄ − 1)(p+q+1)
///   APARCH(δ;p,q): (μ₄ − 1)(2p+q+1)
///   AR(1)-ARCH(p): (μ₄ − 1)(p+2) up to an unknown additive constant
ClosedFormTrace closed_form_trace(const ModelSpec& spec, double mu4, bool sigma_known = false);

}  // namespace qmlsel
