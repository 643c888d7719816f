#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "qmlsel/model.hpp"

namespace qmlsel {

struct FitOptions {
  int max_iter = 500;
  double grad_tol = 1e-6;
  int n_restarts = 3;
  double restart_jitter = 0.1;

  friend bool operator==(const FitOptions&, const FitOptions&) = default;
};

struct FitResult {
  ModelSpec spec;
  ParamVector theta_hat;
  double gamma_bar_min = 0.0;  // γ̂_n(θ̂)
  double loglik = 0.0;         // L̂_n(θ̂)
  double grad_norm = 0.0;      // projected-gradient ∞-norm at θ̂
  bool converged = false;
  Eigen::Index n_used = 0;
  int iterations = 0;
  std::string failure;  // non-empty when the fit could not be run at all

  double dimension() const { return static_cast<double>(dim(spec)); }
};

/// Index of the scale coordinate (σ, ω or α0) in the canonical order.
Eigen::Index scale_index(const ModelSpec& spec);

/// Zero-initialized start: dynamic coefficients 0, scale from the sample
/// variance of x (σ for ARMA, ω / α0 for the volatility families), clipped
/// into the box.
ParamVector initial_point(const ModelSpec& spec, const Trajectory& x);

/// QMLE θ̂ = argmin γ̂_n over the model's constraint set, from the zero start
/// plus `n_restarts` jittered starts seeded from the data. Throws
/// TooShortSeries when n < 10·|m| and OptimizerDiverged when no start could
/// make progress.
FitResult fit(const ModelSpec& spec, const Trajectory& x, const FitOptions& opts = {});

/// One FitResult per spec, in order. Errors become converged = false with
/// `failure` set; the batch never aborts.
std::vector<FitResult> fit_family(const std::vector<ModelSpec>& family, const Trajectory& x,
                                  const FitOptions& opts = {});

}  // namespace qmlsel
