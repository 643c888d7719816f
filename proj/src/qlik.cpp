#include "qmlsel/qlik.hpp"

#include <cmath>

#include "qmlsel/constraints.hpp"
#include "qmlsel/errors.hpp"

namespace qmlsel {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Accumulates γ̂_n and its gradient for ARMA/white noise. When `per_t` is
// non-null it receives the n × d matrix of per-observation gradients.
double arma_jet(const ModelSpec& spec, const VectorXd& th, const Eigen::Ref<const VectorXd>& x,
                VectorXd& grad, MatrixXd* per_t) {
  const Index n = x.size();
  const int p = spec.family == Family::WhiteNoise ? 0 : spec.p;
  const int q = spec.family == Family::WhiteNoise ? 0 : spec.q;
  const int k_dyn = p + q;
  const double sigma = th[k_dyn];
  const double s2 = sigma * sigma;
  const double log_s2 = std::log(s2);

  VectorXd eps(n);
  MatrixXd de(k_dyn, n);  // ∂ε_t/∂(a, b), column per time step
  grad.setZero(k_dyn + 1);
  if (per_t) per_t->resize(n, k_dyn + 1);
  double total = 0.0;

  for (Index t = 0; t < n; ++t) {
    double f = 0.0;
    for (int i = 1; i <= p && i <= t; ++i) f += th[i - 1] * x[t - i];
    for (int j = 1; j <= q && j <= t; ++j) f += th[p + j - 1] * eps[t - j];
    const double e = x[t] - f;
    eps[t] = e;

    for (int k = 0; k < k_dyn; ++k) {
      double d = 0.0;
      if (k < p) {
        const Index lag = k + 1;
        if (t >= lag) d = -x[t - lag];
      } else {
        const Index lag = k - p + 1;
        if (t >= lag) d = -eps[t - lag];
      }
      for (int j = 1; j <= q && j <= t; ++j) d -= th[p + j - 1] * de(k, t - j);
      de(k, t) = d;
    }

    const double e2 = e * e;
    total += e2 / s2 + log_s2;
    for (int k = 0; k < k_dyn; ++k) {
      const double g = 2.0 * e * de(k, t) / s2;
      grad[k] += g;
      if (per_t) (*per_t)(t, k) = g;
    }
    const double g_sigma = -2.0 * e2 / (s2 * sigma) + 2.0 / sigma;
    grad[k_dyn] += g_sigma;
    if (per_t) (*per_t)(t, k_dyn) = g_sigma;
  }
  grad /= static_cast<double>(n);
  return total / static_cast<double>(n);
}

double garch_jet(const ModelSpec& spec, const VectorXd& th, const Eigen::Ref<const VectorXd>& x,
                 VectorXd& grad, MatrixXd* per_t) {
  const Index n = x.size();
  const int p = spec.p, q = spec.q;
  const Index d = 1 + p + q;
  VectorXd h(n);
  MatrixXd dh(d, n);
  grad.setZero(d);
  if (per_t) per_t->resize(n, d);
  double total = 0.0;

  for (Index t = 0; t < n; ++t) {
    double v = th[0];
    for (int i = 1; i <= p && i <= t; ++i) v += th[i] * x[t - i] * x[t - i];
    for (int j = 1; j <= q && j <= t; ++j) v += th[p + j] * h[t - j];
    const bool clamped = v < limits::kVarianceFloor;
    h[t] = clamped ? limits::kVarianceFloor : v;

    for (Index k = 0; k < d; ++k) {
      double dv = 0.0;
      if (!clamped) {
        if (k == 0) {
          dv = 1.0;
        } else if (k <= p) {
          if (t >= k) dv = x[t - k] * x[t - k];
        } else {
          const Index lag = k - p;
          if (t >= lag) dv = h[t - lag];
        }
        for (int j = 1; j <= q && j <= t; ++j) dv += th[p + j] * dh(k, t - j);
      }
      dh(k, t) = dv;
    }

    const double x2 = x[t] * x[t];
    total += x2 / h[t] + std::log(h[t]);
    const double w = (1.0 - x2 / h[t]) / h[t];
    for (Index k = 0; k < d; ++k) {
      const double g = w * dh(k, t);
      grad[k] += g;
      if (per_t) (*per_t)(t, k) = g;
    }
  }
  grad /= static_cast<double>(n);
  return total / static_cast<double>(n);
}

VectorXd per_t_contrast(const ParamVector& theta, const Eigen::Ref<const VectorXd>& x) {
  const CondMoments m = cond_moments(theta, x);
  VectorXd out(x.size());
  for (Index t = 0; t < x.size(); ++t) {
    const double r = x[t] - m.f_hat[t];
    out[t] = r * r / m.h_hat[t] + std::log(m.h_hat[t]);
  }
  return out;
}

ParamVector shifted(const ParamVector& theta, Index i, double delta) {
  VectorXd v = theta.values;
  v[i] += delta;
  return ParamVector(theta.spec, std::move(v));
}

}  // namespace

ContrastEval contrast(const ParamVector& theta, const Trajectory& x) {
  ContrastEval out;
  out.per_t = per_t_contrast(theta, x.data());
  out.gamma_bar = out.per_t.mean();
  out.loglik = -0.5 * static_cast<double>(x.size()) * out.gamma_bar;
  return out;
}

double gamma_bar(const ParamVector& theta, const Eigen::Ref<const VectorXd>& x) {
  return per_t_contrast(theta, x).mean();
}

bool has_analytic_gradient(const ModelSpec& spec) {
  return spec.family == Family::WhiteNoise || spec.family == Family::ARMA || spec.family == Family::GARCH;
}

std::pair<double, VectorXd> value_and_gradient(const ParamVector& theta, const Eigen::Ref<const VectorXd>& x) {
  VectorXd grad;
  switch (theta.spec.family) {
    case Family::WhiteNoise:
    case Family::ARMA: {
      const double v = arma_jet(theta.spec, theta.values, x, grad, nullptr);
      return {v, grad};
    }
    case Family::GARCH: {
      const double v = garch_jet(theta.spec, theta.values, x, grad, nullptr);
      return {v, grad};
    }
    default: break;
  }
  const double v = gamma_bar(theta, x);
  const ConstraintSet cs = constraint_set(theta.spec);
  grad.resize(theta.size());
  for (Index i = 0; i < theta.size(); ++i) {
    const double h = fd_step(theta[i]);
    const bool up_ok = theta[i] + h <= cs.upper[i];
    const bool down_ok = theta[i] - h >= cs.lower[i];
    if (up_ok && down_ok) {
      grad[i] = (gamma_bar(shifted(theta, i, h), x) - gamma_bar(shifted(theta, i, -h), x)) / (2.0 * h);
    } else if (up_ok) {
      grad[i] = (gamma_bar(shifted(theta, i, h), x) - v) / h;
    } else {
      grad[i] = (v - gamma_bar(shifted(theta, i, -h), x)) / h;
    }
  }
  return {v, grad};
}

MatrixXd per_t_gradients(const ParamVector& theta, const Trajectory& x) {
  MatrixXd per_t;
  VectorXd grad;
  switch (theta.spec.family) {
    case Family::WhiteNoise:
    case Family::ARMA:
      arma_jet(theta.spec, theta.values, x.data(), grad, &per_t);
      return per_t;
    case Family::GARCH:
      garch_jet(theta.spec, theta.values, x.data(), grad, &per_t);
      return per_t;
    default: break;
  }
  per_t.resize(x.size(), theta.size());
  for (Index i = 0; i < theta.size(); ++i) {
    const double h = fd_step(theta[i]);
    per_t.col(i) = (per_t_contrast(shifted(theta, i, h), x.data()) -
                    per_t_contrast(shifted(theta, i, -h), x.data())) / (2.0 * h);
  }
  return per_t;
}

VectorXd fd_gradient(const ParamVector& theta, const Trajectory& x) {
  VectorXd grad(theta.size());
  for (Index i = 0; i < theta.size(); ++i) {
    const double h = fd_step(theta[i]);
    grad[i] = (gamma_bar(shifted(theta, i, h), x.data()) - gamma_bar(shifted(theta, i, -h), x.data())) / (2.0 * h);
  }
  return grad;
}

DerivEval derivatives(const ParamVector& theta, const Trajectory& x) {
  const Index d = theta.size();
  const ConstraintSet cs = constraint_set(theta.spec);
  const bool analytic = has_analytic_gradient(theta.spec);

  // Every point the nested difference stencil touches must be feasible.
  VectorXd steps(d);
  for (Index i = 0; i < d; ++i) steps[i] = fd_step(theta[i]);
  for (Index i = 0; i < d; ++i) {
    for (double si : {-1.0, 1.0}) {
      VectorXd point = theta.values;
      point[i] += si * steps[i];
      if (analytic) {
        if (!cs.contains(point)) {
          throw Error(ErrorCode::BoundaryTooClose,
                      "difference stencil leaves the constraint set of " + to_string(theta.spec));
        }
        continue;
      }
      for (Index j = 0; j < d; ++j) {
        for (double sj : {-1.0, 1.0}) {
          VectorXd inner = point;
          inner[j] += sj * steps[j];
          if (!cs.contains(inner)) {
            throw Error(ErrorCode::BoundaryTooClose,
                        "difference stencil leaves the constraint set of " + to_string(theta.spec));
          }
        }
      }
    }
  }

  auto grad_at = [&](const ParamVector& th) {
    return analytic ? value_and_gradient(th, x.data()).second : fd_gradient(th, x);
  };

  DerivEval out;
  out.gradient = grad_at(theta);
  out.hessian.resize(d, d);
  for (Index i = 0; i < d; ++i) {
    out.hessian.col(i) = (grad_at(shifted(theta, i, steps[i])) - grad_at(shifted(theta, i, -steps[i]))) /
                         (2.0 * steps[i]);
  }
  out.hessian = (0.5 * (out.hessian + out.hessian.transpose())).eval();
  return out;
}

VectorXd residuals(const ParamVector& theta, const Trajectory& x) {
  const CondMoments m = cond_moments(theta, x);
  return ((x.data() - m.f_hat).array() / m.h_hat.array().sqrt()).matrix();
}

double mu4_hat(const Eigen::Ref<const VectorXd>& res) {
  const double m2 = res.array().square().mean();
  if (!(m2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "residuals are identically zero");
  return res.array().square().square().mean() / (m2 * m2);
}

}  // namespace qmlsel
