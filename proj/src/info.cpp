#include "qmlsel/info.hpp"

#include "qmlsel/errors.hpp"
#include "qmlsel/linalg.hpp"
#include "qmlsel/qlik.hpp"

namespace qmlsel {

using Eigen::Index;
using Eigen::MatrixXd;

namespace {
constexpr double kSingularRatio = 1e-10;
}

InfoMatrices info_from_derivatives(const MatrixXd& hessian, const MatrixXd& per_t_gradients) {
  const double n = static_cast<double>(per_t_gradients.rows());
  InfoMatrices info;
  info.f_hat = -0.5 * hessian;
  info.g_hat = per_t_gradients.transpose() * per_t_gradients / (4.0 * n);

  const MatrixXd neg_f = -info.f_hat;
  const double ratio = eigen_ratio(neg_f);
  if (!(ratio >= kSingularRatio)) {
    throw Error(ErrorCode::SingularF, "-F is singular or indefinite (eigenvalue ratio " + std::to_string(ratio) + ")");
  }
  const auto logdet = log_det_spd(neg_f);
  const auto trace = trace_solve_spd(neg_f, info.g_hat);
  if (!logdet || !trace) throw Error(ErrorCode::SingularF, "Cholesky factorization of -F failed");
  info.logdet_negF = *logdet;
  // Trace(F⁻¹G) = −Trace((−F)⁻¹G)
  info.trace_pen = 2.0 / n * *trace;
  return info;
}

InfoMatrices info_matrices(const FitResult& fit, const Trajectory& x) {
  if (!fit.converged) {
    throw Error(ErrorCode::InvalidArgument, "information matrices need a converged fit of " + to_string(fit.spec));
  }
  const DerivEval deriv = derivatives(fit.theta_hat, x);
  return info_from_derivatives(deriv.hessian, per_t_gradients(fit.theta_hat, x));
}

ClosedFormTrace closed_form_trace(const ModelSpec& spec, double mu4, bool sigma_known) {
  if (!(mu4 >= 1.0)) throw Error(ErrorCode::InvalidArgument, "mu4 must be >= 1");
  const double p = spec.p, q = spec.q;
  switch (spec.family) {
    case Family::WhiteNoise:
    case Family::ARMA:
      return {sigma_known ? 2.0 * (p + q) : 2.0 * (p + q) + (mu4 - 1.0), false};
    case Family::GARCH:
      return {(mu4 - 1.0) * (p + q + 1.0), false};
    case Family::APARCH:
      return {(mu4 - 1.0) * (2.0 * p + q + 1.0), false};
    case Family::ARARCH:
      return {(mu4 - 1.0) * (p + 2.0), true};
  }
  return {};
}

}  // namespace qmlsel
