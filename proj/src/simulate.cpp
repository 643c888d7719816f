#include "qmlsel/simulate.hpp"

#include <cmath>
#include <numbers>

#include "qmlsel/constraints.hpp"
#include "qmlsel/errors.hpp"

namespace qmlsel {

using Eigen::Index;
using Eigen::VectorXd;

double GaussianStream::uniform() {
  // 53 high bits, shifted by half an ulp so 0 is never produced.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double GaussianStream::operator()() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(angle);
  has_cached_ = true;
  return r * std::cos(angle);
}

VectorXd GaussianStream::draw(Index count) {
  VectorXd out(count);
  for (Index i = 0; i < count; ++i) out[i] = (*this)();
  return out;
}

Trajectory simulate_with_noise(const ParamVector& theta, const Eigen::Ref<const VectorXd>& noise,
                               std::size_t burn_in) {
  const auto& spec = theta.spec;
  if (!is_feasible(theta)) {
    throw Error(ErrorCode::NonStationaryParams,
                "parameters violate the constraint set of " + to_string(spec));
  }
  if (static_cast<std::size_t>(noise.size()) <= burn_in) {
    throw Error(ErrorCode::InvalidArgument, "noise stream shorter than burn-in + 1");
  }
  const Index total = noise.size();
  const auto& th = theta.values;
  const int p = spec.p, q = spec.q;

  VectorXd x = VectorXd::Zero(total);
  VectorXd latent = VectorXd::Zero(total);  // ε_t, H_t, σ_t^δ or Z_t depending on family
  for (Index t = 0; t < total; ++t) {
    const double xi = noise[t];
    switch (spec.family) {
      case Family::WhiteNoise:
        x[t] = th[0] * xi;
        break;
      case Family::ARMA: {
        const double eps = th[p + q] * xi;
        double f = 0.0;
        for (int i = 1; i <= p && i <= t; ++i) f += th[i - 1] * x[t - i];
        for (int j = 1; j <= q && j <= t; ++j) f += th[p + j - 1] * latent[t - j];
        latent[t] = eps;
        x[t] = f + eps;
        break;
      }
      case Family::GARCH: {
        double h = th[0];
        for (int i = 1; i <= p && i <= t; ++i) h += th[i] * x[t - i] * x[t - i];
        for (int j = 1; j <= q && j <= t; ++j) h += th[p + j] * latent[t - j];
        latent[t] = h;
        x[t] = std::sqrt(h) * xi;
        break;
      }
      case Family::APARCH: {
        double s = th[0];
        for (int i = 1; i <= p && i <= t; ++i) {
          const double lag = x[t - i];
          s += th[i] * std::pow(std::abs(lag) - th[p + i] * lag, spec.delta);
        }
        for (int j = 1; j <= q && j <= t; ++j) s += th[2 * p + j] * latent[t - j];
        latent[t] = s;
        x[t] = std::pow(s, 1.0 / spec.delta) * xi;
        break;
      }
      case Family::ARARCH: {
        double h = th[1];
        for (int i = 1; i <= p && i <= t; ++i) h += th[1 + i] * latent[t - i] * latent[t - i];
        latent[t] = std::sqrt(h) * xi;
        x[t] = (t >= 1 ? th[0] * x[t - 1] : 0.0) + latent[t];
        break;
      }
    }
    if (!std::isfinite(x[t]) || std::abs(x[t]) > limits::kOverflowThreshold) {
      throw Error(ErrorCode::NumericOverflow,
                  "simulation of " + to_string(spec) + " exceeded 1e10 at step " + std::to_string(t));
    }
  }
  return Trajectory(x.tail(total - static_cast<Index>(burn_in)));
}

Trajectory simulate(const ParamVector& theta, std::size_t n, std::uint64_t seed, std::size_t burn_in) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "simulation length must be >= 1");
  GaussianStream noise(seed);
  Trajectory raw = simulate_with_noise(theta, noise.draw(static_cast<Index>(n + burn_in)), burn_in);
  return Trajectory(raw.data(), SimulationOrigin{seed, theta.spec, theta.values, burn_in});
}

}  // namespace qmlsel
