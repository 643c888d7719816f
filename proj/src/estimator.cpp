#include "qmlsel/estimator.hpp"

#include <bit>
#include <cmath>
#include <random>

#include <Eigen/Cholesky>

#include "qmlsel/constraints.hpp"
#include "qmlsel/errors.hpp"
#include "qmlsel/optimize.hpp"
#include "qmlsel/qlik.hpp"
#include "qmlsel/simulate.hpp"

namespace qmlsel {

using Eigen::Index;
using Eigen::VectorXd;

namespace {

constexpr double kTieTolerance = 1e-10;

std::uint64_t restart_seed(const ModelSpec& spec, const Trajectory& x) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the raw bits
  auto feed = [&](std::uint64_t word) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (word >> (8 * byte)) & 0xffULL;
      h *= 0x100000001b3ULL;
    }
  };
  for (Index t = 0; t < x.size(); ++t) feed(std::bit_cast<std::uint64_t>(x[t]));
  for (char c : to_string(spec)) feed(static_cast<unsigned char>(c));
  return mix64(h);
}

double uniform_pm(std::mt19937_64& rng, double half_width) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return (2.0 * u - 1.0) * half_width;
}

}  // namespace

Index scale_index(const ModelSpec& spec) {
  switch (spec.family) {
    case Family::WhiteNoise: return 0;
    case Family::ARMA: return spec.p + spec.q;
    case Family::GARCH:
    case Family::APARCH: return 0;
    case Family::ARARCH: return 1;
  }
  return 0;
}

ParamVector initial_point(const ModelSpec& spec, const Trajectory& x) {
  const VectorXd& data = x.data();
  const double variance = (data.array() - data.mean()).square().mean();
  VectorXd start = VectorXd::Zero(dim(spec));
  const Index s = scale_index(spec);
  const bool sd_scale = spec.family == Family::WhiteNoise || spec.family == Family::ARMA;
  start[s] = sd_scale ? std::sqrt(variance) : variance;
  if (spec.family == Family::APARCH) {
    start[s] = std::pow(variance, spec.delta / 2.0);  // ω is on the σ^δ scale
  }
  const ConstraintSet cs = constraint_set(spec);
  start[s] = std::clamp(start[s], cs.lower[s], cs.upper[s]);
  return ParamVector(spec, std::move(start));
}

namespace {

// A few full Newton steps from an interior optimum. Kept only while they stay
// feasible and do not increase γ̂_n.
void polish(const ValueGradient& objective, const ConstraintSet& cs, const ModelSpec& spec, const Trajectory& x,
            OptimizerResult& r, double grad_tol) {
  for (int it = 0; it < 4; ++it) {
    DerivEval d;
    try {
      d = derivatives(ParamVector(spec, r.x), x);
    } catch (const Error&) {
      return;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(d.hessian);
    if (llt.info() != Eigen::Success) return;
    const VectorXd candidate = r.x - llt.solve(d.gradient);
    if (!candidate.allFinite() || !cs.contains(candidate)) return;
    const auto [value, gradient] = objective(candidate);
    if (!(value <= r.value)) return;
    const double pg = projected_gradient_norm(cs, candidate, gradient);
    const bool improved = pg < r.pg_norm;
    r.x = candidate;
    r.value = value;
    r.pg_norm = std::min(r.pg_norm, pg);
    r.converged = r.converged || pg <= grad_tol;
    if (!improved) return;
  }
}

}  // namespace

FitResult fit(const ModelSpec& spec, const Trajectory& x, const FitOptions& opts) {
  const Index d = dim(spec);
  if (x.size() < 10 * d) {
    throw Error(ErrorCode::TooShortSeries, "n = " + std::to_string(x.size()) + " is below 10*|m| = " +
                                               std::to_string(10 * d) + " for " + to_string(spec));
  }
  const ConstraintSet cs = constraint_set(spec);
  const VectorXd& data = x.data();
  ValueGradient objective = [&](const VectorXd& theta) {
    return value_and_gradient(ParamVector(spec, theta), data);
  };
  const OptimizerOptions oo{opts.max_iter, opts.grad_tol};

  const ParamVector zero = initial_point(spec, x);
  std::vector<OptimizerResult> runs;
  runs.push_back(projected_bfgs(objective, cs, zero.values, oo));

  std::mt19937_64 rng(restart_seed(spec, x));
  const Index s_idx = scale_index(spec);
  for (int r = 0; r < opts.n_restarts; ++r) {
    VectorXd start = zero.values;
    for (Index i = 0; i < d; ++i) {
      const double u = uniform_pm(rng, opts.restart_jitter);
      if (i == s_idx) start[i] *= 1.0 + u;
      else start[i] += u;
    }
    runs.push_back(projected_bfgs(objective, cs, cs.project(start), oo));
  }

  bool any_progress = false;
  for (const auto& r : runs) any_progress = any_progress || r.converged || !r.line_search_failed;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    if (std::isfinite(r.value)) best = std::min(best, r.value);
  }
  if (!any_progress || !std::isfinite(best)) {
    throw Error(ErrorCode::OptimizerDiverged, "every start failed its line search for " + to_string(spec));
  }

  // Among near-ties prefer the run closest to the zero-start solution.
  std::size_t chosen = runs.size();
  double chosen_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    if (!std::isfinite(runs[k].value) || runs[k].value > best + kTieTolerance) continue;
    const double dist = (runs[k].x - runs[0].x).norm();
    if (dist < chosen_dist) {
      chosen = k;
      chosen_dist = dist;
    }
  }
  OptimizerResult r = runs[chosen];
  polish(objective, cs, spec, x, r, opts.grad_tol);
  const double n = static_cast<double>(x.size());
  return FitResult{spec,
                   ParamVector(spec, r.x),
                   r.value,
                   -0.5 * n * r.value,
                   r.pg_norm,
                   r.converged,
                   x.size(),
                   r.iterations,
                   {}};
}

std::vector<FitResult> fit_family(const std::vector<ModelSpec>& family, const Trajectory& x,
                                  const FitOptions& opts) {
  std::vector<FitResult> out;
  out.reserve(family.size());
  for (const auto& spec : family) {
    try {
      out.push_back(fit(spec, x, opts));
    } catch (const Error& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      out.push_back(FitResult{spec, initial_point(spec, x), nan, nan, nan, false, x.size(), 0, e.what()});
    }
  }
  return out;
}

}  // namespace qmlsel
