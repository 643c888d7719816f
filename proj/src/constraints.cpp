#include "qmlsel/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace qmlsel {

using Eigen::Index;
using Eigen::VectorXd;

VectorXd project_capped_simplex(const Eigen::Ref<const VectorXd>& v, double radius) {
  VectorXd clipped = v.cwiseMax(0.0);
  if (clipped.sum() <= radius) return clipped;
  // Find τ with Σ max(v_i − τ, 0) = radius.
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
    if (k + 1 == sorted.size() || sorted[k + 1] <= candidate) {
      tau = candidate;
      break;
    }
  }
  return (v.array() - tau).cwiseMax(0.0).matrix();
}

VectorXd project_l1_ball(const Eigen::Ref<const VectorXd>& v, double radius) {
  if (v.cwiseAbs().sum() <= radius) return v;
  VectorXd mag = project_capped_simplex(v.cwiseAbs(), radius);
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] < 0) mag[i] = -mag[i];
  }
  return mag;
}

bool ConstraintSet::contains(const Eigen::Ref<const VectorXd>& theta, double tol) const {
  if (theta.size() != lower.size() || !theta.allFinite()) return false;
  for (Index i = 0; i < theta.size(); ++i) {
    if (theta[i] < lower[i] - tol || theta[i] > upper[i] + tol) return false;
  }
  for (const auto& b : budgets) {
    double total = 0.0;
    for (Index i : b.indices) total += b.absolute ? std::abs(theta[i]) : theta[i];
    if (total > b.bound + tol) return false;
  }
  return true;
}

VectorXd ConstraintSet::project(const Eigen::Ref<const VectorXd>& theta) const {
  VectorXd out = theta.cwiseMax(lower).cwiseMin(upper);
  for (const auto& b : budgets) {
    VectorXd block(static_cast<Index>(b.indices.size()));
    for (std::size_t k = 0; k < b.indices.size(); ++k) block[static_cast<Index>(k)] = theta[b.indices[k]];
    VectorXd projected = b.absolute ? project_l1_ball(block, b.bound) : project_capped_simplex(block, b.bound);
    for (std::size_t k = 0; k < b.indices.size(); ++k) out[b.indices[k]] = projected[static_cast<Index>(k)];
  }
  return out;
}

namespace {

std::vector<Index> iota(Index first, Index count) {
  std::vector<Index> idx;
  for (Index k = 0; k < count; ++k) idx.push_back(first + k);
  return idx;
}

}  // namespace

ConstraintSet constraint_set(const ModelSpec& spec) {
  const Index d = dim(spec);
  const double c = 1.0 - limits::kConstraintMargin;
  const double inf = std::numeric_limits<double>::infinity();
  ConstraintSet cs{VectorXd::Constant(d, -inf), VectorXd::Constant(d, inf), {}};

  auto scale_sd = [&](Index i) {
    cs.lower[i] = std::sqrt(limits::kScaleVarianceFloor);
    cs.upper[i] = std::sqrt(limits::kScaleVarianceCeil);
  };
  auto scale_var = [&](Index i) {
    cs.lower[i] = limits::kScaleVarianceFloor;
    cs.upper[i] = limits::kScaleVarianceCeil;
  };
  auto absolute_budget = [&](Index first, Index count) {
    if (count == 0) return;
    for (Index i = first; i < first + count; ++i) {
      cs.lower[i] = -c;
      cs.upper[i] = c;
    }
    cs.budgets.push_back({iota(first, count), c, true});
  };

  const int p = spec.p, q = spec.q;
  switch (spec.family) {
    case Family::WhiteNoise:
      scale_sd(0);
      break;
    case Family::ARMA:
      // Separate AR and MA budgets: Σ|a_i| < 1 gives causality and
      // Σ|b_j| < 1 invertibility of the truncated ε̂ recursion.
      absolute_budget(0, p);
      absolute_budget(p, q);
      scale_sd(p + q);
      break;
    case Family::GARCH:
    case Family::APARCH: {
      scale_var(0);
      std::vector<Index> dynamic = iota(1, p);
      const Index b_first = spec.family == Family::GARCH ? 1 + p : 1 + 2 * p;
      for (Index j = 0; j < q; ++j) dynamic.push_back(b_first + j);
      for (Index i : dynamic) {
        cs.lower[i] = 0.0;
        cs.upper[i] = c;
      }
      if (spec.family == Family::APARCH) {
        for (Index i = 1 + p; i < 1 + 2 * p; ++i) {
          cs.lower[i] = -c;
          cs.upper[i] = c;
        }
      }
      if (!dynamic.empty()) cs.budgets.push_back({dynamic, c, false});
      break;
    }
    case Family::ARARCH:
      cs.lower[0] = -c;
      cs.upper[0] = c;
      scale_var(1);
      for (Index i = 2; i < 2 + p; ++i) {
        cs.lower[i] = 0.0;
        cs.upper[i] = c;
      }
      if (p > 0) cs.budgets.push_back({iota(2, p), c, false});
      break;
  }
  return cs;
}

}  // namespace qmlsel
