#pragma once

#include <vector>

#include <Eigen/Core>

#include "qmlsel/model.hpp"

namespace qmlsel {

/// A linear inequality Σ_{i∈indices} w(θ_i) ≤ bound, with w(v) = |v| for
/// absolute budgets and w(v) = v (together with v ≥ 0) otherwise.
struct Budget {
  std::vector<Eigen::Index> indices;
  double bound = 0.0;
  bool absolute = false;
};

/// Box bounds plus disjoint budgets. Coordinates covered by a budget have
/// box bounds implied by it ([0, bound] or [-bound, bound]).
struct ConstraintSet {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<Budget> budgets;

  /// Membership with an absolute slack `tol` on every inequality.
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& theta, double tol = 0.0) const;

  /// Exact Euclidean projection onto the set.
  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& theta) const;
};

ConstraintSet constraint_set(const ModelSpec& spec);

inline bool is_feasible(const ParamVector& theta, double tol = 1e-12) {
  return constraint_set(theta.spec).contains(theta.values, tol);
}

/// Projection of v onto {w : w ≥ 0, Σw ≤ radius}.
Eigen::VectorXd project_capped_simplex(const Eigen::Ref<const Eigen::VectorXd>& v, double radius);

/// Projection of v onto the l1 ball of the given radius.
Eigen::VectorXd project_l1_ball(const Eigen::Ref<const Eigen::VectorXd>& v, double radius);

}  // namespace qmlsel
