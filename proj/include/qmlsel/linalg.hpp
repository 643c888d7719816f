#pragma once

#include <cmath>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

namespace qmlsel {

/// Ratio of the smallest to the largest eigenvalue of a symmetric matrix
/// (negative when the matrix is indefinite).
template <typename Derived>
typename Derived::Scalar eigen_ratio(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.derived(), Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  const Scalar largest = ev.maxCoeff();
  if (!(largest > Scalar(0))) return Scalar(-1);
  return ev.minCoeff() / largest;
}

/// log det(A) for symmetric positive-definite A via Cholesky; nullopt when
/// the factorization breaks down.
template <typename Derived>
std::optional<typename Derived::Scalar> log_det_spd(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::LLT<Matrix> llt(a.derived());
  if (llt.info() != Eigen::Success) return std::nullopt;
  Scalar acc(0);
  for (Eigen::Index i = 0; i < a.rows(); ++i) acc += std::log(llt.matrixL()(i, i));
  return Scalar(2) * acc;
}

/// Trace(A⁻¹ B) for SPD A, by a Cholesky solve rather than an inverse.
template <typename DerivedA, typename DerivedB>
std::optional<typename DerivedA::Scalar> trace_solve_spd(const Eigen::MatrixBase<DerivedA>& a,
                                                         const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::LLT<Matrix> llt(a.derived());
  if (llt.info() != Eigen::Success) return std::nullopt;
  return llt.solve(b.derived()).trace();
}

}  // namespace qmlsel
