#pragma once

#include <cmath>
#include <limits>
#include <sstream>

#include "qlim/core.hpp"

namespace qlim {

template <typename DerivedA, typename DerivedB>
ComplexMatrix<typename DerivedA::RealScalar> overlap_matrix(const Eigen::MatrixBase<DerivedA>& c,
                                                           const Eigen::MatrixBase<DerivedB>& c_prime) {
  if (c.rows() != c_prime.rows() || c.cols() != c_prime.cols())
    throw ValidationError("amplitude matrices differ in shape");
  return c.adjoint() * c_prime;
}

template <typename Derived>
Eigen::JacobiSVD<ComplexMatrix<typename Derived::RealScalar>> checked_svd(const Eigen::MatrixBase<Derived>& m) {
  using Real = typename Derived::RealScalar;
  if (!m.allFinite()) throw NumericalError("matrix has non-finite entries");
  Eigen::JacobiSVD<ComplexMatrix<Real>> svd(m.derived(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    std::ostringstream os;
    os << "SVD did not converge (" << m.rows() << "x" << m.cols() << ", frobenius " << m.norm() << ")";
    throw NumericalError(os.str());
  }
  return svd;
}

// Sum of singular values.
template <typename Derived>
typename Derived::RealScalar trace_norm(const Eigen::MatrixBase<Derived>& m) {
  return checked_svd(m).singularValues().sum();
}

template <typename Derived>
typename Derived::RealScalar quantum_fidelity(const Eigen::MatrixBase<Derived>& m) {
  return trace_norm(m);
}

// 1 - |C^dag C'|_1 evaluated as (1/2)|C - C' W V^dag|_F^2 where C^dag C' = V D W^dag.
// Exact when both column sets are normalized, and free of the cancellation in 1 - sum(D).
template <typename DerivedA, typename DerivedB>
typename DerivedA::RealScalar fidelity_deficit(const Eigen::MatrixBase<DerivedA>& c,
                                               const Eigen::MatrixBase<DerivedB>& c_prime) {
  const auto svd = checked_svd(overlap_matrix(c, c_prime));
  return 0.5 * (c - c_prime * svd.matrixV() * svd.matrixU().adjoint()).squaredNorm();
}

template <typename Derived>
typename Derived::RealScalar unitarity_defect(const Eigen::MatrixBase<Derived>& r) {
  using Real = typename Derived::RealScalar;
  if (r.rows() != r.cols()) return std::numeric_limits<Real>::infinity();
  return (r.adjoint() * r - ComplexMatrix<Real>::Identity(r.rows(), r.cols())).norm();
}

template <typename Derived>
void require_unitary(const Eigen::MatrixBase<Derived>& r, typename Derived::RealScalar tol = 1e-10) {
  const auto defect = unitarity_defect(r);
  if (!(defect <= tol)) {
    std::ostringstream os;
    os << "interferometer is not unitary (|R^dag R - I|_F = " << defect << ")";
    throw ValidationError(os.str());
  }
}

// p_q = sum_s |(R C)_{qs}|^2.
template <typename DerivedR, typename DerivedC>
Eigen::Matrix<typename DerivedC::RealScalar, Eigen::Dynamic, 1> detection_probabilities(
    const Eigen::MatrixBase<DerivedC>& c, const Eigen::MatrixBase<DerivedR>& r) {
  if (r.cols() != c.rows()) throw ValidationError("interferometer size does not match collector count");
  require_unitary(r);
  return (r * c).rowwise().squaredNorm();
}

template <typename DerivedA, typename DerivedB, typename DerivedR>
typename DerivedA::RealScalar classical_fidelity(const Eigen::MatrixBase<DerivedA>& c,
                                                 const Eigen::MatrixBase<DerivedB>& c_prime,
                                                 const Eigen::MatrixBase<DerivedR>& r) {
  const auto p = detection_probabilities(c, r);
  const auto q = detection_probabilities(c_prime, r);
  return (p.array() * q.array()).sqrt().sum();
}

// 1 - sum_q sqrt(p_q q_q) as (1/2) sum_q (sqrt p_q - sqrt q_q)^2, with p - q taken from R(C - C').
template <typename DerivedA, typename DerivedB, typename DerivedR>
typename DerivedA::RealScalar classical_fidelity_deficit(const Eigen::MatrixBase<DerivedA>& c,
                                                         const Eigen::MatrixBase<DerivedB>& c_prime,
                                                         const Eigen::MatrixBase<DerivedR>& r) {
  using Real = typename DerivedA::RealScalar;
  require_unitary(r);
  const ComplexMatrix<Real> a = r * c;
  const ComplexMatrix<Real> b = r * c_prime;
  const ComplexMatrix<Real> diff = r * (c - c_prime);
  Real total = 0;
  for (Eigen::Index q = 0; q < a.rows(); ++q) {
    const Real p = a.row(q).squaredNorm();
    const Real pp = b.row(q).squaredNorm();
    // |a|^2 - |b|^2 = Re((a - b)^* (a + b)) summed over sources.
    const Real dp = (diff.row(q).conjugate().cwiseProduct(a.row(q) + b.row(q))).sum().real();
    const Real denom = std::sqrt(p) + std::sqrt(pp);
    if (denom > 0) total += (dp / denom) * (dp / denom);
  }
  return total / 2;
}

}  // namespace qlim
