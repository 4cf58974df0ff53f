#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>

#include "seqlogic/errors.hpp"

namespace seqlogic {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

// Numeric gates shared across the library.
inline constexpr double kAlgebraTol = 1e-9;       // algebraic identities, max-abs entrywise
inline constexpr double kSqrtTol = 1e-8;          // identities involving a matrix square root
inline constexpr double kNormTol = 1e-12;         // |  ||psi||^2 - 1 |  for "normalized"
inline constexpr double kBranchPruneTol = 1e-12;  // probabilities below this count as zero
inline constexpr double kFidelityTol = 1e-9;      // 1 - fidelity for state agreement

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b,
                         double tol = kAlgebraTol) {
  return a.rows() == b.rows() && a.cols() == b.cols() && max_abs(a - b) <= tol;
}

inline bool is_normalized(const StateVector& v) {
  return std::abs(v.squaredNorm() - 1.0) <= kNormTol;
}

inline double unitarity_defect(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return 1.0;
  return max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.cols(), u.cols()));
}

inline bool is_unitary(const ComplexMatrix& u, double tol = kAlgebraTol) {
  return unitarity_defect(u) <= tol;
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = kAlgebraTol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint().eval()) <= tol;
}

inline bool is_projector(const ComplexMatrix& p, double tol = kAlgebraTol) {
  return is_hermitian(p, tol) && max_abs(p * p - p) <= tol;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// |<a|b>|^2 / (||a||^2 ||b||^2); global-phase invariant, 0 if either vanishes.
inline double fidelity(const StateVector& a, const StateVector& b) {
  double na = a.squaredNorm(), nb = b.squaredNorm();
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return std::norm(a.dot(b)) / (na * nb);
}

/// Multiplies by a unit phase so the first entry with magnitude above 1e-9
/// becomes real positive. Makes eigenvector-derived states deterministic.
inline StateVector phase_fixed(StateVector v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double m = std::abs(v[i]);
    if (m > 1e-9) {
      v *= std::conj(v[i]) / m;
      break;
    }
  }
  return v;
}

/// Unique PSD square root via spectral decomposition. Input must be Hermitian
/// with eigenvalues >= -1e-9; small negative eigenvalues are clamped to zero.
inline ComplexMatrix matrix_sqrt_psd(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) throw Error("matrix_sqrt_psd: matrix is not square");
  if (!is_hermitian(h)) throw Error("matrix_sqrt_psd: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  if (es.info() != Eigen::Success) throw Error("matrix_sqrt_psd: eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -kAlgebraTol)
      throw Error("matrix_sqrt_psd: negative eigenvalue " + std::to_string(ev[i]));
    if (ev[i] < 0.0) ev[i] = 0.0;
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace seqlogic
