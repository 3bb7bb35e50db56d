#pragma once

#include <Eigen/Dense>

#include "cdda/error.hpp"

namespace cdda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace tol {
// Defaults; every consumer takes the tolerance as an argument.
inline constexpr double kIdempotence = 1e-12;
inline constexpr double kBOrthonormal = 1e-6;
inline constexpr double kRelativeRidge = 1e-9;
}  // namespace tol

/// Dense symmetric matrix. Construction symmetrizes as (S + S^T) / 2, so
/// entries(i, j) == entries(j, i) holds bit-exactly afterwards.
class SymMatrix {
 public:
  explicit SymMatrix(Matrix entries);
  static SymMatrix zero(Eigen::Index order);
  static SymMatrix identity(Eigen::Index order);

  Eigen::Index order() const { return m_.rows(); }
  const Matrix& entries() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& add_scaled(const SymMatrix& other, double scale);

 private:
  SymMatrix() = default;
  Matrix m_;
};

struct EigenPair {
  Vector values;   // ascending
  Matrix vectors;  // one column per value
};

/// H = I - (1/n) 11^T.
SymMatrix centering_matrix(Eigen::Index n);

/// tr(A^T X M X^T A), evaluated through the n x k product X^T A.
double trace_form(const Matrix& a, const Matrix& x, const SymMatrix& m);

/// Default ridge used when the caller has no preference: 1e-9 * tr(rhs) / n.
double default_ridge(const SymMatrix& rhs);

/// Smallest-k eigenpairs of lhs a = phi (rhs + ridge I) a.
///
/// The right-hand matrix is Cholesky-factored as L L^T and the pencil reduced
/// to the standard problem L^-1 lhs L^-T, whose eigenvalues are real even when
/// lhs is indefinite. Returned vectors satisfy V^T (rhs + ridge I) V = I.
/// Throws SingularMatrix when rhs + ridge I is not positive definite.
EigenPair generalized_eigs(const SymMatrix& lhs, const SymMatrix& rhs, Eigen::Index k,
                           double rhs_ridge);

/// Flips each column so its first coordinate with |v| > eps is positive.
void canonicalize_signs(Matrix& vectors, double eps = 1e-12);

}  // namespace cdda
