#include "cdda/matrixcore.hpp"

#include <cmath>
#include <sstream>

namespace cdda {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDimension: return "invalid dimension";
    case ErrorKind::InvalidLabel: return "invalid label";
    case ErrorKind::InvalidInput: return "invalid input";
    case ErrorKind::InvalidState: return "invalid state";
    case ErrorKind::InvalidGraph: return "invalid graph";
    case ErrorKind::SingularMatrix: return "singular matrix";
    case ErrorKind::DegenerateBandwidth: return "degenerate bandwidth";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::InvalidSpec: return "invalid spec";
    case ErrorKind::Config: return "config error";
  }
  return "error";
}

SymMatrix::SymMatrix(Matrix entries) {
  if (entries.rows() != entries.cols() || entries.rows() < 1) {
    std::ostringstream os;
    os << "symmetric matrix must be square with order >= 1, got " << entries.rows() << "x"
       << entries.cols();
    throw Error(ErrorKind::InvalidDimension, os.str());
  }
  m_ = 0.5 * (entries + entries.transpose());
}

SymMatrix SymMatrix::zero(Eigen::Index order) {
  return SymMatrix(Matrix::Zero(order, order));
}

SymMatrix SymMatrix::identity(Eigen::Index order) {
  return SymMatrix(Matrix::Identity(order, order));
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  return add_scaled(other, 1.0);
}

SymMatrix& SymMatrix::add_scaled(const SymMatrix& other, double scale) {
  if (other.order() != order()) {
    throw Error(ErrorKind::InvalidDimension, "order mismatch in symmetric sum");
  }
  m_ += scale * other.m_;
  return *this;
}

SymMatrix centering_matrix(Eigen::Index n) {
  if (n < 1) {
    throw Error(ErrorKind::InvalidDimension, "centering matrix needs n >= 1");
  }
  Matrix h = Matrix::Identity(n, n);
  h.array() -= 1.0 / static_cast<double>(n);
  return SymMatrix(std::move(h));
}

double trace_form(const Matrix& a, const Matrix& x, const SymMatrix& m) {
  if (a.rows() != x.rows() || x.cols() != m.order()) {
    std::ostringstream os;
    os << "trace form shapes A " << a.rows() << "x" << a.cols() << ", X " << x.rows() << "x"
       << x.cols() << ", M order " << m.order();
    throw Error(ErrorKind::InvalidDimension, os.str());
  }
  const Matrix p = x.transpose() * a;  // n x k
  const Matrix mp = m.entries() * p;
  return (mp.array() * p.array()).sum();
}

double default_ridge(const SymMatrix& rhs) {
  const double scale = rhs.entries().trace() / static_cast<double>(rhs.order());
  return tol::kRelativeRidge * std::max(scale, 0.0);
}

EigenPair generalized_eigs(const SymMatrix& lhs, const SymMatrix& rhs, Eigen::Index k,
                           double rhs_ridge) {
  const Eigen::Index n = lhs.order();
  if (rhs.order() != n) {
    throw Error(ErrorKind::InvalidDimension, "pencil matrices differ in order");
  }
  if (k < 1 || k > n) {
    std::ostringstream os;
    os << "requested " << k << " eigenpairs of an order-" << n << " pencil";
    throw Error(ErrorKind::InvalidDimension, os.str());
  }
  if (!(rhs_ridge >= 0.0)) {
    throw Error(ErrorKind::InvalidInput, "rhs ridge must be non-negative");
  }

  Matrix b = rhs.entries();
  b.diagonal().array() += rhs_ridge;
  Eigen::LLT<Matrix> llt(b);
  if (llt.info() != Eigen::Success || !llt.matrixLLT().allFinite()) {
    std::ostringstream os;
    os << "right-hand matrix is not positive definite with ridge " << rhs_ridge
       << "; use a larger ridge";
    throw Error(ErrorKind::SingularMatrix, os.str());
  }
  const auto lower = llt.matrixL();
  Matrix reduced = lower.solve(lhs.entries());
  reduced = lower.solve(reduced.transpose()).transpose();
  reduced = 0.5 * (reduced + reduced.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(reduced);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularMatrix, "reduced eigenproblem did not converge");
  }
  EigenPair out;
  out.values = eig.eigenvalues().head(k);
  out.vectors = llt.matrixU().solve(eig.eigenvectors().leftCols(k));
  if (!out.vectors.allFinite() || !out.values.allFinite()) {
    throw Error(ErrorKind::SingularMatrix, "non-finite eigenpairs; use a larger ridge");
  }
  return out;
}

void canonicalize_signs(Matrix& vectors, double eps) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      const double v = vectors(i, j);
      if (std::abs(v) > eps) {
        if (v < 0) vectors.col(j) *= -1.0;
        break;
      }
    }
  }
}

}  // namespace cdda
