#include "cdda/subspace.hpp"

#include <algorithm>
#include <sstream>

namespace cdda {

namespace {

Eigen::Index clamp_k(Eigen::Index requested, Eigen::Index limit, Projection& proj) {
  if (requested < 1) {
    throw Error(ErrorKind::InvalidDimension, "subspace dimension must be >= 1");
  }
  if (limit < 1) {
    throw Error(ErrorKind::InvalidDimension, "data admit no subspace (need n >= 2)");
  }
  if (requested <= limit) return requested;
  std::ostringstream os;
  os << "subspace dimension " << requested << " clamped to " << limit;
  proj.requested_k = requested;
  proj.warnings.push_back(os.str());
  return limit;
}

}  // namespace

Eigen::Index max_subspace_dim(const FeatureMatrix& x) {
  return std::min(x.dim(), x.size() - 1);
}

SymMatrix centered_scatter(const Matrix& x) {
  const Matrix centered = x.colwise() - x.rowwise().mean();
  return SymMatrix(centered * centered.transpose());
}

Projection fit_projection(const FeatureMatrix& x, const MmdMatrix& m_cyd, Eigen::Index k,
                          double lambda, const SubspaceOptions& options) {
  if (m_cyd.matrix.order() != x.size()) {
    throw Error(ErrorKind::InvalidDimension, "MMD matrix order differs from sample count");
  }
  if (!(lambda >= 0.0)) {
    throw Error(ErrorKind::InvalidInput, "lambda must be non-negative");
  }
  Projection proj;
  proj.k = clamp_k(k, max_subspace_dim(x), proj);
  proj.lambda = lambda;

  const Matrix& data = x.data();
  Matrix objective = (data * m_cyd.matrix.entries()) * data.transpose();
  objective.diagonal().array() += lambda;
  const SymMatrix lhs(std::move(objective));
  const SymMatrix rhs = centered_scatter(data);
  proj.rhs_ridge = options.rhs_ridge.value_or(default_ridge(rhs));

  EigenPair eig = generalized_eigs(lhs, rhs, proj.k, proj.rhs_ridge);
  canonicalize_signs(eig.vectors);
  proj.adaptation = std::move(eig.vectors);
  proj.eigenvalues = std::move(eig.values);
  return proj;
}

Projection fit_pca(const FeatureMatrix& x, Eigen::Index k) {
  Projection proj;
  proj.k = clamp_k(k, max_subspace_dim(x), proj);
  const SymMatrix scatter = centered_scatter(x.data());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(scatter.entries());
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularMatrix, "scatter eigendecomposition did not converge");
  }
  // Eigen sorts ascending; the leading directions are the last columns.
  proj.adaptation = eig.eigenvectors().rightCols(proj.k).rowwise().reverse();
  proj.eigenvalues = eig.eigenvalues().tail(proj.k).reverse();
  canonicalize_signs(proj.adaptation);
  return proj;
}

Embedding embed(const Matrix& x, const Projection& proj) {
  if (proj.adaptation.rows() != x.rows()) {
    std::ostringstream os;
    os << "projection expects " << proj.adaptation.rows() << " features, data have " << x.rows();
    throw Error(ErrorKind::InvalidDimension, os.str());
  }
  return Embedding{proj.adaptation.transpose() * x};
}

double projection_objective(const FeatureMatrix& x, const MmdMatrix& m_cyd, const Projection& proj) {
  return trace_form(proj.adaptation, x.data(), m_cyd.matrix) +
         proj.lambda * proj.adaptation.squaredNorm();
}

}  // namespace cdda
