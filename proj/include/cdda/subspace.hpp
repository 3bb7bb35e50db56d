#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cdda/domain.hpp"
#include "cdda/mmd.hpp"

namespace cdda {

struct Projection {
  Matrix adaptation;  // m x k
  Vector eigenvalues; // ascending, length k
  Eigen::Index k = 0;
  double lambda = 0.0;
  double rhs_ridge = 0.0;
  std::optional<Eigen::Index> requested_k;  // set when k was clamped
  std::vector<std::string> warnings;
};

struct Embedding {
  Matrix data;  // k x (n_s + n_t)
};

struct SubspaceOptions {
  // Ridge added to X H X^T before factoring; nullopt selects default_ridge().
  std::optional<double> rhs_ridge;
};

/// Largest admissible subspace dimension for x: min(m, n - 1).
Eigen::Index max_subspace_dim(const FeatureMatrix& x);

/// X H X^T, the scatter of the centered data.
SymMatrix centered_scatter(const Matrix& x);

/// Solves (X M X^T + lambda I) A = X H X^T A Phi for the k smallest Phi.
/// Columns of A are scaled so that A^T (X H X^T + ridge I) A = I and their
/// first nonzero coordinate is positive. k above max_subspace_dim() is clamped
/// and reported in Projection::warnings.
Projection fit_projection(const FeatureMatrix& x, const MmdMatrix& m_cyd, Eigen::Index k,
                          double lambda, const SubspaceOptions& options = {});

/// Top-k principal directions of the centered data (orthonormal columns).
Projection fit_pca(const FeatureMatrix& x, Eigen::Index k);

/// Z = A^T X.
Embedding embed(const Matrix& x, const Projection& proj);
inline Embedding embed(const FeatureMatrix& x, const Projection& proj) {
  return embed(x.data(), proj);
}

/// tr(A^T X M X^T A) + lambda ||A||_F^2 for a fitted projection.
double projection_objective(const FeatureMatrix& x, const MmdMatrix& m_cyd, const Projection& proj);

}  // namespace cdda
