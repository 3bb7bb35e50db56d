#include <cmath>
#include <limits>

#include "cdda/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cdda::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorKind::InvalidDimension, "column sets differ in feature dimension");
  }
  const Eigen::Index na = a.cols();
  const Eigen::Index nb = b.cols();
  const Eigen::Index dim = a.rows();
  Matrix out(na, nb);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < nb; ++j) {
    const double* bj = b.col(j).data();
    for (Eigen::Index i = 0; i < na; ++i) {
      const double* ai = a.col(i).data();
      double acc = 0.0;
      for (Eigen::Index r = 0; r < dim; ++r) {
        const double d = ai[r] - bj[r];
        acc += d * d;
      }
      out(i, j) = acc;
    }
  }
  return out;
}

std::vector<Eigen::Index> nearest_columns(const Matrix& queries, const Matrix& refs) {
  if (queries.rows() != refs.rows()) {
    throw Error(ErrorKind::InvalidDimension, "column sets differ in feature dimension");
  }
  if (refs.cols() == 0) {
    throw Error(ErrorKind::InvalidInput, "nearest neighbour needs at least one reference");
  }
  const Eigen::Index nq = queries.cols();
  const Eigen::Index nr = refs.cols();
  const Eigen::Index dim = refs.rows();
  std::vector<Eigen::Index> out(static_cast<std::size_t>(nq));
#pragma omp parallel for schedule(static)
  for (Eigen::Index q = 0; q < nq; ++q) {
    const double* xq = queries.col(q).data();
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = 0;
    for (Eigen::Index j = 0; j < nr; ++j) {
      const double* xr = refs.col(j).data();
      double acc = 0.0;
      for (Eigen::Index r = 0; r < dim; ++r) {
        const double d = xq[r] - xr[r];
        acc += d * d;
      }
      if (acc < best) {
        best = acc;
        arg = j;
      }
    }
    out[static_cast<std::size_t>(q)] = arg;
  }
  return out;
}

Matrix gaussian_affinity(const Matrix& sq_dist, double sigma) {
  const double denom = 2.0 * sigma * sigma;
  const Eigen::Index rows = sq_dist.rows();
  const Eigen::Index cols = sq_dist.cols();
  Matrix w(rows, cols);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      w(i, j) = i == j ? 0.0 : std::exp(-sq_dist(i, j) / denom);
    }
  }
  return w;
}

}  // namespace cdda::kernels
