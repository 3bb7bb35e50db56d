#include <cmath>
#include <limits>

#include "cdda/kernels.hpp"

namespace cdda::kernels::serial {

namespace {
void check_rows(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorKind::InvalidDimension, "column sets differ in feature dimension");
  }
}
}  // namespace

Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b) {
  check_rows(a, b);
  Matrix out(a.cols(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
      double acc = 0.0;
      for (Eigen::Index r = 0; r < a.rows(); ++r) {
        const double d = a(r, i) - b(r, j);
        acc += d * d;
      }
      out(i, j) = acc;
    }
  }
  return out;
}

std::vector<Eigen::Index> nearest_columns(const Matrix& queries, const Matrix& refs) {
  check_rows(queries, refs);
  if (refs.cols() == 0) {
    throw Error(ErrorKind::InvalidInput, "nearest neighbour needs at least one reference");
  }
  std::vector<Eigen::Index> out(static_cast<std::size_t>(queries.cols()));
  for (Eigen::Index q = 0; q < queries.cols(); ++q) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = 0;
    for (Eigen::Index j = 0; j < refs.cols(); ++j) {
      double acc = 0.0;
      for (Eigen::Index r = 0; r < refs.rows(); ++r) {
        const double d = queries(r, q) - refs(r, j);
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
  Matrix w(sq_dist.rows(), sq_dist.cols());
  for (Eigen::Index j = 0; j < sq_dist.cols(); ++j) {
    for (Eigen::Index i = 0; i < sq_dist.rows(); ++i) {
      w(i, j) = i == j ? 0.0 : std::exp(-sq_dist(i, j) / denom);
    }
  }
  return w;
}

}  // namespace cdda::kernels::serial
