#pragma once

#include <vector>

#include "cdda/matrixcore.hpp"

// Data-parallel inner loops. The default namespace holds the OpenMP versions;
// kernels::serial holds the straight-line reference each one is tested against.
// Both evaluate every output element with the same arithmetic, so results are
// bit-identical regardless of thread count.
namespace cdda::kernels {

/// out(i, j) = ||a.col(i) - b.col(j)||^2.
Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b);

/// For each query column, the index of the nearest reference column
/// (squared Euclidean); ties go to the lowest reference index.
std::vector<Eigen::Index> nearest_columns(const Matrix& queries, const Matrix& refs);

/// w(i, j) = exp(-sq_dist(i, j) / (2 sigma^2)) off the diagonal, 0 on it.
Matrix gaussian_affinity(const Matrix& sq_dist, double sigma);

/// Worker count the OpenMP kernels will use (1 without OpenMP).
int max_threads();

namespace serial {
Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b);
std::vector<Eigen::Index> nearest_columns(const Matrix& queries, const Matrix& refs);
Matrix gaussian_affinity(const Matrix& sq_dist, double sigma);
}  // namespace serial

}  // namespace cdda::kernels
