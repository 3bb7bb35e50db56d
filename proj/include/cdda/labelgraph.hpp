#pragma once

#include "cdda/domain.hpp"
#include "cdda/subspace.hpp"

namespace cdda {

/// Row-per-sample class scores, source rows first.
struct SoftLabels {
  Matrix probabilities;  // (n_s + n_t) x C
  double alpha = 0.0;
};

struct BandwidthPolicy {
  enum class Kind { Median, Fixed } kind = Kind::Median;
  double sigma = 1.0;  // used when kind == Fixed

  static BandwidthPolicy median() { return {}; }
  static BandwidthPolicy fixed(double s) { return {Kind::Fixed, s}; }
};

struct AffinityGraph {
  Matrix weights;  // symmetric, zero diagonal
  Vector degrees;
  double bandwidth = 0.0;

  /// I - D^-1/2 W D^-1/2.
  Matrix normalized_laplacian() const;
};

enum class PropagationOperator {
  Unnormalized,  // (D - alpha W)^-1 Y0
  Normalized,    // (I - alpha D^-1/2 W D^-1/2)^-1 Y0
};

enum class DecodeRange { TargetOnly, All };

inline constexpr double kDegreeFloor = 1e-12;

/// Label of the Euclidean-nearest source column for every target column of z.
/// The first source_labels.size() columns of z are the source samples.
Labels nn_classify(const Matrix& z, const Labels& source_labels);
inline Labels nn_classify(const Embedding& z, const Labels& source_labels) {
  return nn_classify(z.data, source_labels);
}

/// One-hot rows for source labels followed by target pseudo-labels.
SoftLabels init_soft_labels(const LabelState& labels, double alpha = 0.0);

/// Dense Gaussian affinity over the columns of z. With knn > 0 an edge is kept
/// only when one endpoint is among the other's knn nearest neighbours, and the
/// degree floor kDegreeFloor keeps every vertex connected.
AffinityGraph build_affinity(const Matrix& z, const BandwidthPolicy& policy, int knn = 0);
inline AffinityGraph build_affinity(const Embedding& z, const BandwidthPolicy& policy,
                                    int knn = 0) {
  return build_affinity(z.data, policy, knn);
}

/// Median of the nonzero pairwise distances between columns of z (upper median
/// when the count is even).
double median_bandwidth(const Matrix& z);

/// sum over classes of y^T L y, via (1/2) sum_ij w_ij (y_i/sqrt(d_i) - y_j/sqrt(d_j))^2.
double gsc_cost(const AffinityGraph& graph, const SoftLabels& y);

/// sum_ij |y_ij - y0_ij|.
double lsc_cost(const SoftLabels& y, const SoftLabels& y0);

/// Closed-form propagation by a Cholesky solve; never forms an inverse.
SoftLabels propagate(const AffinityGraph& graph, const SoftLabels& y0, double alpha,
                     PropagationOperator op = PropagationOperator::Unnormalized);

/// The system matrix propagate() solves against.
Matrix propagation_system(const AffinityGraph& graph, double alpha, PropagationOperator op);

/// Row argmax, ties to the lowest class. TargetOnly returns rows n_source.. only.
Labels decode(const SoftLabels& y, DecodeRange range, Eigen::Index n_source = 0);

}  // namespace cdda
