#include "cdda/labelgraph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cdda/kernels.hpp"

namespace cdda {

Matrix AffinityGraph::normalized_laplacian() const {
  const Vector inv_sqrt = degrees.array().rsqrt();
  Matrix l = -(inv_sqrt.asDiagonal() * weights * inv_sqrt.asDiagonal());
  l.diagonal().array() += 1.0;
  return l;
}

Labels nn_classify(const Matrix& z, const Labels& source_labels) {
  const auto n_source = static_cast<Eigen::Index>(source_labels.size());
  if (n_source == 0) {
    throw Error(ErrorKind::InvalidInput, "nearest-neighbour labelling needs source samples");
  }
  if (z.cols() < n_source) {
    throw Error(ErrorKind::InvalidDimension, "embedding has fewer columns than source labels");
  }
  const auto nearest =
      kernels::nearest_columns(z.rightCols(z.cols() - n_source), z.leftCols(n_source));
  Labels out(nearest.size());
  for (std::size_t i = 0; i < nearest.size(); ++i) {
    out[i] = source_labels[static_cast<std::size_t>(nearest[i])];
  }
  return out;
}

SoftLabels init_soft_labels(const LabelState& labels, double alpha) {
  if (!labels.target_pseudo) {
    throw Error(ErrorKind::InvalidState, "soft labels need target pseudo-labels");
  }
  const auto& tgt = *labels.target_pseudo;
  const auto n = static_cast<Eigen::Index>(labels.source.size() + tgt.size());
  SoftLabels y{Matrix::Zero(n, labels.class_count), alpha};
  Eigen::Index row = 0;
  for (int c : labels.source) y.probabilities(row++, c) = 1.0;
  for (int c : tgt) y.probabilities(row++, c) = 1.0;
  return y;
}

double median_bandwidth(const Matrix& z) {
  const Matrix sq = kernels::pairwise_sq_distances(z, z);
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(z.cols() * (z.cols() - 1) / 2));
  for (Eigen::Index j = 1; j < sq.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (sq(i, j) > 0.0) dists.push_back(std::sqrt(sq(i, j)));
    }
  }
  if (dists.empty()) {
    throw Error(ErrorKind::DegenerateBandwidth,
                "all samples coincide; the median bandwidth is zero, use a fixed sigma");
  }
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  return *mid;
}

AffinityGraph build_affinity(const Matrix& z, const BandwidthPolicy& policy, int knn) {
  if (z.cols() < 2) {
    throw Error(ErrorKind::InvalidDimension, "affinity graph needs at least two samples");
  }
  AffinityGraph g;
  if (policy.kind == BandwidthPolicy::Kind::Median) {
    g.bandwidth = median_bandwidth(z);
  } else {
    if (!(policy.sigma > 0.0) || !std::isfinite(policy.sigma)) {
      throw Error(ErrorKind::InvalidInput, "fixed bandwidth must be positive and finite");
    }
    g.bandwidth = policy.sigma;
  }
  const Matrix sq = kernels::pairwise_sq_distances(z, z);
  g.weights = kernels::gaussian_affinity(sq, g.bandwidth);

  if (knn > 0 && knn < z.cols() - 1) {
    const Eigen::Index n = z.cols();
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> keep =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) order[static_cast<std::size_t>(j)] = j;
      std::erase(order, i);
      std::partial_sort(order.begin(), order.begin() + knn, order.end(),
                        [&](Eigen::Index a, Eigen::Index b) {
                          return sq(a, i) < sq(b, i) || (sq(a, i) == sq(b, i) && a < b);
                        });
      for (int r = 0; r < knn; ++r) {
        const Eigen::Index j = order[static_cast<std::size_t>(r)];
        keep(i, j) = keep(j, i) = true;
      }
      order.resize(static_cast<std::size_t>(n));
    }
    g.weights = keep.select(g.weights, 0.0);
    g.degrees = g.weights.rowwise().sum();
    g.degrees.array() += kDegreeFloor;
  } else {
    g.degrees = g.weights.rowwise().sum();
  }
  return g;
}

namespace {

void check_degrees(const AffinityGraph& graph) {
  if ((graph.degrees.array() <= 0.0).any()) {
    throw Error(ErrorKind::InvalidGraph, "graph has a vertex with zero degree");
  }
}

}  // namespace

double gsc_cost(const AffinityGraph& graph, const SoftLabels& y) {
  const Eigen::Index n = graph.weights.rows();
  if (y.probabilities.rows() != n) {
    throw Error(ErrorKind::InvalidDimension, "soft labels and graph differ in sample count");
  }
  check_degrees(graph);
  const Matrix scaled = graph.degrees.array().rsqrt().matrix().asDiagonal() * y.probabilities;
  double cost = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = graph.weights(i, j);
      if (w == 0.0) continue;
      cost += w * (scaled.row(i) - scaled.row(j)).squaredNorm();
    }
  }
  return 0.5 * cost;
}

double lsc_cost(const SoftLabels& y, const SoftLabels& y0) {
  if (y.probabilities.rows() != y0.probabilities.rows() ||
      y.probabilities.cols() != y0.probabilities.cols()) {
    throw Error(ErrorKind::InvalidDimension, "soft label shapes differ");
  }
  return (y.probabilities - y0.probabilities).cwiseAbs().sum();
}

Matrix propagation_system(const AffinityGraph& graph, double alpha, PropagationOperator op) {
  if (op == PropagationOperator::Unnormalized) {
    Matrix s = -alpha * graph.weights;
    s.diagonal() += graph.degrees;
    return s;
  }
  const Vector inv_sqrt = graph.degrees.array().rsqrt();
  Matrix s = -alpha * (inv_sqrt.asDiagonal() * graph.weights * inv_sqrt.asDiagonal());
  s.diagonal().array() += 1.0;
  return s;
}

SoftLabels propagate(const AffinityGraph& graph, const SoftLabels& y0, double alpha,
                     PropagationOperator op) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::InvalidInput, "alpha must lie in (0, 1)");
  }
  if (y0.probabilities.rows() != graph.weights.rows()) {
    throw Error(ErrorKind::InvalidDimension, "soft labels and graph differ in sample count");
  }
  check_degrees(graph);
  const Matrix system = propagation_system(graph, alpha, op);
  Eigen::LLT<Matrix> llt(system);
  SoftLabels out{Matrix(), alpha};
  if (llt.info() == Eigen::Success) {
    out.probabilities = llt.solve(y0.probabilities);
  }
  if (llt.info() != Eigen::Success || !out.probabilities.allFinite()) {
    throw Error(ErrorKind::SingularMatrix, "propagation system is singular");
  }
  return out;
}

Labels decode(const SoftLabels& y, DecodeRange range, Eigen::Index n_source) {
  const Matrix& p = y.probabilities;
  const Eigen::Index first = range == DecodeRange::TargetOnly ? n_source : 0;
  if (first < 0 || first > p.rows()) {
    throw Error(ErrorKind::InvalidDimension, "decode offset outside the label matrix");
  }
  Labels out(static_cast<std::size_t>(p.rows() - first));
  for (Eigen::Index i = first; i < p.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < p.cols(); ++c) {
      if (p(i, c) > p(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i - first)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace cdda
