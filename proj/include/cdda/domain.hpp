#pragma once

#include <optional>
#include <vector>

#include "cdda/matrixcore.hpp"

namespace cdda {

/// Class indices are 0-based inside the library; files and the CLI use 1-based
/// labels and convert at the boundary.
using Labels = std::vector<int>;

Labels to_zero_based(const std::vector<int>& one_based, int class_count);
std::vector<int> to_one_based(const Labels& labels);

/// Column-per-sample features: columns [0, n_s) are source, [n_s, n_s + n_t) target.
class FeatureMatrix {
 public:
  FeatureMatrix(Matrix data, Eigen::Index n_source);
  static FeatureMatrix stack(const Matrix& source, const Matrix& target);

  const Matrix& data() const { return data_; }
  Eigen::Index dim() const { return data_.rows(); }
  Eigen::Index n_source() const { return n_source_; }
  Eigen::Index n_target() const { return data_.cols() - n_source_; }
  Eigen::Index size() const { return data_.cols(); }

  auto source() const { return data_.leftCols(n_source_); }
  auto target() const { return data_.rightCols(n_target()); }

 private:
  Matrix data_;
  Eigen::Index n_source_;
};

struct LabelState {
  Labels source;
  std::optional<Labels> target_pseudo;
  int class_count = 0;

  /// Validates every label against [0, class_count).
  LabelState(Labels source_labels, std::optional<Labels> target, int classes);
};

/// Per-class membership of both domains, as global column indices in ascending
/// order. Empty sub-domains are representable.
class SubdomainIndex {
 public:
  explicit SubdomainIndex(const LabelState& labels);

  int class_count() const { return static_cast<int>(source_.size()); }
  Eigen::Index n_source() const { return n_source_; }
  Eigen::Index n_target() const { return n_target_; }

  const std::vector<Eigen::Index>& source_members(int c) const { return source_.at(c); }
  const std::vector<Eigen::Index>& target_members(int c) const { return target_.at(c); }
  Eigen::Index source_count(int c) const { return static_cast<Eigen::Index>(source_.at(c).size()); }
  Eigen::Index target_count(int c) const { return static_cast<Eigen::Index>(target_.at(c).size()); }
  bool empty_in_source(int c) const { return source_.at(c).empty(); }
  bool empty_in_target(int c) const { return target_.at(c).empty(); }

 private:
  Eigen::Index n_source_;
  Eigen::Index n_target_;
  std::vector<std::vector<Eigen::Index>> source_;
  std::vector<std::vector<Eigen::Index>> target_;
};

inline SubdomainIndex build_index(const LabelState& labels) { return SubdomainIndex(labels); }

}  // namespace cdda
