#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cdda/domain.hpp"
#include "cdda/labelgraph.hpp"
#include "cdda/mmd.hpp"
#include "cdda/subspace.hpp"

namespace cdda {

enum class Variant {
  A,  // nearest-neighbour label deduction
  B,  // graph label propagation
};

enum class InitialSpace { Original, Pca };

struct CddaConfig {
  Eigen::Index k = 100;
  double lambda = 0.1;
  double alpha = 0.99;
  int iterations = 10;
  Variant variant = Variant::B;
  double repulsive_weight = 1.0;
  MmdOptions mmd;
  BandwidthPolicy bandwidth;
  int knn = 0;
  PropagationOperator propagation = PropagationOperator::Unnormalized;
  InitialSpace initial_space = InitialSpace::Original;
  bool early_stop = true;
  std::optional<double> rhs_ridge;

  /// Throws Config on out-of-range fields.
  void validate() const;
  /// Stable text form of every field; equal configs give equal strings.
  std::string canonical() const;
  /// 64-bit FNV-1a of canonical().
  std::uint64_t hash() const;
};

struct IterationRecord {
  Labels pseudo_labels;
  std::optional<double> accuracy;
  double objective = 0.0;
  // Nearest-neighbour labels in the same subspace; equals pseudo_labels for variant A.
  Labels nn_labels;
  std::optional<double> nn_accuracy;
};

struct CddaResult {
  Labels initial_labels;
  std::optional<double> initial_accuracy;
  Labels final_target_labels;
  std::vector<IterationRecord> per_iteration;
  Projection projection;
  std::vector<std::string> warnings;
};

/// Iterates MMD construction, projection, label deduction and pseudo-label
/// update. `truth` only feeds the accuracy fields. class_count <= 0 infers
/// C from the largest source label. Errors carry the failing iteration.
CddaResult run(const FeatureMatrix& x, const Labels& source_labels, const CddaConfig& config,
               const std::optional<Labels>& truth = std::nullopt, int class_count = 0);

/// Fraction of positions where predicted == truth.
double accuracy(const Labels& predicted, const Labels& truth);

std::string to_string(Variant v);

}  // namespace cdda
