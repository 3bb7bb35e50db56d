#pragma once

#include <optional>
#include <vector>

#include "cdda/domain.hpp"
#include "cdda/matrixcore.hpp"

namespace cdda {

enum class MmdKind { Marginal, Conditional, RepulsiveStoT, RepulsiveTtoS, Composite };

struct MmdMatrix {
  MmdKind kind;
  int class_id;  // -1 for Marginal and Composite
  SymMatrix matrix;
};

/// How the "all other classes" side of a repulsive term is normalized.
enum class ComplementNorm {
  Pooled,    // one mean over the union of the other classes
  PerClass,  // 1/n_r^2 per other-class block, no cross terms between other classes
};

struct MmdOptions {
  ComplementNorm complement = ComplementNorm::Pooled;
  bool frobenius_normalize = false;
};

/// M0: squared distance between the two domain means.
MmdMatrix marginal_matrix(Eigen::Index n_source, Eigen::Index n_target);

/// M_c; nullopt when class c is empty in either domain.
std::optional<MmdMatrix> conditional_matrix(const SubdomainIndex& index, int c);

/// Source class c against the target samples of every other class.
/// nullopt when either side is empty.
std::optional<MmdMatrix> repulsive_s_to_t(const SubdomainIndex& index, int c,
                                          ComplementNorm norm = ComplementNorm::Pooled);

/// Target class c against the source samples of every other class.
std::optional<MmdMatrix> repulsive_t_to_s(const SubdomainIndex& index, int c,
                                          ComplementNorm norm = ComplementNorm::Pooled);

/// M0 + sum_c M_c - repulsive_weight * sum_c (M_{S->T,c} + M_{T->S,c}).
/// Empty terms are skipped. With repulsive_weight = 0 this is the JDA matrix.
MmdMatrix compose_cyd(Eigen::Index n_source, Eigen::Index n_target, const SubdomainIndex& index,
                      double repulsive_weight, const MmdOptions& options = {});

}  // namespace cdda
