#include "cdda/mmd.hpp"

#include <algorithm>
#include <sstream>

namespace cdda {

namespace {

using Group = std::vector<Eigen::Index>;

// m += weight * v v^T where v is 1/|a| on a and -1/|b| on b.
void accumulate_pair(Matrix& m, const Group& a, const Group& b, double weight) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double within_a = weight / (na * na);
  const double within_b = weight / (nb * nb);
  const double cross = -weight / (na * nb);
  for (Eigen::Index j : a) {
    for (Eigen::Index i : a) m(i, j) += within_a;
    for (Eigen::Index i : b) m(i, j) += cross;
  }
  for (Eigen::Index j : b) {
    for (Eigen::Index i : b) m(i, j) += within_b;
    for (Eigen::Index i : a) m(i, j) += cross;
  }
}

// Literal per-class complement: one block per other class r, no r x r' terms.
void accumulate_per_class(Matrix& m, const Group& own, const std::vector<const Group*>& others,
                          double weight) {
  const double n_own = static_cast<double>(own.size());
  for (Eigen::Index j : own) {
    for (Eigen::Index i : own) m(i, j) += weight / (n_own * n_own);
  }
  for (const Group* other : others) {
    const double nr = static_cast<double>(other->size());
    const double cross = -weight / (n_own * nr);
    for (Eigen::Index j : *other) {
      for (Eigen::Index i : *other) m(i, j) += weight / (nr * nr);
      for (Eigen::Index i : own) m(i, j) += cross;
    }
    for (Eigen::Index j : own) {
      for (Eigen::Index i : *other) m(i, j) += cross;
    }
  }
}

Group iota_group(Eigen::Index first, Eigen::Index count) {
  Group g(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = first + i;
  return g;
}

Eigen::Index order_of(const SubdomainIndex& index) {
  return index.n_source() + index.n_target();
}

void check_class(const SubdomainIndex& index, int c) {
  if (c < 0 || c >= index.class_count()) {
    std::ostringstream os;
    os << "class " << c + 1 << " outside [1, " << index.class_count() << "]";
    throw Error(ErrorKind::InvalidLabel, os.str());
  }
}

// Members of every class other than c, in the chosen domain, ascending.
Group pooled_complement(const SubdomainIndex& index, int c, bool target_side) {
  Group out;
  for (int r = 0; r < index.class_count(); ++r) {
    if (r == c) continue;
    const Group& g = target_side ? index.target_members(r) : index.source_members(r);
    out.insert(out.end(), g.begin(), g.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<const Group*> nonempty_others(const SubdomainIndex& index, int c, bool target_side) {
  std::vector<const Group*> out;
  for (int r = 0; r < index.class_count(); ++r) {
    if (r == c) continue;
    const Group& g = target_side ? index.target_members(r) : index.source_members(r);
    if (!g.empty()) out.push_back(&g);
  }
  return out;
}

// Adds weight * (repulsive matrix for class c, direction own->other); returns
// false when the term is empty.
bool accumulate_repulsive(Matrix& m, const SubdomainIndex& index, int c, bool own_is_source,
                          ComplementNorm norm, double weight) {
  const Group& own = own_is_source ? index.source_members(c) : index.target_members(c);
  if (own.empty()) return false;
  const bool other_is_target = own_is_source;
  if (norm == ComplementNorm::Pooled) {
    const Group other = pooled_complement(index, c, other_is_target);
    if (other.empty()) return false;
    accumulate_pair(m, own, other, weight);
  } else {
    const auto others = nonempty_others(index, c, other_is_target);
    if (others.empty()) return false;
    accumulate_per_class(m, own, others, weight);
  }
  return true;
}

std::optional<MmdMatrix> repulsive(const SubdomainIndex& index, int c, bool own_is_source,
                                   ComplementNorm norm) {
  check_class(index, c);
  const Eigen::Index n = order_of(index);
  Matrix m = Matrix::Zero(n, n);
  if (!accumulate_repulsive(m, index, c, own_is_source, norm, 1.0)) return std::nullopt;
  return MmdMatrix{own_is_source ? MmdKind::RepulsiveStoT : MmdKind::RepulsiveTtoS, c,
                   SymMatrix(std::move(m))};
}

}  // namespace

MmdMatrix marginal_matrix(Eigen::Index n_source, Eigen::Index n_target) {
  if (n_source < 1 || n_target < 1) {
    throw Error(ErrorKind::InvalidDimension, "marginal MMD needs n_s >= 1 and n_t >= 1");
  }
  const Eigen::Index n = n_source + n_target;
  Matrix m = Matrix::Zero(n, n);
  accumulate_pair(m, iota_group(0, n_source), iota_group(n_source, n_target), 1.0);
  return MmdMatrix{MmdKind::Marginal, -1, SymMatrix(std::move(m))};
}

std::optional<MmdMatrix> conditional_matrix(const SubdomainIndex& index, int c) {
  check_class(index, c);
  if (index.empty_in_source(c) || index.empty_in_target(c)) return std::nullopt;
  const Eigen::Index n = order_of(index);
  Matrix m = Matrix::Zero(n, n);
  accumulate_pair(m, index.source_members(c), index.target_members(c), 1.0);
  return MmdMatrix{MmdKind::Conditional, c, SymMatrix(std::move(m))};
}

std::optional<MmdMatrix> repulsive_s_to_t(const SubdomainIndex& index, int c,
                                          ComplementNorm norm) {
  return repulsive(index, c, true, norm);
}

std::optional<MmdMatrix> repulsive_t_to_s(const SubdomainIndex& index, int c,
                                          ComplementNorm norm) {
  return repulsive(index, c, false, norm);
}

MmdMatrix compose_cyd(Eigen::Index n_source, Eigen::Index n_target, const SubdomainIndex& index,
                      double repulsive_weight, const MmdOptions& options) {
  if (index.n_source() != n_source || index.n_target() != n_target) {
    throw Error(ErrorKind::InvalidDimension, "sub-domain index does not match domain sizes");
  }
  const Eigen::Index n = n_source + n_target;
  Matrix m = Matrix::Zero(n, n);
  accumulate_pair(m, iota_group(0, n_source), iota_group(n_source, n_target), 1.0);
  for (int c = 0; c < index.class_count(); ++c) {
    if (index.empty_in_source(c) || index.empty_in_target(c)) continue;
    accumulate_pair(m, index.source_members(c), index.target_members(c), 1.0);
  }
  if (repulsive_weight != 0.0) {
    for (int c = 0; c < index.class_count(); ++c) {
      accumulate_repulsive(m, index, c, true, options.complement, -repulsive_weight);
      accumulate_repulsive(m, index, c, false, options.complement, -repulsive_weight);
    }
  }
  if (options.frobenius_normalize) {
    const double norm = m.norm();
    if (norm > 0.0) m /= norm;
  }
  return MmdMatrix{MmdKind::Composite, -1, SymMatrix(std::move(m))};
}

}  // namespace cdda
