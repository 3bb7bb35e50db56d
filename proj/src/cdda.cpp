#include "cdda/cdda.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace cdda {

std::string to_string(Variant v) { return v == Variant::A ? "a" : "b"; }

void CddaConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, msg); };
  if (k < 1) fail("k must be >= 1");
  if (!(lambda >= 0.0)) fail("lambda must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
  if (iterations < 1) fail("iterations must be >= 1");
  if (!std::isfinite(repulsive_weight)) fail("repulsive_weight must be finite");
  if (bandwidth.kind == BandwidthPolicy::Kind::Fixed && !(bandwidth.sigma > 0.0)) {
    fail("fixed bandwidth must be > 0");
  }
  if (knn < 0) fail("knn must be >= 0");
  if (rhs_ridge && !(*rhs_ridge >= 0.0)) fail("rhs_ridge must be >= 0");
}

std::string CddaConfig::canonical() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "k=" << k << ";lambda=" << lambda << ";alpha=" << alpha << ";iterations=" << iterations
     << ";variant=" << to_string(variant) << ";repulsive_weight=" << repulsive_weight
     << ";complement=" << (mmd.complement == ComplementNorm::Pooled ? "pooled" : "per_class")
     << ";frobenius=" << mmd.frobenius_normalize << ";bandwidth=";
  if (bandwidth.kind == BandwidthPolicy::Kind::Median) {
    os << "median";
  } else {
    os << bandwidth.sigma;
  }
  os << ";knn=" << knn << ";propagation="
     << (propagation == PropagationOperator::Unnormalized ? "unnormalized" : "normalized")
     << ";initial=" << (initial_space == InitialSpace::Original ? "original" : "pca")
     << ";early_stop=" << early_stop << ";rhs_ridge=";
  if (rhs_ridge) {
    os << *rhs_ridge;
  } else {
    os << "auto";
  }
  return os.str();
}

std::uint64_t CddaConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

double accuracy(const Labels& predicted, const Labels& truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    std::ostringstream os;
    os << "accuracy needs equal non-empty lengths, got " << predicted.size() << " and "
       << truth.size();
    throw Error(ErrorKind::InvalidDimension, os.str());
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

namespace {

std::optional<double> maybe_accuracy(const Labels& predicted, const std::optional<Labels>& truth) {
  if (!truth) return std::nullopt;
  return accuracy(predicted, *truth);
}

Labels initial_labels(const FeatureMatrix& x, const Labels& source, const CddaConfig& config,
                      std::vector<std::string>& warnings) {
  if (config.initial_space == InitialSpace::Original) return nn_classify(x.data(), source);
  Projection pca = fit_pca(x, config.k);
  warnings.insert(warnings.end(), pca.warnings.begin(), pca.warnings.end());
  return nn_classify(embed(x, pca), source);
}

}  // namespace

CddaResult run(const FeatureMatrix& x, const Labels& source_labels, const CddaConfig& config,
               const std::optional<Labels>& truth, int class_count) {
  config.validate();
  if (static_cast<Eigen::Index>(source_labels.size()) != x.n_source()) {
    throw Error(ErrorKind::InvalidDimension, "source label count differs from n_s");
  }
  if (truth && static_cast<Eigen::Index>(truth->size()) != x.n_target()) {
    throw Error(ErrorKind::InvalidDimension, "truth label count differs from n_t");
  }
  if (class_count <= 0) {
    class_count = std::max(2, *std::max_element(source_labels.begin(), source_labels.end()) + 1);
  }
  // Validates the source labels against class_count.
  const LabelState checked(source_labels, std::nullopt, class_count);

  CddaResult result;
  result.initial_labels = initial_labels(x, source_labels, config, result.warnings);
  result.initial_accuracy = maybe_accuracy(result.initial_labels, truth);
  Labels pseudo = result.initial_labels;

  const SubspaceOptions subspace_options{config.rhs_ridge};
  for (int t = 1; t <= config.iterations; ++t) {
    IterationRecord rec;
    try {
      const LabelState state(source_labels, pseudo, class_count);
      const SubdomainIndex index(state);
      const MmdMatrix m_cyd =
          compose_cyd(x.n_source(), x.n_target(), index, config.repulsive_weight, config.mmd);
      Projection proj = fit_projection(x, m_cyd, config.k, config.lambda, subspace_options);
      if (t == 1) {
        result.warnings.insert(result.warnings.end(), proj.warnings.begin(), proj.warnings.end());
      }
      const Embedding z = embed(x, proj);
      rec.objective = projection_objective(x, m_cyd, proj);
      rec.nn_labels = nn_classify(z, source_labels);
      if (config.variant == Variant::A) {
        rec.pseudo_labels = rec.nn_labels;
      } else {
        const AffinityGraph graph = build_affinity(z, config.bandwidth, config.knn);
        const SoftLabels y0 = init_soft_labels(state, config.alpha);
        const SoftLabels y = propagate(graph, y0, config.alpha, config.propagation);
        rec.pseudo_labels = decode(y, DecodeRange::TargetOnly, x.n_source());
      }
      result.projection = std::move(proj);
    } catch (const Error& e) {
      throw Error(e.kind(), "iteration " + std::to_string(t) + ": " + e.what());
    }
    rec.accuracy = maybe_accuracy(rec.pseudo_labels, truth);
    rec.nn_accuracy = maybe_accuracy(rec.nn_labels, truth);
    const bool fixpoint = rec.pseudo_labels == pseudo;
    pseudo = rec.pseudo_labels;
    result.per_iteration.push_back(std::move(rec));
    if (config.early_stop && fixpoint) break;
  }
  result.final_target_labels = pseudo;
  return result;
}

}  // namespace cdda
