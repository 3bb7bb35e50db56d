#include <doctest.h>

#include <string>

#include "cdda/cdda.hpp"
#include "cdda/dataio.hpp"
#include "jda_reference.hpp"
#include "test_support.hpp"

using namespace cdda;
using namespace cdda::testing;

namespace {

SynthTask small_task(std::uint64_t seed, int classes = 2) {
  SynthTaskSpec spec;
  spec.classes = classes;
  spec.dim = 6;
  spec.separation = 2.0;
  spec.source_per_class = 15;
  spec.target_per_class = 15;
  spec.seed = seed;
  return generate_synth(spec);
}

CddaConfig jda_config(int k, int iterations) {
  CddaConfig c;
  c.k = k;
  c.iterations = iterations;
  c.repulsive_weight = 0.0;
  c.variant = Variant::A;
  c.early_stop = false;
  return c;
}

}  // namespace

TEST_CASE("accuracy") {
  CHECK(accuracy({0, 1, 1, 0}, {0, 1, 0, 0}) == doctest::Approx(0.75));
  CHECK(accuracy({2}, {2}) == 1.0);
  CHECK_THROWS_AS(accuracy({0, 1}, {0}), Error);
}

TEST_CASE("config validation and hashing") {
  CddaConfig c;
  CHECK_NOTHROW(c.validate());
  CddaConfig bad = c;
  bad.alpha = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.k = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.lambda = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);

  CddaConfig d = c;
  CHECK(d.hash() == c.hash());
  d.repulsive_weight = 0.5;
  CHECK(d.hash() != c.hash());
}

TEST_CASE("one iteration with zero repulsion matches the JDA reference") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const SynthTask task = small_task(seed, 3);
    const auto ref = jda_ref::run(task.x.data(), static_cast<int>(task.x.n_source()),
                                  task.source_labels, 3, 2, 0.1, 1);
    const CddaResult res = run(task.x, task.source_labels, jda_config(2, 1), std::nullopt, 3);
    CHECK(res.initial_labels == ref.initial);
    REQUIRE(res.per_iteration.size() == 1);
    CHECK(res.per_iteration[0].pseudo_labels == ref.per_iteration[0]);
  }
}

TEST_CASE("per-iteration labels match the JDA reference") {
  for (std::uint64_t seed = 10; seed < 14; ++seed) {
    const SynthTask task = small_task(seed);
    const auto ref = jda_ref::run(task.x.data(), static_cast<int>(task.x.n_source()),
                                  task.source_labels, 2, 3, 0.1, 5);
    const CddaResult res = run(task.x, task.source_labels, jda_config(3, 5), std::nullopt, 2);
    REQUIRE(res.per_iteration.size() == 5);
    for (std::size_t t = 0; t < 5; ++t) {
      CAPTURE(seed);
      CAPTURE(t);
      CHECK(res.per_iteration[t].pseudo_labels == ref.per_iteration[t]);
    }
  }
}

TEST_CASE("identical domains are labelled perfectly") {
  SynthTaskSpec spec;
  spec.dim = 4;
  spec.source_per_class = 10;
  spec.target_per_class = 10;
  const SynthTask base = generate_synth(spec);
  const Matrix src = base.x.source();
  const FeatureMatrix x = FeatureMatrix::stack(src, src);
  CddaConfig c;
  c.k = 4;
  c.variant = Variant::A;
  const CddaResult res = run(x, base.source_labels, c, base.source_labels);
  REQUIRE(res.initial_accuracy);
  CHECK(*res.initial_accuracy == 1.0);
  for (const auto& rec : res.per_iteration) CHECK(*rec.accuracy == 1.0);
}

TEST_CASE("run is deterministic") {
  const SynthTask task = small_task(7);
  CddaConfig c;
  c.k = 3;
  c.knn = 5;
  const CddaResult a = run(task.x, task.source_labels, c, task.target_truth);
  const CddaResult b = run(task.x, task.source_labels, c, task.target_truth);
  CHECK(a.final_target_labels == b.final_target_labels);
  REQUIRE(a.per_iteration.size() == b.per_iteration.size());
  for (std::size_t t = 0; t < a.per_iteration.size(); ++t)
    CHECK(a.per_iteration[t].objective == b.per_iteration[t].objective);
  CHECK(a.projection.adaptation == b.projection.adaptation);
}

TEST_CASE("truth labels do not influence predictions") {
  const SynthTask task = small_task(8);
  CddaConfig c;
  c.k = 3;
  c.knn = 5;
  Labels flipped = task.target_truth;
  for (auto& l : flipped) l = 1 - l;
  const CddaResult with = run(task.x, task.source_labels, c, task.target_truth);
  const CddaResult other = run(task.x, task.source_labels, c, flipped);
  const CddaResult none = run(task.x, task.source_labels, c);
  CHECK(with.final_target_labels == other.final_target_labels);
  CHECK(with.final_target_labels == none.final_target_labels);
  CHECK_FALSE(none.initial_accuracy);
  CHECK(*with.initial_accuracy + *other.initial_accuracy == doctest::Approx(1.0));
}

TEST_CASE("early stop and iteration count") {
  const SynthTask task = small_task(9);
  CddaConfig c = jda_config(2, 10);
  const CddaResult full = run(task.x, task.source_labels, c);
  CHECK(full.per_iteration.size() == 10);

  c.early_stop = true;
  const CddaResult early = run(task.x, task.source_labels, c);
  REQUIRE_FALSE(early.per_iteration.empty());
  CHECK(early.per_iteration.size() <= 10);
  if (early.per_iteration.size() < 10) {
    const auto n = early.per_iteration.size();
    const Labels prev = n >= 2 ? early.per_iteration[n - 2].pseudo_labels : early.initial_labels;
    CHECK(early.per_iteration.back().pseudo_labels == prev);
  }
  CHECK(early.final_target_labels == early.per_iteration.back().pseudo_labels);

  c.iterations = 0;
  CHECK_THROWS_AS(run(task.x, task.source_labels, c), Error);
}

TEST_CASE("variant A records equal nn labels") {
  const SynthTask task = small_task(11);
  const CddaResult res = run(task.x, task.source_labels, jda_config(2, 3), task.target_truth);
  for (const auto& rec : res.per_iteration) {
    CHECK(rec.pseudo_labels == rec.nn_labels);
    CHECK(*rec.accuracy == *rec.nn_accuracy);
  }
}

TEST_CASE("k above the admissible dimension is clamped with a warning") {
  const SynthTask task = small_task(12);
  CddaConfig c = jda_config(100, 1);
  const CddaResult res = run(task.x, task.source_labels, c);
  CHECK(res.projection.k == 6);
  CHECK_FALSE(res.warnings.empty());
}

TEST_CASE("errors name the failing iteration") {
  // Constant features: the centered scatter is zero and cannot be factored.
  const FeatureMatrix x(Matrix::Ones(3, 8), 4);
  CddaConfig c = jda_config(2, 3);
  try {
    run(x, {0, 1, 0, 1}, c);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("iteration 1") != std::string::npos);
    CHECK(is_numerical(e.kind()));
  }
}

TEST_CASE("input validation") {
  const SynthTask task = small_task(13);
  CddaConfig c;
  c.k = 2;
  Labels short_labels(task.source_labels.begin(), task.source_labels.end() - 1);
  CHECK_THROWS_AS(run(task.x, short_labels, c), Error);
  CHECK_THROWS_AS(run(task.x, task.source_labels, c, Labels{0, 1}), Error);
  Labels bad = task.source_labels;
  bad[0] = 5;
  CHECK_THROWS_AS(run(task.x, bad, c, std::nullopt, 2), Error);
}
