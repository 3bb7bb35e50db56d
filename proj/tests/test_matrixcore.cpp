#include <doctest.h>

#include "cdda/matrixcore.hpp"
#include "test_support.hpp"

using namespace cdda;
using cdda::testing::max_abs;
using cdda::testing::random_matrix;

TEST_CASE("centering matrix small cases") {
  CHECK(centering_matrix(1).entries()(0, 0) == 0.0);

  const SymMatrix h2 = centering_matrix(2);
  CHECK(h2(0, 0) == 0.5);
  CHECK(h2(0, 1) == -0.5);
  CHECK(h2(1, 0) == -0.5);
  CHECK(h2(1, 1) == 0.5);

  const Vector sums = centering_matrix(3).entries().rowwise().sum();
  CHECK(max_abs(sums) < 1e-15);

  CHECK_THROWS_AS(centering_matrix(0), Error);
}

TEST_CASE("centering matrix is idempotent up to n = 500") {
  for (Eigen::Index n : {1, 2, 7, 64, 500}) {
    const Matrix h = centering_matrix(n).entries();
    CHECK(max_abs(h * h - h) <= 1e-12);
  }
}

TEST_CASE("symmetric matrix construction enforces exact symmetry") {
  std::mt19937_64 rng(3);
  const SymMatrix s(random_matrix(rng, 6, 6));
  CHECK((s.entries() - s.entries().transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(SymMatrix(Matrix(2, 3)), Error);
}

TEST_CASE("trace form") {
  SUBCASE("hand example is 4") {
    Matrix a = Matrix::Identity(1, 1);
    Matrix x(1, 2);
    x << 1, -1;
    Matrix m(2, 2);
    m << 1, -1, -1, 1;
    CHECK(trace_form(a, x, SymMatrix(m)) == doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("zero matrix") {
    std::mt19937_64 rng(1);
    CHECK(trace_form(random_matrix(rng, 3, 2), random_matrix(rng, 3, 5), SymMatrix::zero(5)) == 0.0);
  }
  SUBCASE("matches the naive dense product") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const Matrix a = random_matrix(rng, 3, 4);
      const Matrix x = random_matrix(rng, 3, 5);
      const SymMatrix m(random_matrix(rng, 5, 5));
      const double naive = (a.transpose() * x * m.entries() * x.transpose() * a).trace();
      const double fast = trace_form(a, x, m);
      CHECK(std::abs(naive - fast) <= 1e-12 * std::max(1.0, std::abs(naive)));
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(trace_form(Matrix(3, 2), Matrix(4, 5), SymMatrix::zero(5)), Error);
    CHECK_THROWS_AS(trace_form(Matrix(3, 2), Matrix(3, 5), SymMatrix::zero(4)), Error);
  }
}

TEST_CASE("generalized eigs reduces to diagonal cases") {
  Matrix l = Matrix::Zero(3, 3);
  l.diagonal() << 3, 1, 2;
  EigenPair p = generalized_eigs(SymMatrix(l), SymMatrix::identity(3), 3, 0.0);
  CHECK(p.values(0) == doctest::Approx(1.0));
  CHECK(p.values(1) == doctest::Approx(2.0));
  CHECK(p.values(2) == doctest::Approx(3.0));

  Matrix l2 = Matrix::Zero(2, 2);
  l2.diagonal() << 2, 4;
  Matrix r2 = Matrix::Zero(2, 2);
  r2.diagonal() << 2, 2;
  p = generalized_eigs(SymMatrix(l2), SymMatrix(r2), 2, 0.0);
  CHECK(p.values(0) == doctest::Approx(1.0));
  CHECK(p.values(1) == doctest::Approx(2.0));
}

TEST_CASE("generalized eigs residual and B-orthonormality on random pencils") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const SymMatrix lhs(random_matrix(rng, 6, 6));
    const Matrix g = random_matrix(rng, 6, 6);
    Matrix b = g.transpose() * g;
    b.diagonal().array() += 0.1;
    const SymMatrix rhs(b);
    const EigenPair p = generalized_eigs(lhs, rhs, 4, 0.0);
    REQUIRE(p.values.size() == 4);
    REQUIRE(p.vectors.cols() == 4);
    for (Eigen::Index i = 0; i < 4; ++i) {
      const Vector a = p.vectors.col(i);
      const double res = (lhs.entries() * a - p.values(i) * rhs.entries() * a).norm();
      CHECK(res <= 1e-8);
      if (i > 0) CHECK(p.values(i - 1) <= p.values(i));
    }
    const Matrix gram = p.vectors.transpose() * rhs.entries() * p.vectors;
    CHECK(max_abs(gram - Matrix::Identity(4, 4)) <= 1e-6);
  }
}

TEST_CASE("generalized eigs errors") {
  CHECK_THROWS_AS(generalized_eigs(SymMatrix::identity(3), SymMatrix::identity(3), 4, 0.0), Error);
  CHECK_THROWS_AS(generalized_eigs(SymMatrix::identity(3), SymMatrix::identity(2), 1, 0.0), Error);
  try {
    generalized_eigs(SymMatrix::identity(2), SymMatrix::zero(2), 1, 0.0);
    FAIL("expected singular error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularMatrix);
    CHECK(std::string(e.what()).find("ridge") != std::string::npos);
  }
  // A ridge rescues the same pencil.
  const EigenPair p = generalized_eigs(SymMatrix::identity(2), SymMatrix::zero(2), 1, 1.0);
  CHECK(p.values(0) == doctest::Approx(1.0));
}

TEST_CASE("sign canonicalization makes the first nonzero coordinate positive") {
  Matrix v(3, 2);
  v << 0, -1, -2, 3, 1, 0;
  canonicalize_signs(v);
  CHECK(v(1, 0) == 2.0);
  CHECK(v(0, 1) == 1.0);
}
