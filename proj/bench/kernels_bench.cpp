// Times the OpenMP kernels against their serial references and checks that
// both produce identical output.
//
//   cdda_bench [n] [m] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>

#include "cdda/kernels.hpp"

using namespace cdda;

namespace {

double best_ms(int repeats, const std::function<void()>& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    best = std::min(best, ms);
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-22s serial %9.2f ms  openmp %9.2f ms  speedup %5.2fx  %s\n", name, serial, parallel,
              serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const Eigen::Index n = argc > 1 ? std::atol(argv[1]) : 2000;
  const Eigen::Index m = argc > 2 ? std::atol(argv[2]) : 100;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;

  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Matrix x(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) x(i, j) = normal(rng);
  const Matrix refs = x.leftCols(n / 2);
  const Matrix queries = x.rightCols(n - n / 2);

  std::printf("n = %ld, m = %ld, threads = %d\n", static_cast<long>(n), static_cast<long>(m),
              kernels::max_threads());

  Matrix d_serial, d_parallel;
  const double d1 = best_ms(repeats, [&] { d_serial = kernels::serial::pairwise_sq_distances(x, x); });
  const double d2 = best_ms(repeats, [&] { d_parallel = kernels::pairwise_sq_distances(x, x); });
  report("pairwise_sq_distances", d1, d2, d_serial == d_parallel);

  Matrix w_serial, w_parallel;
  const double w1 = best_ms(repeats, [&] { w_serial = kernels::serial::gaussian_affinity(d_serial, 3.0); });
  const double w2 = best_ms(repeats, [&] { w_parallel = kernels::gaussian_affinity(d_serial, 3.0); });
  report("gaussian_affinity", w1, w2, w_serial == w_parallel);

  std::vector<Eigen::Index> nn_serial, nn_parallel;
  const double n1 = best_ms(repeats, [&] { nn_serial = kernels::serial::nearest_columns(queries, refs); });
  const double n2 = best_ms(repeats, [&] { nn_parallel = kernels::nearest_columns(queries, refs); });
  report("nearest_columns", n1, n2, nn_serial == nn_parallel);

  const bool ok = d_serial == d_parallel && w_serial == w_parallel && nn_serial == nn_parallel;
  return ok ? 0 : 1;
}
