// Throughput comparison of the serial and OpenMP trial loops.

#include <chrono>
#include <cstdio>

#include "repairlab/verify.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

int main() {
  using namespace repairlab;
  const std::uint64_t trials = 2'000'000;
  const std::uint64_t n = 200;
  const double alpha = 4.0 * std::sqrt(static_cast<double>(n));

  auto run = [&](bool parallel) {
    const auto t0 = std::chrono::steady_clock::now();
    auto rep = verify::verify_supermartingale(verify::WalkKind::Symmetric, n,
                                              1.0, alpha, trials, 7, parallel);
    const auto t1 = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(t1 - t0).count();
    std::printf("%-8s  hits=%llu  %.3f s  %.2f Mtrials/s\n",
                parallel ? "openmp" : "serial",
                static_cast<unsigned long long>(rep.hits), s,
                trials / s / 1e6);
    return rep.hits;
  };

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#endif
  const auto serial = run(false);
  const auto parallel = run(true);
  if (serial != parallel) {
    std::printf("MISMATCH: serial and parallel runs disagree\n");
    return 1;
  }
  std::printf("serial and parallel hit counts agree\n");
  return 0;
}
