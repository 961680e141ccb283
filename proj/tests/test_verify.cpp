#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "repairlab/verify.hpp"

using namespace repairlab;
using doctest::Approx;

TEST_CASE("binomial_ci99 basic shape") {
  double lo, hi;
  verify::binomial_ci99(0, 1000, lo, hi);
  CHECK(lo == 0.0);
  CHECK(hi > 0.0);
  CHECK(hi < 0.02);

  verify::binomial_ci99(1000, 1000, lo, hi);
  CHECK(hi == 1.0);
  CHECK(lo > 0.98);

  // Large counts: the interval brackets the point estimate.
  verify::binomial_ci99(500, 1000, lo, hi);
  CHECK(lo < 0.5);
  CHECK(hi > 0.5);
  CHECK(hi - lo < 0.1);

  // Small-count exact interval also brackets the estimate.
  verify::binomial_ci99(3, 1000, lo, hi);
  CHECK(lo < 0.003);
  CHECK(hi > 0.003);
  CHECK(hi < 0.02);
}

TEST_CASE("verdict logic") {
  CHECK(verify::make_report("a", 1000, 0, 1e-6).verdict ==
        verify::Verdict::Consistent);
  CHECK(verify::make_report("b", 1000, 900, 0.01).verdict ==
        verify::Verdict::Violated);
  CHECK(verify::make_report("c", 1000, 900, 1.0).verdict ==
        verify::Verdict::Vacuous);
  // Low hit counts within CI of a moderate bound remain consistent.
  CHECK(verify::make_report("d", 1000, 2, 0.01).verdict ==
        verify::Verdict::Consistent);
}

TEST_CASE("reports serialize to CSV and a summary line") {
  auto rep = verify::make_report("demo_claim", 100, 1, 0.5);
  std::stringstream ss;
  verify::write_reports_csv(ss, {rep});
  std::string header;
  std::getline(ss, header);
  CHECK(header.find("claim") != std::string::npos);
  std::string row;
  std::getline(ss, row);
  CHECK(row.find("demo_claim") != std::string::npos);
  CHECK(verify::summarize(rep).find("demo_claim") != std::string::npos);
}

TEST_CASE("supermartingale suite: serial and parallel agree; drift-down is tighter") {
  const auto par = verify::verify_supermartingale(verify::WalkKind::Symmetric,
                                                  100, 1.0, 40.0, 20000, 3, true);
  const auto ser = verify::verify_supermartingale(verify::WalkKind::Symmetric,
                                                  100, 1.0, 40.0, 20000, 3, false);
  CHECK(par.hits == ser.hits);
  CHECK(par.trials == 20000);
  CHECK(par.verdict != verify::Verdict::Violated);
  CHECK(par.bound == Approx(0.0335462627902512).epsilon(1e-9));

  const auto drift = verify::verify_supermartingale(verify::WalkKind::DriftDown,
                                                    100, 1.0, 40.0, 20000, 3);
  CHECK(drift.hits <= par.hits);
  CHECK(drift.verdict != verify::Verdict::Violated);

  // Tiny alpha clamps the bound: vacuous.
  const auto vac = verify::verify_supermartingale(verify::WalkKind::Symmetric,
                                                  100, 1.0, 1.0, 1000, 3);
  CHECK(vac.verdict == verify::Verdict::Vacuous);
}

TEST_CASE("custom generator: step-bound violations are rejected") {
  const auto bad = [](Rng&, std::uint64_t, double) { return 5.0; };
  CHECK_THROWS_AS(
      verify::verify_supermartingale_custom(bad, 10, 1.0, 6.0, 10, 1),
      std::invalid_argument);

  // A compliant custom walk matches the built-in symmetric statistics shape.
  const auto ok = [](Rng& r, std::uint64_t, double z) {
    return z + ((r.next_u64() & 1) ? 1.0 : -1.0);
  };
  const auto rep = verify::verify_supermartingale_custom(ok, 100, 1.0, 40.0,
                                                         5000, 3);
  CHECK(rep.trials == 5000);
  CHECK(rep.verdict != verify::Verdict::Violated);
}

TEST_CASE("distinct-failures suite at reduced trials") {
  const auto par = verify::verify_distinct_failures(2000, 0.1, 1.0, 2000, 5, true);
  const auto ser = verify::verify_distinct_failures(2000, 0.1, 1.0, 2000, 5, false);
  CHECK(par.hits == ser.hits);
  CHECK(par.hits == 0);  // bound is ~4.5e-41; a hit would be astonishing
  CHECK(par.verdict == verify::Verdict::Consistent);
}

TEST_CASE("exponential-sum suite: bound value and serial/parallel agreement") {
  const auto par = verify::verify_exponential_sum(1.0, 1000, 1000, 0.2, 20000,
                                                  7, true);
  const auto ser = verify::verify_exponential_sum(1.0, 1000, 1000, 0.2, 20000,
                                                  7, false);
  CHECK(par.hits == ser.hits);
  CHECK(par.bound == Approx(1.75052541692017e-8).epsilon(1e-9));
  CHECK(par.verdict == verify::Verdict::Consistent);
}

TEST_CASE("geometric-sum suite stays under its bound") {
  const auto par = verify::verify_geometric_sum(1000, 200, 0.2, 20000, 9, true);
  const auto ser = verify::verify_geometric_sum(1000, 200, 0.2, 20000, 9, false);
  CHECK(par.hits == ser.hits);
  CHECK(par.bound == Approx(0.0492486920163082).epsilon(1e-9));
  CHECK(par.verdict != verify::Verdict::Violated);
  // Empirical frequency should be well under the bound at these settings.
  CHECK(par.estimate < par.bound);
}

TEST_CASE("rate-vs-bound suite with a starving repairer") {
  bounds::SystemParams sp;
  sp.node_count = 500;
  sp.node_bits = 500;
  sp.memory_bits = 100;
  sp.source_bits = static_cast<bounds::bits128>(0.9 * 500 * 500);
  sp.failure_rate = 1.0;
  bounds::BoundInputs bi{1.0, 1.0, 1.0};
  const auto overhead = bounds::derive_phase_params(sp).overhead_nodes;
  const auto maker = [overhead](std::uint64_t) {
    return std::make_unique<strat::StarveStrategy>(
        static_cast<std::uint32_t>(overhead));
  };
  const auto par = verify::verify_rate_vs_bound(sp, bi, maker, 200, 13, true);
  const auto ser = verify::verify_rate_vs_bound(sp, bi, maker, 200, 13, false);
  CHECK(par.hits == ser.hits);
  CHECK(par.trials == 200);
  CHECK(par.verdict != verify::Verdict::Violated);
}
