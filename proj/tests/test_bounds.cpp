#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "repairlab/bounds.hpp"

using namespace repairlab;
using doctest::Approx;

namespace {
// Section-1.1-scale reference system used across several checks.
bounds::SystemParams big_system() {
  bounds::SystemParams sp;
  sp.node_count = 100000;
  sp.node_bits = 10000000000000000ull;  // 1e16
  sp.memory_bits = 10000000000000ull;   // 1e13
  sp.source_bits = static_cast<bounds::bits128>(9) *
                   static_cast<bounds::bits128>(100000000000000000000.0L == 0.0L
                                                    ? 1
                                                    : 1);  // placeholder
  sp.failure_rate = 1.0 / 3.0;
  // dsize = 9e20, built without floating point.
  bounds::bits128 d = 9;
  for (int i = 0; i < 20; ++i) d *= 10;
  sp.source_bits = d;
  return sp;
}
}  // namespace

TEST_CASE("lni evaluates ln(1/(1-z)) with frozen reference values") {
  CHECK(bounds::lni(0.0) == 0.0);
  CHECK(bounds::lni(0.2) == Approx(0.22314355131420976).epsilon(1e-14));
  CHECK(bounds::lni(0.02) == Approx(0.020202707317519448).epsilon(1e-14));
  CHECK_THROWS_AS(bounds::lni(1.0), std::domain_error);
  CHECK_THROWS_AS(bounds::lni(-0.1), std::domain_error);
}

TEST_CASE("lnd evaluates z - ln(1+z) with frozen reference values") {
  CHECK(bounds::lnd(0.0) == 0.0);
  CHECK(bounds::lnd(0.1) == Approx(0.004689820195675140).epsilon(1e-14));
  CHECK(bounds::lnd(1.0) == Approx(0.30685281944005469).epsilon(1e-14));
  CHECK(bounds::lnd(0.2) == Approx(0.017678443206045374).epsilon(1e-14));
  CHECK_THROWS_AS(bounds::lnd(-0.01), std::domain_error);
}

TEST_CASE("lni sandwich: z < lni(z) < z/(1-z) on a dense grid") {
  for (int i = 1; i <= 490; ++i) {
    const double z = i / 1000.0;
    const double v = bounds::lni(z);
    CHECK(v > z);
    CHECK(v < z / (1.0 - z));
  }
  // Harmonic sandwich for integer zN (partial coupon-collector sums).
  const std::uint64_t N = 1000;
  for (std::uint64_t zN : {100ull, 200ull, 350ull, 490ull}) {
    const double z = static_cast<double>(zN) / static_cast<double>(N);
    double lo = 0.0, hi = 0.0;
    for (std::uint64_t j = 0; j < zN; ++j) lo += 1.0 / static_cast<double>(N - j);
    for (std::uint64_t j = 1; j <= zN; ++j) hi += 1.0 / static_cast<double>(N - j);
    CHECK(lo < bounds::lni(z));
    CHECK(bounds::lni(z) < hi);
  }
}

TEST_CASE("derive_phase_params reproduces hand arithmetic and the beta-prime bracket") {
  SUBCASE("large reference system") {
    const auto sp = big_system();
    const auto pp = bounds::derive_phase_params(sp);
    CHECK(pp.overhead_nodes == 10001);
    CHECK(pp.phase_failures == 20002);
    CHECK(pp.beta_prime == Approx(0.10001).epsilon(1e-15));
    // beta <= beta' <= beta + vsize/(N nsize) + 1/N  (= 0.1 + 1e-8 + 1e-5)
    CHECK(pp.beta <= pp.beta_prime);
    CHECK(pp.beta_prime <= pp.beta + 1e-8 + 1e-5 + 1e-15);
    CHECK(pp.expected_failure_scale ==
          Approx(bounds::lni(2 * pp.beta_prime) * 100000).epsilon(1e-12));
  }
  SUBCASE("small hand-checked system") {
    bounds::SystemParams sp;
    sp.node_count = 8;
    sp.node_bits = 160;
    sp.memory_bits = 0;
    sp.source_bits = 960;
    sp.failure_rate = 1.0;
    const auto pp = bounds::derive_phase_params(sp);
    CHECK(static_cast<std::uint64_t>(pp.overhead_bits) == 320);
    CHECK(pp.overhead_nodes == 2);
    CHECK(pp.beta_prime == 0.25);
    CHECK(pp.phase_failures == 4);
  }
  SUBCASE("zero overhead rejected") {
    bounds::SystemParams sp;
    sp.node_count = 8;
    sp.node_bits = 160;
    sp.memory_bits = 0;
    sp.source_bits = static_cast<bounds::bits128>(8) * 160;
    sp.failure_rate = 1.0;
    CHECK_THROWS_AS(bounds::derive_phase_params(sp), std::invalid_argument);
  }
  SUBCASE("beta above one half rejected") {
    bounds::SystemParams sp;
    sp.node_count = 8;
    sp.node_bits = 160;
    sp.memory_bits = 0;
    sp.source_bits = 100;  // beta ~ 0.92
    sp.failure_rate = 1.0;
    CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
  }
}

TEST_CASE("gamma_threshold matches hand values and Gamma_i/i is non-increasing") {
  bounds::PhaseParams pp;
  pp.node_count = 10;
  pp.phase_failures = 4;
  CHECK(bounds::gamma_threshold(1, pp, 100, 0.0) == Approx(300.0));
  CHECK(bounds::gamma_threshold(3, pp, 100, 0.0) == Approx(800.0));
  CHECK(bounds::gamma_threshold(2, pp, 100, 1.0) == 0.0);
  CHECK_THROWS_AS(bounds::gamma_threshold(0, pp, 100, 0.1), std::out_of_range);
  CHECK_THROWS_AS(bounds::gamma_threshold(4, pp, 100, 0.1), std::out_of_range);

  bounds::SystemParams sp;
  sp.node_count = 100;
  sp.node_bits = 1000;
  sp.memory_bits = 0;
  sp.source_bits = static_cast<bounds::bits128>(80) * 1000;
  sp.failure_rate = 1.0;
  const auto dp = bounds::derive_phase_params(sp);
  const double eps_c = 0.1;
  const double floor_bound =
      (1.0 - eps_c) * (1.0 - dp.beta_prime) * 1000 / (2.0 * dp.beta_prime);
  double prev = std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 1; i < dp.phase_failures; ++i) {
    const double per = bounds::gamma_threshold(i, dp, 1000, eps_c) /
                       static_cast<double>(i);
    CHECK(per <= prev + 1e-9);
    CHECK(per >= floor_bound - 1e-9);
    prev = per;
  }
}

TEST_CASE("core_delta log-domain values") {
  const auto d1 = bounds::core_delta(0.1, 10000, 20000);
  CHECK(d1.linear() == Approx(3.06971033428507e-7).epsilon(1e-12));
  CHECK(d1.linear() <= 3.1e-7);  // quoted to one significant figure
  const auto d2 = bounds::core_delta(0.2, 10000, 20000);
  CHECK(d2.ln_value == Approx(std::log(9.08742211535447e-40)).epsilon(1e-12));
  CHECK(d2.linear() <= 1e-39);
  const auto d3 = bounds::core_delta(0.01, 10, 20);
  CHECK(d3.clamped());
  CHECK(d3.linear() == 1.0);
}

TEST_CASE("distinct_delta log-domain values") {
  const auto d1 = bounds::distinct_delta(0.1, 0.1, 100000, 20000);
  CHECK(d1.ln_value == Approx(-65.22894575807044).epsilon(1e-12));
  const auto d2 = bounds::distinct_delta(1.0, 0.25, 1000, 500);
  CHECK(d2.ln_value == Approx(-71.19174394215143).epsilon(1e-12));
  const auto d3 = bounds::distinct_delta(1e-12, 0.1, 100000, 20000);
  CHECK(d3.clamped());
  CHECK_THROWS_AS(bounds::distinct_delta(0.1, 0.5, 1000, 1000),
                  std::invalid_argument);
}

TEST_CASE("composite_deltas: window value, ordering, and log-sum-exp fidelity") {
  const auto sp = big_system();
  const auto pp = bounds::derive_phase_params(sp);
  bounds::BoundInputs bi{0.1, 0.1, 0.1};
  const auto cd = bounds::composite_deltas(pp, bi, sp.node_bits, sp.failure_rate);
  CHECK(cd.window == Approx(1.62020368480995).epsilon(1e-12));
  CHECK(cd.delta.ln_value >= cd.delta_u.ln_value);  // delta adds a term

  // Window scales linearly in (1+eps_d)(1+eps).
  bounds::BoundInputs wide{0.1, 0.3, 0.5};
  const auto cd2 = bounds::composite_deltas(pp, wide, sp.node_bits, sp.failure_rate);
  CHECK(cd2.window ==
        Approx(cd.window * (1.3 / 1.1) * (1.5 / 1.1)).epsilon(1e-12));

  // log_sum_exp against direct summation where the direct sum does not
  // underflow.
  std::vector<double> lns{-3.0, -7.5, -1.25, -40.0};
  double direct = 0.0;
  for (double v : lns) direct += std::exp(v);
  CHECK(bounds::log_sum_exp(lns) == Approx(std::log(direct)).epsilon(1e-13));
  // Extreme magnitudes stay finite and ordered.
  std::vector<double> deep{-1e7, -1e7 + 1.0};
  const double lse = bounds::log_sum_exp(deep);
  CHECK(std::isfinite(lse));
  CHECK(lse == Approx(-1e7 + 1.0 + std::log1p(std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("rate_lower_bounds frozen values and asymptote") {
  bounds::PhaseParams pp;
  pp.beta_prime = 0.01;
  pp.node_count = 100000;
  pp.phase_failures = 2000;
  bounds::BoundInputs tiny{1e-12, 1e-12, 1e-12};
  const auto rb = bounds::rate_lower_bounds(pp, tiny, 1000, 1.0);
  CHECK(rb.ratio_asymptotic == Approx(49.0033332879841).epsilon(1e-12));
  CHECK(rb.ratio_asymptotic > 0.98 * 50.0);  // within 2% of 1/(2 beta)

  pp.beta_prime = 0.1;
  const auto rb2 = bounds::rate_lower_bounds(pp, tiny, 1000, 1.0);
  CHECK(rb2.ratio_asymptotic == Approx(4.03327810595209).epsilon(1e-12));
  CHECK(rb2.per_failure_core == Approx(0.9 * 1000 / 0.2).epsilon(1e-9));

  bounds::BoundInputs ec1{1.0, 0.1, 0.1};
  CHECK(bounds::rate_lower_bounds(pp, ec1, 1000, 1.0).per_failure_core == 0.0);

  // ratio * 2 beta -> 1 from below, monotone once beta <= 0.1.
  double prev = 0.0;
  for (double b : {0.1, 0.05, 0.02, 0.01, 0.005}) {
    pp.beta_prime = b;
    const auto r = bounds::rate_lower_bounds(pp, tiny, 1000, 1.0);
    const double prod = r.ratio_asymptotic * 2.0 * b;
    CHECK(prod < 1.0);
    CHECK(prod > prev);
    prev = prod;
  }
  CHECK(prev > 0.96);
}

TEST_CASE("capacity_bound arithmetic and rejection") {
  CHECK(bounds::capacity_bound(0.2, 1.0, 1000000000, 1000000000000) ==
        Approx(0.9 * 1e21).epsilon(1e-12));
  CHECK(bounds::capacity_bound(1.0, 1e12, 10, 10) ==
        Approx(100.0).epsilon(1e-9));  // rrate -> inf limit
  CHECK(bounds::capacity_bound(1.0, 0.5, 10, 10) == 0.0);  // boundary
  CHECK_THROWS_AS(bounds::capacity_bound(1.0, 0.49, 10, 10),
                  std::invalid_argument);
}

TEST_CASE("cut_sum saturation, monotonicity, and threshold bisection") {
  bounds::RegeneratingParams rp;
  rp.n = 10;
  rp.k = 4;
  rp.d = 9;
  rp.alpha_bits = 100;

  SUBCASE("saturated regime gives k*alpha") {
    const double g = 100.0 * 9 / (9 - 4 + 1);
    CHECK(bounds::cut_sum(rp, g, 400).sum_bits == Approx(400.0));
    CHECK(bounds::cut_sum(rp, g, 400).recoverable_possible);
  }
  SUBCASE("k=1 gives min(gamma, alpha)") {
    bounds::RegeneratingParams one = rp;
    one.k = 1;
    CHECK(bounds::cut_sum(one, 40.0, 100).sum_bits == Approx(40.0));
    CHECK(bounds::cut_sum(one, 400.0, 100).sum_bits == Approx(100.0));
  }
  SUBCASE("monotone in gamma; threshold at 1-bit granule") {
    double prev = -1.0;
    for (double g = 0; g <= 1000; g += 37) {
      const double s = bounds::cut_sum(rp, g, 400).sum_bits;
      CHECK(s >= prev);
      prev = s;
    }
    const auto dsize = static_cast<bounds::bits128>(350);
    const std::uint64_t gstar = bounds::gamma_lower_threshold(rp, dsize);
    CHECK(bounds::cut_sum(rp, static_cast<double>(gstar), dsize).sum_bits >=
          350.0);
    CHECK(bounds::cut_sum(rp, static_cast<double>(gstar - 1), dsize).sum_bits <
          350.0);
  }
  SUBCASE("infeasible when k*alpha < dsize") {
    CHECK_THROWS_AS(bounds::gamma_lower_threshold(rp, 401),
                    std::invalid_argument);
  }
  SUBCASE("large-n threshold within 1% of alpha/(2 beta)") {
    bounds::RegeneratingParams big;
    big.n = 10000;
    big.k = 9999;
    big.d = 9999;
    big.alpha_bits = 1000;
    // beta = 0.1 -> dsize = 0.9 * n * alpha
    const auto dsize = static_cast<bounds::bits128>(9) * 1000 * 1000;
    const double gstar =
        static_cast<double>(bounds::gamma_lower_threshold(big, dsize));
    CHECK(std::abs(gstar - 5000.0) <= 0.01 * 5000.0);
  }
}

TEST_CASE("supermartingale_tail frozen values") {
  const auto p = bounds::supermartingale_tail(100, 1.0, 60.0);
  CHECK(p.linear() == Approx(1.52299797447126e-6).epsilon(1e-12));
  CHECK(bounds::supermartingale_tail(100, 1.0, 30.0).clamped());
  CHECK(bounds::supermartingale_tail(100, 1.0, 1e-9).clamped());
  const auto grid = bounds::supermartingale_tail(100, 1.0, 40.0);
  CHECK(grid.linear() == Approx(0.0335462627902512).epsilon(1e-12));
}

TEST_CASE("expected_distinct_progress harmonic sums") {
  CHECK(bounds::expected_distinct_progress(1000, 199) ==
        Approx(222.018598189198).epsilon(1e-12));
  CHECK(bounds::expected_distinct_progress(1000, 199) <=
        bounds::lni(0.2) * 1000.0);
  CHECK(bounds::expected_distinct_progress(17, 1) == Approx(17.0 / 16.0));
  // Full coupon collector: N * H_{N-1}.
  double h = 0.0;
  for (int j = 1; j <= 9; ++j) h += 1.0 / j;
  CHECK(bounds::expected_distinct_progress(10, 9) == Approx(10.0 * h));
  CHECK_THROWS_AS(bounds::expected_distinct_progress(10, 10),
                  std::out_of_range);
  CHECK_THROWS_AS(bounds::expected_distinct_progress(10, 0),
                  std::out_of_range);
}

TEST_CASE("SystemParams validation and derived rates") {
  auto sp = big_system();
  CHECK(sp.beta() == Approx(0.1).epsilon(1e-12));
  CHECK(sp.erate() == Approx(sp.failure_rate * 1e5 * 1e16).epsilon(1e-12));
  sp.validate();
  sp.node_bits = 10;  // violates nsize >= N
  CHECK_THROWS_AS(sp.validate(), std::invalid_argument);
}
