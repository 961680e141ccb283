#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "repairlab/bounds.hpp"
#include "repairlab/repairers.hpp"

namespace repairlab::verify {

enum class Verdict { Consistent, Violated, Vacuous };
const char* verdict_name(Verdict v);

struct TrialReport {
  std::string claim;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double estimate = 0.0;
  double ci_low = 0.0;   // two-sided 99% binomial interval
  double ci_high = 1.0;
  double bound = 1.0;    // analytic bound, clamped to [0, 1]
  Verdict verdict = Verdict::Consistent;
};

// Two-sided 99% binomial interval: normal approximation when hits >= 30,
// exact Clopper-Pearson (by bisection on the binomial CDF) otherwise.
void binomial_ci99(std::uint64_t hits, std::uint64_t trials, double& lo,
                   double& hi);

// violated only when the empirical lower CI exceeds the bound; vacuous when
// the bound clamps to 1.
TrialReport make_report(std::string claim, std::uint64_t trials,
                        std::uint64_t hits, double bound);

void write_reports_csv(std::ostream& os, const std::vector<TrialReport>& reps);
std::string summarize(const TrialReport& rep);

enum class WalkKind { Symmetric, DriftDown };

// Tail of Z_n over +-c walks vs. the bound n*e^{-alpha^2/(2*n*c^2)} on the
// event Z_n > alpha + c.
TrialReport verify_supermartingale(WalkKind kind, std::uint64_t n, double c,
                                   double alpha, std::uint64_t trials,
                                   std::uint64_t seed, bool parallel = true);

// Same check over a caller-supplied step generator; every step is validated
// against |z_i - z_{i-1}| <= c and a violation throws std::invalid_argument.
TrialReport verify_supermartingale_custom(
    const std::function<double(Rng&, std::uint64_t i, double z_prev)>& step,
    std::uint64_t n, double c, double alpha, std::uint64_t trials,
    std::uint64_t seed);

// Coupon-collector chains: frequency of Y < 2b'/((1+eps_d)*lni(2b'))*Y'
// vs. delta_d.
TrialReport verify_distinct_failures(std::uint64_t node_count, double beta_prime,
                                     double eps_d, std::uint64_t trials,
                                     std::uint64_t seed, bool parallel = true);

// P[sum of ell exponential(lambda*N) gaps >= (1+eps)*ell/(lambda*N)]
// vs. e^{-ell*lnd(eps)}/(1+eps).
TrialReport verify_exponential_sum(double lambda, std::uint64_t node_count,
                                   std::uint64_t ell, double eps,
                                   std::uint64_t trials, std::uint64_t seed,
                                   bool parallel = true);

// P[sum_{i<ell} G_i >= (1+eps)*N*lni(ell/N)] with G_i geometric((N-i)/N),
// vs. e^{-(ell/N)(1-ell/N)*N*lnd(eps)}/(1+eps).
TrialReport verify_geometric_sum(std::uint64_t node_count, std::uint64_t ell,
                                 double eps, std::uint64_t trials,
                                 std::uint64_t seed, bool parallel = true);

using StrategyMaker =
    std::function<std::unique_ptr<strat::Strategy>(std::uint64_t seed)>;

// Runs Poisson-failure simulations over the Delta window and reports the
// joint frequency of {window read rate below the analytic lower bound AND
// still recoverable} against delta.
TrialReport verify_rate_vs_bound(const bounds::SystemParams& sp,
                                 const bounds::BoundInputs& bi,
                                 const StrategyMaker& make_strategy,
                                 std::uint64_t trials, std::uint64_t seed,
                                 bool parallel = true);

}  // namespace repairlab::verify
