#include "repairlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "repairlab/failure_model.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace repairlab::verify {

namespace {

constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile

// log P(X <= k) for X ~ Binomial(n, p); k is small where this is used.
double log_binom_cdf(std::uint64_t k, std::uint64_t n, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return k >= n ? 0.0 : -std::numeric_limits<double>::infinity();
  const double lp = std::log(p), lq = std::log1p(-p);
  double acc = -std::numeric_limits<double>::infinity();
  for (std::uint64_t j = 0; j <= k; ++j) {
    const double lt = std::lgamma(static_cast<double>(n) + 1) -
                      std::lgamma(static_cast<double>(j) + 1) -
                      std::lgamma(static_cast<double>(n - j) + 1) +
                      static_cast<double>(j) * lp +
                      static_cast<double>(n - j) * lq;
    acc = std::max(acc, lt) + std::log1p(std::exp(-std::fabs(acc - lt)));
    if (!std::isfinite(acc)) acc = lt;
  }
  return std::min(acc, 0.0);
}

template <typename Fn>
std::uint64_t count_hits(std::uint64_t trials, std::uint64_t seed,
                         std::uint64_t stream_base, bool parallel, Fn&& trial) {
  std::uint64_t hits = 0;
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : hits)
#endif
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
      Rng rng(seed, Rng::derive_trial_stream(stream_base,
                                             static_cast<std::uint64_t>(t)));
      if (trial(rng, static_cast<std::uint64_t>(t))) ++hits;
    }
  } else {
    for (std::uint64_t t = 0; t < trials; ++t) {
      Rng rng(seed, Rng::derive_trial_stream(stream_base, t));
      if (trial(rng, t)) ++hits;
    }
  }
  return hits;
}

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "consistent";
    case Verdict::Violated: return "violated";
    case Verdict::Vacuous: return "vacuous";
  }
  return "?";
}

void binomial_ci99(std::uint64_t hits, std::uint64_t trials, double& lo,
                   double& hi) {
  if (trials == 0) throw std::invalid_argument("ci: zero trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  if (hits >= 30 && trials - hits >= 30) {
    const double half = kZ99 * std::sqrt(p * (1 - p) / n);
    lo = std::max(0.0, p - half);
    hi = std::min(1.0, p + half);
    return;
  }
  const double tail = 0.005;
  // Clopper-Pearson by bisection on the binomial CDF.
  if (hits == 0) {
    lo = 0.0;
  } else {
    // largest p with P(X >= hits) <= tail  <=>  P(X <= hits-1) >= 1-tail
    double a = 0.0, b = p;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      if (log_binom_cdf(hits - 1, trials, m) >= std::log1p(-tail))
        a = m;
      else
        b = m;
    }
    lo = a;
  }
  if (hits == trials) {
    hi = 1.0;
  } else {
    // smallest p with P(X <= hits) <= tail
    double a = p, b = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      if (log_binom_cdf(hits, trials, m) <= std::log(tail))
        b = m;
      else
        a = m;
    }
    hi = b;
  }
}

TrialReport make_report(std::string claim, std::uint64_t trials,
                        std::uint64_t hits, double bound) {
  TrialReport rep;
  rep.claim = std::move(claim);
  rep.trials = trials;
  rep.hits = hits;
  rep.estimate = static_cast<double>(hits) / static_cast<double>(trials);
  binomial_ci99(hits, trials, rep.ci_low, rep.ci_high);
  rep.bound = std::min(1.0, bound);
  if (rep.bound >= 1.0)
    rep.verdict = Verdict::Vacuous;
  else if (rep.ci_low > rep.bound)
    rep.verdict = Verdict::Violated;
  else
    rep.verdict = Verdict::Consistent;
  return rep;
}

void write_reports_csv(std::ostream& os, const std::vector<TrialReport>& reps) {
  os << "claim,trials,hits,estimate,ci_low,ci_high,bound,verdict\n";
  auto fmt = [&os](double v) {
    std::ostringstream ss;
    ss.precision(9);
    ss << v;
    os << ss.str();
  };
  for (const auto& r : reps) {
    os << r.claim << ',' << r.trials << ',' << r.hits << ',';
    fmt(r.estimate);
    os << ',';
    fmt(r.ci_low);
    os << ',';
    fmt(r.ci_high);
    os << ',';
    fmt(r.bound);
    os << ',' << verdict_name(r.verdict) << '\n';
  }
}

std::string summarize(const TrialReport& rep) {
  std::ostringstream ss;
  ss.precision(6);
  ss << rep.claim << ": " << rep.hits << '/' << rep.trials << " (est "
     << rep.estimate << ", 99% CI [" << rep.ci_low << ", " << rep.ci_high
     << "]) vs bound " << rep.bound << " -> " << verdict_name(rep.verdict);
  return ss.str();
}

TrialReport verify_supermartingale(WalkKind kind, std::uint64_t n, double c,
                                   double alpha, std::uint64_t trials,
                                   std::uint64_t seed, bool parallel) {
  const double threshold = alpha + c;
  const double bound = bounds::supermartingale_tail(n, c, alpha).linear();
  std::uint64_t hits = 0;
  if (kind == WalkKind::Symmetric) {
    // Z_n = c * (2*ones - n); bits in bulk, 64 steps per word.
    hits = count_hits(trials, seed, 11, parallel, [&](Rng& rng, std::uint64_t) {
      std::uint64_t ones = 0;
      std::uint64_t left = n;
      while (left >= 64) {
        ones += static_cast<std::uint64_t>(__builtin_popcountll(rng.next_u64()));
        left -= 64;
      }
      if (left)
        ones += static_cast<std::uint64_t>(
            __builtin_popcountll(rng.next_u64() & ((1ull << left) - 1)));
      const double z = c * (2.0 * static_cast<double>(ones) -
                            static_cast<double>(n));
      return z > threshold;
    });
  } else {
    hits = count_hits(trials, seed, 12, parallel, [&](Rng& rng, std::uint64_t) {
      double z = 0.0;
      for (std::uint64_t i = 0; i < n; ++i)
        z += rng.next_double() < 0.45 ? c : -c;
      return z > threshold;
    });
  }
  std::ostringstream claim;
  claim << "supermartingale_"
        << (kind == WalkKind::Symmetric ? "symmetric" : "drift_down") << "_n"
        << n << "_a" << alpha;
  return make_report(claim.str(), trials, hits, bound);
}

TrialReport verify_supermartingale_custom(
    const std::function<double(Rng&, std::uint64_t i, double z_prev)>& step,
    std::uint64_t n, double c, double alpha, std::uint64_t trials,
    std::uint64_t seed) {
  const double bound = bounds::supermartingale_tail(n, c, alpha).linear();
  const double threshold = alpha + c;
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng(seed, Rng::derive_trial_stream(13, t));
    double z = 0.0;
    for (std::uint64_t i = 1; i <= n; ++i) {
      const double zn = step(rng, i, z);
      if (std::fabs(zn - z) > c + 1e-9)
        throw std::invalid_argument(
            "supermartingale generator violates the step bound");
      z = zn;
    }
    if (z > threshold) ++hits;
  }
  return make_report("supermartingale_custom", trials, hits, bound);
}

TrialReport verify_distinct_failures(std::uint64_t node_count, double beta_prime,
                                     double eps_d, std::uint64_t trials,
                                     std::uint64_t seed, bool parallel) {
  const auto f = static_cast<std::uint64_t>(
      std::llround(beta_prime * static_cast<double>(node_count)));
  const std::uint64_t m = 2 * f;
  if (m == 0 || m > node_count)
    throw std::invalid_argument("distinct check: need 0 < 2*b'*N <= N");
  const double bound =
      bounds::distinct_delta(eps_d, beta_prime, node_count, m).linear();
  const double factor =
      2.0 * beta_prime / ((1.0 + eps_d) * bounds::lni(2.0 * beta_prime));
  std::uint64_t hits =
      count_hits(trials, seed, 21, parallel, [&](Rng& rng, std::uint64_t) {
        std::vector<bool> seen(node_count, false);
        std::uint64_t distinct = 0, draws = 0;
        while (distinct < m) {
          const auto id = rng.next_below(node_count);
          ++draws;
          if (!seen[id]) {
            seen[id] = true;
            ++distinct;
          }
        }
        // violation of Y >= 2b'/((1+eps_d)*lni(2b')) * Y'
        return static_cast<double>(m) < factor * static_cast<double>(draws);
      });
  std::ostringstream claim;
  claim << "distinct_failures_N" << node_count << "_b" << beta_prime << "_e"
        << eps_d;
  return make_report(claim.str(), trials, hits, bound);
}

TrialReport verify_exponential_sum(double lambda, std::uint64_t node_count,
                                   std::uint64_t ell, double eps,
                                   std::uint64_t trials, std::uint64_t seed,
                                   bool parallel) {
  if (ell == 0) throw std::invalid_argument("need ell >= 1");
  const double rate = lambda * static_cast<double>(node_count);
  const double threshold = (1.0 + eps) * static_cast<double>(ell) / rate;
  bounds::LogProb b{-static_cast<double>(ell) * bounds::lnd(eps) -
                    std::log1p(eps)};
  std::uint64_t hits =
      count_hits(trials, seed, 31, parallel, [&](Rng& rng, std::uint64_t) {
        double sum = 0.0;
        for (std::uint64_t i = 0; i < ell; ++i)
          sum += rng.next_exponential(rate);
        return sum >= threshold;
      });
  std::ostringstream claim;
  claim << "exponential_sum_l" << ell << "_e" << eps;
  return make_report(claim.str(), trials, hits, b.linear());
}

TrialReport verify_geometric_sum(std::uint64_t node_count, std::uint64_t ell,
                                 double eps, std::uint64_t trials,
                                 std::uint64_t seed, bool parallel) {
  if (ell == 0 || ell >= node_count)
    throw std::invalid_argument("need 1 <= ell < N");
  const double zeta = static_cast<double>(ell) / static_cast<double>(node_count);
  const double threshold =
      (1.0 + eps) * static_cast<double>(node_count) * bounds::lni(zeta);
  bounds::LogProb b{-zeta * (1.0 - zeta) * static_cast<double>(node_count) *
                        bounds::lnd(eps) -
                    std::log1p(eps)};
  const double n = static_cast<double>(node_count);
  std::uint64_t hits =
      count_hits(trials, seed, 32, parallel, [&](Rng& rng, std::uint64_t) {
        double sum = 0.0;
        for (std::uint64_t i = 1; i <= ell; ++i) {
          // geometric with success probability (N-i)/N by inversion
          const double q = static_cast<double>(i) / n;  // failure probability
          if (q <= 0.0) {
            sum += 1.0;
            continue;
          }
          const double u = rng.next_double();
          sum += 1.0 + std::floor(std::log1p(-u) / std::log(q));
        }
        return sum >= threshold;
      });
  std::ostringstream claim;
  claim << "geometric_sum_N" << node_count << "_l" << ell << "_e" << eps;
  return make_report(claim.str(), trials, hits, b.linear());
}

TrialReport verify_rate_vs_bound(const bounds::SystemParams& sp,
                                 const bounds::BoundInputs& bi,
                                 const StrategyMaker& make_strategy,
                                 std::uint64_t trials, std::uint64_t seed,
                                 bool parallel) {
  sp.validate();
  bi.validate();
  const auto pp = bounds::derive_phase_params(sp);
  const auto cd =
      bounds::composite_deltas(pp, bi, sp.node_bits, sp.failure_rate);
  const auto rb =
      bounds::rate_lower_bounds(pp, bi, sp.node_bits, sp.failure_rate);
  const double window = cd.window;

  std::uint64_t hits = count_hits(
      trials, seed, 41, parallel, [&](Rng&, std::uint64_t t) {
        const std::uint64_t trial_seed = Rng::derive_trial_stream(seed + 101, t);
        // Poisson events covering [0, window]; extend the horizon if needed
        // (regeneration with a larger horizon keeps the prefix identical).
        std::uint64_t horizon = static_cast<std::uint64_t>(
                                    sp.failure_rate * sp.node_count * window *
                                    1.5) +
                                64;
        fail::FailureSequence fs;
        for (;;) {
          fs = fail::gen_poisson(static_cast<std::uint32_t>(sp.node_count),
                                 sp.failure_rate, 0.0, horizon, trial_seed);
          if (fs.events.back().time > window) break;
          horizon *= 2;
        }
        store::SystemState st(store::Fidelity::Symbolic,
                              static_cast<std::uint32_t>(sp.node_count),
                              sp.node_bits, sp.memory_bits,
                              /*keep_trace=*/false);
        auto strategy = make_strategy(trial_seed);
        if (strategy->needs_future()) strategy->provide_future(fs);
        strat::DirectIO io(st);
        std::vector<fail::FailureEvent> history;
        strat::LossLog loss;
        strat::Context ctx{io, history, &loss};
        strategy->on_start(ctx);
        for (std::size_t i = 0; i < fs.events.size(); ++i) {
          const auto& ev = fs.events[i];
          if (ev.time > window) break;
          if (i > 0) strategy->pre_failure(ctx, ev);
          st.fail(ev.id, ev.time);
          history.push_back(ev);
          strategy->post_failure(ctx, ev);
        }
        strategy->on_finish(ctx, window);
        const double rrate =
            static_cast<double>(st.bits_read_in(-1.0, window)) / window;
        const bool recoverable = !loss.lost && strategy->recoverable(ctx);
        return recoverable && rrate < rb.rrate_poisson;
      });
  std::ostringstream claim;
  claim << "rate_vs_bound_N" << sp.node_count;
  return make_report(claim.str(), trials, hits, cd.delta.linear());
}

}  // namespace repairlab::verify
