#include "repairlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace repairlab::bounds {

std::string to_string(bits128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

static double to_double(bits128 v) { return static_cast<double>(v); }

double SystemParams::beta() const {
  bits128 cap = static_cast<bits128>(node_count) * node_bits;
  return 1.0 - to_double(source_bits) / to_double(cap);
}

double SystemParams::erate() const {
  return failure_rate * static_cast<double>(node_count) *
         static_cast<double>(node_bits);
}

void SystemParams::validate() const {
  if (node_count < 2) throw std::invalid_argument("node_count must be >= 2");
  if (node_bits < node_count)
    throw std::invalid_argument("node_bits must be >= node_count");
  bits128 cap = static_cast<bits128>(node_count) * node_bits;
  if (static_cast<bits128>(memory_bits) >= cap)
    throw std::invalid_argument("memory_bits must be < N*nsize");
  if (source_bits > cap)
    throw std::invalid_argument("source_bits exceeds system capacity");
  if (source_bits * 2 < cap)
    throw std::invalid_argument("beta > 1/2 is out of range");
  if (!(failure_rate > 0.0))
    throw std::invalid_argument("failure_rate must be > 0");
}

void BoundInputs::validate() const {
  if (!(eps_core > 0.0) || eps_core > 1.0)
    throw std::invalid_argument("eps_core must be in (0, 1]");
  if (!(eps_distinct > 0.0)) throw std::invalid_argument("eps_distinct must be > 0");
  if (!(eps_timing > 0.0)) throw std::invalid_argument("eps_timing must be > 0");
}

double LogProb::linear() const {
  return clamped() ? 1.0 : std::exp(ln_value);
}

double LogProb::log10() const {
  return clamped() ? 0.0 : ln_value / std::numbers::ln10;
}

double lni(double zeta) {
  if (zeta < 0.0 || zeta >= 1.0)
    throw std::domain_error("lni: argument must be in [0, 1)");
  return -std::log1p(-zeta);
}

double lnd(double zeta) {
  if (zeta < 0.0) throw std::domain_error("lnd: argument must be >= 0");
  return zeta - std::log1p(zeta);
}

PhaseParams derive_phase_params(const SystemParams& p) {
  p.validate();
  bits128 cap = static_cast<bits128>(p.node_count) * p.node_bits;
  PhaseParams pp;
  pp.node_count = p.node_count;
  pp.beta = p.beta();
  pp.overhead_bits = cap - p.source_bits + p.memory_bits;
  // F = ceil(osize/nsize)
  pp.overhead_nodes = static_cast<std::uint64_t>(
      (pp.overhead_bits + p.node_bits - 1) / p.node_bits);
  if (pp.overhead_nodes == 0)
    throw std::invalid_argument("zero storage overhead: F = 0");
  pp.beta_prime =
      static_cast<double>(pp.overhead_nodes) / static_cast<double>(p.node_count);
  pp.phase_failures = 2 * pp.overhead_nodes;
  if (pp.phase_failures > p.node_count)
    throw std::invalid_argument("M = 2F exceeds N (beta' > 1/2)");
  pp.expected_failure_scale =
      lni(2.0 * pp.beta_prime) * static_cast<double>(p.node_count);
  return pp;
}

double gamma_threshold(std::uint64_t i, const PhaseParams& pp,
                       std::uint64_t node_bits, double eps_core) {
  const std::uint64_t m = pp.phase_failures;
  if (i < 1 || i > m - 1) throw std::out_of_range("gamma_threshold: index");
  const double n = static_cast<double>(pp.node_count);
  const double di = static_cast<double>(i);
  return (1.0 - eps_core) * di * (n - (di + 1.0) / 2.0) *
         static_cast<double>(node_bits) / static_cast<double>(m - 1);
}

LogProb core_delta(double eps_core, std::uint64_t overhead_nodes,
                   std::uint64_t phase_failures) {
  if (overhead_nodes < 1 || phase_failures < 1)
    throw std::invalid_argument("core_delta: F and M must be >= 1");
  double ln = std::log(static_cast<double>(phase_failures)) -
              eps_core * eps_core * static_cast<double>(overhead_nodes) / 4.0 +
              eps_core;
  return LogProb{ln};
}

LogProb distinct_delta(double eps_d, double beta_prime, std::uint64_t node_count,
                       std::uint64_t phase_failures) {
  if (beta_prime >= 0.5)
    throw std::invalid_argument("distinct_delta: beta' must be < 1/2");
  double ln = std::log(static_cast<double>(phase_failures)) -
              2.0 * beta_prime * (1.0 - 2.0 * beta_prime) *
                  static_cast<double>(node_count) * lnd(eps_d) -
              std::log1p(eps_d);
  return LogProb{ln};
}

double log_sum_exp(std::span<const double> ln_values) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : ln_values) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double v : ln_values) s += std::exp(v - mx);
  return mx + std::log(s);
}

CompositeDeltas composite_deltas(const PhaseParams& pp, const BoundInputs& bi,
                                 std::uint64_t node_bits, double lambda) {
  bi.validate();
  const double m = static_cast<double>(pp.phase_failures);
  const LogProb dc = core_delta(bi.eps_core, pp.overhead_nodes, pp.phase_failures);
  const LogProb dd =
      distinct_delta(bi.eps_distinct, pp.beta_prime, pp.node_count, pp.phase_failures);

  // delta_u = delta_d + 2M*delta_c + 2M*2^-nsize
  const double ln2m = std::log(2.0 * m);
  const double terms_u[] = {dd.ln_value, ln2m + dc.ln_value,
                            ln2m - static_cast<double>(node_bits) * std::numbers::ln2};
  CompositeDeltas out;
  out.delta_u = LogProb{log_sum_exp(terms_u)};

  // timing term: (1+eps_d)*2*M' * e^{-M*lnd(eps)} / (1+eps)
  const double ln_timing =
      std::log((1.0 + bi.eps_distinct) * 2.0 * pp.expected_failure_scale) -
      m * lnd(bi.eps_timing) - std::log1p(bi.eps_timing);
  const double terms[] = {out.delta_u.ln_value, ln_timing};
  out.delta = LogProb{log_sum_exp(terms)};

  out.window = (1.0 + bi.eps_distinct) * (1.0 + bi.eps_timing) * 2.0 *
               lni(2.0 * pp.beta_prime) / lambda;
  return out;
}

RateBounds rate_lower_bounds(const PhaseParams& pp, const BoundInputs& bi,
                             std::uint64_t node_bits, double lambda) {
  if (pp.beta_prime >= 0.5)
    throw std::invalid_argument("rate_lower_bounds: beta' must be < 1/2");
  const double bp = pp.beta_prime;
  const double ns = static_cast<double>(node_bits);
  RateBounds rb;
  rb.per_failure_core = (1.0 - bi.eps_core) * (1.0 - bp) * ns / (2.0 * bp);
  rb.per_failure_uniform = (1.0 - bi.eps_core) / (1.0 + bi.eps_distinct) *
                           (1.0 - bp) * ns / lni(2.0 * bp);
  rb.ratio_asymptotic = (1.0 - bp) / lni(2.0 * bp);
  const double erate = lambda * static_cast<double>(pp.node_count) * ns;
  rb.rrate_poisson = (1.0 - bi.eps_core) /
                     ((1.0 + bi.eps_distinct) * (1.0 + bi.eps_timing)) *
                     rb.ratio_asymptotic * erate;
  return rb;
}

double capacity_bound(double erate, double rrate, std::uint64_t node_count,
                      std::uint64_t node_bits) {
  if (!(rrate > 0.0)) throw std::invalid_argument("capacity_bound: rrate <= 0");
  if (rrate < erate / 2.0)
    throw std::invalid_argument("capacity_bound: nonpositive capacity");
  return (1.0 - erate / (2.0 * rrate)) * static_cast<double>(node_count) *
         static_cast<double>(node_bits);
}

void RegeneratingParams::validate() const {
  if (!(k >= 1 && k <= d && d <= n - 1))
    throw std::invalid_argument("regenerating params require 1 <= k <= d <= n-1");
  if (alpha_bits == 0) throw std::invalid_argument("alpha must be > 0");
}

CutSum cut_sum(const RegeneratingParams& rp, double gamma_bits,
               bits128 source_bits) {
  rp.validate();
  const double alpha = static_cast<double>(rp.alpha_bits);
  const double d = static_cast<double>(rp.d);
  double s = 0.0;
  for (std::uint64_t i = 0; i < rp.k; ++i) {
    s += std::min((d - static_cast<double>(i)) * gamma_bits / d, alpha);
  }
  return CutSum{s, s >= to_double(source_bits)};
}

std::uint64_t gamma_lower_threshold(const RegeneratingParams& rp,
                                    bits128 source_bits) {
  rp.validate();
  if (static_cast<bits128>(rp.k) * rp.alpha_bits < source_bits)
    throw std::invalid_argument("infeasible: k*alpha < dsize");
  // sum is non-decreasing in gamma and saturates at k*alpha once
  // gamma >= alpha*d/(d-k+1).
  std::uint64_t lo = 0;
  std::uint64_t hi = rp.alpha_bits * rp.d / (rp.d - rp.k + 1) + 1;
  while (lo < hi) {
    std::uint64_t mid = lo + (hi - lo) / 2;
    if (cut_sum(rp, static_cast<double>(mid), source_bits).recoverable_possible)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

LogProb supermartingale_tail(std::uint64_t n, double c, double alpha) {
  if (n < 1 || !(c > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("supermartingale_tail: need n>=1, c>0, alpha>0");
  double ln = std::log(static_cast<double>(n)) -
              alpha * alpha / (2.0 * static_cast<double>(n) * c * c);
  return LogProb{ln};
}

double expected_distinct_progress(std::uint64_t node_count, std::uint64_t i) {
  if (i < 1 || i >= node_count)
    throw std::out_of_range("expected_distinct_progress: 1 <= i < N");
  double s = 0.0;
  const double n = static_cast<double>(node_count);
  for (std::uint64_t j = i; j >= 1; --j) s += n / (n - static_cast<double>(j));
  return s;
}

}  // namespace repairlab::bounds
