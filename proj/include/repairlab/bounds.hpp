#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace repairlab::bounds {

// Bit quantities can exceed 64 bits (e.g. system capacity 1e21 bits).
using bits128 = unsigned __int128;

std::string to_string(bits128 v);

/// Core system parameters: N nodes of nsize bits, repairer global memory of
/// vsize bits, dsize bits of source data, per-node failure rate lambda.
struct SystemParams {
  std::uint64_t node_count = 0;   // N
  std::uint64_t node_bits = 0;    // nsize
  std::uint64_t memory_bits = 0;  // vsize
  bits128 source_bits = 0;        // dsize
  double failure_rate = 0.0;      // lambda, failures per unit time per node

  double beta() const;
  double erate() const;  // lambda * N * nsize
  // Throws std::invalid_argument on violated invariants (beta > 1/2 rejected).
  void validate() const;
};

/// Phase-level quantities derived from SystemParams.
struct PhaseParams {
  double beta = 0.0;
  bits128 overhead_bits = 0;            // osize = N*nsize - dsize + vsize
  std::uint64_t overhead_nodes = 0;     // F = ceil(osize/nsize)
  double beta_prime = 0.0;              // F/N
  std::uint64_t phase_failures = 0;     // M = 2*F
  double expected_failure_scale = 0.0;  // M' = lni(2*beta') * N
  std::uint64_t node_count = 0;
};

/// Slack parameters for the probability bounds.
struct BoundInputs {
  double eps_core = 0.1;      // epsilon_c in (0, 1]
  double eps_distinct = 0.1;  // epsilon_d > 0
  double eps_timing = 0.1;    // epsilon > 0 (Poisson timing slack)
  void validate() const;
};

/// A probability bound carried in the log domain. Values like e^-900 or
/// 2^-1e16 are representable as ln_value even when the linear value underflows.
struct LogProb {
  double ln_value = 0.0;

  bool clamped() const { return ln_value >= 0.0; }
  double linear() const;  // min(1, exp(ln_value))
  double log10() const;
};

// lni(z) = ln(1/(1-z)), domain [0, 1).
double lni(double zeta);
// lnd(z) = z - ln(1+z), domain [0, inf); ~ z^2/2 for small z.
double lnd(double zeta);

PhaseParams derive_phase_params(const SystemParams& p);

// Gamma_i = (1-eps_c) * i*(N-(i+1)/2)*nsize / (M-1), for 1 <= i <= M-1.
double gamma_threshold(std::uint64_t i, const PhaseParams& pp,
                       std::uint64_t node_bits, double eps_core);

// delta_c = M * e^{-eps_c^2*F/4 + eps_c}
LogProb core_delta(double eps_core, std::uint64_t overhead_nodes,
                   std::uint64_t phase_failures);

// delta_d = M * e^{-2b'(1-2b')*N*lnd(eps_d)} / (1+eps_d), requires b' < 1/2.
LogProb distinct_delta(double eps_d, double beta_prime, std::uint64_t node_count,
                       std::uint64_t phase_failures);

struct CompositeDeltas {
  LogProb delta_u;  // delta_d + 2M*(delta_c + 2^-nsize)
  LogProb delta;    // delta_u + (1+eps_d)*2*M' * e^{-M*lnd(eps)}/(1+eps)
  double window;    // Delta = (1+eps_d)*(1+eps)*2*lni(2b')/lambda
};
CompositeDeltas composite_deltas(const PhaseParams& pp, const BoundInputs& bi,
                                 std::uint64_t node_bits, double lambda);

struct RateBounds {
  double per_failure_core;     // (1-ec)*(1-b')*nsize/(2b')
  double per_failure_uniform;  // (1-ec)/(1+ed)*(1-b')*nsize/lni(2b')
  double rrate_poisson;        // bits per unit time
  double ratio_asymptotic;     // rrate/erate >= (1-b')/lni(2b')
};
RateBounds rate_lower_bounds(const PhaseParams& pp, const BoundInputs& bi,
                             std::uint64_t node_bits, double lambda);

// dsize <= (1 - erate/(2*rrate)) * N * nsize; rejects rrate <= erate/2.
double capacity_bound(double erate, double rrate, std::uint64_t node_count,
                      std::uint64_t node_bits);

/// Single-object repair framework parameters (n, k, d, alpha, gamma).
struct RegeneratingParams {
  std::uint64_t n = 0, k = 0, d = 0;
  std::uint64_t alpha_bits = 0;
  void validate() const;
};

struct CutSum {
  double sum_bits = 0.0;
  bool recoverable_possible = false;  // sum >= dsize
};
// sum_{i=0}^{k-1} min{(d-i)*gamma/d, alpha}
CutSum cut_sum(const RegeneratingParams& rp, double gamma_bits, bits128 source_bits);
// Minimal integer gamma with cut_sum >= dsize (monotone bisection, 1-bit granule).
std::uint64_t gamma_lower_threshold(const RegeneratingParams& rp, bits128 source_bits);

// Prob[Z_n > alpha + c] <= n * e^{-alpha^2/(2*n*c^2)}
LogProb supermartingale_tail(std::uint64_t n, double c, double alpha);

// E[GS_i] = sum_{j=1}^{i} N/(N-j), 1 <= i < N.
double expected_distinct_progress(std::uint64_t node_count, std::uint64_t i);

// Stable ln(sum of e^{x_i}).
double log_sum_exp(std::span<const double> ln_values);

}  // namespace repairlab::bounds
