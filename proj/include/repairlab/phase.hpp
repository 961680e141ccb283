#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "repairlab/failure_model.hpp"
#include "repairlab/repairers.hpp"
#include "repairlab/storage_core.hpp"

namespace repairlab::phase {

enum class Termination { Completed, GammaExceeded };

/// One phase: a planned span of M distinct failures. When a read-threshold
/// rule is active and cumulative reads reach gamma[i] just before the i-th
/// distinct failure, the phase ends early; that failure is not delivered here
/// (it seeds the next phase).
struct PhaseRecord {
  std::optional<store::Snapshot> start;   // S(t0-), bit-exact runs
  std::vector<fail::FailureEvent> prefix; // failures delivered to this phase
  // rsize[i] = bits read in (t0, t_i]; index 0 is always 0.
  std::vector<std::uint64_t> rsize;
  // rfsize_each[i] = bits read from id_i before its failure, within the phase
  std::vector<std::uint64_t> rfsize_each;
  std::uint64_t rfsize_total = 0;
  std::uint64_t planned_failures = 0;     // M
  std::uint64_t start_epoch = 0;          // system failures before the phase
  std::uint64_t termination_index = 0;
  Termination reason = Termination::Completed;
  std::vector<store::ReadRecord> trace;   // all charged reads of the phase
};

/// Everything needed to replay a completed phase: global memory before t0,
/// the untouched nodes, and the ordered trace of reads that came from nodes
/// that fail later in the phase.
struct CompressedState {
  BitVec memory;                                        // V(t0-)
  std::vector<std::pair<std::uint32_t, BitVec>> untouched;  // j not in idseq
  std::vector<store::ReadRecord> rf;
  std::uint64_t rfsize = 0;

  std::uint64_t len_bits(std::uint64_t memory_bits, std::uint32_t node_count,
                         std::uint64_t node_bits,
                         std::uint64_t phase_failures) const {
    return memory_bits +
           (node_count - phase_failures) * node_bits + rfsize;
  }
};

// Runs the strategy over a distinct-identifier prefix. gammas, when present,
// is indexed by distinct index (gammas[i] compared against rsize[i], i >= 1).
PhaseRecord run_phase_first_execution(store::SystemState& state,
                                      strat::Strategy& strategy,
                                      const std::vector<fail::FailureEvent>& prefix,
                                      const std::vector<double>* gammas = nullptr,
                                      strat::LossLog* loss = nullptr);

// pre: record completed (not gamma-terminated) and bit-exact (has snapshot).
CompressedState build_compressed_state(const PhaseRecord& record,
                                       const store::SystemState& state);

struct ReplayMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Re-executes the phase from the compressed state with a fresh strategy
// instance; returns the rebuilt final state S(t_{M-1}+). Reads from nodes
// that have not yet failed in the replay are served from the recorded trace;
// any (node, offset, length) disagreement raises ReplayMismatch.
store::SystemState replay_second_execution(const CompressedState& d,
                                           const PhaseRecord& record,
                                           strat::Strategy& strategy,
                                           std::uint32_t node_count,
                                           std::uint64_t node_bits,
                                           std::uint64_t memory_bits);

using Storer = std::function<void(store::SystemState&, const BitVec& x)>;
using Recoverer = std::function<BitVec(const store::SystemState&)>;
using StrategyFactory = std::function<std::unique_ptr<strat::Strategy>()>;

struct CensusResult {
  std::uint64_t domain = 0;     // 2^dsize
  std::uint64_t eligible = 0;   // len(D) <= dsize - ell
  std::uint64_t recovered = 0;  // eligible and recoverer output == x
  double ell_bound = 0.0;       // 2^{-ell+1}
  double fraction() const {
    return domain ? static_cast<double>(recovered) / static_cast<double>(domain)
                  : 0.0;
  }
};

// Exhaustive sweep over all 2^dsize source values: store, run the phase,
// build D, replay, apply the recoverer. dsize <= 20.
CensusResult compression_census(std::uint32_t node_count, std::uint64_t node_bits,
                                std::uint64_t memory_bits, std::uint32_t dsize,
                                const Storer& storer, const Recoverer& recoverer,
                                const StrategyFactory& make_strategy,
                                const std::vector<fail::FailureEvent>& prefix,
                                std::uint32_t ell);

struct PhaseChainStats {
  std::uint64_t distinct_total = 0;  // Y: per-phase distinct counts, summed
  std::uint64_t failures_total = 0;  // Y': every delivered failure
  std::vector<PhaseRecord> phases;
};

// Runs consecutive phases over a (typically uniform-identifier) event stream
// until at least planned_failures distinct failures have accumulated and the
// phase underway completes. Throws if the stream runs out first.
PhaseChainStats chain_phases(store::SystemState& state,
                             const StrategyFactory& make_strategy,
                             const std::vector<fail::FailureEvent>& events,
                             std::uint64_t planned_failures,
                             const std::vector<double>* gammas = nullptr,
                             bool keep_records = true);

// Z-process from Appendix-style bookkeeping: z_i = sum_{l<=i} rfsize_l - tau_i*rho
// with tau_i = i(i+1)/2, over indices 1..len(rfsize_each)-1.
std::vector<double> z_process(const std::vector<std::uint64_t>& rfsize_each,
                              double rho);

struct CondExpCheck {
  double empirical_mean = 0.0;  // average rfsize_i over all candidate ids
  double formula = 0.0;         // (rsize_i - sum_{l<i} rfsize_l)/(N - i)
  std::uint64_t replacement_reads = 0;  // reads from replaced (failed) nodes
};

// Exhaustively averages rfsize_i over every candidate i-th distinct identifier
// (strategy re-run per candidate from identical seeds). empirical_mean <=
// formula always; equality iff replacement_reads == 0.
CondExpCheck cond_exp_rfsize(std::uint32_t node_count, std::uint64_t node_bits,
                             std::uint64_t memory_bits,
                             const StrategyFactory& make_strategy,
                             const std::vector<fail::FailureEvent>& base_prefix,
                             double t_i);

// CSV: phase index, termination reason, rsize digest (FNV-1a), rfsize, Y, Y'.
void write_chain_csv(std::ostream& os, const PhaseChainStats& stats);

}  // namespace repairlab::phase
