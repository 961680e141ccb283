#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <unordered_map>
#include <vector>

#include "repairlab/bitvec.hpp"

namespace repairlab::store {

enum class Fidelity {
  BitExact,  // node contents materialized as bit vectors
  Symbolic   // only lengths are tracked; reads return empty receipts
};

struct ReadRecord {
  std::uint64_t seq = 0;
  std::uint64_t epoch = 0;  // failures that had occurred when the read issued
  double time = 0.0;
  std::uint32_t node = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  bool local_compute = false;
  BitVec payload;  // bit-exact mode only
};

/// Exact read accounting. Epoch e covers reads issued after failure e-1 and
/// before failure e; epoch 0 covers reads before the first failure.
class ReadLedger {
 public:
  void roll_epoch() { epochs_.emplace_back(); epoch_totals_.push_back(0); }
  void charge(std::uint32_t node, std::uint64_t nbits) {
    if (epochs_.empty()) roll_epoch();
    epochs_.back()[node] += nbits;
    epoch_totals_.back() += nbits;
    total_ += nbits;
  }

  std::uint64_t epoch_count() const { return epochs_.size(); }
  std::uint64_t charged(std::uint64_t epoch, std::uint32_t node) const {
    if (epoch >= epochs_.size()) return 0;
    auto it = epochs_[epoch].find(node);
    return it == epochs_[epoch].end() ? 0 : it->second;
  }
  std::uint64_t epoch_total(std::uint64_t epoch) const {
    return epoch < epoch_totals_.size() ? epoch_totals_[epoch] : 0;
  }
  std::uint64_t total() const { return total_; }

  // Reads from `node` across epochs [lo, hi] inclusive.
  std::uint64_t cumulative(std::uint64_t lo, std::uint64_t hi,
                           std::uint32_t node) const {
    std::uint64_t s = 0;
    for (std::uint64_t e = lo; e <= hi && e < epochs_.size(); ++e)
      s += charged(e, node);
    return s;
  }
  std::uint64_t cumulative_total(std::uint64_t lo, std::uint64_t hi) const {
    std::uint64_t s = 0;
    for (std::uint64_t e = lo; e <= hi && e < epoch_totals_.size(); ++e)
      s += epoch_totals_[e];
    return s;
  }

 private:
  std::vector<std::unordered_map<std::uint32_t, std::uint64_t>> epochs_;
  std::vector<std::uint64_t> epoch_totals_;
  std::uint64_t total_ = 0;
};

struct Snapshot {
  double clock = 0.0;
  BitVec memory;
  std::vector<BitVec> nodes;
};

/// N nodes of node_bits capacity plus the repairer's global memory.
/// Repairer reads are ledger-charged; writes and memory access are free.
class SystemState {
 public:
  SystemState(Fidelity f, std::uint32_t node_count, std::uint64_t node_bits,
              std::uint64_t memory_bits, bool keep_trace = true);

  Fidelity fidelity() const { return fidelity_; }
  std::uint32_t node_count() const { return node_count_; }
  std::uint64_t node_bits() const { return node_bits_; }
  std::uint64_t memory_bits() const { return memory_bits_; }
  double clock() const { return clock_; }
  // Monotone clock advance between events (reads issued mid-interval).
  void set_clock(double t);
  std::uint64_t failures() const { return failures_; }

  // Charged read over the node interface; instantaneous delivery.
  BitVec read(std::uint32_t node, std::uint64_t offset, std::uint64_t length,
              bool local_compute = false);
  // Uncharged write over the node interface.
  void write(std::uint32_t node, std::uint64_t offset, const BitVec& bits);

  // Global memory access is neither charged nor size-restricted by the ledger.
  BitVec read_memory(std::uint64_t offset, std::uint64_t length) const;
  void write_memory(std::uint64_t offset, const BitVec& bits);

  // Uncharged inspection, used by storers / recoverers / tests.
  BitVec peek_node(std::uint32_t node) const;
  void init_node(std::uint32_t node, const BitVec& content);

  // Erase node contents, advance the failure epoch, set the clock.
  void fail(std::uint32_t node, double t);

  Snapshot snapshot() const;
  void restore(const Snapshot& s);

  const ReadLedger& ledger() const { return ledger_; }
  // bits read with timestamps in (t_a, t_b] divided by the window length
  double read_rate(double t_a, double t_b) const;
  std::uint64_t bits_read_in(double t_a, double t_b) const;

  const std::vector<ReadRecord>& trace() const { return trace_; }

 private:
  void check_node_range(std::uint32_t node, std::uint64_t offset,
                        std::uint64_t length) const;

  Fidelity fidelity_;
  std::uint32_t node_count_;
  std::uint64_t node_bits_;
  std::uint64_t memory_bits_;
  bool keep_trace_;
  double clock_ = 0.0;
  std::uint64_t failures_ = 0;
  std::uint64_t next_seq_ = 0;
  BitVec memory_;
  std::vector<BitVec> nodes_;  // bit-exact mode only
  ReadLedger ledger_;
  std::vector<ReadRecord> trace_;
  std::vector<std::pair<double, std::uint64_t>> read_times_;  // (time, bits)
};

// RF-trace style export of read records; round-trips bit-exactly.
void write_trace_csv(std::ostream& os, const std::vector<ReadRecord>& trace);
std::vector<ReadRecord> read_trace_csv(std::istream& is, bool with_payload);

}  // namespace repairlab::store
