#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "repairlab/bitvec.hpp"
#include "repairlab/codes.hpp"
#include "repairlab/failure_model.hpp"
#include "repairlab/rng.hpp"
#include "repairlab/storage_core.hpp"

namespace repairlab::strat {

/// Node-interface access as seen by a strategy. The engine behind it is either
/// the live system state or the replay layer that serves flagged nodes from a
/// recorded trace; strategies cannot tell the difference.
class NodeIO {
 public:
  virtual ~NodeIO() = default;
  virtual BitVec read(std::uint32_t node, std::uint64_t offset,
                      std::uint64_t length, bool local_compute = false) = 0;
  virtual void write(std::uint32_t node, std::uint64_t offset,
                     const BitVec& bits) = 0;
  virtual BitVec read_memory(std::uint64_t offset, std::uint64_t length) = 0;
  virtual void write_memory(std::uint64_t offset, const BitVec& bits) = 0;
  virtual void advance_clock(double t) = 0;
  virtual double now() const = 0;
  virtual store::Fidelity fidelity() const = 0;
  virtual std::uint32_t node_count() const = 0;
  virtual std::uint64_t node_bits() const = 0;
  virtual std::uint64_t memory_bits() const = 0;
};

/// Pass-through NodeIO over a live system state.
class DirectIO final : public NodeIO {
 public:
  explicit DirectIO(store::SystemState& st) : st_(st) {}
  BitVec read(std::uint32_t node, std::uint64_t offset, std::uint64_t length,
              bool local_compute = false) override {
    return st_.read(node, offset, length, local_compute);
  }
  void write(std::uint32_t node, std::uint64_t offset,
             const BitVec& bits) override {
    st_.write(node, offset, bits);
  }
  BitVec read_memory(std::uint64_t offset, std::uint64_t length) override {
    return st_.read_memory(offset, length);
  }
  void write_memory(std::uint64_t offset, const BitVec& bits) override {
    st_.write_memory(offset, bits);
  }
  void advance_clock(double t) override { st_.set_clock(t); }
  double now() const override { return st_.clock(); }
  store::Fidelity fidelity() const override { return st_.fidelity(); }
  std::uint32_t node_count() const override { return st_.node_count(); }
  std::uint64_t node_bits() const override { return st_.node_bits(); }
  std::uint64_t memory_bits() const override { return st_.memory_bits(); }

 private:
  store::SystemState& st_;
};

struct LossLog {
  bool lost = false;
  double first_loss_time = std::numeric_limits<double>::quiet_NaN();
  void record(double t) {
    if (!lost) first_loss_time = t;
    lost = true;
  }
};

struct Context {
  NodeIO& io;
  const std::vector<fail::FailureEvent>& history;  // failures delivered so far
  LossLog* loss = nullptr;
};

/// A strategy's actions are a deterministic function of (time, global memory,
/// failure history) plus its own seeded randomness. copy_ahead additionally
/// demands the full future sequence up front.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual const char* name() const = 0;

  // Called once before any failure; must not read over the node interface.
  virtual void on_start(Context&) {}
  // Actions inside the interval ending at `upcoming` (charged pre-failure).
  virtual void pre_failure(Context&, const fail::FailureEvent& upcoming) {
    (void)upcoming;
  }
  // Reaction to a failure that just happened (node already zeroed).
  virtual void post_failure(Context&, const fail::FailureEvent& failed) {
    (void)failed;
  }

  // Called after the last delivered failure, at the end of the run window.
  virtual void on_finish(Context&, double t_end) { (void)t_end; }

  virtual bool needs_future() const { return false; }
  virtual void provide_future(const fail::FailureSequence&) {}

  // Strategy's own recoverability bookkeeping (presence maps etc).
  virtual bool recoverable(const Context&) const { return true; }
};

/// Performs no repair at all. Models the whole system as one symbolic MDS
/// object spanning all nodes with `overhead_nodes` of slack: recoverability
/// ends after overhead_nodes+1 distinct failures.
class StarveStrategy : public Strategy {
 public:
  explicit StarveStrategy(std::uint32_t overhead_nodes = 0)
      : overhead_(overhead_nodes) {}
  const char* name() const override { return "starve"; }
  void post_failure(Context& ctx, const fail::FailureEvent& ev) override;
  bool recoverable(const Context&) const override {
    return distinct_failed_ <= overhead_;
  }

 private:
  std::uint32_t overhead_;
  std::vector<bool> seen_;
  std::uint32_t distinct_failed_ = 0;
};

/// Reactive small-code repair over placement groups: on a failure, every lost
/// fragment is regenerated from k surviving fragments of its group and written
/// to a freshly drawn node outside the group.
class SmallCodeReactive : public Strategy {
 public:
  SmallCodeReactive(codes::CodeParams cp, std::uint32_t group_count,
                    std::uint64_t seed);
  const char* name() const override { return "small_code_reactive"; }
  void on_start(Context& ctx) override;
  void post_failure(Context& ctx, const fail::FailureEvent& ev) override;
  bool recoverable(const Context&) const override;

  std::uint64_t fragments_repaired() const { return fragments_repaired_; }
  std::uint64_t total_fragment_bits() const;

 private:
  struct Group {
    std::vector<std::uint32_t> nodes;  // fragment index -> node
    std::vector<bool> present;
    bool lost = false;
  };
  codes::CodeParams cp_;
  std::uint32_t group_count_;
  Rng rng_;
  std::vector<Group> groups_;
  // node -> (group, fragment) incidence
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> on_node_;
  std::uint64_t fragments_repaired_ = 0;
};

/// Lazy round-robin repair with n = N: objects are swept at a constant speed;
/// a visit reads k present fragments and restores all missing ones. Reads are
/// charged continuously as the sweep advances, spread round-robin over nodes.
class LiquidLazy : public Strategy {
 public:
  struct Config {
    codes::CodeParams cp;         // n must equal N
    std::uint32_t object_count = 1;
    double pass_period = 0.0;     // time for one full sweep over all objects
  };
  explicit LiquidLazy(const Config& cfg);
  const char* name() const override { return "liquid_lazy"; }
  void on_start(Context& ctx) override;
  void pre_failure(Context& ctx, const fail::FailureEvent& upcoming) override;
  void post_failure(Context& ctx, const fail::FailureEvent& ev) override;
  void on_finish(Context& ctx, double t_end) override { sweep_to(ctx, t_end); }
  bool recoverable(const Context&) const override;

  // Suggested pass period: the expected time of headroom_factor * r failures.
  static double default_pass_period(std::uint32_t r, double lambda,
                                    std::uint32_t node_count,
                                    double headroom_factor = 0.5);

 private:
  void sweep_to(Context& ctx, double t);
  void complete_visit(Context& ctx, std::uint32_t object, double t);

  Config cfg_;
  std::vector<std::vector<bool>> present_;  // object -> fragment presence
  std::vector<bool> object_lost_;
  double read_rate_ = 0.0;   // bits per unit time while sweeping
  double sweep_clock_ = 0.0;
  std::uint64_t next_visit_ = 0;  // visit v completes object v % object_count
  double carry_bits_ = 0.0;
  std::uint32_t read_node_rr_ = 0;
  bool started_ = false;
};

/// Reads exactly gamma/N bits from every node inside each inter-failure
/// interval; writes nothing (the ledger identities under test do not depend
/// on the write policy).
class EqualReadStrategy : public Strategy {
 public:
  EqualReadStrategy(std::uint64_t gamma);
  const char* name() const override { return "equal_read"; }
  void pre_failure(Context& ctx, const fail::FailureEvent& upcoming) override;

 private:
  std::uint64_t gamma_;
};

/// Oracle with the future failure sequence: before each failure, copies the
/// doomed node's contents to the one empty node. Uses overhead of a single
/// node and reads exactly node_bits per failure.
class CopyAheadOracle : public Strategy {
 public:
  explicit CopyAheadOracle(std::uint32_t empty_node)
      : empty_node_(empty_node) {}
  const char* name() const override { return "copy_ahead_oracle"; }
  bool needs_future() const override { return true; }
  void provide_future(const fail::FailureSequence& fs) override {
    future_ = fs;
    have_future_ = true;
  }
  void on_start(Context& ctx) override;
  void pre_failure(Context& ctx, const fail::FailureEvent& upcoming) override;
  void post_failure(Context& ctx, const fail::FailureEvent& ev) override;
  bool recoverable(const Context&) const override { return true; }

  // chunk index stored on each node (empty slot = chunk count), for the
  // bit-exact preservation check
  const std::vector<std::uint32_t>& chunk_map() const { return chunk_map_; }
  std::uint32_t empty_node() const { return empty_node_; }

 private:
  std::uint32_t empty_node_;
  fail::FailureSequence future_;
  bool have_future_ = false;
  std::vector<std::uint32_t> chunk_map_;
};

/// Seeded random reader/writer whose behavior depends on the bits it reads;
/// exists to exercise the replay machinery with content-dependent strategies.
class RandomProbeStrategy : public Strategy {
 public:
  explicit RandomProbeStrategy(std::uint64_t seed)
      : rng_(seed, Rng::kStrategyStream) {}
  const char* name() const override { return "random_probe"; }
  void pre_failure(Context& ctx, const fail::FailureEvent& upcoming) override;
  void post_failure(Context& ctx, const fail::FailureEvent& ev) override;

 private:
  void act(Context& ctx);
  Rng rng_;
};

struct RecoverabilityReport {
  std::vector<bool> per_object;
  bool all_recoverable = true;
};
RecoverabilityReport recoverability_check(
    const std::vector<std::vector<bool>>& presence_maps,
    const codes::CodeParams& cp);

}  // namespace repairlab::strat
