#include "repairlab/phase.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace repairlab::phase {

namespace {

void check_distinct(const std::vector<fail::FailureEvent>& prefix) {
  std::unordered_set<std::uint32_t> seen;
  for (const auto& e : prefix)
    if (!seen.insert(e.id).second)
      throw std::invalid_argument("phase prefix: identifiers must be distinct");
}

}  // namespace

PhaseRecord run_phase_first_execution(store::SystemState& state,
                                      strat::Strategy& strategy,
                                      const std::vector<fail::FailureEvent>& prefix,
                                      const std::vector<double>* gammas,
                                      strat::LossLog* loss) {
  check_distinct(prefix);
  const std::uint64_t m = prefix.size();
  if (m == 0) throw std::invalid_argument("phase prefix: empty");
  const std::uint64_t trace_base = state.trace().size();

  PhaseRecord rec;
  rec.planned_failures = m;
  if (state.fidelity() == store::Fidelity::BitExact)
    rec.start = state.snapshot();

  strat::DirectIO io(state);
  std::vector<fail::FailureEvent> history;
  strat::Context ctx{io, history, loss};
  strategy.on_start(ctx);

  const std::uint64_t epoch_base = state.failures();  // phase-local epoch 0
  rec.start_epoch = epoch_base;
  auto phase_reads = [&](std::uint64_t upto_epoch) {
    return state.ledger().cumulative_total(epoch_base + 1,
                                           epoch_base + upto_epoch);
  };

  for (std::uint64_t i = 0; i < m; ++i) {
    if (i > 0) {
      strategy.pre_failure(ctx, prefix[i]);
      const std::uint64_t rsize_i = phase_reads(i);
      rec.rsize.push_back(rsize_i);
      if (gammas && i < gammas->size() &&
          static_cast<double>(rsize_i) >= (*gammas)[i]) {
        // Phase ends just before this distinct failure; the failure itself
        // seeds the next phase and is not delivered here.
        rec.termination_index = i;
        rec.reason = Termination::GammaExceeded;
        rec.trace.assign(state.trace().begin() + trace_base,
                         state.trace().end());
        return rec;
      }
    } else {
      rec.rsize.push_back(0);
    }
    state.fail(prefix[i].id, prefix[i].time);
    history.push_back(prefix[i]);
    rec.prefix.push_back(prefix[i]);
    rec.rfsize_each.push_back(state.ledger().cumulative(
        epoch_base + 1, epoch_base + i, prefix[i].id));
    rec.rfsize_total += rec.rfsize_each.back();
    if (i + 1 < m) strategy.post_failure(ctx, prefix[i]);
  }
  rec.termination_index = m - 1;
  rec.reason = Termination::Completed;
  rec.trace.assign(state.trace().begin() + trace_base, state.trace().end());
  return rec;
}

CompressedState build_compressed_state(const PhaseRecord& record,
                                       const store::SystemState& state) {
  if (record.reason != Termination::Completed)
    throw std::invalid_argument(
        "compressed state is defined only for completed phases");
  if (!record.start)
    throw std::invalid_argument("compressed state requires a bit-exact run");

  const std::uint64_t m = record.prefix.size();
  std::unordered_map<std::uint32_t, std::uint64_t> fail_pos;
  for (std::uint64_t p = 0; p < m; ++p) fail_pos[record.prefix[p].id] = p;

  CompressedState d;
  d.memory = record.start->memory;
  for (std::uint32_t j = 0; j < state.node_count(); ++j)
    if (!fail_pos.count(j)) d.untouched.push_back({j, record.start->nodes[j]});

  // Delivered failure p moved the system to absolute epoch start+p+1, so a
  // read belongs to RF iff its node fails at position p and its absolute
  // epoch is <= start+p. Reads at or before the phase-start epoch would mean
  // the strategy read before t0, which the engine forbids.
  const std::uint64_t start_epoch = record.start_epoch;
  for (const auto& r : record.trace)
    if (r.epoch <= start_epoch)
      throw std::invalid_argument("phase trace contains pre-phase reads");
  for (const auto& r : record.trace) {
    auto it = fail_pos.find(r.node);
    if (it == fail_pos.end()) continue;
    if (r.epoch <= start_epoch + it->second) {
      d.rf.push_back(r);
      d.rfsize += r.length;
    }
  }
  if (d.rfsize != record.rfsize_total)
    throw std::logic_error("rfsize bookkeeping mismatch");
  return d;
}

namespace {

/// Serves reads on not-yet-failed nodes from the recorded RF trace; skips
/// writes to them; everything else passes through to the rebuilt state.
class ReplayIO final : public strat::NodeIO {
 public:
  ReplayIO(store::SystemState& st, std::vector<bool> flagged,
           const std::vector<store::ReadRecord>& rf)
      : st_(st), flagged_(std::move(flagged)), rf_(rf) {}

  BitVec read(std::uint32_t node, std::uint64_t offset, std::uint64_t length,
              bool local_compute = false) override {
    if (node < flagged_.size() && flagged_[node]) {
      if (cursor_ >= rf_.size())
        throw ReplayMismatch("replay: recorded trace exhausted");
      const auto& r = rf_[cursor_];
      if (r.node != node || r.offset != offset || r.length != length)
        throw ReplayMismatch("replay: read does not match recorded trace");
      ++cursor_;
      return r.payload;
    }
    return st_.read(node, offset, length, local_compute);
  }
  void write(std::uint32_t node, std::uint64_t offset,
             const BitVec& bits) override {
    if (node < flagged_.size() && flagged_[node]) return;
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

  void unflag(std::uint32_t node) { flagged_[node] = false; }
  std::size_t cursor() const { return cursor_; }

 private:
  store::SystemState& st_;
  std::vector<bool> flagged_;
  const std::vector<store::ReadRecord>& rf_;
  std::size_t cursor_ = 0;
};

}  // namespace

store::SystemState replay_second_execution(const CompressedState& d,
                                           const PhaseRecord& record,
                                           strat::Strategy& strategy,
                                           std::uint32_t node_count,
                                           std::uint64_t node_bits,
                                           std::uint64_t memory_bits) {
  if (record.reason != Termination::Completed)
    throw std::invalid_argument("replay requires a completed phase");
  store::SystemState st(store::Fidelity::BitExact, node_count, node_bits,
                        memory_bits, /*keep_trace=*/false);
  st.write_memory(0, d.memory);
  std::vector<bool> flagged(node_count, false);
  for (const auto& e : record.prefix) flagged[e.id] = true;
  for (const auto& [j, content] : d.untouched) st.init_node(j, content);
  if (!record.prefix.empty() && record.start)
    st.set_clock(record.start->clock);

  ReplayIO io(st, flagged, d.rf);
  std::vector<fail::FailureEvent> history;
  strat::Context ctx{io, history, nullptr};
  strategy.on_start(ctx);
  const std::uint64_t m = record.prefix.size();
  for (std::uint64_t i = 0; i < m; ++i) {
    if (i > 0) strategy.pre_failure(ctx, record.prefix[i]);
    io.unflag(record.prefix[i].id);
    st.fail(record.prefix[i].id, record.prefix[i].time);
    history.push_back(record.prefix[i]);
    if (i + 1 < m) strategy.post_failure(ctx, record.prefix[i]);
  }
  if (io.cursor() != d.rf.size())
    throw ReplayMismatch("replay: recorded trace not fully consumed");
  return st;
}

CensusResult compression_census(std::uint32_t node_count, std::uint64_t node_bits,
                                std::uint64_t memory_bits, std::uint32_t dsize,
                                const Storer& storer, const Recoverer& recoverer,
                                const StrategyFactory& make_strategy,
                                const std::vector<fail::FailureEvent>& prefix,
                                std::uint32_t ell) {
  if (dsize > 20)
    throw std::invalid_argument("census: dsize too large for enumeration");
  CensusResult res;
  res.domain = 1ull << dsize;
  res.ell_bound = std::ldexp(1.0, 1 - static_cast<int>(ell));
  const std::uint64_t m = prefix.size();
  for (std::uint64_t x = 0; x < res.domain; ++x) {
    const BitVec xbits = BitVec::from_u64(x, dsize);
    store::SystemState st(store::Fidelity::BitExact, node_count, node_bits,
                          memory_bits);
    storer(st, xbits);
    auto strategy = make_strategy();
    PhaseRecord rec = run_phase_first_execution(st, *strategy, prefix);
    CompressedState d = build_compressed_state(rec, st);
    const std::uint64_t len = d.len_bits(memory_bits, node_count, node_bits, m);
    if (len + ell > dsize) continue;
    ++res.eligible;
    auto replay_strategy = make_strategy();
    store::SystemState rebuilt = replay_second_execution(
        d, rec, *replay_strategy, node_count, node_bits, memory_bits);
    if (recoverer(rebuilt) == xbits) ++res.recovered;
  }
  return res;
}

PhaseChainStats chain_phases(store::SystemState& state,
                             const StrategyFactory& make_strategy,
                             const std::vector<fail::FailureEvent>& events,
                             std::uint64_t planned_failures,
                             const std::vector<double>* gammas,
                             bool keep_records) {
  const std::uint64_t m = planned_failures;
  PhaseChainStats stats;
  std::size_t pos = 0;
  strat::DirectIO io(state);
  bool first_event_global = true;
  while (stats.distinct_total < m) {
    // One phase: runs until it holds m distinct failures or the read
    // threshold fires just before a new distinct failure.
    auto strategy = make_strategy();
    std::vector<fail::FailureEvent> history;
    strat::Context ctx{io, history, nullptr};
    strategy->on_start(ctx);
    const std::uint64_t epoch_base = state.failures();
    PhaseRecord rec;
    rec.planned_failures = m;
    std::unordered_set<std::uint32_t> phase_ids;
    std::uint64_t delivered = 0;  // failures delivered inside this phase
    for (;;) {
      if (pos >= events.size())
        throw std::runtime_error("chain_phases: event stream exhausted");
      const auto& ev = events[pos];
      const bool is_new = !phase_ids.count(ev.id);
      if (!first_event_global) strategy->pre_failure(ctx, ev);
      first_event_global = false;
      if (is_new && !phase_ids.empty()) {
        const std::uint64_t i = phase_ids.size();  // would-be distinct index
        const std::uint64_t phase_rsize = state.ledger().cumulative_total(
            epoch_base + 1, epoch_base + delivered);
        rec.rsize.push_back(phase_rsize);
        if (gammas && i < gammas->size() &&
            static_cast<double>(phase_rsize) >= (*gammas)[i]) {
          rec.termination_index = i;
          rec.reason = Termination::GammaExceeded;
          break;  // this event seeds the next phase (not consumed)
        }
      }
      ++pos;
      state.fail(ev.id, ev.time);
      history.push_back(ev);
      ++stats.failures_total;
      ++delivered;
      if (is_new) {
        phase_ids.insert(ev.id);
        rec.prefix.push_back(ev);
        rec.rfsize_each.push_back(state.ledger().cumulative(
            epoch_base + 1, epoch_base + delivered - 1, ev.id));
        rec.rfsize_total += rec.rfsize_each.back();
        ++stats.distinct_total;
      }
      const bool phase_done = phase_ids.size() == m;
      if (!phase_done) strategy->post_failure(ctx, ev);
      if (phase_done) {
        rec.termination_index = m - 1;
        rec.reason = Termination::Completed;
        break;
      }
    }
    if (keep_records) stats.phases.push_back(std::move(rec));
  }
  return stats;
}

std::vector<double> z_process(const std::vector<std::uint64_t>& rfsize_each,
                              double rho) {
  std::vector<double> z;
  z.reserve(rfsize_each.size());
  double acc = 0.0;
  for (std::size_t i = 1; i < rfsize_each.size(); ++i) {
    acc += static_cast<double>(rfsize_each[i]);
    const double tau = static_cast<double>(i) * (static_cast<double>(i) + 1) / 2;
    z.push_back(acc - tau * rho);
  }
  return z;
}

CondExpCheck cond_exp_rfsize(std::uint32_t node_count, std::uint64_t node_bits,
                             std::uint64_t memory_bits,
                             const StrategyFactory& make_strategy,
                             const std::vector<fail::FailureEvent>& base_prefix,
                             double t_i) {
  check_distinct(base_prefix);
  const std::uint64_t i = base_prefix.size();
  if (i == 0 || i >= node_count)
    throw std::invalid_argument("cond_exp: need 1 <= |prefix| < N");
  std::unordered_set<std::uint32_t> used;
  for (const auto& e : base_prefix) used.insert(e.id);

  CondExpCheck out;
  std::uint64_t trials = 0;
  double sum = 0.0;
  bool have_formula = false;
  for (std::uint32_t c = 0; c < node_count; ++c) {
    if (used.count(c)) continue;
    store::SystemState st(store::Fidelity::BitExact, node_count, node_bits,
                          memory_bits);
    auto strategy = make_strategy();
    auto prefix = base_prefix;
    prefix.push_back({i, t_i, c});
    PhaseRecord rec = run_phase_first_execution(st, *strategy, prefix);
    sum += static_cast<double>(rec.rfsize_each[i]);
    ++trials;
    if (!have_formula) {
      have_formula = true;
      std::uint64_t prior = 0;
      for (std::uint64_t l = 0; l < i; ++l) prior += rec.rfsize_each[l];
      out.formula = (static_cast<double>(rec.rsize[i]) -
                     static_cast<double>(prior)) /
                    static_cast<double>(node_count - i);
      // Reads (before t_i) from nodes whose identifier already failed:
      // these are replacement-node reads and break the equality.
      for (const auto& r : rec.trace) {
        auto pos = std::find_if(
            base_prefix.begin(), base_prefix.end(),
            [&](const fail::FailureEvent& e) { return e.id == r.node; });
        if (pos == base_prefix.end()) continue;
        const std::uint64_t p = static_cast<std::uint64_t>(
            pos - base_prefix.begin());
        if (r.epoch > p && r.epoch <= i) out.replacement_reads += r.length;
      }
    }
  }
  out.empirical_mean = sum / static_cast<double>(trials);
  return out;
}

void write_chain_csv(std::ostream& os, const PhaseChainStats& stats) {
  os << "phase,reason,rsize_digest,rfsize,Y,Yprime\n";
  for (std::size_t p = 0; p < stats.phases.size(); ++p) {
    const auto& rec = stats.phases[p];
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a over rsize values
    for (auto v : rec.rsize) {
      for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xff;
        h *= 1099511628211ull;
      }
    }
    os << p << ','
       << (rec.reason == Termination::Completed ? "completed" : "gamma_exceeded")
       << ',' << std::hex << h << std::dec << ',' << rec.rfsize_total << ','
       << stats.distinct_total << ',' << stats.failures_total << '\n';
  }
}

}  // namespace repairlab::phase
