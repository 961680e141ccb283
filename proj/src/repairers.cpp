#include "repairlab/repairers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace repairlab::strat {

void StarveStrategy::post_failure(Context& ctx, const fail::FailureEvent& ev) {
  if (seen_.empty()) seen_.assign(ctx.io.node_count(), false);
  if (!seen_[ev.id]) {
    seen_[ev.id] = true;
    ++distinct_failed_;
    if (distinct_failed_ == overhead_ + 1 && ctx.loss) ctx.loss->record(ev.time);
  }
}

SmallCodeReactive::SmallCodeReactive(codes::CodeParams cp,
                                     std::uint32_t group_count,
                                     std::uint64_t seed)
    : cp_(cp), group_count_(group_count), rng_(seed, Rng::kStrategyStream) {
  cp_.validate();
  if (group_count_ == 0) throw std::invalid_argument("need >= 1 placement group");
}

void SmallCodeReactive::on_start(Context& ctx) {
  const std::uint32_t N = ctx.io.node_count();
  if (cp_.n > N) throw std::invalid_argument("group width exceeds node count");
  on_node_.assign(N, {});
  groups_.assign(group_count_, {});
  std::vector<std::uint32_t> pool(N);
  for (std::uint32_t g = 0; g < group_count_; ++g) {
    for (std::uint32_t i = 0; i < N; ++i) pool[i] = i;
    for (std::uint32_t i = 0; i < cp_.n; ++i) {
      std::uint32_t j = i + static_cast<std::uint32_t>(rng_.next_below(N - i));
      std::swap(pool[i], pool[j]);
    }
    auto& grp = groups_[g];
    grp.nodes.assign(pool.begin(), pool.begin() + cp_.n);
    grp.present.assign(cp_.n, true);
    for (std::uint32_t f = 0; f < cp_.n; ++f)
      on_node_[grp.nodes[f]].push_back({g, f});
  }
}

void SmallCodeReactive::post_failure(Context& ctx, const fail::FailureEvent& ev) {
  const std::uint32_t N = ctx.io.node_count();
  auto hit = std::move(on_node_[ev.id]);
  on_node_[ev.id].clear();
  for (auto [g, f] : hit) {
    auto& grp = groups_[g];
    grp.present[f] = false;
    if (grp.lost) continue;
    const std::uint32_t alive =
        static_cast<std::uint32_t>(std::count(grp.present.begin(),
                                              grp.present.end(), true));
    if (alive < cp_.k) {
      grp.lost = true;
      if (ctx.loss) ctx.loss->record(ev.time);
      continue;
    }
    // Read any k surviving fragments, regenerate, write to a fresh node
    // drawn uniformly outside the group.
    std::uint32_t used = 0;
    for (std::uint32_t s = 0; s < cp_.n && used < cp_.k; ++s) {
      if (!grp.present[s]) continue;
      ctx.io.read(grp.nodes[s], 0, cp_.fragment_bits);
      ++used;
    }
    std::uint32_t fresh;
    for (;;) {
      fresh = static_cast<std::uint32_t>(rng_.next_below(N));
      bool clash = false;
      for (std::uint32_t s = 0; s < cp_.n; ++s)
        if (grp.present[s] && grp.nodes[s] == fresh) { clash = true; break; }
      if (!clash && fresh != ev.id) break;
    }
    ctx.io.write(fresh, 0, BitVec(cp_.fragment_bits));
    grp.nodes[f] = fresh;
    grp.present[f] = true;
    on_node_[fresh].push_back({g, f});
    ++fragments_repaired_;
  }
}

bool SmallCodeReactive::recoverable(const Context&) const {
  for (const auto& g : groups_)
    if (g.lost) return false;
  return true;
}

std::uint64_t SmallCodeReactive::total_fragment_bits() const {
  return static_cast<std::uint64_t>(group_count_) * cp_.n * cp_.fragment_bits;
}

LiquidLazy::LiquidLazy(const Config& cfg) : cfg_(cfg) {
  // Presence-map bookkeeping only: the code spans all N nodes, so the GF(256)
  // field limit (an encode/decode concern) does not apply here.
  if (cfg_.cp.k < 1 || cfg_.cp.k > cfg_.cp.n)
    throw std::invalid_argument("liquid: need 1 <= k <= n");
  if (cfg_.cp.fragment_bits == 0)
    throw std::invalid_argument("liquid: empty fragments");
  if (!(cfg_.pass_period > 0.0))
    throw std::invalid_argument("liquid: pass_period must be > 0");
}

double LiquidLazy::default_pass_period(std::uint32_t r, double lambda,
                                       std::uint32_t node_count,
                                       double headroom_factor) {
  return headroom_factor * static_cast<double>(r) /
         (lambda * static_cast<double>(node_count));
}

void LiquidLazy::on_start(Context& ctx) {
  if (cfg_.cp.n != ctx.io.node_count())
    throw std::invalid_argument("liquid: code must span all nodes (n = N)");
  present_.assign(cfg_.object_count, std::vector<bool>(cfg_.cp.n, true));
  object_lost_.assign(cfg_.object_count, false);
  read_rate_ = cfg_.object_count == 0
                   ? 0.0
                   : static_cast<double>(cfg_.object_count) * cfg_.cp.k *
                         cfg_.cp.fragment_bits / cfg_.pass_period;
  sweep_clock_ = ctx.io.now();
  started_ = true;
}

void LiquidLazy::complete_visit(Context& ctx, std::uint32_t object, double t) {
  if (object_lost_[object]) return;
  auto& p = present_[object];
  const auto alive = std::count(p.begin(), p.end(), true);
  if (static_cast<std::uint32_t>(alive) < cfg_.cp.k) {
    object_lost_[object] = true;
    if (ctx.loss) ctx.loss->record(t);
    return;
  }
  std::fill(p.begin(), p.end(), true);
}

void LiquidLazy::sweep_to(Context& ctx, double t) {
  if (!started_ || cfg_.object_count == 0) return;
  const double visit_len = cfg_.pass_period / cfg_.object_count;
  auto charge_until = [&](double upto) {
    const double dt = upto - sweep_clock_;
    if (dt <= 0.0) return;
    carry_bits_ += dt * read_rate_;
    auto bits = static_cast<std::uint64_t>(carry_bits_);
    carry_bits_ -= static_cast<double>(bits);
    sweep_clock_ = upto;
    if (bits == 0) return;
    ctx.io.advance_clock(upto);
    // Charge against nodes currently holding a present fragment of the
    // object under repair, cycling so reads stay spread across the system
    // and no single read exceeds a node's capacity.
    const std::uint32_t obj =
        static_cast<std::uint32_t>(next_visit_ % cfg_.object_count);
    const auto& p = present_[obj];
    while (bits > 0) {
      for (std::uint32_t step = 0; step < cfg_.cp.n; ++step) {
        read_node_rr_ = (read_node_rr_ + 1) % cfg_.cp.n;
        if (p[read_node_rr_]) break;
      }
      const std::uint64_t chunk = std::min<std::uint64_t>(bits,
                                                          ctx.io.node_bits());
      ctx.io.read(read_node_rr_, 0, chunk);
      bits -= chunk;
    }
  };
  for (;;) {
    const double next_done = (static_cast<double>(next_visit_) + 1) * visit_len;
    if (next_done > t) break;
    charge_until(next_done);
    complete_visit(ctx,
                   static_cast<std::uint32_t>(next_visit_ % cfg_.object_count),
                   next_done);
    ++next_visit_;
  }
  charge_until(t);
}

void LiquidLazy::pre_failure(Context& ctx, const fail::FailureEvent& upcoming) {
  sweep_to(ctx, upcoming.time);
}

void LiquidLazy::post_failure(Context& ctx, const fail::FailureEvent& ev) {
  for (std::uint32_t o = 0; o < cfg_.object_count; ++o) {
    if (object_lost_[o]) continue;
    auto& p = present_[o];
    if (!p[ev.id]) continue;
    p[ev.id] = false;
    const auto alive = std::count(p.begin(), p.end(), true);
    if (static_cast<std::uint32_t>(alive) < cfg_.cp.k) {
      object_lost_[o] = true;
      if (ctx.loss) ctx.loss->record(ev.time);
    }
  }
}

bool LiquidLazy::recoverable(const Context&) const {
  return std::none_of(object_lost_.begin(), object_lost_.end(),
                      [](bool b) { return b; });
}

EqualReadStrategy::EqualReadStrategy(std::uint64_t gamma) : gamma_(gamma) {}

void EqualReadStrategy::pre_failure(Context& ctx, const fail::FailureEvent&) {
  const std::uint32_t N = ctx.io.node_count();
  if (gamma_ % N != 0)
    throw std::invalid_argument("equal_read: gamma must be divisible by N");
  const std::uint64_t per = gamma_ / N;
  if (per == 0) return;
  for (std::uint32_t j = 0; j < N; ++j) ctx.io.read(j, 0, per);
}

void CopyAheadOracle::on_start(Context& ctx) {
  const std::uint32_t N = ctx.io.node_count();
  if (empty_node_ >= N) throw std::invalid_argument("bad empty node");
  chunk_map_.assign(N, 0);
  std::uint32_t c = 0;
  for (std::uint32_t i = 0; i < N; ++i)
    chunk_map_[i] = (i == empty_node_) ? UINT32_MAX : c++;
}

void CopyAheadOracle::pre_failure(Context& ctx,
                                  const fail::FailureEvent& upcoming) {
  if (!have_future_)
    throw std::logic_error("copy_ahead_oracle: future sequence not provided");
  const std::uint32_t doomed = upcoming.id;
  BitVec content = ctx.io.read(doomed, 0, ctx.io.node_bits());
  if (doomed != empty_node_) {
    ctx.io.write(empty_node_, 0, content.size() ? content
                                                : BitVec(ctx.io.node_bits()));
    chunk_map_[empty_node_] = chunk_map_[doomed];
  }
}

void CopyAheadOracle::post_failure(Context&, const fail::FailureEvent& ev) {
  chunk_map_[ev.id] = UINT32_MAX;
  empty_node_ = ev.id;
}

void RandomProbeStrategy::act(Context& ctx) {
  const std::uint32_t N = ctx.io.node_count();
  const std::uint64_t nb = ctx.io.node_bits();
  const std::uint64_t ops = 1 + rng_.next_below(3);
  for (std::uint64_t o = 0; o < ops; ++o) {
    const auto src = static_cast<std::uint32_t>(rng_.next_below(N));
    const std::uint64_t len = 1 + rng_.next_below(std::min<std::uint64_t>(nb, 16));
    const std::uint64_t off = rng_.next_below(nb - len + 1);
    BitVec got = ctx.io.read(src, off, len);
    // Content-dependent follow-up: what gets written depends on what was read.
    std::uint64_t bits = got.size() ? got.as_u64() : 0;
    bits ^= rng_.next_u64() & ((len >= 64) ? ~0ull : ((1ull << len) - 1));
    const auto dst = static_cast<std::uint32_t>(rng_.next_below(N));
    if ((bits & 1) && ctx.io.memory_bits() >= len)
      ctx.io.write_memory(0, BitVec::from_u64(bits, len));
    ctx.io.write(dst, off, BitVec::from_u64(bits, len));
  }
}

void RandomProbeStrategy::pre_failure(Context& ctx, const fail::FailureEvent&) {
  act(ctx);
}

void RandomProbeStrategy::post_failure(Context& ctx, const fail::FailureEvent&) {
  act(ctx);
}

RecoverabilityReport recoverability_check(
    const std::vector<std::vector<bool>>& presence_maps,
    const codes::CodeParams& cp) {
  RecoverabilityReport rep;
  rep.per_object.reserve(presence_maps.size());
  for (const auto& pm : presence_maps) {
    const bool ok = codes::recoverable(pm, cp);
    rep.per_object.push_back(ok);
    rep.all_recoverable = rep.all_recoverable && ok;
  }
  return rep;
}

}  // namespace repairlab::strat
