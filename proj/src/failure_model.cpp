#include "repairlab/failure_model.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace repairlab::fail {

FailureSequence gen_poisson(std::uint32_t node_count, double lambda, double t0,
                            std::uint64_t horizon, std::uint64_t seed) {
  Rng timing(seed, Rng::kTimingStream);
  Rng ids(seed, Rng::kIdStream);
  const double rate = lambda * static_cast<double>(node_count);
  FailureSequence fs;
  fs.timing = TimingKind::Poisson;
  fs.ids = IdKind::Uniform;
  fs.events.reserve(horizon);
  double t = t0;
  for (std::uint64_t i = 0; i < horizon; ++i) {
    if (i > 0) t += timing.next_exponential(rate);
    fs.events.push_back({i, t, static_cast<std::uint32_t>(ids.next_below(node_count))});
  }
  return fs;
}

FailureSequence gen_periodic(std::uint32_t node_count, double t0, double period,
                             std::uint64_t horizon, std::uint64_t seed,
                             IdKind id_mode) {
  if (!(period > 0.0)) throw std::invalid_argument("period must be > 0");
  FailureSequence fs;
  fs.timing = TimingKind::Periodic;
  fs.ids = id_mode;
  fs.events.reserve(horizon);
  if (id_mode == IdKind::Distinct) {
    if (horizon > node_count)
      throw std::invalid_argument("distinct mode: horizon > N");
    Rng ids(seed, Rng::kIdStream);
    auto first = static_cast<std::uint32_t>(ids.next_below(node_count));
    auto seq = gen_distinct_phase(node_count, first, horizon, seed);
    for (std::uint64_t i = 0; i < horizon; ++i)
      fs.events.push_back({i, t0 + static_cast<double>(i) * period, seq[i]});
  } else {
    Rng ids(seed, Rng::kIdStream);
    for (std::uint64_t i = 0; i < horizon; ++i)
      fs.events.push_back({i, t0 + static_cast<double>(i) * period,
                           static_cast<std::uint32_t>(ids.next_below(node_count))});
  }
  return fs;
}

std::vector<std::uint32_t> gen_distinct_phase(std::uint32_t node_count,
                                              std::uint32_t id0, std::uint64_t span,
                                              std::uint64_t seed) {
  if (span > node_count) throw std::invalid_argument("span > N");
  if (span == 0) return {};
  // Partial Fisher-Yates over {0..N-1} with id0 pinned first.
  std::vector<std::uint32_t> pool(node_count);
  for (std::uint32_t j = 0; j < node_count; ++j) pool[j] = j;
  std::swap(pool[0], pool[id0]);
  Rng rng(seed, Rng::kIdStream);
  for (std::uint64_t i = 1; i < span; ++i) {
    std::uint64_t j = i + rng.next_below(node_count - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(span);
  return pool;
}

UniformViaGeometric gen_uniform_via_geometric(std::uint32_t node_count,
                                              std::uint32_t id0,
                                              std::uint64_t distinct_span,
                                              std::uint64_t seed) {
  if (distinct_span > node_count || distinct_span == 0)
    throw std::invalid_argument("distinct_span must be in [1, N]");
  UniformViaGeometric out;
  out.distinct = gen_distinct_phase(node_count, id0, distinct_span, seed);
  out.geometric.prefix_sums.push_back(0);
  out.ids.push_back(id0);
  Rng geo(seed, Rng::kGeometricStream);
  Rng fill(seed, Rng::kIdStream + 17);
  const double n = static_cast<double>(node_count);
  for (std::uint64_t i = 1; i < distinct_span; ++i) {
    // G_i = argmin j>=1 { B(j) <= (N-i)/N }
    std::uint64_t g = 1;
    while (!(geo.next_double() <= (n - static_cast<double>(i)) / n)) ++g;
    out.geometric.draws.push_back(g);
    out.geometric.prefix_sums.push_back(out.geometric.prefix_sums.back() + g);
    // Non-hit positions repeat a uniformly chosen already-failed identifier.
    for (std::uint64_t j = 1; j < g; ++j)
      out.ids.push_back(out.distinct[fill.next_below(i)]);
    out.ids.push_back(out.distinct[i]);
  }
  return out;
}

void write_csv(std::ostream& os, const FailureSequence& fs) {
  os << "index,time,id\n";
  char buf[32];
  for (const auto& e : fs.events) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, e.time,
                                 std::chars_format::general, 17);
    os << e.index << ',' << std::string_view(buf, p) << ',' << e.id << '\n';
  }
}

FailureSequence read_csv(std::istream& is) {
  FailureSequence fs;
  std::string line;
  if (!std::getline(is, line) || line.rfind("index,", 0) != 0)
    throw std::runtime_error("failure csv: bad header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    FailureEvent e;
    std::istringstream ss(line);
    char c1, c2;
    if (!(ss >> e.index >> c1 >> e.time >> c2 >> e.id) || c1 != ',' || c2 != ',')
      throw std::runtime_error("failure csv: bad row: " + line);
    fs.events.push_back(e);
  }
  return fs;
}

}  // namespace repairlab::fail
