#include "repairlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace repairlab::scenario {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bounds::bits128 parse_bits128(const std::string& s) {
  // Values like 9e20 exceed uint64; long double (64-bit mantissa on x86)
  // represents the integers used here exactly.
  const long double v = std::stold(s);
  if (v < 0) throw std::invalid_argument("negative bit count: " + s);
  return static_cast<bounds::bits128>(v);
}

}  // namespace

Config Config::parse(std::istream& is) {
  Config cfg;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config: " + path);
  return parse(f);
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key);
}

std::string Config::get(const std::string& section,
                        const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end() || !s->second.count(key))
    throw std::invalid_argument("missing config key: [" + section + "] " + key);
  return s->second.at(key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key,
                          std::optional<double> fallback) const {
  if (!has(section, key)) {
    if (fallback) return *fallback;
    throw std::invalid_argument("missing config key: [" + section + "] " + key);
  }
  try {
    return std::stod(get(section, key));
  } catch (const std::exception&) {
    throw std::invalid_argument("bad numeric value for [" + section + "] " +
                                key + ": " + get(section, key));
  }
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key,
                              std::optional<std::uint64_t> fallback) const {
  if (!has(section, key)) {
    if (fallback) return *fallback;
    throw std::invalid_argument("missing config key: [" + section + "] " + key);
  }
  const std::string v = get(section, key);
  try {
    if (v.find_first_of("eE.") != std::string::npos)
      return static_cast<std::uint64_t>(std::stold(v));
    return std::stoull(v);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer value for [" + section + "] " +
                                key + ": " + v);
  }
}

std::vector<std::string> Config::get_list(const std::string& section,
                                          const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get(section, key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> Config::get_double_list(const std::string& section,
                                            const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : get_list(section, key)) out.push_back(std::stod(s));
  return out;
}

StrategyKind strategy_kind_from(const std::string& name) {
  if (name == "starve") return StrategyKind::Starve;
  if (name == "small_code_reactive") return StrategyKind::SmallCodeReactive;
  if (name == "liquid_lazy") return StrategyKind::LiquidLazy;
  if (name == "equal_read") return StrategyKind::EqualRead;
  if (name == "copy_ahead_oracle") return StrategyKind::CopyAheadOracle;
  if (name == "random_probe") return StrategyKind::RandomProbe;
  throw std::invalid_argument("unknown strategy kind: " + name);
}

const char* strategy_kind_name(StrategyKind k) {
  switch (k) {
    case StrategyKind::Starve: return "starve";
    case StrategyKind::SmallCodeReactive: return "small_code_reactive";
    case StrategyKind::LiquidLazy: return "liquid_lazy";
    case StrategyKind::EqualRead: return "equal_read";
    case StrategyKind::CopyAheadOracle: return "copy_ahead_oracle";
    case StrategyKind::RandomProbe: return "random_probe";
  }
  return "?";
}

void Scenario::validate() const {
  system.validate();
  inputs.validate();
  if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");
  if (timing == fail::TimingKind::Periodic && !(period > 0.0))
    throw std::invalid_argument("period must be > 0");
}

namespace {

// Sections owned by the scenario reader; unknown keys in them are mistakes
// (typos) and are rejected by name. Other sections (e.g. [sweep]) have their
// own readers.
void reject_unknown_keys(const Config& cfg) {
  static const std::map<std::string, std::set<std::string>> known = {
      {"system",
       {"node_count", "node_bits", "memory_bits", "source_bits",
        "failure_rate"}},
      {"failure", {"model", "ids", "t0", "period", "horizon"}},
      {"bounds", {"eps_core", "eps_distinct", "eps_timing", "beta_grid"}},
      {"strategy",
       {"kind", "n", "k", "fragment_bits", "groups", "object_count",
        "pass_headroom", "pass_period", "gamma", "starve_overhead"}},
      {"run", {"fidelity", "seed", "time_unit_label"}},
  };
  for (const auto& [section, keys] : cfg.sections()) {
    const auto it = known.find(section);
    if (it == known.end()) continue;
    for (const auto& [key, value] : keys)
      if (!it->second.count(key))
        throw std::invalid_argument("unknown config key: [" + section + "] " +
                                    key);
  }
}

}  // namespace

Scenario scenario_from_config(const Config& cfg) {
  reject_unknown_keys(cfg);
  Scenario sc;
  sc.system.node_count = cfg.get_u64("system", "node_count");
  sc.system.node_bits = cfg.get_u64("system", "node_bits");
  sc.system.memory_bits = cfg.get_u64("system", "memory_bits", 0);
  sc.system.source_bits = parse_bits128(cfg.get("system", "source_bits"));
  sc.system.failure_rate = cfg.get_double("system", "failure_rate", 1.0);

  const std::string model = cfg.get_or("failure", "model", "poisson");
  if (model == "poisson")
    sc.timing = fail::TimingKind::Poisson;
  else if (model == "periodic")
    sc.timing = fail::TimingKind::Periodic;
  else
    throw std::invalid_argument("unknown failure model: " + model);
  const std::string ids = cfg.get_or("failure", "ids", "uniform");
  if (ids == "uniform")
    sc.ids = fail::IdKind::Uniform;
  else if (ids == "distinct")
    sc.ids = fail::IdKind::Distinct;
  else
    throw std::invalid_argument("unknown id mode: " + ids);
  sc.t0 = cfg.get_double("failure", "t0", 0.0);
  sc.period = cfg.get_double("failure", "period", 1.0);
  sc.horizon = cfg.get_u64("failure", "horizon");

  sc.inputs.eps_core = cfg.get_double("bounds", "eps_core", 0.1);
  sc.inputs.eps_distinct = cfg.get_double("bounds", "eps_distinct", 0.1);
  sc.inputs.eps_timing = cfg.get_double("bounds", "eps_timing", 0.1);

  auto& st = sc.strategy;
  st.kind = strategy_kind_from(cfg.get_or("strategy", "kind", "starve"));
  st.n = static_cast<std::uint32_t>(cfg.get_u64("strategy", "n", 0));
  st.k = static_cast<std::uint32_t>(cfg.get_u64("strategy", "k", 0));
  st.fragment_bits = cfg.get_u64("strategy", "fragment_bits", 0);
  st.group_count = static_cast<std::uint32_t>(cfg.get_u64("strategy", "groups", 0));
  st.object_count =
      static_cast<std::uint32_t>(cfg.get_u64("strategy", "object_count", 1));
  st.pass_headroom = cfg.get_double("strategy", "pass_headroom", 0.5);
  st.pass_period = cfg.get_double("strategy", "pass_period", 0.0);
  st.gamma = cfg.get_u64("strategy", "gamma", 0);
  st.starve_overhead = static_cast<std::uint32_t>(cfg.get_u64(
      "strategy", "starve_overhead",
      bounds::derive_phase_params(sc.system).overhead_nodes));

  const std::string fid = cfg.get_or("run", "fidelity", "symbolic");
  if (fid == "symbolic")
    sc.fidelity = store::Fidelity::Symbolic;
  else if (fid == "bit_exact")
    sc.fidelity = store::Fidelity::BitExact;
  else
    throw std::invalid_argument("unknown fidelity: " + fid);
  sc.seed = cfg.get_u64("run", "seed", 1);
  sc.validate();
  return sc;
}

std::unique_ptr<strat::Strategy> make_strategy(const Scenario& sc,
                                               std::uint64_t seed) {
  const auto n32 = static_cast<std::uint32_t>(sc.system.node_count);
  const auto& st = sc.strategy;
  switch (st.kind) {
    case StrategyKind::Starve:
      return std::make_unique<strat::StarveStrategy>(st.starve_overhead);
    case StrategyKind::SmallCodeReactive: {
      codes::CodeParams cp{st.n, st.k, st.fragment_bits};
      const std::uint32_t groups =
          st.group_count ? st.group_count : 100 * n32 / std::max(1u, st.n);
      return std::make_unique<strat::SmallCodeReactive>(cp, groups, seed);
    }
    case StrategyKind::LiquidLazy: {
      strat::LiquidLazy::Config cfg;
      cfg.cp = codes::CodeParams{st.n ? st.n : n32, st.k, st.fragment_bits};
      cfg.object_count = st.object_count;
      cfg.pass_period =
          st.pass_period > 0.0
              ? st.pass_period
              : strat::LiquidLazy::default_pass_period(
                    cfg.cp.r(), sc.system.failure_rate, n32, st.pass_headroom);
      return std::make_unique<strat::LiquidLazy>(cfg);
    }
    case StrategyKind::EqualRead:
      return std::make_unique<strat::EqualReadStrategy>(st.gamma);
    case StrategyKind::CopyAheadOracle:
      return std::make_unique<strat::CopyAheadOracle>(n32 - 1);
    case StrategyKind::RandomProbe:
      return std::make_unique<strat::RandomProbeStrategy>(seed);
  }
  throw std::logic_error("unreachable strategy kind");
}

SimResult run_simulation(const Scenario& sc, std::uint64_t seed) {
  sc.validate();
  const auto n32 = static_cast<std::uint32_t>(sc.system.node_count);
  fail::FailureSequence fs;
  if (sc.timing == fail::TimingKind::Poisson)
    fs = fail::gen_poisson(n32, sc.system.failure_rate, sc.t0, sc.horizon, seed);
  else
    fs = fail::gen_periodic(n32, sc.t0, sc.period, sc.horizon, seed, sc.ids);

  store::SystemState st(sc.fidelity, n32, sc.system.node_bits,
                        sc.system.memory_bits, /*keep_trace=*/false);
  auto strategy = make_strategy(sc, seed);
  if (strategy->needs_future()) strategy->provide_future(fs);
  strat::DirectIO io(st);
  std::vector<fail::FailureEvent> history;
  strat::LossLog loss;
  strat::Context ctx{io, history, &loss};
  strategy->on_start(ctx);
  std::unordered_set<std::uint32_t> distinct;
  for (const auto& ev : fs.events) {
    strategy->pre_failure(ctx, ev);
    st.fail(ev.id, ev.time);
    history.push_back(ev);
    distinct.insert(ev.id);
    strategy->post_failure(ctx, ev);
  }
  strategy->on_finish(ctx, fs.events.back().time);

  SimResult r;
  r.seed = seed;
  r.failures = fs.events.size();
  r.distinct_failures = distinct.size();
  r.bits_read = st.ledger().total();
  r.rrate_over_erate =
      static_cast<double>(r.bits_read) /
      (static_cast<double>(r.failures) * static_cast<double>(sc.system.node_bits));
  const auto pp = bounds::derive_phase_params(sc.system);
  r.lower_bound =
      bounds::rate_lower_bounds(pp, sc.inputs, sc.system.node_bits,
                                sc.system.failure_rate)
          .ratio_asymptotic;
  r.recoverable = !loss.lost && strategy->recoverable(ctx);
  r.first_loss_time = loss.first_loss_time;
  return r;
}

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_sim_header(std::ostream& os) {
  os << "seed,failures,distinct_failures,bits_read,rrate_over_erate,"
        "lower_bound,recoverable,first_loss_time\n";
}

void write_sim_row(std::ostream& os, const std::string& key_prefix,
                   const SimResult& r) {
  os << key_prefix << r.seed << ',' << r.failures << ',' << r.distinct_failures
     << ',' << r.bits_read << ',' << fmt9(r.rrate_over_erate) << ','
     << fmt9(r.lower_bound) << ',' << (r.recoverable ? 1 : 0) << ','
     << (std::isnan(r.first_loss_time) ? std::string()
                                       : fmt9(r.first_loss_time))
     << '\n';
}

SweepSpec sweep_from_config(const Config& cfg) {
  SweepSpec spec;
  spec.betas = cfg.get_double_list("sweep", "beta_grid");
  for (const auto& s : cfg.get_list("sweep", "strategies"))
    spec.strategies.push_back(strategy_kind_from(s));
  const std::uint64_t seed0 = cfg.get_u64("sweep", "seed0", 1);
  const std::uint64_t count = cfg.get_u64("sweep", "seed_count", 1);
  for (std::uint64_t i = 0; i < count; ++i) spec.seeds.push_back(seed0 + i);
  return spec;
}

std::vector<SweepRow> run_sweep(const Scenario& base, const SweepSpec& spec,
                                bool parallel) {
  struct Combo {
    double beta;
    StrategyKind kind;
    std::uint64_t seed;
  };
  std::vector<Combo> combos;
  for (double b : spec.betas)
    for (auto k : spec.strategies)
      for (auto s : spec.seeds) combos.push_back({b, k, s});

  std::vector<SweepRow> rows(combos.size());
  auto run_one = [&](std::size_t i) {
    const auto& c = combos[i];
    Scenario sc = base;
    const double cap = static_cast<double>(sc.system.node_count) *
                       static_cast<double>(sc.system.node_bits);
    sc.system.source_bits =
        static_cast<bounds::bits128>((1.0 - c.beta) * cap + 0.5);
    sc.strategy.kind = c.kind;
    const auto n32 = static_cast<std::uint32_t>(sc.system.node_count);
    if (c.kind == StrategyKind::LiquidLazy) {
      sc.strategy.n = n32;
      sc.strategy.k = n32 - static_cast<std::uint32_t>(
                                std::llround(c.beta * n32));
      if (sc.strategy.fragment_bits == 0)
        sc.strategy.fragment_bits = sc.system.node_bits;
    }
    if (c.kind == StrategyKind::Starve)
      sc.strategy.starve_overhead =
          bounds::derive_phase_params(sc.system).overhead_nodes;
    rows[i] = {c.beta, c.kind, run_simulation(sc, c.seed)};
  };
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(combos.size()); ++i)
      run_one(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < combos.size(); ++i) run_one(i);
  }
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.beta != b.beta) return a.beta < b.beta;
    const std::string an = strategy_kind_name(a.strategy);
    const std::string bn = strategy_kind_name(b.strategy);
    if (an != bn) return an < bn;
    return a.result.seed < b.result.seed;
  });
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "beta,strategy,";
  write_sim_header(os);
  for (const auto& row : rows) {
    std::ostringstream prefix;
    prefix << fmt9(row.beta) << ',' << strategy_kind_name(row.strategy) << ',';
    write_sim_row(os, prefix.str(), row.result);
  }
}

}  // namespace repairlab::scenario
