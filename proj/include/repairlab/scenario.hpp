#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "repairlab/bounds.hpp"
#include "repairlab/failure_model.hpp"
#include "repairlab/repairers.hpp"

namespace repairlab::scenario {

/// Line-oriented `[section]` / `key = value` configuration. `#` starts a
/// comment. Unknown keys are rejected at scenario build time, naming the key.
class Config {
 public:
  static Config parse(std::istream& is);
  static Config parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    std::optional<double> fallback = std::nullopt) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::optional<std::uint64_t> fallback = std::nullopt) const;
  std::vector<double> get_double_list(const std::string& section,
                                      const std::string& key) const;
  std::vector<std::string> get_list(const std::string& section,
                                    const std::string& key) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections()
      const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

enum class StrategyKind {
  Starve,
  SmallCodeReactive,
  LiquidLazy,
  EqualRead,
  CopyAheadOracle,
  RandomProbe,
};
StrategyKind strategy_kind_from(const std::string& name);
const char* strategy_kind_name(StrategyKind k);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::Starve;
  // small_code / liquid code shape
  std::uint32_t n = 0, k = 0;
  std::uint64_t fragment_bits = 0;
  std::uint32_t group_count = 0;     // small_code; 0 = 100*N/n default
  std::uint32_t object_count = 1;    // liquid
  double pass_headroom = 0.5;        // liquid default trigger
  double pass_period = 0.0;          // liquid explicit override
  std::uint64_t gamma = 0;           // equal_read
  std::uint32_t starve_overhead = 0; // starve recoverability slack
};

struct Scenario {
  bounds::SystemParams system;
  bounds::BoundInputs inputs;
  fail::TimingKind timing = fail::TimingKind::Poisson;
  fail::IdKind ids = fail::IdKind::Uniform;
  double t0 = 0.0;
  double period = 1.0;          // periodic timing
  std::uint64_t horizon = 0;    // number of failures
  StrategyConfig strategy;
  store::Fidelity fidelity = store::Fidelity::Symbolic;
  std::uint64_t seed = 1;

  void validate() const;
};

Scenario scenario_from_config(const Config& cfg);

std::unique_ptr<strat::Strategy> make_strategy(const Scenario& sc,
                                               std::uint64_t seed);

struct SimResult {
  std::uint64_t seed = 0;
  std::uint64_t failures = 0;
  std::uint64_t distinct_failures = 0;
  std::uint64_t bits_read = 0;
  double rrate_over_erate = 0.0;  // bits_read / (failures * node_bits)
  double lower_bound = 0.0;       // (1-b')/lni(2b')
  bool recoverable = true;
  double first_loss_time = 0.0;   // NaN when no loss
};

SimResult run_simulation(const Scenario& sc, std::uint64_t seed);

// CSV with the fixed column order; floats printed with 9 significant digits.
void write_sim_header(std::ostream& os);
void write_sim_row(std::ostream& os, const std::string& key_prefix,
                   const SimResult& r);

struct SweepSpec {
  std::vector<double> betas;
  std::vector<StrategyKind> strategies;
  std::vector<std::uint64_t> seeds;
};
SweepSpec sweep_from_config(const Config& cfg);

// Cross product of (beta, strategy, seed); scenarios derived from the base by
// resizing source_bits to match beta. Rows come back sorted by that key.
struct SweepRow {
  double beta;
  StrategyKind strategy;
  SimResult result;
};
std::vector<SweepRow> run_sweep(const Scenario& base, const SweepSpec& spec,
                                bool parallel = true);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

// Formats a double with 9 significant digits (CSV convention).
std::string fmt9(double v);

}  // namespace repairlab::scenario
