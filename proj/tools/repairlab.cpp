// Command-line front end: analytic bound tables, single simulations,
// Monte-Carlo verification suites, and scenario sweeps.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "repairlab/bounds.hpp"
#include "repairlab/scenario.hpp"
#include "repairlab/verify.hpp"

namespace {

using namespace repairlab;

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::invalid_argument("cannot open output file: " + path);
  return file;
}

int cmd_bounds(const std::string& config_path, const std::string& out_path) {
  scenario::Config cfg = scenario::Config::parse_file(config_path);
  std::ofstream file;
  std::ostream& os = open_out(out_path, file);

  bounds::SystemParams base;
  base.node_count = cfg.get_u64("system", "node_count");
  base.node_bits = cfg.get_u64("system", "node_bits");
  base.memory_bits = cfg.get_u64("system", "memory_bits", 0);
  base.failure_rate = cfg.get_double("system", "failure_rate", 1.0);
  bounds::BoundInputs bi;
  bi.eps_core = cfg.get_double("bounds", "eps_core", 0.1);
  bi.eps_distinct = cfg.get_double("bounds", "eps_distinct", 0.1);
  bi.eps_timing = cfg.get_double("bounds", "eps_timing", 0.1);
  bi.validate();
  std::vector<double> grid;
  if (cfg.has("bounds", "beta_grid"))
    grid = cfg.get_double_list("bounds", "beta_grid");

  os << "beta,beta_prime,bound_ratio,inv_2beta,dimakis_gamma_over_nsize,"
        "log10_delta_c,log10_delta_d,log10_delta\n";
  const long double cap = static_cast<long double>(base.node_count) *
                          static_cast<long double>(base.node_bits);
  for (double beta : grid) {
    bounds::SystemParams sp = base;
    sp.source_bits =
        static_cast<bounds::bits128>((1.0L - static_cast<long double>(beta)) *
                                     cap + 0.5L);
    sp.validate();
    const auto pp = bounds::derive_phase_params(sp);
    const auto rb =
        bounds::rate_lower_bounds(pp, bi, sp.node_bits, sp.failure_rate);
    const auto cd =
        bounds::composite_deltas(pp, bi, sp.node_bits, sp.failure_rate);
    const auto dc =
        bounds::core_delta(bi.eps_core, pp.overhead_nodes, pp.phase_failures);
    const auto dd = bounds::distinct_delta(bi.eps_distinct, pp.beta_prime,
                                           pp.node_count, pp.phase_failures);
    // Single-object repair threshold at matching storage share:
    // object of k*alpha bits over n = N nodes, helpers d = N-1.
    bounds::RegeneratingParams rp;
    rp.n = sp.node_count;
    rp.d = sp.node_count - 1;
    rp.k = static_cast<std::uint64_t>(
        std::llround((1.0 - beta) * static_cast<double>(sp.node_count)));
    rp.alpha_bits = sp.node_bits;
    const auto gstar = bounds::gamma_lower_threshold(
        rp, static_cast<bounds::bits128>(rp.k) * rp.alpha_bits);
    os << scenario::fmt9(beta) << ',' << scenario::fmt9(pp.beta_prime) << ','
       << scenario::fmt9(rb.ratio_asymptotic) << ','
       << scenario::fmt9(1.0 / (2.0 * beta)) << ','
       << scenario::fmt9(static_cast<double>(gstar) /
                         static_cast<double>(sp.node_bits))
       << ',' << scenario::fmt9(dc.log10()) << ',' << scenario::fmt9(dd.log10())
       << ',' << scenario::fmt9(cd.delta.log10()) << '\n';
  }
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 std::uint64_t seed_override, bool have_seed) {
  scenario::Config cfg = scenario::Config::parse_file(config_path);
  scenario::Scenario sc = scenario::scenario_from_config(cfg);
  const std::uint64_t seed = have_seed ? seed_override : sc.seed;
  scenario::SimResult r = scenario::run_simulation(sc, seed);
  std::ofstream file;
  std::ostream& os = open_out(out_path, file);
  scenario::write_sim_header(os);
  scenario::write_sim_row(os, "", r);
  return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t trials,
               std::uint64_t seed, const std::string& out_path) {
  std::vector<verify::TrialReport> reports;
  const bool all = suite == "all";
  bool known = all;
  if (all || suite == "supermartingale") {
    known = true;
    for (double ratio : {4.0, 6.0}) {
      const std::uint64_t n = 100;
      const double alpha = ratio * std::sqrt(static_cast<double>(n));
      reports.push_back(verify::verify_supermartingale(
          verify::WalkKind::Symmetric, n, 1.0, alpha, trials, seed));
    }
    reports.push_back(verify::verify_supermartingale(
        verify::WalkKind::DriftDown, 100, 1.0, 40.0, trials, seed));
  }
  if (all || suite == "distinct") {
    known = true;
    reports.push_back(
        verify::verify_distinct_failures(2000, 0.1, 1.0, trials, seed));
  }
  if (all || suite == "geometric") {
    known = true;
    reports.push_back(verify::verify_exponential_sum(1.0, 1000, 1000, 0.2,
                                                     trials, seed));
    reports.push_back(verify::verify_geometric_sum(1000, 200, 0.2, trials, seed));
  }
  if (all || suite == "rate_vs_bound") {
    known = true;
    bounds::SystemParams sp;
    sp.node_count = 2000;
    sp.node_bits = 2000;
    sp.memory_bits = 100;
    sp.source_bits = static_cast<bounds::bits128>(0.9 * 2000.0 * 2000.0);
    sp.failure_rate = 1.0;
    bounds::BoundInputs bi{1.0, 1.0, 1.0};
    const auto overhead = bounds::derive_phase_params(sp).overhead_nodes;
    reports.push_back(verify::verify_rate_vs_bound(
        sp, bi,
        [overhead](std::uint64_t) {
          return std::make_unique<strat::StarveStrategy>(
              static_cast<std::uint32_t>(overhead));
        },
        std::min<std::uint64_t>(trials, 2000), seed));
  }
  if (!known) throw std::invalid_argument("unknown verify suite: " + suite);

  for (const auto& r : reports) std::cout << verify::summarize(r) << '\n';
  if (!out_path.empty()) {
    std::ofstream file(out_path);
    if (!file) throw std::invalid_argument("cannot open output file: " + out_path);
    verify::write_reports_csv(file, reports);
  }
  for (const auto& r : reports)
    if (r.verdict == verify::Verdict::Violated) return 2;
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_path) {
  scenario::Config cfg = scenario::Config::parse_file(config_path);
  scenario::Scenario base = scenario::scenario_from_config(cfg);
  scenario::SweepSpec spec = scenario::sweep_from_config(cfg);
  auto rows = scenario::run_sweep(base, spec);
  std::ofstream file;
  std::ostream& os = open_out(out_path, file);
  scenario::write_sweep_csv(os, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"repair-rate bound calculator and failure simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path, suite = "all";
  std::uint64_t seed = 1, trials = 100000;

  auto* bounds_cmd = app.add_subcommand("bounds", "emit per-beta bound table");
  bounds_cmd->add_option("--config", config_path)->required();
  bounds_cmd->add_option("--out", out_path);

  auto* sim_cmd = app.add_subcommand("simulate", "run one scenario");
  sim_cmd->add_option("--config", config_path)->required();
  sim_cmd->add_option("--out", out_path);
  auto* seed_opt = sim_cmd->add_option("--seed", seed);

  auto* verify_cmd = app.add_subcommand("verify", "run verification suites");
  verify_cmd->add_option("suite", suite,
                         "all|supermartingale|distinct|geometric|rate_vs_bound");
  verify_cmd->add_option("--trials", trials);
  verify_cmd->add_option("--seed", seed);
  verify_cmd->add_option("--out", out_path);

  auto* sweep_cmd = app.add_subcommand("sweep", "run a scenario grid");
  sweep_cmd->add_option("--config", config_path)->required();
  sweep_cmd->add_option("--out", out_path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (bounds_cmd->parsed()) return cmd_bounds(config_path, out_path);
    if (sim_cmd->parsed())
      return cmd_simulate(config_path, out_path, seed, seed_opt->count() > 0);
    if (verify_cmd->parsed()) return cmd_verify(suite, trials, seed, out_path);
    if (sweep_cmd->parsed()) return cmd_sweep(config_path, out_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
