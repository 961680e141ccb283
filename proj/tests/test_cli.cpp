#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::string cli_path() {
  const char* p = std::getenv("REPAIRLAB_CLI");
  REQUIRE(p != nullptr);
  return p;
}

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  const std::string out = "/tmp/repairlab_test_out.txt";
  const std::string err = "/tmp/repairlab_test_err.txt";
  const std::string cmd = cli_path() + " " + args + " >" + out + " 2>" + err;
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::ifstream fo(out), fe(err);
  std::stringstream so, se;
  so << fo.rdbuf();
  se << fe.rdbuf();
  r.out = so.str();
  r.err = se.str();
  return r;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  REQUIRE(f.good());
  f << content;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

const char* kBoundsConfig = R"(
[system]
node_count = 1000
node_bits = 1000
memory_bits = 100
[bounds]
eps_core = 0.1
eps_distinct = 0.1
eps_timing = 0.1
beta_grid = 0.4, 0.2, 0.1, 0.05, 0.02, 0.01
)";

const char* kSimConfig = R"(
[system]
node_count = 100
node_bits = 1000
memory_bits = 0
source_bits = 80000
failure_rate = 1.0
[failure]
model = poisson
horizon = 500
[strategy]
kind = small_code_reactive
n = 10
k = 6
fragment_bits = 80
groups = 10
[run]
seed = 7
)";

}  // namespace

TEST_CASE("bounds table: header, monotone bound column, log-domain deltas") {
  write_file("/tmp/rl_bounds.cfg", kBoundsConfig);
  const auto r = run_cli("bounds --config /tmp/rl_bounds.cfg");
  REQUIRE(r.exit_code == 0);
  const auto ls = lines_of(r.out);
  REQUIRE(ls.size() == 7);
  CHECK(ls[0] ==
        "beta,beta_prime,bound_ratio,inv_2beta,dimakis_gamma_over_nsize,"
        "log10_delta_c,log10_delta_d,log10_delta");
  double prev = 0.0;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = split_csv(ls[i]);
    REQUIRE(f.size() == 8);
    const double ratio = std::stod(f[2]);
    CHECK(ratio > prev);  // decreasing beta grid -> increasing bound
    prev = ratio;
    // Repair threshold per node with d = N-1 helpers: d/(d-k+1) = (N-1)/(beta N).
    const double beta = std::stod(f[0]);
    const double expect = 999.0 / (1000.0 * beta);
    CHECK(std::abs(std::stod(f[4]) - expect) <= 0.05 * expect);
  }
}

TEST_CASE("bounds table: empty grid emits the header only") {
  write_file("/tmp/rl_bounds_empty.cfg", R"(
[system]
node_count = 1000
node_bits = 1000
[bounds]
beta_grid =
)");
  const auto r = run_cli("bounds --config /tmp/rl_bounds_empty.cfg");
  REQUIRE(r.exit_code == 0);
  CHECK(lines_of(r.out).size() == 1);
}

TEST_CASE("simulate: identical scenario and seed give byte-identical CSV") {
  write_file("/tmp/rl_sim.cfg", kSimConfig);
  const auto a = run_cli("simulate --config /tmp/rl_sim.cfg");
  const auto b = run_cli("simulate --config /tmp/rl_sim.cfg");
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  const auto ls = lines_of(a.out);
  REQUIRE(ls.size() == 2);
  CHECK(ls[0] ==
        "seed,failures,distinct_failures,bits_read,rrate_over_erate,"
        "lower_bound,recoverable,first_loss_time");
  const auto f = split_csv(ls[1]);
  CHECK(f[0] == "7");
  CHECK(f[1] == "500");
  // A different seed changes the row.
  const auto c = run_cli("simulate --config /tmp/rl_sim.cfg --seed 8");
  REQUIRE(c.exit_code == 0);
  CHECK(c.out != a.out);
  CHECK(split_csv(lines_of(c.out)[1])[0] == "8");
}

TEST_CASE("exit codes: config errors are 1 and name the key") {
  write_file("/tmp/rl_bad.cfg", std::string(kSimConfig) +
                                    "[strategy]\nfragment_bitz = 80\n");
  const auto r = run_cli("simulate --config /tmp/rl_bad.cfg");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("fragment_bitz") != std::string::npos);

  const auto missing = run_cli("simulate --config /tmp/does_not_exist.cfg");
  CHECK(missing.exit_code == 1);

  write_file("/tmp/rl_badnum.cfg", R"(
[system]
node_count = 100
node_bits = 1000
source_bits = 80000
[failure]
horizon = soon
)");
  const auto badnum = run_cli("simulate --config /tmp/rl_badnum.cfg");
  CHECK(badnum.exit_code == 1);
  CHECK(badnum.err.find("horizon") != std::string::npos);
}

TEST_CASE("verify: small run is consistent with exit 0; unknown suite is an error") {
  const auto r = run_cli("verify supermartingale --trials 2000");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("consistent") != std::string::npos);

  const auto unknown = run_cli("verify no_such_suite --trials 10");
  CHECK(unknown.exit_code == 1);
  CHECK(unknown.err.find("no_such_suite") != std::string::npos);
}

TEST_CASE("sweep: rows sorted by (beta, strategy, seed)") {
  write_file("/tmp/rl_sweep.cfg", std::string(kSimConfig) + R"(
[sweep]
beta_grid = 0.2, 0.1
strategies = starve, copy_ahead_oracle
seed0 = 3
seed_count = 2
)");
  const auto r = run_cli("sweep --config /tmp/rl_sweep.cfg");
  REQUIRE(r.exit_code == 0);
  const auto ls = lines_of(r.out);
  REQUIRE(ls.size() == 1 + 2 * 2 * 2);
  CHECK(ls[0].rfind("beta,strategy,seed,", 0) == 0);
  std::vector<std::tuple<double, std::string, std::uint64_t>> keys;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = split_csv(ls[i]);
    keys.emplace_back(std::stod(f[0]), f[1], std::stoull(f[2]));
  }
  for (std::size_t i = 1; i < keys.size(); ++i) CHECK(keys[i - 1] < keys[i]);
  // Copy-ahead rows read exactly nsize per failure.
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto f = split_csv(ls[i]);
    if (f[1] == "copy_ahead_oracle") CHECK(f[6] == "1");
  }
}
