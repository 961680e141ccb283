#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "repairlab/rng.hpp"

namespace repairlab::fail {

struct FailureEvent {
  std::uint64_t index = 0;
  double time = 0.0;
  std::uint32_t id = 0;  // node identifier in {0..N-1}
};

enum class TimingKind { Poisson, Periodic };
enum class IdKind { Uniform, Distinct, GeometricConstructed };

struct FailureSequence {
  TimingKind timing = TimingKind::Periodic;
  IdKind ids = IdKind::Uniform;
  std::vector<FailureEvent> events;

  std::size_t size() const { return events.size(); }
  const FailureEvent& operator[](std::size_t i) const { return events[i]; }
};

/// Geometric draws G_i >= 1 with prefix sums GS_i. Position GS_i of the
/// identifier stream carries the i-th new distinct identifier; every other
/// position repeats an already-failed identifier.
struct GeometricStream {
  std::vector<std::uint64_t> draws;        // G_1..G_{M-1}
  std::vector<std::uint64_t> prefix_sums;  // GS_0 = 0, GS_1, ..., GS_{M-1}
};

// Poisson process: i.i.d. exponential(lambda*N) gaps, uniform identifiers.
FailureSequence gen_poisson(std::uint32_t node_count, double lambda, double t0,
                            std::uint64_t horizon, std::uint64_t seed);

// Constant inter-failure time; identifiers uniform or distinct over the span.
FailureSequence gen_periodic(std::uint32_t node_count, double t0, double period,
                             std::uint64_t horizon, std::uint64_t seed,
                             IdKind id_mode);

// <id0, ID_1, ..., ID_{M-1}>: each ID_i uniform over identifiers not yet used.
std::vector<std::uint32_t> gen_distinct_phase(std::uint32_t node_count,
                                              std::uint32_t id0, std::uint64_t span,
                                              std::uint64_t seed);

// Uniform identifier stream built from geometric hit positions plus a distinct
// sequence: marginally i.i.d. uniform, with the distinct failures exposed.
struct UniformViaGeometric {
  std::vector<std::uint32_t> ids;  // id0 followed by U_1..U_{GS_{M-1}}
  GeometricStream geometric;
  std::vector<std::uint32_t> distinct;  // id0, ID_1..ID_{M-1}
};
UniformViaGeometric gen_uniform_via_geometric(std::uint32_t node_count,
                                              std::uint32_t id0,
                                              std::uint64_t distinct_span,
                                              std::uint64_t seed);

// CSV rows "index,time,id" with a header; times round-trip bit-exactly.
void write_csv(std::ostream& os, const FailureSequence& fs);
FailureSequence read_csv(std::istream& is);

}  // namespace repairlab::fail
