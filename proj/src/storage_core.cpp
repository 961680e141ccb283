#include "repairlab/storage_core.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace repairlab {

std::string BitVec::to_hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes_.size() * 2);
  for (auto b : bytes_) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

BitVec BitVec::from_hex(const std::string& hex, std::uint64_t nbits) {
  BitVec out(nbits);
  if (hex.size() != out.bytes_.size() * 2)
    throw std::invalid_argument("BitVec::from_hex: length mismatch");
  auto nib = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw std::invalid_argument("BitVec::from_hex: bad digit");
  };
  for (std::size_t i = 0; i < out.bytes_.size(); ++i)
    out.bytes_[i] =
        static_cast<std::uint8_t>((nib(hex[2 * i]) << 4) | nib(hex[2 * i + 1]));
  // Padding bits past nbits must be zero.
  if (nbits % 8 != 0) {
    std::uint8_t mask = static_cast<std::uint8_t>(0xffu << (nbits % 8));
    if (out.bytes_.back() & mask)
      throw std::invalid_argument("BitVec::from_hex: nonzero padding");
  }
  return out;
}

}  // namespace repairlab

namespace repairlab::store {

SystemState::SystemState(Fidelity f, std::uint32_t node_count,
                         std::uint64_t node_bits, std::uint64_t memory_bits,
                         bool keep_trace)
    : fidelity_(f),
      node_count_(node_count),
      node_bits_(node_bits),
      memory_bits_(memory_bits),
      keep_trace_(keep_trace) {
  if (node_count == 0) throw std::invalid_argument("node_count must be > 0");
  if (f == Fidelity::BitExact) {
    memory_ = BitVec(memory_bits);
    nodes_.assign(node_count, BitVec(node_bits));
  }
  ledger_.roll_epoch();  // epoch 0: before the first failure
}

void SystemState::check_node_range(std::uint32_t node, std::uint64_t offset,
                                   std::uint64_t length) const {
  if (node >= node_count_) throw std::out_of_range("node id out of range");
  if (offset + length > node_bits_ || offset + length < offset)
    throw std::out_of_range("node access past end");
}

BitVec SystemState::read(std::uint32_t node, std::uint64_t offset,
                         std::uint64_t length, bool local_compute) {
  check_node_range(node, offset, length);
  ledger_.charge(node, length);
  read_times_.emplace_back(clock_, length);
  BitVec payload;
  if (fidelity_ == Fidelity::BitExact) payload = nodes_[node].slice(offset, length);
  if (keep_trace_)
    trace_.push_back({next_seq_, failures_, clock_, node, offset, length,
                      local_compute, payload});
  ++next_seq_;
  return payload;
}

void SystemState::write(std::uint32_t node, std::uint64_t offset,
                        const BitVec& bits) {
  check_node_range(node, offset, bits.size());
  if (fidelity_ == Fidelity::BitExact) nodes_[node].splice(offset, bits);
}

BitVec SystemState::read_memory(std::uint64_t offset, std::uint64_t length) const {
  if (offset + length > memory_bits_)
    throw std::out_of_range("memory access past end");
  if (fidelity_ != Fidelity::BitExact) return {};
  return memory_.slice(offset, length);
}

void SystemState::write_memory(std::uint64_t offset, const BitVec& bits) {
  if (offset + bits.size() > memory_bits_)
    throw std::out_of_range("memory access past end");
  if (fidelity_ == Fidelity::BitExact) memory_.splice(offset, bits);
}

BitVec SystemState::peek_node(std::uint32_t node) const {
  if (node >= node_count_) throw std::out_of_range("node id out of range");
  if (fidelity_ != Fidelity::BitExact)
    throw std::logic_error("peek_node requires bit-exact fidelity");
  return nodes_[node];
}

void SystemState::init_node(std::uint32_t node, const BitVec& content) {
  if (node >= node_count_) throw std::out_of_range("node id out of range");
  if (content.size() != node_bits_)
    throw std::invalid_argument("init_node: wrong content size");
  if (fidelity_ == Fidelity::BitExact) nodes_[node] = content;
}

void SystemState::set_clock(double t) {
  if (t < clock_) throw std::invalid_argument("clock must not move backwards");
  clock_ = t;
}

void SystemState::fail(std::uint32_t node, double t) {
  if (node >= node_count_) throw std::out_of_range("node id out of range");
  if (t < clock_) throw std::invalid_argument("failure time precedes clock");
  clock_ = t;
  if (fidelity_ == Fidelity::BitExact) nodes_[node].clear();
  ++failures_;
  ledger_.roll_epoch();
}

Snapshot SystemState::snapshot() const {
  if (fidelity_ != Fidelity::BitExact)
    throw std::logic_error("snapshot requires bit-exact fidelity");
  return {clock_, memory_, nodes_};
}

void SystemState::restore(const Snapshot& s) {
  if (fidelity_ != Fidelity::BitExact)
    throw std::logic_error("restore requires bit-exact fidelity");
  if (s.nodes.size() != node_count_)
    throw std::invalid_argument("restore: node count mismatch");
  clock_ = s.clock;
  memory_ = s.memory;
  nodes_ = s.nodes;
}

std::uint64_t SystemState::bits_read_in(double t_a, double t_b) const {
  std::uint64_t bits = 0;
  for (const auto& [t, n] : read_times_)
    if (t > t_a && t <= t_b) bits += n;
  return bits;
}

double SystemState::read_rate(double t_a, double t_b) const {
  if (!(t_b > t_a)) throw std::invalid_argument("read_rate: empty window");
  return static_cast<double>(bits_read_in(t_a, t_b)) / (t_b - t_a);
}

void write_trace_csv(std::ostream& os, const std::vector<ReadRecord>& trace) {
  os << "seq,epoch,time,node,offset,length,local,payload\n";
  char buf[32];
  for (const auto& r : trace) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, r.time,
                                 std::chars_format::general, 17);
    os << r.seq << ',' << r.epoch << ',' << std::string_view(buf, p) << ',' << r.node << ','
       << r.offset << ',' << r.length << ',' << (r.local_compute ? 1 : 0) << ','
       << (r.payload.size() ? r.payload.to_hex() : "") << '\n';
  }
}

std::vector<ReadRecord> read_trace_csv(std::istream& is, bool with_payload) {
  std::vector<ReadRecord> out;
  std::string line;
  if (!std::getline(is, line) || line.rfind("seq,", 0) != 0)
    throw std::runtime_error("trace csv: bad header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    ReadRecord r;
    int local = 0;
    char c;
    if (!(ss >> r.seq >> c >> r.epoch >> c >> r.time >> c >> r.node >> c >>
          r.offset >> c >> r.length >> c >> local >> c))
      throw std::runtime_error("trace csv: bad row: " + line);
    r.local_compute = local != 0;
    std::string hex;
    std::getline(ss, hex);
    if (with_payload && !hex.empty()) r.payload = BitVec::from_hex(hex, r.length);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace repairlab::store
