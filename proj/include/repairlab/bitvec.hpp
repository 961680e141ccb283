#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace repairlab {

/// Arbitrary-length bit string with bit-granular slicing. Bit i of the vector
/// lives at byte i/8, bit i%8 (LSB first).
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::uint64_t nbits) : nbits_(nbits), bytes_((nbits + 7) / 8) {}

  std::uint64_t size() const { return nbits_; }

  bool get(std::uint64_t i) const {
    check(i);
    return (bytes_[i >> 3] >> (i & 7)) & 1;
  }
  void set(std::uint64_t i, bool v) {
    check(i);
    if (v)
      bytes_[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
    else
      bytes_[i >> 3] &= static_cast<std::uint8_t>(~(1u << (i & 7)));
  }

  BitVec slice(std::uint64_t offset, std::uint64_t len) const {
    if (offset + len > nbits_) throw std::out_of_range("BitVec::slice");
    BitVec out(len);
    for (std::uint64_t i = 0; i < len; ++i) out.set(i, get(offset + i));
    return out;
  }

  void splice(std::uint64_t offset, const BitVec& src) {
    if (offset + src.size() > nbits_) throw std::out_of_range("BitVec::splice");
    for (std::uint64_t i = 0; i < src.size(); ++i) set(offset + i, src.get(i));
  }

  void clear() { std::fill(bytes_.begin(), bytes_.end(), 0); }

  bool is_zero() const {
    for (auto b : bytes_)
      if (b) return false;
    return true;
  }

  bool operator==(const BitVec& o) const {
    return nbits_ == o.nbits_ && bytes_ == o.bytes_;
  }

  std::uint64_t as_u64() const {
    if (nbits_ > 64) throw std::length_error("BitVec::as_u64");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bytes_.size(); ++i)
      v |= static_cast<std::uint64_t>(bytes_[i]) << (8 * i);
    return v;
  }
  static BitVec from_u64(std::uint64_t v, std::uint64_t nbits) {
    BitVec out(nbits);
    for (std::uint64_t i = 0; i < nbits && i < 64; ++i)
      out.set(i, (v >> i) & 1);
    return out;
  }

  std::string to_hex() const;
  static BitVec from_hex(const std::string& hex, std::uint64_t nbits);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  void check(std::uint64_t i) const {
    if (i >= nbits_) throw std::out_of_range("BitVec index");
  }
  std::uint64_t nbits_ = 0;
  std::vector<std::uint8_t> bytes_;
};

}  // namespace repairlab
