#include "repairlab/codes.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace repairlab::codes {

void CodeParams::validate() const {
  if (k < 1 || k > n) throw std::invalid_argument("code: need 1 <= k <= n");
  if (n > 255) throw std::invalid_argument("code: n > 255 exceeds field limit");
  if (fragment_bits == 0) throw std::invalid_argument("code: empty fragments");
  if (fragment_bits % 8 != 0 && k != 1 && n - k > 1)
    throw std::invalid_argument(
        "code: sub-byte fragments only for replication or single parity");
}

MdsCode::MdsCode(const CodeParams& cp) : cp_(cp) {
  cp_.validate();
  sym_per_frag_ = (cp_.fragment_bits + 7) / 8;
  const std::uint32_t n = cp_.n, k = cp_.k;
  // Vandermonde rows (1, x_i, x_i^2, ...) with x_i = i: any k rows invertible.
  gf::Matrix v(n, k);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < k; ++j)
      v.at(i, j) = gf::pow(static_cast<std::uint8_t>(i), j);
  gf::Matrix top(k, k);
  for (std::uint32_t i = 0; i < k; ++i)
    for (std::uint32_t j = 0; j < k; ++j) top.at(i, j) = v.at(i, j);
  gen_ = gf::mul(v, gf::invert(top));
  // Scale parity columns so the first parity row is all ones; submatrices of
  // the parity block pick up invertible diagonal factors, so MDS is preserved.
  if (n > k) {
    for (std::uint32_t j = 0; j < k; ++j) {
      const std::uint8_t s = gf::inv(gen_.at(k, j));
      for (std::uint32_t i = k; i < n; ++i)
        gen_.at(i, j) = gf::mul(gen_.at(i, j), s);
    }
  }
}

std::vector<std::vector<std::uint8_t>> MdsCode::to_symbols(
    const BitVec& object) const {
  std::vector<std::vector<std::uint8_t>> src(cp_.k);
  for (std::uint32_t j = 0; j < cp_.k; ++j) {
    BitVec frag = object.slice(static_cast<std::uint64_t>(j) * cp_.fragment_bits,
                               cp_.fragment_bits);
    src[j] = frag.bytes();
    src[j].resize(sym_per_frag_, 0);
  }
  return src;
}

BitVec MdsCode::from_symbols(const std::vector<std::uint8_t>& sym,
                             std::uint64_t nbits) const {
  BitVec out(nbits);
  for (std::uint64_t i = 0; i < nbits; ++i)
    out.set(i, (sym[i >> 3] >> (i & 7)) & 1);
  return out;
}

std::vector<BitVec> MdsCode::encode(const BitVec& object) const {
  if (object.size() != static_cast<std::uint64_t>(cp_.k) * cp_.fragment_bits)
    throw std::invalid_argument("encode: object length != k * fragment_bits");
  auto src = to_symbols(object);
  std::vector<BitVec> out(cp_.n);
  for (std::uint32_t i = 0; i < cp_.n; ++i) {
    std::vector<std::uint8_t> row(sym_per_frag_, 0);
    for (std::uint32_t j = 0; j < cp_.k; ++j) {
      const std::uint8_t c = gen_.at(i, j);
      if (c == 0) continue;
      if (c == 1) {
        for (std::size_t s = 0; s < sym_per_frag_; ++s) row[s] ^= src[j][s];
      } else {
        for (std::size_t s = 0; s < sym_per_frag_; ++s)
          row[s] ^= gf::mul(c, src[j][s]);
      }
    }
    out[i] = from_symbols(row, cp_.fragment_bits);
  }
  return out;
}

BitVec MdsCode::decode(const std::vector<std::uint32_t>& indices,
                       const std::vector<BitVec>& fragments) const {
  if (indices.size() != cp_.k || fragments.size() != cp_.k)
    throw std::invalid_argument("decode: need exactly k fragments");
  std::unordered_set<std::uint32_t> seen;
  for (auto i : indices) {
    if (i >= cp_.n) throw std::invalid_argument("decode: bad fragment index");
    if (!seen.insert(i).second)
      throw std::invalid_argument("decode: repeated fragment index");
  }
  gf::Matrix sub(cp_.k, cp_.k);
  for (std::uint32_t r = 0; r < cp_.k; ++r)
    for (std::uint32_t c = 0; c < cp_.k; ++c)
      sub.at(r, c) = gen_.at(indices[r], c);
  gf::Matrix dec = gf::invert(sub);

  std::vector<std::vector<std::uint8_t>> have(cp_.k);
  for (std::uint32_t r = 0; r < cp_.k; ++r) {
    if (fragments[r].size() != cp_.fragment_bits)
      throw std::invalid_argument("decode: wrong fragment size");
    have[r] = fragments[r].bytes();
    have[r].resize(sym_per_frag_, 0);
  }
  BitVec object(static_cast<std::uint64_t>(cp_.k) * cp_.fragment_bits);
  for (std::uint32_t j = 0; j < cp_.k; ++j) {
    std::vector<std::uint8_t> row(sym_per_frag_, 0);
    for (std::uint32_t r = 0; r < cp_.k; ++r) {
      const std::uint8_t c = dec.at(j, r);
      if (c == 0) continue;
      if (c == 1) {
        for (std::size_t s = 0; s < sym_per_frag_; ++s) row[s] ^= have[r][s];
      } else {
        for (std::size_t s = 0; s < sym_per_frag_; ++s)
          row[s] ^= gf::mul(c, have[r][s]);
      }
    }
    object.splice(static_cast<std::uint64_t>(j) * cp_.fragment_bits,
                  from_symbols(row, cp_.fragment_bits));
  }
  return object;
}

BitVec MdsCode::repair_fragment(std::uint32_t index,
                                const std::vector<std::uint32_t>& have_indices,
                                const std::vector<BitVec>& have_fragments) const {
  if (index >= cp_.n) throw std::invalid_argument("repair: bad fragment index");
  BitVec object = decode(have_indices, have_fragments);
  return encode(object)[index];
}

bool recoverable(const std::vector<bool>& present, const CodeParams& cp) {
  if (present.size() != cp.n)
    throw std::invalid_argument("recoverable: presence map size != n");
  std::uint32_t count = 0;
  for (bool p : present) count += p ? 1 : 0;
  return count >= cp.k;
}

void ObjectLayout::validate(std::uint32_t node_count) const {
  std::unordered_set<std::uint32_t> seen;
  for (auto node : placement) {
    if (node >= node_count)
      throw std::invalid_argument("layout: node id out of range");
    if (!seen.insert(node).second)
      throw std::invalid_argument("layout: duplicate node in placement");
  }
}

}  // namespace repairlab::codes
