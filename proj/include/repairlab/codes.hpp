#pragma once

#include <cstdint>
#include <vector>

#include "repairlab/bitvec.hpp"
#include "repairlab/gf256.hpp"

namespace repairlab::codes {

struct CodeParams {
  std::uint32_t n = 1;             // total fragments
  std::uint32_t k = 1;             // source fragments
  std::uint64_t fragment_bits = 0; // per fragment

  std::uint32_t r() const { return n - k; }
  void validate() const;
};

/// Systematic MDS code over GF(256): Vandermonde generator brought to
/// systematic form, with the parity block column-scaled so the first parity
/// fragment is the plain XOR of the source fragments.
///
/// Symbols are bytes, so fragment_bits must be a byte multiple — except when
/// k == 1 or r <= 1, where every encode/decode matrix is 0/1-valued and the
/// arithmetic degenerates to copy/XOR, which is safe at bit granularity.
class MdsCode {
 public:
  explicit MdsCode(const CodeParams& cp);

  const CodeParams& params() const { return cp_; }
  const gf::Matrix& generator() const { return gen_; }  // n x k

  // pre: object.size() == k * fragment_bits
  std::vector<BitVec> encode(const BitVec& object) const;

  // pre: exactly k distinct indices in [0, n)
  BitVec decode(const std::vector<std::uint32_t>& indices,
                const std::vector<BitVec>& fragments) const;

  // Rebuild one fragment from any k others.
  BitVec repair_fragment(std::uint32_t index,
                         const std::vector<std::uint32_t>& have_indices,
                         const std::vector<BitVec>& have_fragments) const;

 private:
  std::vector<std::vector<std::uint8_t>> to_symbols(const BitVec& object) const;
  BitVec from_symbols(const std::vector<std::uint8_t>& sym,
                      std::uint64_t nbits) const;

  CodeParams cp_;
  gf::Matrix gen_;
  std::size_t sym_per_frag_ = 0;
};

// true iff at least k of the n presence flags are set
bool recoverable(const std::vector<bool>& present, const CodeParams& cp);

struct ObjectLayout {
  std::uint64_t object_id = 0;
  std::vector<std::uint32_t> placement;  // fragment index -> node id, injective

  void validate(std::uint32_t node_count) const;
};

}  // namespace repairlab::codes
