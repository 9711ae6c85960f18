#pragma once

// Popcount tally kernels.
//
// For an element with planes (x0, x1), rho(1) = x0 + x1 and rho(0) = 2 - rho(1)
// regardless of canonical form. Over a set of positions selected by a mask
// with M positions, P_i = sum rho_i(1), P_j = sum rho_j(1) and
// S = sum rho_i(1) rho_j(1), the four cells are
//   t11 = S, t10 = 2 P_i - S, t01 = 2 P_j - S, t00 = 4 M - 2 P_i - 2 P_j + S,
// so every cell reduces to popcounts of plane intersections.

#include <bit>
#include <cstdint>
#include <vector>

#include "ccc/bitgrid.hpp"
#include "ccc/tally_table.hpp"

namespace ccc {

/// Running sums that determine a TallyTable2.
struct TallyMoments {
  std::uint64_t valid = 0;  // M
  std::uint64_t ones_i = 0;
  std::uint64_t ones_j = 0;
  std::uint64_t both = 0;  // S

  TallyTable2 table() const {
    TallyTable2 t;
    t.at(1, 1) = both;
    t.at(1, 0) = 2 * ones_i - both;
    t.at(0, 1) = 2 * ones_j - both;
    t.at(0, 0) = 4 * valid - 2 * ones_i - 2 * ones_j + both;
    return t;
  }
};

inline void accumulate_word(TallyMoments& m, std::uint64_t ai0, std::uint64_t ai1,
                            std::uint64_t aj0, std::uint64_t aj1, std::uint64_t valid_mask) {
  const std::uint64_t x0 = ai0 & valid_mask, x1 = ai1 & valid_mask;
  const std::uint64_t y0 = aj0 & valid_mask, y1 = aj1 & valid_mask;
  m.valid += static_cast<std::uint64_t>(std::popcount(valid_mask));
  m.ones_i += static_cast<std::uint64_t>(std::popcount(x0) + std::popcount(x1));
  m.ones_j += static_cast<std::uint64_t>(std::popcount(y0) + std::popcount(y1));
  m.both += static_cast<std::uint64_t>(std::popcount(x0 & y0) + std::popcount(x0 & y1) +
                                       std::popcount(x1 & y0) + std::popcount(x1 & y1));
}

/// Tally increment contributed by one word position of two packed columns,
/// restricted to the bits set in valid_mask.
inline TallyTable2 word_tally(std::uint64_t ai0, std::uint64_t ai1, std::uint64_t aj0,
                              std::uint64_t aj1, std::uint64_t valid_mask) {
  TallyMoments m;
  accumulate_word(m, ai0, ai1, aj0, aj1, valid_mask);
  return m.table();
}

/// Bits of a word whose element is not the (1,0) marker.
inline std::uint64_t non_null_bits(std::uint64_t p0, std::uint64_t p1) { return ~(p0 & ~p1); }

/// Kernel invocation counters.
struct KernelStats {
  std::uint64_t block2_calls = 0;
  std::uint64_t block3_step_calls = 0;
  std::uint64_t comparisons = 0;

  KernelStats& operator+=(const KernelStats& o) {
    block2_calls += o.block2_calls;
    block3_step_calls += o.block3_step_calls;
    comparisons += o.comparisons;
    return *this;
  }
};

/// Dense tally of two columns over exactly n_f positions.
TallyTable2 pair_tally(const PackedColumn& ci, const PackedColumn& cj);

struct SparseTally {
  TallyTable2 table;
  std::uint64_t valid_pairs = 0;
};

/// Tally over positions where neither element is the (1,0) marker.
SparseTally sparse_pair_tally(const PackedColumn& ci, const PackedColumn& cj);

/// Rectangular block of pair tallies. Cell (r, c) describes row column
/// rows.begin + r against column cols.begin + c of the respective tiles.
struct TallyBlock {
  Range rows;
  Range cols;
  std::vector<TallyTable2> cells;

  TallyTable2& at(std::size_t r, std::size_t c) { return cells[r * cols.size() + c]; }
  const TallyTable2& at(std::size_t r, std::size_t c) const { return cells[r * cols.size() + c]; }
};

enum class BlockShape {
  full,
  /// Only cells with rows.begin + r < cols.begin + c; both tiles must index
  /// the same vectors. Other cells stay zero.
  strict_upper,
};

/// GEMM-shaped product: every column of `rows` in A against every column of
/// `cols` in B. Uses the masked kernel when either tile is sparse.
TallyBlock block_tally2(const PackedVectorSet& a, Range rows, const PackedVectorSet& b, Range cols,
                        BlockShape shape = BlockShape::full, KernelStats* stats = nullptr);

/// Packed columns plus a per-position validity mask; invalid positions (and
/// padding) are excluded from every tally.
class MaskedTile {
 public:
  MaskedTile() = default;
  MaskedTile(std::size_t num_columns, std::size_t num_fields);

  std::size_t num_columns() const { return num_columns_; }
  std::size_t num_fields() const { return num_fields_; }
  std::size_t num_words() const { return num_words_; }

  std::span<const std::uint64_t> plane(std::size_t c, int r) const;
  std::span<std::uint64_t> mutable_plane(std::size_t c, int r);
  std::span<const std::uint64_t> valid(std::size_t c) const;
  std::span<std::uint64_t> mutable_valid(std::size_t c);

  Element2 element(std::size_t c, std::size_t q) const;

 private:
  std::size_t num_columns_ = 0;
  std::size_t num_fields_ = 0;
  std::size_t num_words_ = 0;
  std::vector<std::uint64_t> words_;  // per column: plane0, plane1, valid
};

/// Block of tallies between masked rows and the `cols` columns of B. A
/// position contributes only if valid in the masked row and not the missing
/// marker in B.
TallyBlock block_tally3_step(const MaskedTile& masked, const PackedVectorSet& b, Range cols,
                             KernelStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Mantissa-packed accumulation: four 25-bit counts stored in the
// significands of two doubles.

inline constexpr unsigned kPackedFieldBits = 25;
inline constexpr unsigned kPackedHighOffset = 25;
inline constexpr std::uint64_t kPackedFieldMax = (std::uint64_t{1} << kPackedFieldBits) - 1;
/// Largest n_f for which 4 n_f fits in a field.
inline constexpr std::size_t kPackedMaxFields = (std::size_t{1} << 23) - 1;

struct PackedAccumulator {
  double lo = 0.0;  // t00 at bit 0, t01 at bit 25
  double hi = 0.0;  // t10 at bit 0, t11 at bit 25

  void add(const TallyTable2& inc) {
    lo += static_cast<double>(inc.at(0, 0) + (inc.at(0, 1) << kPackedHighOffset));
    hi += static_cast<double>(inc.at(1, 0) + (inc.at(1, 1) << kPackedHighOffset));
  }
  TallyTable2 extract() const {
    const auto l = static_cast<std::uint64_t>(lo);
    const auto h = static_cast<std::uint64_t>(hi);
    TallyTable2 t;
    t.at(0, 0) = l & kPackedFieldMax;
    t.at(0, 1) = l >> kPackedHighOffset;
    t.at(1, 0) = h & kPackedFieldMax;
    t.at(1, 1) = h >> kPackedHighOffset;
    return t;
  }
};

/// Same result as pair_tally, accumulated through PackedAccumulator.
/// Throws LimitError when n_f > kPackedMaxFields.
TallyTable2 pair_tally_packed(const PackedColumn& ci, const PackedColumn& cj);

}  // namespace ccc
