#include "ccc/tally.hpp"

#include <algorithm>
#include <string>

#include "ccc/error.hpp"

namespace ccc {

namespace {

void check_same_layout(const PackedColumn& ci, const PackedColumn& cj) {
  if (ci.num_words() != cj.num_words() || ci.num_fields != cj.num_fields ||
      ci.plane1.size() != ci.plane0.size() || cj.plane1.size() != cj.plane0.size()) {
    throw ValidationError("tally operands have mismatched word counts (" +
                          std::to_string(ci.num_words()) + " vs " +
                          std::to_string(cj.num_words()) + ")");
  }
}

std::uint64_t column_ones(std::span<const std::uint64_t> p0, std::span<const std::uint64_t> p1) {
  std::uint64_t n = 0;
  for (std::size_t w = 0; w < p0.size(); ++w)
    n += static_cast<std::uint64_t>(std::popcount(p0[w]) + std::popcount(p1[w]));
  return n;
}

std::uint64_t both_ones(const std::uint64_t* x0, const std::uint64_t* x1, const std::uint64_t* y0,
                        const std::uint64_t* y1, std::size_t n_words) {
  std::uint64_t s = 0;
  for (std::size_t w = 0; w < n_words; ++w) {
    s += static_cast<std::uint64_t>(std::popcount(x0[w] & y0[w]) + std::popcount(x0[w] & y1[w]) +
                                    std::popcount(x1[w] & y0[w]) + std::popcount(x1[w] & y1[w]));
  }
  return s;
}

// Validity words of a column: in range and not the marker.
std::vector<std::uint64_t> validity(const PackedVectorSet& set, std::size_t c) {
  std::vector<std::uint64_t> v(set.num_words());
  auto p0 = set.plane(c, 0);
  auto p1 = set.plane(c, 1);
  for (std::size_t w = 0; w < v.size(); ++w)
    v[w] = non_null_bits(p0[w], p1[w]) & range_mask(set.num_fields(), w);
  return v;
}

TallyMoments masked_moments(std::span<const std::uint64_t> x0, std::span<const std::uint64_t> x1,
                            std::span<const std::uint64_t> y0, std::span<const std::uint64_t> y1,
                            const std::uint64_t* mask_a, const std::uint64_t* mask_b) {
  TallyMoments m;
  for (std::size_t w = 0; w < x0.size(); ++w)
    accumulate_word(m, x0[w], x1[w], y0[w], y1[w], mask_a[w] & mask_b[w]);
  return m;
}

void check_block_operands(const PackedVectorSet& a, Range rows, const PackedVectorSet& b,
                          Range cols) {
  if (a.num_fields() != b.num_fields() || a.num_words() != b.num_words())
    throw ValidationError("block operands have different field counts");
  if (rows.end > a.num_vectors() || cols.end > b.num_vectors() || rows.begin > rows.end ||
      cols.begin > cols.end)
    throw ValidationError("block range outside tile");
}

}  // namespace

TallyTable2 pair_tally(const PackedColumn& ci, const PackedColumn& cj) {
  check_same_layout(ci, cj);
  TallyMoments m;
  const std::size_t n_words = ci.num_words();
  for (std::size_t w = 0; w < n_words; ++w)
    accumulate_word(m, ci.plane0[w], ci.plane1[w], cj.plane0[w], cj.plane1[w],
                    range_mask(ci.num_fields, w));
  return m.table();
}

SparseTally sparse_pair_tally(const PackedColumn& ci, const PackedColumn& cj) {
  check_same_layout(ci, cj);
  TallyMoments m;
  for (std::size_t w = 0; w < ci.num_words(); ++w) {
    const std::uint64_t mask = non_null_bits(ci.plane0[w], ci.plane1[w]) &
                               non_null_bits(cj.plane0[w], cj.plane1[w]) &
                               range_mask(ci.num_fields, w);
    accumulate_word(m, ci.plane0[w], ci.plane1[w], cj.plane0[w], cj.plane1[w], mask);
  }
  return {m.table(), m.valid};
}

TallyBlock block_tally2(const PackedVectorSet& a, Range rows, const PackedVectorSet& b, Range cols,
                        BlockShape shape, KernelStats* stats) {
  check_block_operands(a, rows, b, cols);
  if (stats) ++stats->block2_calls;
  TallyBlock block{rows, cols, std::vector<TallyTable2>(rows.size() * cols.size())};
  const std::size_t n_words = a.num_words();
  const bool upper = shape == BlockShape::strict_upper;
  auto wanted = [&](std::size_t r, std::size_t c) {
    return !upper || rows.begin + r < cols.begin + c;
  };

  if (!a.sparse() && !b.sparse()) {
    // Padding bits are zero, so only the valid count needs n_f.
    std::vector<std::uint64_t> ones_b(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c)
      ones_b[c] = column_ones(b.plane(cols.begin + c, 0), b.plane(cols.begin + c, 1));
    constexpr std::size_t kColTile = 16;
    for (std::size_t c0 = 0; c0 < cols.size(); c0 += kColTile) {
      const std::size_t c1 = std::min(cols.size(), c0 + kColTile);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto x0 = a.plane(rows.begin + r, 0);
        const auto x1 = a.plane(rows.begin + r, 1);
        const std::uint64_t ones_a = column_ones(x0, x1);
        for (std::size_t c = c0; c < c1; ++c) {
          if (!wanted(r, c)) continue;
          TallyMoments m;
          m.valid = a.num_fields();
          m.ones_i = ones_a;
          m.ones_j = ones_b[c];
          m.both = both_ones(x0.data(), x1.data(), b.plane(cols.begin + c, 0).data(),
                             b.plane(cols.begin + c, 1).data(), n_words);
          block.at(r, c) = m.table();
        }
      }
    }
    return block;
  }

  std::vector<std::vector<std::uint64_t>> valid_b(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) valid_b[c] = validity(b, cols.begin + c);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto valid_a = validity(a, rows.begin + r);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (!wanted(r, c)) continue;
      block.at(r, c) = masked_moments(a.plane(rows.begin + r, 0), a.plane(rows.begin + r, 1),
                                      b.plane(cols.begin + c, 0), b.plane(cols.begin + c, 1),
                                      valid_a.data(), valid_b[c].data())
                           .table();
    }
  }
  return block;
}

MaskedTile::MaskedTile(std::size_t num_columns, std::size_t num_fields)
    : num_columns_(num_columns),
      num_fields_(num_fields),
      num_words_(words_for(num_fields)),
      words_(num_columns * 3 * words_for(num_fields), 0) {}

std::span<const std::uint64_t> MaskedTile::plane(std::size_t c, int r) const {
  return {words_.data() + (3 * c + static_cast<std::size_t>(r)) * num_words_, num_words_};
}
std::span<std::uint64_t> MaskedTile::mutable_plane(std::size_t c, int r) {
  return {words_.data() + (3 * c + static_cast<std::size_t>(r)) * num_words_, num_words_};
}
std::span<const std::uint64_t> MaskedTile::valid(std::size_t c) const {
  return {words_.data() + (3 * c + 2) * num_words_, num_words_};
}
std::span<std::uint64_t> MaskedTile::mutable_valid(std::size_t c) {
  return {words_.data() + (3 * c + 2) * num_words_, num_words_};
}

Element2 MaskedTile::element(std::size_t c, std::size_t q) const {
  const std::size_t w = q / kBitsPerWord;
  const unsigned b = q % kBitsPerWord;
  return {static_cast<std::uint8_t>((plane(c, 0)[w] >> b) & 1U),
          static_cast<std::uint8_t>((plane(c, 1)[w] >> b) & 1U)};
}

TallyBlock block_tally3_step(const MaskedTile& masked, const PackedVectorSet& b, Range cols,
                             KernelStats* stats) {
  if (masked.num_fields() != b.num_fields())
    throw ValidationError("block operands have different field counts");
  if (cols.end > b.num_vectors() || cols.begin > cols.end)
    throw ValidationError("block range outside tile");
  if (stats) ++stats->block3_step_calls;
  const Range rows{0, masked.num_columns()};
  TallyBlock block{rows, cols, std::vector<TallyTable2>(rows.size() * cols.size())};
  const std::size_t n_words = masked.num_words();

  std::vector<std::vector<std::uint64_t>> valid_b(cols.size());
  if (b.sparse())
    for (std::size_t c = 0; c < cols.size(); ++c) valid_b[c] = validity(b, cols.begin + c);

  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto x0 = masked.plane(r, 0);
    const auto x1 = masked.plane(r, 1);
    const auto va = masked.valid(r);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto y0 = b.plane(cols.begin + c, 0);
      const auto y1 = b.plane(cols.begin + c, 1);
      TallyMoments m;
      if (b.sparse()) {
        m = masked_moments(x0, x1, y0, y1, va.data(), valid_b[c].data());
      } else {
        for (std::size_t w = 0; w < n_words; ++w) accumulate_word(m, x0[w], x1[w], y0[w], y1[w], va[w]);
      }
      block.at(r, c) = m.table();
    }
  }
  return block;
}

TallyTable2 pair_tally_packed(const PackedColumn& ci, const PackedColumn& cj) {
  check_same_layout(ci, cj);
  if (ci.num_fields > kPackedMaxFields) {
    throw LimitError("n_f = " + std::to_string(ci.num_fields) +
                     " exceeds the packed accumulator limit of " +
                     std::to_string(kPackedMaxFields));
  }
  PackedAccumulator acc;
  for (std::size_t w = 0; w < ci.num_words(); ++w)
    acc.add(word_tally(ci.plane0[w], ci.plane1[w], cj.plane0[w], cj.plane1[w],
                       range_mask(ci.num_fields, w)));
  return acc.extract();
}

}  // namespace ccc
