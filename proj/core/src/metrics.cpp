#include "ccc/metrics.hpp"

#include <algorithm>
#include <string>

#include "ccc/error.hpp"

namespace ccc {

void CCCParams::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in [0,1]");
  if (num_way != 2 && num_way != 3) throw ValidationError("num_way must be 2 or 3");
}

std::vector<AlleleCounts> allele_counts(const PackedVectorSet& set) {
  std::vector<AlleleCounts> out(set.num_vectors());
  for (std::size_t i = 0; i < set.num_vectors(); ++i) {
    auto p0 = set.plane(i, 0);
    auto p1 = set.plane(i, 1);
    AlleleCounts c;
    for (std::size_t w = 0; w < set.num_words(); ++w) {
      std::uint64_t v = range_mask(set.num_fields(), w);
      if (set.sparse()) v &= non_null_bits(p0[w], p1[w]);
      c.ones += static_cast<std::uint64_t>(std::popcount(p0[w] & v) + std::popcount(p1[w] & v));
      c.valid += static_cast<std::uint64_t>(std::popcount(v));
    }
    out[i] = c;
  }
  return out;
}

Frequency frequency(const AlleleCounts& counts, Precision precision) {
  if (counts.valid == 0) throw DomainError("allele frequency undefined: no valid elements");
  const std::uint64_t total = 2 * counts.valid;
  const std::uint64_t zeros = total - counts.ones;
  if (precision == Precision::f32) {
    return {static_cast<float>(zeros) / static_cast<float>(total),
            static_cast<float>(counts.ones) / static_cast<float>(total)};
  }
  return {static_cast<double>(zeros) / static_cast<double>(total),
          static_cast<double>(counts.ones) / static_cast<double>(total)};
}

FrequencyVector allele_frequencies(const PackedVectorSet& set, Precision precision) {
  FrequencyVector fv;
  for (const auto& c : allele_counts(set)) {
    if (c.valid == 0) {
      fv.f.push_back({0.0, 0.0});
      fv.defined.push_back(false);
    } else {
      fv.f.push_back(frequency(c, precision));
      fv.defined.push_back(true);
    }
  }
  return fv;
}

namespace {

// The factor product is formed in sorted order so that the value does not
// depend on which vector was listed first.
template <typename T, std::size_t N>
T ordered_product(std::array<T, N> f) {
  std::sort(f.begin(), f.end());
  T p = f[0];
  for (std::size_t n = 1; n < N; ++n) p *= f[n];
  return p;
}

template <typename T>
CCCValues2 ccc2_impl(const TallyTable2& tally, const Frequency& fi, const Frequency& fj,
                     double gamma_d) {
  const T gamma = static_cast<T>(gamma_d);
  const T denom = static_cast<T>(tally.sum());
  CCCValues2 out{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const T fij = static_cast<T>(tally.at(a, b)) / denom;
      const T wi = T(1) - gamma * static_cast<T>(fi[static_cast<std::size_t>(a)]);
      const T wj = T(1) - gamma * static_cast<T>(fj[static_cast<std::size_t>(b)]);
      out[static_cast<std::size_t>(2 * a + b)] = fij * ordered_product(std::array<T, 2>{wi, wj});
    }
  return out;
}

template <typename T>
CCCValues3 ccc3_impl(const TallyTable3& tally, const Frequency& fi, const Frequency& fj,
                     const Frequency& fk, double gamma_d) {
  const T gamma = static_cast<T>(gamma_d);
  const T denom = static_cast<T>(tally.sum());
  CCCValues3 out{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        const T fijk = static_cast<T>(tally.at(a, b, c)) / denom;
        const T wi = T(1) - gamma * static_cast<T>(fi[static_cast<std::size_t>(a)]);
        const T wj = T(1) - gamma * static_cast<T>(fj[static_cast<std::size_t>(b)]);
        const T wk = T(1) - gamma * static_cast<T>(fk[static_cast<std::size_t>(c)]);
        out[static_cast<std::size_t>(4 * a + 2 * b + c)] =
            fijk * ordered_product(std::array<T, 3>{wi, wj, wk});
      }
  return out;
}

}  // namespace

CCCValues2 ccc2(const TallyTable2& tally, const Frequency& fi, const Frequency& fj,
                const CCCParams& params) {
  if (tally.sum() == 0) throw DomainError("ccc2: no valid element pairs");
  return params.precision == Precision::f32 ? ccc2_impl<float>(tally, fi, fj, params.gamma)
                                            : ccc2_impl<double>(tally, fi, fj, params.gamma);
}

CCCValues3 ccc3(const TallyTable3& tally, const Frequency& fi, const Frequency& fj,
                const Frequency& fk, const CCCParams& params) {
  if (tally.sum() == 0) throw DomainError("ccc3: no valid element triples");
  return params.precision == Precision::f32 ? ccc3_impl<float>(tally, fi, fj, fk, params.gamma)
                                            : ccc3_impl<double>(tally, fi, fj, fk, params.gamma);
}

Element2 x_entry(Element2 v, Element2 vj, int xi, bool sparse) {
  if (xi < 1 || xi > 3) throw ValidationError("xi must be 1, 2 or 3");
  if (sparse && (v.is_null() || vj.is_null())) return kNullElement;
  const int pivot_class = canonicalize(vj).ones() + 1;  // (0,0)->1, (0,1)->2, (1,1)->3
  return pivot_class == xi ? canonicalize(v) : kNullElement;
}

MaskedTile x_construct(const PackedColumn& pivot, const PackedVectorSet& v, Range cols, int xi) {
  if (xi < 1 || xi > 3) throw ValidationError("xi must be 1, 2 or 3");
  if (pivot.num_fields != v.num_fields() || pivot.num_words() != v.num_words())
    throw ValidationError("pivot and tile have different field counts");
  if (cols.end > v.num_vectors() || cols.begin > cols.end)
    throw ValidationError("x_construct range outside tile");
  const bool sparse = v.sparse();
  const std::size_t n_words = v.num_words();

  std::vector<std::uint64_t> cls(n_words);
  for (std::size_t w = 0; w < n_words; ++w) {
    const std::uint64_t p0 = pivot.plane0[w], p1 = pivot.plane1[w];
    std::uint64_t m = 0;
    switch (xi) {
      case 1: m = ~p0 & ~p1; break;
      case 2: m = sparse ? (~p0 & p1) : (p0 ^ p1); break;
      default: m = p0 & p1; break;
    }
    cls[w] = m & range_mask(v.num_fields(), w);
  }

  MaskedTile x(cols.size(), v.num_fields());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    auto s0 = v.plane(cols.begin + c, 0);
    auto s1 = v.plane(cols.begin + c, 1);
    auto x0 = x.mutable_plane(c, 0);
    auto x1 = x.mutable_plane(c, 1);
    auto valid = x.mutable_valid(c);
    for (std::size_t w = 0; w < n_words; ++w) {
      const std::uint64_t in_range = range_mask(v.num_fields(), w);
      std::uint64_t ok = cls[w];
      if (sparse) ok &= non_null_bits(s0[w], s1[w]);
      // canonical V value where ok; (1,0) elsewhere in range
      const std::uint64_t c0 = s0[w] & s1[w];
      const std::uint64_t c1 = s0[w] | s1[w];
      x0[w] = (c0 & ok) | (~ok & in_range);
      x1[w] = c1 & ok;
      valid[w] = ok;
    }
  }
  return x;
}

TallyTable3 reconstruct3(const TallyTable2& b1, const TallyTable2& b2, const TallyTable2& b3) {
  TallyTable3 t;
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c) {
      t.at(a, 0, c) = 2 * b1.at(a, c) + b2.at(a, c);
      t.at(a, 1, c) = 2 * b3.at(a, c) + b2.at(a, c);
    }
  return t;
}

std::vector<TallyTable3> pivot_block3(const PackedColumn& pivot, const PackedVectorSet& a,
                                      Range rows, const PackedVectorSet& b, Range cols,
                                      KernelStats* stats) {
  std::array<TallyBlock, 3> steps;
  for (int xi = 1; xi <= 3; ++xi)
    steps[static_cast<std::size_t>(xi - 1)] =
        block_tally3_step(x_construct(pivot, a, rows, xi), b, cols, stats);
  std::vector<TallyTable3> out(rows.size() * cols.size());
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = reconstruct3(steps[0].cells[n], steps[1].cells[n], steps[2].cells[n]);
  return out;
}

UniqueCounts unique_counts(std::uint64_t num_vectors, int num_way) {
  const std::uint64_t n = num_vectors;
  if (num_way == 2) {
    const std::uint64_t tables = n < 2 ? 0 : n * (n - 1) / 2;
    return {tables, 4 * tables};
  }
  if (num_way == 3) {
    const std::uint64_t tables = n < 3 ? 0 : n * (n - 1) * (n - 2) / 6;
    return {tables, 8 * tables};
  }
  throw ValidationError("num_way must be 2 or 3");
}

}  // namespace ccc
