#include "ccc/bitgrid.hpp"

#include <algorithm>
#include <string>

#include "ccc/error.hpp"

namespace ccc {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

PackedVectorSet::PackedVectorSet(std::size_t num_vectors, std::size_t num_fields, bool sparse)
    : num_vectors_(num_vectors),
      num_fields_(num_fields),
      num_words_(words_for(num_fields)),
      sparse_(sparse),
      words_(num_vectors * 2 * words_for(num_fields), 0) {}

PackedVectorSet PackedVectorSet::from_words(std::size_t num_vectors, std::size_t num_fields,
                                            bool sparse, std::vector<std::uint64_t> words) {
  PackedVectorSet set;
  set.num_vectors_ = num_vectors;
  set.num_fields_ = num_fields;
  set.num_words_ = words_for(num_fields);
  set.sparse_ = sparse;
  if (words.size() != num_vectors * 2 * set.num_words_) {
    throw ValidationError("packed payload has " + std::to_string(words.size()) +
                          " words, expected " + std::to_string(num_vectors * 2 * set.num_words_));
  }
  set.words_ = std::move(words);
  if (set.num_words_ > 0) {
    const std::uint64_t pad = ~range_mask(num_fields, set.num_words_ - 1);
    for (std::size_t i = 0; i < num_vectors; ++i)
      for (int r = 0; r < 2; ++r)
        if (set.plane(i, r).back() & pad)
          throw ValidationError("nonzero padding bits in vector " + std::to_string(i));
  }
  return set;
}

std::span<const std::uint64_t> PackedVectorSet::plane(std::size_t vector, int r) const {
  return {words_.data() + (2 * vector + static_cast<std::size_t>(r)) * num_words_, num_words_};
}

std::span<std::uint64_t> PackedVectorSet::mutable_plane(std::size_t vector, int r) {
  return {words_.data() + (2 * vector + static_cast<std::size_t>(r)) * num_words_, num_words_};
}

Element2 PackedVectorSet::element(std::size_t vector, std::size_t field) const {
  const std::size_t w = field / kBitsPerWord;
  const unsigned b = field % kBitsPerWord;
  return {static_cast<std::uint8_t>((plane(vector, 0)[w] >> b) & 1U),
          static_cast<std::uint8_t>((plane(vector, 1)[w] >> b) & 1U)};
}

void PackedVectorSet::set_element(std::size_t vector, std::size_t field, Element2 e) {
  const std::size_t w = field / kBitsPerWord;
  const std::uint64_t bit = std::uint64_t{1} << (field % kBitsPerWord);
  auto p0 = mutable_plane(vector, 0);
  auto p1 = mutable_plane(vector, 1);
  p0[w] = e.first ? (p0[w] | bit) : (p0[w] & ~bit);
  p1[w] = e.second ? (p1[w] | bit) : (p1[w] & ~bit);
}

namespace {

// Copies bits [first, first + count) of src into dst starting at bit 0.
void extract_bits(std::span<const std::uint64_t> src, std::size_t first, std::size_t count,
                  std::span<std::uint64_t> dst) {
  const std::size_t shift = first % kBitsPerWord;
  const std::size_t base = first / kBitsPerWord;
  for (std::size_t w = 0; w < dst.size(); ++w) {
    std::uint64_t lo = base + w < src.size() ? src[base + w] : 0;
    std::uint64_t v = lo >> shift;
    if (shift != 0 && base + w + 1 < src.size()) v |= src[base + w + 1] << (kBitsPerWord - shift);
    dst[w] = v & range_mask(count, w);
  }
}

}  // namespace

PackedVectorSet PackedVectorSet::slice(Range vectors, Range fields) const {
  if (vectors.end > num_vectors_ || fields.end > num_fields_ || vectors.begin > vectors.end ||
      fields.begin > fields.end) {
    throw ValidationError("slice out of range");
  }
  PackedVectorSet out(vectors.size(), fields.size(), sparse_);
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (int r = 0; r < 2; ++r)
      extract_bits(plane(vectors.begin + i, r), fields.begin, fields.size(),
                   out.mutable_plane(i, r));
  return out;
}

namespace {

void check_rectangular(std::size_t n_f, std::size_t row_size, std::size_t i) {
  if (row_size != n_f) {
    throw ValidationError("vector " + std::to_string(i) + " has " + std::to_string(row_size) +
                          " elements, expected " + std::to_string(n_f));
  }
}

void check_bits(Element2 e) {
  if (e.first > 1 || e.second > 1) throw ValidationError("element component must be 0 or 1");
}

}  // namespace

PackedVectorSet encode(const ElementMatrix& elements, bool sparse) {
  if (elements.empty()) throw ValidationError("encode: no vectors");
  const std::size_t n_f = elements.front().size();
  if (n_f == 0) throw ValidationError("encode: vectors must have at least one element");
  PackedVectorSet set(elements.size(), n_f, sparse);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    check_rectangular(n_f, elements[i].size(), i);
    for (std::size_t q = 0; q < n_f; ++q) {
      const Element2 e = elements[i][q];
      check_bits(e);
      set.set_element(i, q, sparse ? e : canonicalize(e));
    }
  }
  return set;
}

PackedVectorSet encode_sparse(const OptionalElementMatrix& elements) {
  if (elements.empty()) throw ValidationError("encode: no vectors");
  const std::size_t n_f = elements.front().size();
  if (n_f == 0) throw ValidationError("encode: vectors must have at least one element");
  PackedVectorSet set(elements.size(), n_f, true);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    check_rectangular(n_f, elements[i].size(), i);
    for (std::size_t q = 0; q < n_f; ++q) {
      const auto& e = elements[i][q];
      if (!e) {
        set.set_element(i, q, kNullElement);
        continue;
      }
      check_bits(*e);
      if (e->is_null()) {
        throw ValidationError("(1,0) is reserved as the missing marker in sparse mode (vector " +
                              std::to_string(i) + ", field " + std::to_string(q) + ")");
      }
      set.set_element(i, q, *e);
    }
  }
  return set;
}

ElementMatrix decode(const PackedVectorSet& set) {
  ElementMatrix out(set.num_vectors(), std::vector<Element2>(set.num_fields()));
  for (std::size_t i = 0; i < set.num_vectors(); ++i)
    for (std::size_t q = 0; q < set.num_fields(); ++q) out[i][q] = set.element(i, q);
  return out;
}

Element2 random_element(std::uint64_t seed, std::size_t vector, std::size_t field,
                        double missing_rate) {
  const std::uint64_t h = mix64(mix64(seed ^ 0x5851f42d4c957f2dULL) ^
                                (static_cast<std::uint64_t>(vector) * 0xd6e8feb86659fd93ULL) ^
                                mix64(static_cast<std::uint64_t>(field) ^ 0xa0761d6478bd642fULL));
  if (missing_rate > 0.0) {
    const double u = static_cast<double>(h & 0xffffffffULL) / 4294967296.0;
    if (u < missing_rate) return kNullElement;
  }
  switch ((h >> 32) % 3) {
    case 0: return {0, 0};
    case 1: return {0, 1};
    default: return {1, 1};
  }
}

PackedVectorSet generate_random_tile(std::uint64_t seed, Range vectors, Range fields, bool sparse,
                                     double missing_rate) {
  PackedVectorSet set(vectors.size(), fields.size(), sparse);
  const double rate = sparse ? missing_rate : 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i)
    for (std::size_t q = 0; q < fields.size(); ++q)
      set.set_element(i, q, random_element(seed, vectors.begin + i, fields.begin + q, rate));
  return set;
}

PackedVectorSet generate_random(std::size_t num_vectors, std::size_t num_fields,
                                std::uint64_t seed) {
  if (num_vectors == 0 || num_fields == 0) throw ValidationError("generate: n_v, n_f must be >= 1");
  return generate_random_tile(seed, {0, num_vectors}, {0, num_fields});
}

PackedVectorSet generate_random_sparse(std::size_t num_vectors, std::size_t num_fields,
                                       std::uint64_t seed, double missing_rate) {
  if (num_vectors == 0 || num_fields == 0) throw ValidationError("generate: n_v, n_f must be >= 1");
  if (!(missing_rate >= 0.0 && missing_rate <= 1.0))
    throw ValidationError("missing rate must lie in [0,1]");
  return generate_random_tile(seed, {0, num_vectors}, {0, num_fields}, true, missing_rate);
}

// ---------------------------------------------------------------------------
// Verifiable datasets

namespace {

// Slot intervals per symbol: (1,1) in [0,a), (0,1) in [a,a+b), (0,0) after.
struct SymbolIntervals {
  Range span[3];  // indexed by rho(1): 0 -> (0,0), 1 -> (0,1), 2 -> (1,1)
};

SymbolIntervals intervals_of(const PlantedVector& v, std::size_t n_f) {
  SymbolIntervals s;
  s.span[2] = {0, v.ones_ones};
  s.span[1] = {v.ones_ones, v.ones_ones + v.zero_one};
  s.span[0] = {v.ones_ones + v.zero_one, n_f};
  return s;
}

std::size_t overlap(Range x, Range y) {
  const std::size_t lo = std::max(x.begin, y.begin);
  const std::size_t hi = std::min(x.end, y.end);
  return hi > lo ? hi - lo : 0;
}

std::uint64_t rho(int ones, int a) { return static_cast<std::uint64_t>(a == 1 ? ones : 2 - ones); }

}  // namespace

VerifiableLayout::VerifiableLayout(std::size_t num_fields, std::vector<PlantedVector> vectors,
                                   std::vector<std::size_t> slot_to_field)
    : num_fields_(num_fields),
      vectors_(std::move(vectors)),
      slot_to_field_(std::move(slot_to_field)) {
  if (slot_to_field_.size() != num_fields_) throw ValidationError("slot map size mismatch");
  for (const auto& v : vectors_)
    if (v.ones_ones + v.zero_one > num_fields_)
      throw ValidationError("planted counts exceed n_f");
}

TallyTable2 VerifiableLayout::expected_pair(std::size_t i, std::size_t j) const {
  const auto si = intervals_of(vectors_[i], num_fields_);
  const auto sj = intervals_of(vectors_[j], num_fields_);
  TallyTable2 t;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) {
      const std::uint64_t n = overlap(si.span[x], sj.span[y]);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) t.at(a, b) += n * rho(x, a) * rho(y, b);
    }
  return t;
}

TallyTable3 VerifiableLayout::expected_triple(std::size_t i, std::size_t j, std::size_t k) const {
  const auto si = intervals_of(vectors_[i], num_fields_);
  const auto sj = intervals_of(vectors_[j], num_fields_);
  const auto sk = intervals_of(vectors_[k], num_fields_);
  TallyTable3 t;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      for (int z = 0; z < 3; ++z) {
        const Range xy{std::max(si.span[x].begin, sj.span[y].begin),
                       std::min(si.span[x].end, sj.span[y].end)};
        const std::uint64_t n = xy.empty() ? 0 : overlap(xy, sk.span[z]);
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) t.at(a, b, c) += n * rho(x, a) * rho(y, b) * rho(z, c);
      }
  return t;
}

std::uint64_t VerifiableLayout::expected_ones(std::size_t i) const {
  return 2 * vectors_[i].ones_ones + vectors_[i].zero_one;
}

namespace {

std::vector<std::size_t> seeded_shuffle(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::uint64_t h = mix64(seed ^ mix64(static_cast<std::uint64_t>(i)));
    std::swap(p[i - 1], p[h % i]);
  }
  return p;
}

}  // namespace

std::pair<PackedVectorSet, VerifiableLayout> plant_verifiable(std::size_t num_fields,
                                                              std::vector<PlantedVector> vectors,
                                                              std::uint64_t seed) {
  if (num_fields == 0 || vectors.empty()) throw ValidationError("plant: empty dataset");
  VerifiableLayout layout(num_fields, std::move(vectors), seeded_shuffle(num_fields, seed));
  PackedVectorSet set(layout.num_vectors(), num_fields, false);
  for (std::size_t i = 0; i < layout.num_vectors(); ++i) {
    const auto& v = layout.vectors()[i];
    for (std::size_t s = 0; s < num_fields; ++s) {
      const Element2 e = s < v.ones_ones ? Element2{1, 1}
                         : s < v.ones_ones + v.zero_one ? Element2{0, 1}
                                                        : Element2{0, 0};
      set.set_element(i, layout.field_of_slot(s), e);
    }
  }
  return {std::move(set), std::move(layout)};
}

std::pair<PackedVectorSet, VerifiableLayout> generate_verifiable(std::size_t num_vectors,
                                                                 std::size_t num_fields,
                                                                 std::uint64_t seed) {
  if (num_vectors < 2 || num_fields == 0)
    throw ValidationError("verifiable generator needs n_v >= 2, n_f >= 1");
  std::vector<PlantedVector> planted(num_vectors);
  for (std::size_t i = 0; i < num_vectors; ++i) {
    const std::uint64_t h1 = mix64(seed * 0x2545f4914f6cdd1dULL + 2 * i);
    const std::uint64_t h2 = mix64(seed * 0x2545f4914f6cdd1dULL + 2 * i + 1);
    planted[i].ones_ones = h1 % (num_fields + 1);
    planted[i].zero_one = h2 % (num_fields - planted[i].ones_ones + 1);
  }
  return plant_verifiable(num_fields, std::move(planted), mix64(seed ^ 0x6a09e667f3bcc909ULL));
}

// ---------------------------------------------------------------------------
// Permutation

VectorPermutation VectorPermutation::inverse() const {
  VectorPermutation inv;
  inv.forward.resize(forward.size());
  for (std::size_t i = 0; i < forward.size(); ++i) inv.forward[forward[i]] = i;
  return inv;
}

PackedVectorSet apply_permutation(const PackedVectorSet& set, const VectorPermutation& perm) {
  if (perm.forward.size() != set.num_vectors())
    throw ValidationError("permutation length does not match vector count");
  std::vector<bool> seen(set.num_vectors(), false);
  for (auto p : perm.forward) {
    if (p >= set.num_vectors() || seen[p]) throw ValidationError("not a permutation");
    seen[p] = true;
  }
  PackedVectorSet out(set.num_vectors(), set.num_fields(), set.sparse());
  for (std::size_t i = 0; i < set.num_vectors(); ++i)
    for (int r = 0; r < 2; ++r) {
      auto src = set.plane(i, r);
      std::copy(src.begin(), src.end(), out.mutable_plane(perm.forward[i], r).begin());
    }
  return out;
}

std::pair<PackedVectorSet, VectorPermutation> permute_vectors(const PackedVectorSet& set,
                                                              std::uint64_t seed) {
  VectorPermutation perm;
  for (auto p : seeded_shuffle(set.num_vectors(), seed)) perm.forward.push_back(p);
  return {apply_permutation(set, perm), std::move(perm)};
}

}  // namespace ccc
