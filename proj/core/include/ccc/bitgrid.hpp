#pragma once

// Packed 2-bit vector storage plus synthetic dataset generators.
//
// Each vector holds n_f elements; an element is a pair of binary alleles.
// Storage is split-plane: plane r of vector i is an array of 64-bit words
// whose bit b of word w holds component r of element q = 64*w + b. Bits at
// q >= n_f (padding) are always zero.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ccc/tally_table.hpp"

namespace ccc {

inline constexpr std::size_t kBitsPerWord = 64;

/// Half-open index interval [begin, end).
struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end > begin ? end - begin : 0; }
  bool empty() const { return end <= begin; }
  bool contains(std::size_t x) const { return x >= begin && x < end; }
  friend bool operator==(const Range&, const Range&) = default;
};

struct Element2 {
  std::uint8_t first = 0;
  std::uint8_t second = 0;

  /// Number of components equal to 1 (rho(1)); rho(0) = 2 - ones().
  int ones() const { return first + second; }
  bool is_null() const { return first == 1 && second == 0; }
  friend bool operator==(const Element2&, const Element2&) = default;
};

inline constexpr Element2 kNullElement{1, 0};

/// (1,0) -> (0,1); identity otherwise.
inline Element2 canonicalize(Element2 e) { return e.is_null() ? Element2{0, 1} : e; }

inline std::size_t words_for(std::size_t num_fields) {
  return (num_fields + kBitsPerWord - 1) / kBitsPerWord;
}

/// Mask of in-range bits in word `w` of a column with `num_fields` elements.
inline std::uint64_t range_mask(std::size_t num_fields, std::size_t w) {
  const std::size_t lo = w * kBitsPerWord;
  if (num_fields >= lo + kBitsPerWord) return ~std::uint64_t{0};
  if (num_fields <= lo) return 0;
  return (std::uint64_t{1} << (num_fields - lo)) - 1;
}

/// Read-only view of one packed vector.
struct PackedColumn {
  std::span<const std::uint64_t> plane0;
  std::span<const std::uint64_t> plane1;
  std::size_t num_fields = 0;

  std::size_t num_words() const { return plane0.size(); }
};

class PackedVectorSet {
 public:
  PackedVectorSet() = default;
  /// All-(0,0) set.
  PackedVectorSet(std::size_t num_vectors, std::size_t num_fields, bool sparse);

  /// Adopts raw words in file layout (per vector: plane0 words, plane1 words).
  /// Throws ValidationError on size mismatch or nonzero padding.
  static PackedVectorSet from_words(std::size_t num_vectors, std::size_t num_fields, bool sparse,
                                    std::vector<std::uint64_t> words);

  std::size_t num_vectors() const { return num_vectors_; }
  std::size_t num_fields() const { return num_fields_; }
  std::size_t num_words() const { return num_words_; }
  std::size_t pad_count() const { return num_words_ * kBitsPerWord - num_fields_; }
  bool sparse() const { return sparse_; }

  std::span<const std::uint64_t> plane(std::size_t vector, int r) const;
  std::span<std::uint64_t> mutable_plane(std::size_t vector, int r);
  PackedColumn column(std::size_t vector) const {
    return {plane(vector, 0), plane(vector, 1), num_fields_};
  }

  Element2 element(std::size_t vector, std::size_t field) const;
  /// Raw store; no canonicalization.
  void set_element(std::size_t vector, std::size_t field, Element2 e);

  std::span<const std::uint64_t> words() const { return words_; }

  /// Copy of a rectangular sub-block, re-based so that fields.begin maps to 0.
  PackedVectorSet slice(Range vectors, Range fields) const;

  friend bool operator==(const PackedVectorSet&, const PackedVectorSet&) = default;

 private:
  std::size_t num_vectors_ = 0;
  std::size_t num_fields_ = 0;
  std::size_t num_words_ = 0;
  bool sparse_ = false;
  std::vector<std::uint64_t> words_;
};

using ElementMatrix = std::vector<std::vector<Element2>>;

/// Packs per-vector element lists. Dense mode maps (1,0) to (0,1). Sparse
/// mode stores elements verbatim, so (1,0) there is the missing marker.
PackedVectorSet encode(const ElementMatrix& elements, bool sparse);

/// Sparse packing from data values; nullopt marks a missing entry and a
/// (1,0) data value is rejected with ValidationError.
using OptionalElementMatrix = std::vector<std::vector<std::optional<Element2>>>;
PackedVectorSet encode_sparse(const OptionalElementMatrix& elements);

ElementMatrix decode(const PackedVectorSet& set);

/// Deterministic element value keyed by (seed, global vector, global field).
Element2 random_element(std::uint64_t seed, std::size_t vector, std::size_t field,
                        double missing_rate = 0.0);

/// Dense random dataset; any tile of it can be generated on its own.
PackedVectorSet generate_random(std::size_t num_vectors, std::size_t num_fields,
                                std::uint64_t seed);
/// Sparse dataset with roughly `missing_rate` of entries set to the marker.
PackedVectorSet generate_random_sparse(std::size_t num_vectors, std::size_t num_fields,
                                       std::uint64_t seed, double missing_rate);
/// The [vectors) x [fields) tile of the random dataset with the given seed.
PackedVectorSet generate_random_tile(std::uint64_t seed, Range vectors, Range fields,
                                     bool sparse = false, double missing_rate = 0.0);

/// Per-vector planted composition: counts of (1,1) and (0,1) entries; the
/// remainder are (0,0).
struct PlantedVector {
  std::size_t ones_ones = 0;
  std::size_t zero_one = 0;
};

/// Closed-form description of a verifiable dataset. Entries are laid out as
/// intervals over a hidden slot order, then scattered by a seeded position
/// permutation shared by all vectors, so tallies depend only on interval
/// overlaps.
class VerifiableLayout {
 public:
  VerifiableLayout(std::size_t num_fields, std::vector<PlantedVector> vectors,
                   std::vector<std::size_t> slot_to_field);

  std::size_t num_fields() const { return num_fields_; }
  std::size_t num_vectors() const { return vectors_.size(); }
  const std::vector<PlantedVector>& vectors() const { return vectors_; }
  std::size_t field_of_slot(std::size_t slot) const { return slot_to_field_[slot]; }

  TallyTable2 expected_pair(std::size_t i, std::size_t j) const;
  TallyTable3 expected_triple(std::size_t i, std::size_t j, std::size_t k) const;
  /// Number of 1-alleles in vector i.
  std::uint64_t expected_ones(std::size_t i) const;

 private:
  std::size_t num_fields_;
  std::vector<PlantedVector> vectors_;
  std::vector<std::size_t> slot_to_field_;
};

std::pair<PackedVectorSet, VerifiableLayout> plant_verifiable(
    std::size_t num_fields, std::vector<PlantedVector> vectors, std::uint64_t seed);
std::pair<PackedVectorSet, VerifiableLayout> generate_verifiable(std::size_t num_vectors,
                                                                 std::size_t num_fields,
                                                                 std::uint64_t seed);

/// forward[i] is the output position of input vector i.
struct VectorPermutation {
  std::vector<std::uint64_t> forward;

  VectorPermutation inverse() const;
  friend bool operator==(const VectorPermutation&, const VectorPermutation&) = default;
};

/// Output vector forward[i] equals input vector i.
PackedVectorSet apply_permutation(const PackedVectorSet& set, const VectorPermutation& perm);
std::pair<PackedVectorSet, VectorPermutation> permute_vectors(const PackedVectorSet& set,
                                                              std::uint64_t seed);

/// 64-bit finalizer (splitmix64 variant) shared by the generators.
std::uint64_t mix64(std::uint64_t x);

}  // namespace ccc
