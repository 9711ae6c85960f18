#pragma once

// CCC arithmetic: allele frequencies, 2-way and 3-way coefficients, and the
// three-pass construction of 3-way tallies from masked 2-way tallies.

#include <array>
#include <cstdint>
#include <vector>

#include "ccc/bitgrid.hpp"
#include "ccc/tally.hpp"
#include "ccc/tally_table.hpp"

namespace ccc {

enum class Precision { f32, f64 };

struct CCCParams {
  double gamma = 2.0 / 3.0;
  bool sparse = false;
  int num_way = 2;
  Precision precision = Precision::f64;

  /// Throws ValidationError for gamma outside [0,1] or num_way not 2 or 3.
  void validate() const;
};

/// Per-vector counts behind f_i: number of 1-alleles and number of valid
/// (non-missing) elements. Summable across field slabs.
struct AlleleCounts {
  std::uint64_t ones = 0;
  std::uint64_t valid = 0;

  AlleleCounts& operator+=(const AlleleCounts& o) {
    ones += o.ones;
    valid += o.valid;
    return *this;
  }
  friend bool operator==(const AlleleCounts&, const AlleleCounts&) = default;
};

std::vector<AlleleCounts> allele_counts(const PackedVectorSet& set);

/// f(0), f(1).
using Frequency = std::array<double, 2>;

/// Throws DomainError if the vector has no valid elements.
Frequency frequency(const AlleleCounts& counts, Precision precision);

struct FrequencyVector {
  std::vector<Frequency> f;
  /// False for sparse vectors with no valid element; f is then {0, 0}.
  std::vector<bool> defined;
};

FrequencyVector allele_frequencies(const PackedVectorSet& set, Precision precision);

using CCCValues2 = std::array<double, 4>;
using CCCValues3 = std::array<double, 8>;

/// Four CCC values indexed 2a+b. The divisor is the tally total (4 n_f dense,
/// 4 x valid pairs sparse); throws DomainError when it is zero.
CCCValues2 ccc2(const TallyTable2& tally, const Frequency& fi, const Frequency& fj,
                const CCCParams& params);

/// Eight CCC values indexed 4a+2b+c.
CCCValues3 ccc3(const TallyTable3& tally, const Frequency& fi, const Frequency& fj,
                const Frequency& fk, const CCCParams& params);

struct CCCResult2 {
  std::uint64_t i = 0;
  std::uint64_t j = 0;
  CCCValues2 values{};
};

struct CCCResult3 {
  std::uint64_t i = 0;
  std::uint64_t j = 0;
  std::uint64_t k = 0;
  CCCValues3 values{};
};

/// One cell of the X table: the value of X_{j,xi} for a V entry `v` and a
/// pivot entry `vj`. xi in {1,2,3} selects pivot class (0,0), (0,1), (1,1).
Element2 x_entry(Element2 v, Element2 vj, int xi, bool sparse = false);

/// Builds X_{j,xi} for the columns `cols` of V. Positions where the pivot
/// is not in class xi become the (1,0) null and are masked out; in sparse
/// mode missing V or pivot entries are masked as well.
MaskedTile x_construct(const PackedColumn& pivot, const PackedVectorSet& v, Range cols, int xi);

/// 3-way tally (slots: row vector, pivot, column vector) from the three
/// masked pair tallies of one (row, column) cell.
TallyTable3 reconstruct3(const TallyTable2& b1, const TallyTable2& b2, const TallyTable2& b3);

/// All 3-way tallies between the pivot and every (row, column) pair of the
/// given tiles: three x_construct + block_tally3_step passes. Result cell
/// r * cols.size() + c has slots (rows.begin + r, pivot, cols.begin + c).
std::vector<TallyTable3> pivot_block3(const PackedColumn& pivot, const PackedVectorSet& a,
                                      Range rows, const PackedVectorSet& b, Range cols,
                                      KernelStats* stats = nullptr);

struct UniqueCounts {
  std::uint64_t tables = 0;
  std::uint64_t values = 0;
};

UniqueCounts unique_counts(std::uint64_t num_vectors, int num_way);

}  // namespace ccc
