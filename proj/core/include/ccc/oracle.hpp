#pragma once

// Reference implementations: literal enumeration over decoded elements,
// exact rational CCC values, and a harness that runs every engine variant on
// one dataset and compares checksums.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ccc/bitgrid.hpp"
#include "ccc/checksum.hpp"
#include "ccc/comm.hpp"
#include "ccc/engine.hpp"
#include "ccc/metrics.hpp"
#include "ccc/tally_table.hpp"

namespace ccc {

using Rational = boost::multiprecision::cpp_rational;

/// Tallies by enumerating all pairings (triples) of the element bits at
/// every position. In sparse mode positions holding a missing entry in any
/// participating vector are skipped.
TallyTable2 oracle_tally2(const std::vector<Element2>& vi, const std::vector<Element2>& vj,
                          bool sparse = false);
TallyTable3 oracle_tally3(const std::vector<Element2>& vi, const std::vector<Element2>& vj,
                          const std::vector<Element2>& vk, bool sparse = false);
AlleleCounts oracle_counts(const std::vector<Element2>& v, bool sparse = false);

/// 2/3 when gamma is the double nearest 2/3, otherwise the exact binary value.
Rational rational_gamma(double gamma);

std::array<Rational, 4> exact_ccc2(const TallyTable2& tally, const AlleleCounts& ci,
                                   const AlleleCounts& cj, const Rational& gamma);
std::array<Rational, 8> exact_ccc3(const TallyTable3& tally, const AlleleCounts& ci,
                                   const AlleleCounts& cj, const AlleleCounts& ck,
                                   const Rational& gamma);

/// Full reference runs over decoded data. CCC values are the exact
/// rationals rounded to double.
RunOutput2 reference_run2(const ElementMatrix& data, const CCCParams& params);
RunOutput3 reference_run3(const ElementMatrix& data, const CCCParams& params);

struct GridSpec {
  std::size_t n_pf = 1;
  std::size_t n_pv = 1;
  std::size_t n_pr = 1;
  std::size_t n_phases = 1;
  std::size_t n_st = 1;

  std::string label() const;
};

/// Flips component 0 of one element in the data handed to the non-reference
/// variants.
struct Corruption {
  std::size_t vector = 0;
  std::size_t field = 0;
};

struct HarnessOptions {
  CCCParams params;
  std::vector<GridSpec> grids;
  std::optional<Corruption> corrupt;
  ExecMode mode = ExecMode::threaded;
};

struct VariantReport {
  std::string name;
  Checksum checksum;
  bool matches = false;
  /// Indices of the first record (in index order) whose tallies differ.
  std::optional<std::vector<std::uint64_t>> first_mismatch;
  /// Largest relative CCC error against the exact values.
  double max_rel_error = 0.0;
};

struct HarnessReport {
  bool ok = false;
  Checksum reference;
  std::vector<VariantReport> variants;
};

/// Runs the reference, the single-rank kernel and one multi-rank run per
/// grid (each phase or stage separately, then merged).
HarnessReport equivalence_harness(const PackedVectorSet& data, const HarnessOptions& options);

}  // namespace ccc
