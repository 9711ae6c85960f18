#pragma once

// Metric engines: the single-rank kernel engines and the multi-rank engines
// that execute a BlockPlan2 / BlockPlan3 over simulated ranks.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "ccc/bitgrid.hpp"
#include "ccc/checksum.hpp"
#include "ccc/comm.hpp"
#include "ccc/dataset_io.hpp"
#include "ccc/decomp.hpp"
#include "ccc/metrics.hpp"
#include "ccc/tally.hpp"

namespace ccc {

struct Record2 {
  std::uint64_t i = 0;
  std::uint64_t j = 0;
  TallyTable2 tally;
  CCCValues2 ccc{};

  std::array<std::uint64_t, 2> key() const { return {i, j}; }
  double max_value() const { return *std::max_element(ccc.begin(), ccc.end()); }
};

struct Record3 {
  std::uint64_t i = 0;
  std::uint64_t j = 0;
  std::uint64_t k = 0;
  TallyTable3 tally;
  CCCValues3 ccc{};

  std::array<std::uint64_t, 3> key() const { return {i, j, k}; }
  double max_value() const { return *std::max_element(ccc.begin(), ccc.end()); }
};

inline void add_to_checksum(Checksum& c, const Record2& r) { c.add_pair(r.i, r.j, r.tally); }
inline void add_to_checksum(Checksum& c, const Record3& r) { c.add_triple(r.i, r.j, r.k, r.tally); }

template <typename Record>
struct RankOutput {
  std::size_t rank = 0;
  std::vector<Record> records;
  /// Over every record this rank computed.
  Checksum checksum;
};

template <typename Record>
struct RunOutput {
  std::vector<RankOutput<Record>> ranks;
  KernelStats stats;

  Checksum checksum() const {
    Checksum c;
    for (const auto& r : ranks) c += r.checksum;
    return c;
  }
  std::size_t record_count() const {
    std::size_t n = 0;
    for (const auto& r : ranks) n += r.records.size();
    return n;
  }
  /// All records ordered by index tuple.
  std::vector<Record> sorted_records() const {
    std::vector<Record> all;
    for (const auto& r : ranks) all.insert(all.end(), r.records.begin(), r.records.end());
    std::sort(all.begin(), all.end(),
              [](const Record& a, const Record& b) { return a.key() < b.key(); });
    return all;
  }
};

using RunOutput2 = RunOutput<Record2>;
using RunOutput3 = RunOutput<Record3>;

struct RunOptions {
  /// Compute only this 2-way phase / 3-way stage; all when unset.
  std::optional<std::size_t> phase;
  std::optional<std::size_t> stage;
  ExecMode mode = ExecMode::threaded;
};

/// Whole dataset as one block, upper triangle only.
RunOutput2 kernel_run2(const PackedVectorSet& set, const CCCParams& params);

/// Every vector as pivot against the vectors before and after it. Pivots
/// are staged by index mod n_st.
RunOutput3 kernel_run3(const PackedVectorSet& set, const CCCParams& params, std::size_t n_st = 1,
                       std::optional<std::size_t> stage = std::nullopt);

/// Multi-rank 2-way run: tiles circulate to the ranks whose blocks need
/// them, block tallies are sum-reduced along the field axis, and the
/// field-rank-0 member of each (r_v, r_r) group emits records.
RunOutput2 run2(const TileSource& source, const RankGrid& grid, const BlockPlan2& plan,
                const CCCParams& params, const RunOptions& options = {});

RunOutput3 run3(const TileSource& source, const RankGrid& grid, const BlockPlan3& plan,
                const CCCParams& params, const RunOptions& options = {});

}  // namespace ccc
