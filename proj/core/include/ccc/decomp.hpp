#pragma once

// Rank grid and work plans for the multi-rank engines.
//
// Ranks form an n_pf x n_pv x n_pr grid. The field axis splits vector
// length (tallies are sum-reduced along it), the vector axis splits the
// vector set into tiles, and the replica axis splits each vector rank's
// result blocks among workers.
//
// 2-way: tile u computes the blocks (u, u + d mod n_pv) for offsets
// d = 0 .. floor(n_pv / 2); for even n_pv the antipodal offset n_pv/2 is
// taken only by u < n_pv/2, so every unordered tile pair appears once.
//
// 3-way: every multiset {t1 <= t2 <= t3} of tiles is one job, owned by one
// of its distinct tiles. The owner's vectors act as pivots; the other two
// slots are swept as a 2-D block per pivot. Stages split a job's pivots
// round-robin.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ccc/bitgrid.hpp"

namespace ccc {

struct RankCoord {
  std::size_t field = 0;
  std::size_t vector = 0;
  std::size_t replica = 0;
  friend bool operator==(const RankCoord&, const RankCoord&) = default;
};

struct RankGrid {
  std::size_t n_v = 0;
  std::size_t n_f = 0;
  std::size_t n_pf = 1;
  std::size_t n_pv = 1;
  std::size_t n_pr = 1;
  std::size_t n_fp = 0;  // ceil(n_f / n_pf)
  std::size_t n_vp = 0;  // ceil(n_v / n_pv)

  std::size_t num_ranks() const { return n_pf * n_pv * n_pr; }
  std::size_t rank_of(RankCoord c) const { return (c.replica * n_pv + c.vector) * n_pf + c.field; }
  RankCoord coord_of(std::size_t rank) const {
    return {rank % n_pf, (rank / n_pf) % n_pv, rank / (n_pf * n_pv)};
  }
  /// Tiles past the end of the data are empty.
  Range vector_tile(std::size_t r_v) const;
  Range field_slab(std::size_t r_f) const;
  std::size_t tile_of_vector(std::size_t i) const { return i / n_vp; }
};

/// Throws ValidationError for zero counts or more ranks on an axis than
/// indices along it.
RankGrid make_grid(std::size_t n_v, std::size_t n_f, std::size_t n_pf, std::size_t n_pv,
                   std::size_t n_pr);

// ---------------------------------------------------------------------------
// 2-way

struct BlockJob2 {
  std::size_t row_tile = 0;
  std::size_t col_tile = 0;
  std::size_t offset = 0;
  std::size_t phase = 0;
  friend bool operator==(const BlockJob2&, const BlockJob2&) = default;
};

struct BlockPlan2 {
  std::size_t n_pv = 1;
  std::size_t n_pr = 1;
  std::size_t n_phases = 1;
  /// Indexed by r_v * n_pr + r_r.
  std::vector<std::vector<BlockJob2>> workers;

  const std::vector<BlockJob2>& jobs(std::size_t r_v, std::size_t r_r) const {
    return workers[r_v * n_pr + r_r];
  }
  /// Blocks per worker (the largest, when uneven).
  std::size_t load() const;
  std::size_t total_blocks() const;
};

/// Offsets of tile u, partitioned round-robin over the n_pr workers; each
/// worker's blocks are numbered into phases round-robin.
BlockPlan2 plan2(const RankGrid& grid, std::size_t n_phases = 1);

/// Replica count that gives each worker at most `load` blocks:
/// ceil(ceil(n_pv/2 + 1) / load).
std::size_t n_pr_for_load(std::size_t n_pv, std::size_t load);

/// Calls fn(i, j) with i < j for every unique vector pair in the block.
template <typename Fn>
void for_each_pair(const RankGrid& grid, const BlockJob2& job, Fn&& fn) {
  const Range rows = grid.vector_tile(job.row_tile);
  const Range cols = grid.vector_tile(job.col_tile);
  for (std::size_t i = rows.begin; i < rows.end; ++i)
    for (std::size_t j = cols.begin; j < cols.end; ++j) {
      if (job.row_tile == job.col_tile) {
        if (i < j) fn(i, j);
      } else {
        fn(i < j ? i : j, i < j ? j : i);
      }
    }
}

// ---------------------------------------------------------------------------
// 3-way

struct TileJob3 {
  std::array<std::size_t, 3> tiles{};  // sorted
  int pivot_slot = 0;                  // slot whose tile is the owner
  std::size_t owner() const { return tiles[static_cast<std::size_t>(pivot_slot)]; }
  friend bool operator==(const TileJob3&, const TileJob3&) = default;
};

struct BlockPlan3 {
  std::size_t n_pv = 1;
  std::size_t n_pr = 1;
  std::size_t n_st = 1;
  /// Indexed by r_v * n_pr + r_r.
  std::vector<std::vector<TileJob3>> workers;

  const std::vector<TileJob3>& jobs(std::size_t r_v, std::size_t r_r) const {
    return workers[r_v * n_pr + r_r];
  }
  std::size_t load() const;
  std::size_t total_jobs() const;
};

/// Throws ValidationError when n_st is 0 or exceeds the tile size n_vp.
BlockPlan3 plan3(const RankGrid& grid, std::size_t n_st = 1);

/// One pivot's share of a job: 3-way tallies of (row, pivot, col) for rows x
/// cols, keeping only row < col when `ordered` is set. `slots` maps (row,
/// pivot, col) onto the canonical i < j < k slots.
struct PivotWork {
  std::size_t pivot = 0;
  Range rows;
  Range cols;
  bool ordered = false;
  std::array<int, 3> slots{};
  std::size_t stage = 0;

  bool empty() const { return rows.empty() || cols.empty(); }
};

/// Pivot work items of a job, optionally restricted to one stage.
std::vector<PivotWork> pivot_work(const RankGrid& grid, const TileJob3& job, std::size_t n_st,
                                  std::optional<std::size_t> stage = std::nullopt);

/// Masked block steps a job runs for a stage (three per non-empty pivot).
std::size_t job_steps(const RankGrid& grid, const TileJob3& job, std::size_t n_st,
                      std::optional<std::size_t> stage = std::nullopt);

/// Calls fn(i, j, k), i < j < k, for every triple a pivot item covers.
template <typename Fn>
void for_each_triple(const PivotWork& w, Fn&& fn) {
  for (std::size_t r = w.rows.begin; r < w.rows.end; ++r)
    for (std::size_t c = w.cols.begin; c < w.cols.end; ++c) {
      if (w.ordered && !(r < c)) continue;
      std::array<std::size_t, 3> v{};
      v[static_cast<std::size_t>(w.slots[0])] = r;
      v[static_cast<std::size_t>(w.slots[1])] = w.pivot;
      v[static_cast<std::size_t>(w.slots[2])] = c;
      fn(v[0], v[1], v[2]);
    }
}

/// Enumerations of emitted indices (no data involved); used to audit plans.
std::vector<std::array<std::size_t, 2>> planned_pairs(const RankGrid& grid, const BlockPlan2& plan,
                                                      std::optional<std::size_t> phase = {});
std::vector<std::array<std::size_t, 3>> planned_triples(const RankGrid& grid,
                                                        const BlockPlan3& plan,
                                                        std::optional<std::size_t> stage = {});

}  // namespace ccc
