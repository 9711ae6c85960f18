#include "ccc/decomp.hpp"

#include <algorithm>
#include <string>

#include "ccc/error.hpp"

namespace ccc {

Range RankGrid::vector_tile(std::size_t r_v) const {
  const std::size_t lo = std::min(n_v, r_v * n_vp);
  return {lo, std::min(n_v, lo + n_vp)};
}

Range RankGrid::field_slab(std::size_t r_f) const {
  const std::size_t lo = std::min(n_f, r_f * n_fp);
  return {lo, std::min(n_f, lo + n_fp)};
}

RankGrid make_grid(std::size_t n_v, std::size_t n_f, std::size_t n_pf, std::size_t n_pv,
                   std::size_t n_pr) {
  if (n_v == 0 || n_f == 0) throw ValidationError("grid: n_v and n_f must be >= 1");
  if (n_pf == 0 || n_pv == 0 || n_pr == 0)
    throw ValidationError("grid: rank counts must be >= 1");
  if (n_pv > n_v)
    throw ValidationError("grid: n_pv = " + std::to_string(n_pv) + " exceeds n_v = " +
                          std::to_string(n_v));
  if (n_pf > n_f)
    throw ValidationError("grid: n_pf = " + std::to_string(n_pf) + " exceeds n_f = " +
                          std::to_string(n_f));
  RankGrid g;
  g.n_v = n_v;
  g.n_f = n_f;
  g.n_pf = n_pf;
  g.n_pv = n_pv;
  g.n_pr = n_pr;
  g.n_fp = (n_f + n_pf - 1) / n_pf;
  g.n_vp = (n_v + n_pv - 1) / n_pv;
  return g;
}

// ---------------------------------------------------------------------------

std::size_t BlockPlan2::load() const {
  std::size_t m = 0;
  for (const auto& w : workers) m = std::max(m, w.size());
  return m;
}

std::size_t BlockPlan2::total_blocks() const {
  std::size_t n = 0;
  for (const auto& w : workers) n += w.size();
  return n;
}

BlockPlan2 plan2(const RankGrid& grid, std::size_t n_phases) {
  if (n_phases == 0) throw ValidationError("n_phases must be >= 1");
  BlockPlan2 plan;
  plan.n_pv = grid.n_pv;
  plan.n_pr = grid.n_pr;
  plan.n_phases = n_phases;
  plan.workers.resize(grid.n_pv * grid.n_pr);
  const std::size_t n_pv = grid.n_pv;
  for (std::size_t u = 0; u < n_pv; ++u) {
    std::vector<std::size_t> offsets;
    for (std::size_t d = 0; d <= n_pv / 2; ++d) {
      if (n_pv % 2 == 0 && d == n_pv / 2 && d != 0 && u >= n_pv / 2) continue;
      offsets.push_back(d);
    }
    for (std::size_t n = 0; n < offsets.size(); ++n) {
      auto& worker = plan.workers[u * grid.n_pr + n % grid.n_pr];
      BlockJob2 job;
      job.row_tile = u;
      job.col_tile = (u + offsets[n]) % n_pv;
      job.offset = offsets[n];
      job.phase = worker.size() % n_phases;
      worker.push_back(job);
    }
  }
  return plan;
}

std::size_t n_pr_for_load(std::size_t n_pv, std::size_t load) {
  if (load == 0) throw ValidationError("load must be >= 1");
  const std::size_t blocks = (n_pv + 1) / 2 + 1;  // ceil(n_pv / 2 + 1)
  return (blocks + load - 1) / load;
}

// ---------------------------------------------------------------------------

std::size_t BlockPlan3::load() const {
  std::size_t m = 0;
  for (const auto& w : workers) m = std::max(m, w.size());
  return m;
}

std::size_t BlockPlan3::total_jobs() const {
  std::size_t n = 0;
  for (const auto& w : workers) n += w.size();
  return n;
}

BlockPlan3 plan3(const RankGrid& grid, std::size_t n_st) {
  if (n_st == 0) throw ValidationError("n_st must be >= 1");
  if (n_st > grid.n_vp)
    throw ValidationError("n_st = " + std::to_string(n_st) + " exceeds the " +
                          std::to_string(grid.n_vp) + " pivot steps per tile");
  BlockPlan3 plan;
  plan.n_pv = grid.n_pv;
  plan.n_pr = grid.n_pr;
  plan.n_st = n_st;
  plan.workers.resize(grid.n_pv * grid.n_pr);

  const std::size_t n_pv = grid.n_pv;
  std::vector<std::size_t> owned(n_pv, 0);
  for (std::size_t a = 0; a < n_pv; ++a)
    for (std::size_t b = a; b < n_pv; ++b)
      for (std::size_t c = b; c < n_pv; ++c) {
        const std::array<std::size_t, 3> tiles{a, b, c};
        std::vector<std::size_t> candidates{a};
        if (b != a) candidates.push_back(b);
        if (c != b) candidates.push_back(c);
        // Least-loaded candidate; ties rotate with the job so no tile is
        // systematically favoured.
        const std::size_t start = (a + b + c) % candidates.size();
        std::size_t owner = candidates[start];
        for (std::size_t n = 1; n < candidates.size(); ++n) {
          const std::size_t cand = candidates[(start + n) % candidates.size()];
          if (owned[cand] < owned[owner]) owner = cand;
        }
        ++owned[owner];

        TileJob3 job;
        job.tiles = tiles;
        const auto count = static_cast<std::size_t>(std::count(tiles.begin(), tiles.end(), owner));
        const auto first = static_cast<std::size_t>(std::find(tiles.begin(), tiles.end(), owner) -
                                                    tiles.begin());
        job.pivot_slot = static_cast<int>(count == 1 ? first : first + 1);
        const std::size_t n_jobs_owner = owned[owner] - 1;
        plan.workers[owner * grid.n_pr + n_jobs_owner % grid.n_pr].push_back(job);
      }
  return plan;
}

std::vector<PivotWork> pivot_work(const RankGrid& grid, const TileJob3& job, std::size_t n_st,
                                  std::optional<std::size_t> stage) {
  const int pi = job.pivot_slot;
  const int o1 = pi == 0 ? 1 : 0;
  const int o2 = pi == 2 ? 1 : 2;
  const auto tile = [&](int s) { return job.tiles[static_cast<std::size_t>(s)]; };
  const Range pivots = grid.vector_tile(tile(pi));

  auto range_for = [&](int slot, std::size_t p) {
    Range r = grid.vector_tile(tile(slot));
    if (tile(slot) == tile(pi)) {
      if (slot < pi)
        r.end = p;
      else
        r.begin = p + 1;
    }
    return r;
  };

  std::vector<PivotWork> out;
  for (std::size_t p = pivots.begin; p < pivots.end; ++p) {
    const std::size_t s = (p - pivots.begin) % n_st;
    if (stage && *stage != s) continue;
    PivotWork w;
    w.pivot = p;
    w.rows = range_for(o1, p);
    w.cols = range_for(o2, p);
    w.ordered = tile(o1) == tile(o2) && tile(o1) != tile(pi);
    w.slots = {o1, pi, o2};
    w.stage = s;
    out.push_back(w);
  }
  return out;
}

std::size_t job_steps(const RankGrid& grid, const TileJob3& job, std::size_t n_st,
                      std::optional<std::size_t> stage) {
  std::size_t n = 0;
  for (const auto& w : pivot_work(grid, job, n_st, stage))
    if (!w.empty()) n += 3;
  return n;
}

std::vector<std::array<std::size_t, 2>> planned_pairs(const RankGrid& grid, const BlockPlan2& plan,
                                                      std::optional<std::size_t> phase) {
  std::vector<std::array<std::size_t, 2>> out;
  for (const auto& worker : plan.workers)
    for (const auto& job : worker) {
      if (phase && job.phase != *phase) continue;
      for_each_pair(grid, job, [&](std::size_t i, std::size_t j) { out.push_back({i, j}); });
    }
  return out;
}

std::vector<std::array<std::size_t, 3>> planned_triples(const RankGrid& grid,
                                                        const BlockPlan3& plan,
                                                        std::optional<std::size_t> stage) {
  std::vector<std::array<std::size_t, 3>> out;
  for (const auto& worker : plan.workers)
    for (const auto& job : worker)
      for (const auto& w : pivot_work(grid, job, plan.n_st, stage))
        for_each_triple(w, [&](std::size_t i, std::size_t j, std::size_t k) {
          out.push_back({i, j, k});
        });
  return out;
}

}  // namespace ccc
