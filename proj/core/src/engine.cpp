#include "ccc/engine.hpp"

#include <map>
#include <set>
#include <string>

#include "ccc/error.hpp"

namespace ccc {

namespace {

// --- message packing -------------------------------------------------------

Message pack_tile(const PackedVectorSet& tile) {
  Message m;
  m.reserve(3 + tile.words().size());
  m.push_back(tile.num_vectors());
  m.push_back(tile.num_fields());
  m.push_back(tile.sparse() ? 1 : 0);
  m.insert(m.end(), tile.words().begin(), tile.words().end());
  return m;
}

PackedVectorSet unpack_tile(const Message& m) {
  if (m.size() < 3) throw Error("malformed tile message");
  return PackedVectorSet::from_words(m[0], m[1], m[2] != 0,
                                     std::vector<std::uint64_t>(m.begin() + 3, m.end()));
}

void append_counts(Message& m, const std::vector<AlleleCounts>& counts) {
  for (const auto& c : counts) {
    m.push_back(c.ones);
    m.push_back(c.valid);
  }
}

template <typename Table>
void append_tallies(Message& m, const std::vector<Table>& tallies) {
  for (const auto& t : tallies) m.insert(m.end(), t.t.begin(), t.t.end());
}

// Partial results of one field slab, summed element-wise across slabs.
struct Partial {
  Message words;

  void add(const Message& other) {
    if (other.size() != words.size()) throw Error("field reduction: partial size mismatch");
    for (std::size_t n = 0; n < words.size(); ++n) words[n] += other[n];
  }
};

void check_source(const TileSource& source, const RankGrid& grid) {
  if (source.num_vectors() != grid.n_v || source.num_fields() != grid.n_f)
    throw ValidationError("dataset dimensions do not match the rank grid");
}

}  // namespace

// ---------------------------------------------------------------------------
// Single-rank kernel engines

RunOutput2 kernel_run2(const PackedVectorSet& set, const CCCParams& params) {
  params.validate();
  RunOutput2 out;
  auto& rank = out.ranks.emplace_back();
  const Range all{0, set.num_vectors()};
  const TallyBlock block = block_tally2(set, all, set, all, BlockShape::strict_upper, &out.stats);
  const auto counts = allele_counts(set);
  for (std::size_t i = 0; i < set.num_vectors(); ++i)
    for (std::size_t j = i + 1; j < set.num_vectors(); ++j) {
      Record2 r{i, j, block.at(i, j), {}};
      r.ccc = ccc2(r.tally, frequency(counts[i], params.precision),
                   frequency(counts[j], params.precision), params);
      rank.checksum.add_pair(i, j, r.tally);
      rank.records.push_back(r);
      out.stats.comparisons += set.num_fields();
    }
  return out;
}

RunOutput3 kernel_run3(const PackedVectorSet& set, const CCCParams& params, std::size_t n_st,
                       std::optional<std::size_t> stage) {
  params.validate();
  if (n_st == 0 || n_st > set.num_vectors()) throw ValidationError("bad n_st for kernel run");
  RunOutput3 out;
  auto& rank = out.ranks.emplace_back();
  const auto counts = allele_counts(set);
  const std::size_t n_v = set.num_vectors();
  for (std::size_t j = 1; j + 1 < n_v; ++j) {
    if (stage && j % n_st != *stage) continue;
    const Range rows{0, j};
    const Range cols{j + 1, n_v};
    const auto tallies = pivot_block3(set.column(j), set, rows, set, cols, &out.stats);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < cols.size(); ++c) {
        Record3 rec{r, j, cols.begin + c, tallies[r * cols.size() + c], {}};
        rec.ccc = ccc3(rec.tally, frequency(counts[rec.i], params.precision),
                       frequency(counts[rec.j], params.precision),
                       frequency(counts[rec.k], params.precision), params);
        rank.checksum.add_triple(rec.i, rec.j, rec.k, rec.tally);
        rank.records.push_back(rec);
        out.stats.comparisons += set.num_fields();
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multi-rank 2-way

namespace {

struct PairSlot {
  std::uint64_t i, j;
  std::size_t count_i, count_j;  // offsets into the partial's count section
};

struct BlockWork2 {
  BlockJob2 job;
  std::vector<PairSlot> pairs;
  Partial partial;
};

struct RankState2 {
  PackedVectorSet own;
  std::vector<BlockWork2> blocks;
  std::vector<Record2> records;
  Checksum checksum;
  KernelStats stats;
};

}  // namespace

RunOutput2 run2(const TileSource& source, const RankGrid& grid, const BlockPlan2& plan,
                const CCCParams& params, const RunOptions& options) {
  params.validate();
  check_source(source, grid);
  if (plan.n_pv != grid.n_pv || plan.n_pr != grid.n_pr)
    throw ValidationError("plan was built for a different grid");
  if (options.phase && *options.phase >= plan.n_phases)
    throw ValidationError("phase selector out of range");

  const auto selected = [&](const BlockJob2& j) {
    return !options.phase || j.phase == *options.phase;
  };
  Comm comm(grid.num_ranks(), options.mode == ExecMode::threaded);
  std::vector<RankState2> state(grid.num_ranks());

  auto body = [&](std::size_t rank, std::size_t stage) {
    const RankCoord me = grid.coord_of(rank);
    RankState2& st = state[rank];
    const Range my_vectors = grid.vector_tile(me.vector);

    if (stage == 0) {
      st.own = source.read(my_vectors, grid.field_slab(me.field));
      for (std::size_t u = 0; u < grid.n_pv; ++u) {
        if (u == me.vector) continue;
        for (const auto& job : plan.jobs(u, me.replica))
          if (selected(job) && job.col_tile == me.vector)
            comm.send(rank, grid.rank_of({me.field, u, me.replica}), pack_tile(st.own));
      }
      return;
    }

    if (stage == 1) {
      const auto own_counts = allele_counts(st.own);
      for (const auto& job : plan.jobs(me.vector, me.replica)) {
        if (!selected(job)) continue;
        const bool diagonal = job.offset == 0;
        PackedVectorSet received;
        if (!diagonal)
          received = unpack_tile(comm.recv(rank, grid.rank_of({me.field, job.col_tile, me.replica})));
        const PackedVectorSet& cols_set = diagonal ? st.own : received;
        const Range cols_global = grid.vector_tile(job.col_tile);

        const TallyBlock block =
            block_tally2(st.own, {0, st.own.num_vectors()}, cols_set, {0, cols_set.num_vectors()},
                         diagonal ? BlockShape::strict_upper : BlockShape::full, &st.stats);

        BlockWork2 work;
        work.job = job;
        std::vector<TallyTable2> tallies;
        for (std::size_t r = 0; r < my_vectors.size(); ++r)
          for (std::size_t c = 0; c < cols_global.size(); ++c) {
            const std::uint64_t gi = my_vectors.begin + r;
            const std::uint64_t gj = cols_global.begin + c;
            if (diagonal && gi >= gj) continue;
            const std::size_t ci = r;
            const std::size_t cj = my_vectors.size() + c;
            if (gi < gj) {
              work.pairs.push_back({gi, gj, ci, cj});
              tallies.push_back(block.at(r, c));
            } else {
              work.pairs.push_back({gj, gi, cj, ci});
              tallies.push_back(block.at(r, c).transposed());
            }
          }
        append_tallies(work.partial.words, tallies);
        append_counts(work.partial.words, own_counts);
        append_counts(work.partial.words, allele_counts(cols_set));
        if (me.field != 0) {
          comm.send(rank, grid.rank_of({0, me.vector, me.replica}), std::move(work.partial.words));
          work.partial.words.clear();
        }
        st.blocks.push_back(std::move(work));
      }
      return;
    }

    // stage 2: field-axis reduction and emission
    if (me.field != 0) return;
    for (auto& work : st.blocks) {
      for (std::size_t f = 1; f < grid.n_pf; ++f)
        work.partial.add(comm.recv(rank, grid.rank_of({f, me.vector, me.replica})));
      const Message& w = work.partial.words;
      const std::size_t count_base = 4 * work.pairs.size();
      auto counts_at = [&](std::size_t slot) {
        return AlleleCounts{w[count_base + 2 * slot], w[count_base + 2 * slot + 1]};
      };
      for (std::size_t n = 0; n < work.pairs.size(); ++n) {
        const auto& p = work.pairs[n];
        Record2 rec;
        rec.i = p.i;
        rec.j = p.j;
        for (std::size_t c = 0; c < 4; ++c) rec.tally.t[c] = w[4 * n + c];
        rec.ccc = ccc2(rec.tally, frequency(counts_at(p.count_i), params.precision),
                       frequency(counts_at(p.count_j), params.precision), params);
        st.checksum.add_pair(rec.i, rec.j, rec.tally);
        st.records.push_back(rec);
        st.stats.comparisons += grid.n_f;
      }
    }
  };

  run_ranks(comm, 3, options.mode, body);

  RunOutput2 out;
  for (std::size_t r = 0; r < state.size(); ++r) {
    out.ranks.push_back({r, std::move(state[r].records), state[r].checksum});
    out.stats += state[r].stats;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multi-rank 3-way

namespace {

struct TripleSlot {
  std::uint64_t v[3];
};

struct RankState3 {
  std::map<std::size_t, PackedVectorSet> tiles;  // tile id -> field slab
  std::vector<TripleSlot> triples;
  Partial partial;
  std::vector<Record3> records;
  Checksum checksum;
  KernelStats stats;
};

std::set<std::size_t> tiles_needed(const BlockPlan3& plan, std::size_t r_v, std::size_t r_r) {
  std::set<std::size_t> need;
  for (const auto& job : plan.jobs(r_v, r_r))
    for (auto t : job.tiles)
      if (t != r_v) need.insert(t);
  return need;
}

}  // namespace

RunOutput3 run3(const TileSource& source, const RankGrid& grid, const BlockPlan3& plan,
                const CCCParams& params, const RunOptions& options) {
  params.validate();
  check_source(source, grid);
  if (plan.n_pv != grid.n_pv || plan.n_pr != grid.n_pr)
    throw ValidationError("plan was built for a different grid");
  if (options.stage && *options.stage >= plan.n_st)
    throw ValidationError("stage selector out of range");

  Comm comm(grid.num_ranks(), options.mode == ExecMode::threaded);
  std::vector<RankState3> state(grid.num_ranks());

  auto body = [&](std::size_t rank, std::size_t stage) {
    const RankCoord me = grid.coord_of(rank);
    RankState3& st = state[rank];
    const Range slab = grid.field_slab(me.field);

    if (stage == 0) {
      st.tiles[me.vector] = source.read(grid.vector_tile(me.vector), slab);
      for (std::size_t u = 0; u < grid.n_pv; ++u) {
        if (u == me.vector) continue;
        if (tiles_needed(plan, u, me.replica).count(me.vector))
          comm.send(rank, grid.rank_of({me.field, u, me.replica}), pack_tile(st.tiles[me.vector]));
      }
      return;
    }

    if (stage == 1) {
      for (auto t : tiles_needed(plan, me.vector, me.replica))
        st.tiles[t] = unpack_tile(comm.recv(rank, grid.rank_of({me.field, t, me.replica})));

      std::vector<TallyTable3> tallies;
      for (const auto& job : plan.jobs(me.vector, me.replica)) {
        for (const auto& w : pivot_work(grid, job, plan.n_st, options.stage)) {
          if (w.empty()) continue;
          const std::size_t row_tile = grid.tile_of_vector(w.rows.begin);
          const std::size_t col_tile = grid.tile_of_vector(w.cols.begin);
          const Range row_base = grid.vector_tile(row_tile);
          const Range col_base = grid.vector_tile(col_tile);
          const Range pivot_base = grid.vector_tile(me.vector);
          const PackedVectorSet& own = st.tiles.at(me.vector);
          const PackedVectorSet& a = st.tiles.at(row_tile);
          const PackedVectorSet& b = st.tiles.at(col_tile);
          const Range rows{w.rows.begin - row_base.begin, w.rows.end - row_base.begin};
          const Range cols{w.cols.begin - col_base.begin, w.cols.end - col_base.begin};
          const auto block =
              pivot_block3(own.column(w.pivot - pivot_base.begin), a, rows, b, cols, &st.stats);
          for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < cols.size(); ++c) {
              const std::size_t gr = w.rows.begin + r;
              const std::size_t gc = w.cols.begin + c;
              if (w.ordered && !(gr < gc)) continue;
              TripleSlot slot{};
              slot.v[w.slots[0]] = gr;
              slot.v[w.slots[1]] = w.pivot;
              slot.v[w.slots[2]] = gc;
              st.triples.push_back(slot);
              tallies.push_back(block[r * cols.size() + c].permuted(w.slots));
            }
        }
      }
      append_tallies(st.partial.words, tallies);
      for (const auto& [t, tile] : st.tiles) append_counts(st.partial.words, allele_counts(tile));
      if (me.field != 0) {
        comm.send(rank, grid.rank_of({0, me.vector, me.replica}), std::move(st.partial.words));
        st.partial.words.clear();
      }
      return;
    }

    if (me.field != 0) return;
    for (std::size_t f = 1; f < grid.n_pf; ++f)
      st.partial.add(comm.recv(rank, grid.rank_of({f, me.vector, me.replica})));
    const Message& w = st.partial.words;

    std::map<std::size_t, Frequency> freq;
    std::size_t base = 8 * st.triples.size();
    for (const auto& [t, tile] : st.tiles) {
      const Range vecs = grid.vector_tile(t);
      for (std::size_t n = 0; n < vecs.size(); ++n, base += 2)
        freq[vecs.begin + n] = frequency({w[base], w[base + 1]}, params.precision);
    }
    for (std::size_t n = 0; n < st.triples.size(); ++n) {
      const auto& s = st.triples[n];
      Record3 rec;
      rec.i = s.v[0];
      rec.j = s.v[1];
      rec.k = s.v[2];
      for (std::size_t c = 0; c < 8; ++c) rec.tally.t[c] = w[8 * n + c];
      rec.ccc = ccc3(rec.tally, freq.at(rec.i), freq.at(rec.j), freq.at(rec.k), params);
      st.checksum.add_triple(rec.i, rec.j, rec.k, rec.tally);
      st.records.push_back(rec);
      st.stats.comparisons += grid.n_f;
    }
  };

  run_ranks(comm, 3, options.mode, body);

  RunOutput3 out;
  for (std::size_t r = 0; r < state.size(); ++r) {
    out.ranks.push_back({r, std::move(state[r].records), state[r].checksum});
    out.stats += state[r].stats;
  }
  return out;
}

}  // namespace ccc
