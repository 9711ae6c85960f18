#include "ccc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ccc/dataset_io.hpp"
#include "ccc/decomp.hpp"
#include "ccc/error.hpp"

namespace ccc {

namespace {

std::array<std::uint8_t, 2> bits(Element2 e) { return {e.first, e.second}; }

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw ValidationError("oracle: vector lengths differ");
}

Rational freq(const AlleleCounts& c, int allele) {
  if (c.valid == 0) throw DomainError("allele frequency undefined: no valid elements");
  const Rational ones(c.ones, 2 * c.valid);
  return allele == 1 ? ones : Rational(1) - ones;
}

double rel_error(double approx, const Rational& exact) {
  const double e = exact.convert_to<double>();
  if (e == 0.0) return std::abs(approx);
  return std::abs(approx - e) / std::abs(e);
}

}  // namespace

TallyTable2 oracle_tally2(const std::vector<Element2>& vi, const std::vector<Element2>& vj,
                          bool sparse) {
  check_lengths(vi.size(), vj.size());
  TallyTable2 t;
  for (std::size_t q = 0; q < vi.size(); ++q) {
    if (sparse && (vi[q].is_null() || vj[q].is_null())) continue;
    for (auto a : bits(vi[q]))
      for (auto b : bits(vj[q])) ++t.t[2 * a + b];
  }
  return t;
}

TallyTable3 oracle_tally3(const std::vector<Element2>& vi, const std::vector<Element2>& vj,
                          const std::vector<Element2>& vk, bool sparse) {
  check_lengths(vi.size(), vj.size());
  check_lengths(vi.size(), vk.size());
  TallyTable3 t;
  for (std::size_t q = 0; q < vi.size(); ++q) {
    if (sparse && (vi[q].is_null() || vj[q].is_null() || vk[q].is_null())) continue;
    for (auto a : bits(vi[q]))
      for (auto b : bits(vj[q]))
        for (auto c : bits(vk[q])) ++t.t[4 * a + 2 * b + c];
  }
  return t;
}

AlleleCounts oracle_counts(const std::vector<Element2>& v, bool sparse) {
  AlleleCounts c;
  for (const auto& e : v) {
    if (sparse && e.is_null()) continue;
    ++c.valid;
    c.ones += static_cast<std::uint64_t>(e.ones());
  }
  return c;
}

Rational rational_gamma(double gamma) {
  if (gamma == 2.0 / 3.0) return Rational(2, 3);
  return Rational(gamma);
}

std::array<Rational, 4> exact_ccc2(const TallyTable2& tally, const AlleleCounts& ci,
                                   const AlleleCounts& cj, const Rational& gamma) {
  const std::uint64_t total = tally.sum();
  if (total == 0) throw DomainError("ccc2: no valid element pairs");
  std::array<Rational, 4> out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      out[2 * a + b] = Rational(tally.at(a, b), total) * (1 - gamma * freq(ci, a)) *
                       (1 - gamma * freq(cj, b));
  return out;
}

std::array<Rational, 8> exact_ccc3(const TallyTable3& tally, const AlleleCounts& ci,
                                   const AlleleCounts& cj, const AlleleCounts& ck,
                                   const Rational& gamma) {
  const std::uint64_t total = tally.sum();
  if (total == 0) throw DomainError("ccc3: no valid element triples");
  std::array<Rational, 8> out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        out[4 * a + 2 * b + c] = Rational(tally.at(a, b, c), total) * (1 - gamma * freq(ci, a)) *
                                 (1 - gamma * freq(cj, b)) * (1 - gamma * freq(ck, c));
  return out;
}

RunOutput2 reference_run2(const ElementMatrix& data, const CCCParams& params) {
  params.validate();
  const Rational gamma = rational_gamma(params.gamma);
  std::vector<AlleleCounts> counts;
  for (const auto& v : data) counts.push_back(oracle_counts(v, params.sparse));
  RunOutput2 out;
  auto& rank = out.ranks.emplace_back();
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = i + 1; j < data.size(); ++j) {
      Record2 r;
      r.i = i;
      r.j = j;
      r.tally = oracle_tally2(data[i], data[j], params.sparse);
      const auto exact = exact_ccc2(r.tally, counts[i], counts[j], gamma);
      for (std::size_t n = 0; n < 4; ++n) r.ccc[n] = exact[n].convert_to<double>();
      rank.checksum.add_pair(i, j, r.tally);
      rank.records.push_back(r);
      out.stats.comparisons += data[i].size();
    }
  return out;
}

RunOutput3 reference_run3(const ElementMatrix& data, const CCCParams& params) {
  params.validate();
  const Rational gamma = rational_gamma(params.gamma);
  std::vector<AlleleCounts> counts;
  for (const auto& v : data) counts.push_back(oracle_counts(v, params.sparse));
  RunOutput3 out;
  auto& rank = out.ranks.emplace_back();
  for (std::size_t i = 0; i < data.size(); ++i)
    for (std::size_t j = i + 1; j < data.size(); ++j)
      for (std::size_t k = j + 1; k < data.size(); ++k) {
        Record3 r;
        r.i = i;
        r.j = j;
        r.k = k;
        r.tally = oracle_tally3(data[i], data[j], data[k], params.sparse);
        const auto exact = exact_ccc3(r.tally, counts[i], counts[j], counts[k], gamma);
        for (std::size_t n = 0; n < 8; ++n) r.ccc[n] = exact[n].convert_to<double>();
        rank.checksum.add_triple(i, j, k, r.tally);
        rank.records.push_back(r);
        out.stats.comparisons += data[i].size();
      }
  return out;
}

std::string GridSpec::label() const {
  return "grid " + std::to_string(n_pf) + "x" + std::to_string(n_pv) + "x" +
         std::to_string(n_pr) + " phases=" + std::to_string(n_phases) +
         " stages=" + std::to_string(n_st);
}

namespace {

template <typename Record>
void merge_into(RunOutput<Record>& into, RunOutput<Record>&& part) {
  for (auto& r : part.ranks) into.ranks.push_back(std::move(r));
  into.stats += part.stats;
}

std::vector<std::uint64_t> key_vector(const Record2& r) { return {r.i, r.j}; }
std::vector<std::uint64_t> key_vector(const Record3& r) { return {r.i, r.j, r.k}; }

template <typename Record, typename ExactFn>
VariantReport compare(std::string name, const RunOutput<Record>& variant,
                      const RunOutput<Record>& reference, ExactFn&& exact_of) {
  VariantReport rep;
  rep.name = std::move(name);
  rep.checksum = variant.checksum();
  const auto got = variant.sorted_records();
  const auto want = reference.sorted_records();
  std::size_t a = 0;
  std::size_t b = 0;
  while (a < got.size() || b < want.size()) {
    if (a < got.size() && b < want.size() && got[a].key() == want[b].key()) {
      if (!(got[a].tally == want[b].tally)) {
        if (!rep.first_mismatch) rep.first_mismatch = key_vector(got[a]);
      } else {
        const auto exact = exact_of(want[b]);
        for (std::size_t n = 0; n < exact.size(); ++n)
          rep.max_rel_error = std::max(rep.max_rel_error, rel_error(got[a].ccc[n], exact[n]));
      }
      ++a;
      ++b;
    } else if (b >= want.size() || (a < got.size() && got[a].key() < want[b].key())) {
      if (!rep.first_mismatch) rep.first_mismatch = key_vector(got[a]);
      ++a;
    } else {
      if (!rep.first_mismatch) rep.first_mismatch = key_vector(want[b]);
      ++b;
    }
  }
  rep.matches = !rep.first_mismatch && rep.checksum == reference.checksum();
  return rep;
}

}  // namespace

HarnessReport equivalence_harness(const PackedVectorSet& data, const HarnessOptions& options) {
  CCCParams params = options.params;
  params.sparse = data.sparse();
  params.validate();

  PackedVectorSet tested = data;
  if (options.corrupt) {
    const auto& c = *options.corrupt;
    if (c.vector >= data.num_vectors() || c.field >= data.num_fields())
      throw ValidationError("corruption target out of range");
    Element2 e = tested.element(c.vector, c.field);
    e.first ^= 1;
    tested.set_element(c.vector, c.field, e);
  }

  const ElementMatrix decoded = decode(data);
  std::vector<AlleleCounts> counts;
  for (const auto& v : decoded) counts.push_back(oracle_counts(v, params.sparse));
  const Rational gamma = rational_gamma(params.gamma);
  const InMemorySource source(tested);

  HarnessReport report;
  if (params.num_way == 2) {
    const auto ref = reference_run2(decoded, params);
    report.reference = ref.checksum();
    auto exact_of = [&](const Record2& r) {
      return exact_ccc2(r.tally, counts[r.i], counts[r.j], gamma);
    };
    report.variants.push_back(compare("kernel", kernel_run2(tested, params), ref, exact_of));
    for (const auto& g : options.grids) {
      const RankGrid grid = make_grid(data.num_vectors(), data.num_fields(), g.n_pf, g.n_pv, g.n_pr);
      const BlockPlan2 plan = plan2(grid, g.n_phases);
      RunOutput2 merged;
      for (std::size_t p = 0; p < g.n_phases; ++p)
        merge_into(merged, run2(source, grid, plan, params, {p, std::nullopt, options.mode}));
      report.variants.push_back(compare(g.label(), merged, ref, exact_of));
    }
  } else {
    const auto ref = reference_run3(decoded, params);
    report.reference = ref.checksum();
    auto exact_of = [&](const Record3& r) {
      return exact_ccc3(r.tally, counts[r.i], counts[r.j], counts[r.k], gamma);
    };
    report.variants.push_back(compare("kernel", kernel_run3(tested, params), ref, exact_of));
    for (const auto& g : options.grids) {
      const RankGrid grid = make_grid(data.num_vectors(), data.num_fields(), g.n_pf, g.n_pv, g.n_pr);
      const BlockPlan3 plan = plan3(grid, g.n_st);
      RunOutput3 merged;
      for (std::size_t s = 0; s < g.n_st; ++s)
        merge_into(merged, run3(source, grid, plan, params, {std::nullopt, s, options.mode}));
      report.variants.push_back(compare(g.label(), merged, ref, exact_of));
    }
  }
  report.ok = std::all_of(report.variants.begin(), report.variants.end(),
                          [](const VariantReport& v) { return v.matches; });
  return report;
}

}  // namespace ccc
