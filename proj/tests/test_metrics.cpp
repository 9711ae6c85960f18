#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ccc/error.hpp"
#include "ccc/metrics.hpp"
#include "ccc/oracle.hpp"
#include "test_support.hpp"

using namespace ccc;
namespace ts = testing_support;

namespace {

double rel(double got, double want) {
  return want == 0 ? std::abs(got) : std::abs(got - want) / std::abs(want);
}

const Element2 k00{0, 0}, k01{0, 1}, k11{1, 1}, kNA{1, 0};

}  // namespace

TEST(CCCParams, Validate) {
  EXPECT_NO_THROW(CCCParams{}.validate());
  EXPECT_THROW((CCCParams{1.5, false, 2, Precision::f64}.validate()), ValidationError);
  EXPECT_THROW((CCCParams{-0.1, false, 2, Precision::f64}.validate()), ValidationError);
  EXPECT_THROW((CCCParams{0.5, false, 4, Precision::f64}.validate()), ValidationError);
}

TEST(Frequency, AllZeroZero) {
  const auto s = encode({ts::uniform_vector(10, k00)}, false);
  const auto fv = allele_frequencies(s, Precision::f64);
  EXPECT_EQ(fv.f[0][0], 1.0);
  EXPECT_EQ(fv.f[0][1], 0.0);
}

TEST(Frequency, TwoElementExample) {
  const auto s = encode({{k01, k11}}, false);
  const auto f = frequency(allele_counts(s)[0], Precision::f64);
  EXPECT_EQ(f[1], 0.75);
  EXPECT_EQ(f[0], 0.25);
}

TEST(Frequency, SumsToOneExactly) {
  const auto s = generate_random(20, 333, 4);
  const auto counts = allele_counts(s);
  const auto m = decode(s);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(counts[i], oracle_counts(m[i]));
    const Rational f1(counts[i].ones, 2 * counts[i].valid);
    const Rational f0(2 * counts[i].valid - counts[i].ones, 2 * counts[i].valid);
    EXPECT_EQ(f0 + f1, Rational(1));
    const auto f = frequency(counts[i], Precision::f64);
    EXPECT_EQ(f[1], f1.convert_to<double>());
  }
}

TEST(Frequency, SparseCountsOnlyValidEntries) {
  const auto s = encode({{k11, kNA, k01, kNA}, ts::uniform_vector(4, kNA)}, true);
  const auto c = allele_counts(s);
  EXPECT_EQ(c[0], (AlleleCounts{3, 2}));
  EXPECT_EQ(c[1], (AlleleCounts{0, 0}));
  EXPECT_THROW(frequency(c[1], Precision::f64), DomainError);
  const auto fv = allele_frequencies(s, Precision::f64);
  EXPECT_TRUE(fv.defined[0]);
  EXPECT_FALSE(fv.defined[1]);
  EXPECT_EQ(fv.f[0][1], 0.75);
}

TEST(CCC2, AllZeroZeroGivesOneNinth) {
  const TallyTable2 t{{40, 0, 0, 0}};
  const Frequency f{1.0, 0.0};
  const auto v = ccc2(t, f, f, CCCParams{});
  EXPECT_NEAR(v[0], 1.0 / 9.0, 1e-16);
  EXPECT_EQ(v[1], 0.0);
  EXPECT_EQ(v[2], 0.0);
  EXPECT_EQ(v[3], 0.0);
}

TEST(CCC2, GammaZeroIsJointFrequency) {
  const auto s = generate_random(6, 123, 9);
  const auto counts = allele_counts(s);
  CCCParams p;
  p.gamma = 0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j) {
      const auto t = pair_tally(s.column(i), s.column(j));
      const auto v = ccc2(t, frequency(counts[i], p.precision), frequency(counts[j], p.precision), p);
      double sum = 0;
      for (int c = 0; c < 4; ++c) {
        EXPECT_DOUBLE_EQ(v[static_cast<std::size_t>(c)], static_cast<double>(t.t[static_cast<std::size_t>(c)]) / (4 * 123.0));
        sum += v[static_cast<std::size_t>(c)];
      }
      EXPECT_NEAR(sum, 1.0, 1e-15);
      const auto exact = exact_ccc2(t, counts[i], counts[j], Rational(0));
      Rational total = 0;
      for (const auto& e : exact) total += e;
      EXPECT_EQ(total, Rational(1));
    }
}

TEST(CCC2, MatchesExactOracle) {
  for (bool sparse : {false, true}) {
    const auto s = sparse ? generate_random_sparse(8, 517, 3, 0.15) : generate_random(8, 517, 3);
    const auto counts = allele_counts(s);
    CCCParams p;
    p.sparse = sparse;
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = i + 1; j < 8; ++j) {
        const auto t = block_tally2(s, {i, i + 1}, s, {j, j + 1}).at(0, 0);
        const auto v = ccc2(t, frequency(counts[i], p.precision), frequency(counts[j], p.precision), p);
        const auto exact = exact_ccc2(t, counts[i], counts[j], Rational(2, 3));
        for (std::size_t c = 0; c < 4; ++c) EXPECT_LE(rel(v[c], exact[c].convert_to<double>()), 1e-12);
        p.precision = Precision::f32;
        const auto v32 = ccc2(t, frequency(counts[i], p.precision), frequency(counts[j], p.precision), p);
        for (std::size_t c = 0; c < 4; ++c) EXPECT_LE(rel(v32[c], exact[c].convert_to<double>()), 1e-5);
        p.precision = Precision::f64;
      }
  }
}

TEST(CCC2, SymmetricUnderExchange) {
  const auto s = generate_random(5, 301, 12);
  const auto counts = allele_counts(s);
  const CCCParams p;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      const auto fi = frequency(counts[i], p.precision);
      const auto fj = frequency(counts[j], p.precision);
      const auto a = ccc2(pair_tally(s.column(i), s.column(j)), fi, fj, p);
      const auto b = ccc2(pair_tally(s.column(j), s.column(i)), fj, fi, p);
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          EXPECT_EQ(a[static_cast<std::size_t>(2 * x + y)], b[static_cast<std::size_t>(2 * y + x)]);
    }
}

TEST(CCC2, ZeroDivisorThrows) {
  EXPECT_THROW(ccc2(TallyTable2{}, {0.5, 0.5}, {0.5, 0.5}, CCCParams{}), DomainError);
}

TEST(CCC3, AllZeroZeroGivesOneTwentySeventh) {
  TallyTable3 t;
  t.at(0, 0, 0) = 80;
  const Frequency f{1.0, 0.0};
  const auto v = ccc3(t, f, f, f, CCCParams{});
  EXPECT_NEAR(v[0], 1.0 / 27.0, 1e-16);
  for (std::size_t c = 1; c < 8; ++c) EXPECT_EQ(v[c], 0.0);
}

TEST(CCC3, GammaZeroSumsToOne) {
  const auto m = ts::random_elements(3, 211, 2);
  const auto t = ts::naive_triple(m[0], m[1], m[2]);
  const auto exact = exact_ccc3(t, oracle_counts(m[0]), oracle_counts(m[1]), oracle_counts(m[2]), Rational(0));
  Rational total = 0;
  for (const auto& e : exact) total += e;
  EXPECT_EQ(total, Rational(1));
  CCCParams p;
  p.gamma = 0;
  const auto v = ccc3(t, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, p);
  double sum = 0;
  for (double x : v) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-15);
}

TEST(CCC3, InvariantUnderAllPermutations) {
  const auto m = ts::random_elements(3, 150, 8);
  const auto s = encode(m, false);
  const auto counts = allele_counts(s);
  const CCCParams p;
  std::array<int, 3> perm{0, 1, 2};
  const auto base = ccc3(ts::naive_triple(m[0], m[1], m[2]), frequency(counts[0], p.precision),
                         frequency(counts[1], p.precision), frequency(counts[2], p.precision), p);
  do {
    const auto& x = m[static_cast<std::size_t>(perm[0])];
    const auto& y = m[static_cast<std::size_t>(perm[1])];
    const auto& z = m[static_cast<std::size_t>(perm[2])];
    const auto v = ccc3(ts::naive_triple(x, y, z), frequency(counts[static_cast<std::size_t>(perm[0])], p.precision),
                        frequency(counts[static_cast<std::size_t>(perm[1])], p.precision),
                        frequency(counts[static_cast<std::size_t>(perm[2])], p.precision), p);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          int orig[3];
          const int local[3] = {a, b, c};
          for (int s2 = 0; s2 < 3; ++s2) orig[perm[static_cast<std::size_t>(s2)]] = local[s2];
          EXPECT_EQ(v[static_cast<std::size_t>(4 * a + 2 * b + c)],
                    base[static_cast<std::size_t>(4 * orig[0] + 2 * orig[1] + orig[2])]);
        }
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST(CCC3, MatchesExactOracle) {
  const auto m = ts::random_elements(4, 190, 77);
  const CCCParams p;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      for (std::size_t k = j + 1; k < 4; ++k) {
        const auto t = ts::naive_triple(m[i], m[j], m[k]);
        const auto ci = oracle_counts(m[i]), cj = oracle_counts(m[j]), ck = oracle_counts(m[k]);
        const auto v = ccc3(t, frequency(ci, p.precision), frequency(cj, p.precision), frequency(ck, p.precision), p);
        const auto exact = exact_ccc3(t, ci, cj, ck, Rational(2, 3));
        for (std::size_t c = 0; c < 8; ++c) EXPECT_LE(rel(v[c], exact[c].convert_to<double>()), 1e-12);
      }
}

// Rows of the X table: V entry, pivot entry, then X for xi = 1, 2, 3.
struct XRow {
  Element2 v, vj, x[3];
};

const XRow kXTable[9] = {
    {k00, k00, {k00, kNA, kNA}}, {k00, k01, {k01, kNA, kNA}}, {k00, k11, {k11, kNA, kNA}},
    {k01, k00, {kNA, k00, kNA}}, {k01, k01, {kNA, k01, kNA}}, {k01, k11, {kNA, k11, kNA}},
    {k11, k00, {kNA, kNA, k00}}, {k11, k01, {kNA, kNA, k01}}, {k11, k11, {kNA, kNA, k11}},
};

TEST(XConstruct, ScalarRuleMatchesTable) {
  // Table rows list the pivot first: row "V=a, v_j=b" means pivot value a, V value b.
  for (const auto& row : kXTable)
    for (int xi = 1; xi <= 3; ++xi)
      EXPECT_EQ(x_entry(row.vj, row.v, xi), row.x[xi - 1]);
}

TEST(XConstruct, PackedMatchesScalarRule) {
  const auto v = generate_random(6, 300, 14);
  const auto pivots = generate_random(2, 300, 15);
  for (int xi = 1; xi <= 3; ++xi) {
    const auto x = x_construct(pivots.column(1), v, {1, 5}, xi);
    ASSERT_EQ(x.num_columns(), 4u);
    for (std::size_t c = 0; c < 4; ++c)
      for (std::size_t q = 0; q < 300; ++q) {
        const auto want = x_entry(v.element(1 + c, q), pivots.element(1, q), xi);
        ASSERT_EQ(x.element(c, q), want);
        const bool valid = (x.valid(c)[q / 64] >> (q % 64)) & 1;
        ASSERT_EQ(valid, !want.is_null());
      }
  }
  EXPECT_THROW(x_construct(pivots.column(0), v, {0, 1}, 4), ValidationError);
}

TEST(Reconstruct3, UniformZeroOnePivotCopiesMiddleTally) {
  const std::size_t n_f = 70;
  const auto m = ts::random_elements(2, n_f, 3);
  const auto s = encode({m[0], ts::uniform_vector(n_f, k01), m[1]}, false);
  const auto t = pivot_block3(s.column(1), s, {0, 1}, s, {2, 3})[0];
  const auto b2 = pair_tally(s.column(0), s.column(2));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) EXPECT_EQ(t.at(a, b, c), b2.at(a, c));
  EXPECT_EQ(reconstruct3({}, b2, {}), t);
}

TEST(Reconstruct3, AllZeroZero) {
  const std::size_t n_f = 129;
  const auto s = encode({ts::uniform_vector(n_f, k00), ts::uniform_vector(n_f, k00), ts::uniform_vector(n_f, k00)}, false);
  const auto t = pivot_block3(s.column(1), s, {0, 1}, s, {2, 3})[0];
  TallyTable3 want;
  want.at(0, 0, 0) = 8 * n_f;
  EXPECT_EQ(t, want);
}

TEST(Reconstruct3, Weights) {
  const TallyTable2 b1{{1, 2, 3, 4}}, b2{{10, 20, 30, 40}}, b3{{100, 200, 300, 400}};
  const auto t = reconstruct3(b1, b2, b3);
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c) {
      EXPECT_EQ(t.at(a, 0, c), 2 * b1.at(a, c) + b2.at(a, c));
      EXPECT_EQ(t.at(a, 1, c), 2 * b3.at(a, c) + b2.at(a, c));
    }
}

TEST(PivotBlock3, MatchesTripleEnumeration) {
  for (std::size_t n_f : {1, 63, 64, 65, 200}) {
    const auto m = ts::random_elements(7, n_f, 900 + n_f);
    const auto s = encode(m, false);
    for (std::size_t j = 0; j < 7; ++j) {
      KernelStats stats;
      const auto cells = pivot_block3(s.column(j), s, {0, 7}, s, {0, 7}, &stats);
      EXPECT_EQ(stats.block3_step_calls, 3u);
      for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t k = 0; k < 7; ++k) {
          const auto& t = cells[i * 7 + k];
          ASSERT_EQ(t, ts::naive_triple(m[i], m[j], m[k])) << n_f << " " << i << j << k;
          ASSERT_EQ(t.sum(), 8 * n_f);
        }
    }
  }
}

TEST(PivotBlock3, SparseMatchesSkippingEnumeration) {
  const auto m = ts::random_elements(6, 333, 5, 0.2);
  const auto s = encode(m, true);
  for (std::size_t j = 0; j < 6; ++j) {
    const auto cells = pivot_block3(s.column(j), s, {0, 6}, s, {0, 6});
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t k = 0; k < 6; ++k) ASSERT_EQ(cells[i * 6 + k], ts::naive_triple(m[i], m[j], m[k], true));
  }
}

TEST(PivotBlock3, MarginalOverPivotIsTwicePairTally) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = generate_random(10, 256, seed);
    for (std::size_t j = 0; j < 10; ++j) {
      const auto cells = pivot_block3(s.column(j), s, {0, 10}, s, {0, 10});
      for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t k = 0; k < 10; ++k) {
          const auto pair = pair_tally(s.column(i), s.column(k));
          for (int a = 0; a < 2; ++a)
            for (int c = 0; c < 2; ++c)
              ASSERT_EQ(cells[i * 10 + k].at(a, 0, c) + cells[i * 10 + k].at(a, 1, c), 2 * pair.at(a, c));
        }
    }
  }
}

TEST(UniqueCounts, Examples) {
  EXPECT_EQ(unique_counts(4, 2).tables, 6u);
  EXPECT_EQ(unique_counts(4, 2).values, 24u);
  EXPECT_EQ(unique_counts(3, 3).tables, 1u);
  EXPECT_EQ(unique_counts(3, 3).values, 8u);
  EXPECT_EQ(unique_counts(2, 3).tables, 0u);
  EXPECT_EQ(unique_counts(24, 3).tables, 2024u);
}
