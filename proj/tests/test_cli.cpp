#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ccc/dataset_io.hpp"
#include "ccc/engine.hpp"
#include "ccc/error.hpp"
#include "ccc/perf_model.hpp"
#include "ccc/record_file.hpp"
#include "ccc/run_config.hpp"
#include "comet_app.hpp"

using namespace ccc;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "comet");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = comet::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  return {};
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ccc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

std::set<std::array<std::uint64_t, 3>> keys_in(const fs::path& dir, int num_way, Precision prec) {
  std::set<std::array<std::uint64_t, 3>> keys;
  const auto m = read_manifest(dir / "manifest.json");
  for (const auto& r : m.ranks)
    for (const auto& rec : read_record_file(dir / r.file, num_way, prec)) keys.insert(rec.index);
  return keys;
}

}  // namespace

TEST(PerfModel, AllZero) {
  EXPECT_EQ(estimate_time(PerfModelParams{}, 2), 0.0);
  EXPECT_EQ(estimate_time(PerfModelParams{}, 3), 0.0);
}

TEST(PerfModel, TwoWayExample) {
  PerfModelParams p;
  p.t_c = 1;
  p.t_tv = 2;
  p.load = 25;
  p.t_g2 = 3;
  p.t_tm = 4;
  p.t_cpu = 5;
  EXPECT_EQ(estimate_time(p, 2), 87.0);
}

TEST(PerfModel, ThreeWayExample) {
  PerfModelParams p;
  p.load = 6;
  p.n_vp = 12;
  p.n_st = 2;
  p.t_g3 = 1;
  EXPECT_EQ(estimate_time(p, 3), 18.0);
}

TEST(PerfModel, Validation) {
  PerfModelParams p;
  p.t_c = -1;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.n_st = 0;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(RateReport, ReciprocalRelation) {
  const auto r = rate_report(1.716e-12, 1.0);
  EXPECT_NEAR(r.per_second / 5.828e11, 1.0, 1e-3);
  EXPECT_EQ(r.per_comparison, 1.716e-12);
}

TEST(RateReport, TrivialExample) {
  const auto r = rate_report(2.0, 10.0);
  EXPECT_EQ(r.per_second, 5.0);
  EXPECT_EQ(r.per_comparison, 0.2);
  EXPECT_THROW(rate_report(0.0, 10.0), ValidationError);
  EXPECT_THROW(rate_report(1.0, 0.0), ValidationError);
}

TEST(RunConfig, Validation) {
  RunConfig c;
  c.n_v = 8;
  c.n_f = 16;
  EXPECT_NO_THROW(c.validate());
  c.n_phases = 2;
  c.phase = 2;
  EXPECT_THROW(c.validate(), ValidationError);
  c.phase = 1;
  EXPECT_NO_THROW(c.validate());
  c.stage = 0;
  EXPECT_THROW(c.validate(), ValidationError);  // stage on a 2-way run
  c = {};
  c.n_v = 8;
  c.n_f = 16;
  c.threshold = -1;
  EXPECT_THROW(c.validate(), ValidationError);
  c.threshold = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(c.validate(), ValidationError);
  c.threshold = std::numeric_limits<double>::infinity();
  EXPECT_NO_THROW(c.validate());
}

TEST(RunConfig, Parsers) {
  EXPECT_EQ(parse_engine("multi"), EngineKind::multi_rank);
  EXPECT_EQ(parse_engine("kernel"), EngineKind::kernel);
  EXPECT_THROW(parse_engine("gpu"), ValidationError);
  EXPECT_EQ(parse_precision("single"), Precision::f32);
  EXPECT_EQ(parse_precision("double"), Precision::f64);
  EXPECT_THROW(parse_precision("half"), ValidationError);
  EXPECT_EQ(parse_synthetic("verifiable"), SyntheticKind::verifiable);
  EXPECT_TRUE(std::isinf(parse_threshold("inf")));
  EXPECT_TRUE(std::isinf(parse_threshold("∞")));
  EXPECT_EQ(parse_threshold("0.25"), 0.25);
  EXPECT_THROW(parse_threshold("lots"), ValidationError);
}

TEST(KeepRecord, StrictlyAbove) {
  EXPECT_TRUE(keep_record(0.5, 0.25));
  EXPECT_FALSE(keep_record(0.25, 0.25));
  EXPECT_FALSE(keep_record(1e300, std::numeric_limits<double>::infinity()));
}

TEST_F(TempDir, RecordFilesAreComplete) {
  const auto s = generate_random(14, 90, 5);
  const auto g = make_grid(14, 90, 2, 3, 2);
  const auto out = run2(InMemorySource(s), g, plan2(g), CCCParams{});
  const auto m = write_run_outputs(out, Precision::f64, 0.0, dir_);
  EXPECT_EQ(m.checksum, out.checksum());
  Checksum sum;
  std::uint64_t n = 0;
  for (const auto& r : m.ranks) {
    sum += r.checksum;
    n += r.records;
  }
  EXPECT_EQ(sum, m.checksum);
  EXPECT_EQ(n, 91u);
  EXPECT_EQ(keys_in(dir_, 2, Precision::f64).size(), 91u);

  const auto back = read_manifest(dir_ / "manifest.json");
  EXPECT_EQ(back.checksum, m.checksum);
  EXPECT_EQ(back.ranks.size(), m.ranks.size());
  EXPECT_EQ(back.comparisons, out.stats.comparisons);
}

TEST_F(TempDir, StoredValuesRoundTrip) {
  const auto s = generate_random(7, 64, 6);
  CCCParams p;
  p.num_way = 3;
  const auto out = kernel_run3(s, p);
  const auto recs = out.sorted_records();
  for (auto prec : {Precision::f64, Precision::f32}) {
    fs::remove_all(dir_);
    write_run_outputs(out, prec, 0.0, dir_);
    const auto m = read_manifest(dir_ / "manifest.json");
    std::vector<StoredRecord> stored;
    for (const auto& r : m.ranks) {
      auto part = read_record_file(dir_ / r.file, 3, prec);
      stored.insert(stored.end(), part.begin(), part.end());
    }
    ASSERT_EQ(stored.size(), recs.size());
    std::sort(stored.begin(), stored.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    for (std::size_t n = 0; n < recs.size(); ++n) {
      EXPECT_EQ(stored[n].index, recs[n].key());
      for (std::size_t c = 0; c < 8; ++c) {
        const double want = prec == Precision::f32 ? static_cast<float>(recs[n].ccc[c]) : recs[n].ccc[c];
        EXPECT_EQ(stored[n].values[c], want);
      }
    }
  }
}

TEST_F(TempDir, ThresholdIsMonotone) {
  const auto s = generate_random(16, 80, 9);
  const auto out = kernel_run2(s, CCCParams{});
  std::vector<std::set<std::array<std::uint64_t, 3>>> kept;
  for (double theta : {0.0, 0.05, 0.1, 0.2, std::numeric_limits<double>::infinity()}) {
    const auto d = dir_ / std::to_string(kept.size());
    const auto m = write_run_outputs(out, Precision::f64, theta, d);
    EXPECT_EQ(m.checksum, out.checksum());  // taken over every computed record
    kept.push_back(keys_in(d, 2, Precision::f64));
  }
  EXPECT_EQ(kept.front().size(), 120u);
  EXPECT_TRUE(kept.back().empty());
  for (std::size_t n = 1; n < kept.size(); ++n)
    EXPECT_TRUE(std::includes(kept[n - 1].begin(), kept[n - 1].end(), kept[n].begin(), kept[n].end()));
  EXPECT_TRUE(std::isinf(read_manifest(dir_ / "4" / "manifest.json").threshold));
}

TEST(Cli, Estimate) {
  auto r = cli({"estimate", "--num-way", "2", "--t-c", "1", "--t-tv", "2", "--load", "25", "--t-g2", "3",
                "--t-tm", "4", "--t-cpu", "5"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(field(r.out, "estimated_s"), "87");
  r = cli({"estimate", "--num-way", "3", "--load", "6", "--n-vp", "12", "--n-st", "2", "--t-g3", "1"});
  EXPECT_EQ(field(r.out, "estimated_s"), "18");
}

TEST(Cli, RunVerify2Way) {
  const auto r = cli({"run", "--num-way", "2", "--synthetic", "random", "--n-v", "64", "--n-f", "1000",
                      "--verify"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "records"), "2016 (kept 2016)");
  EXPECT_EQ(field(r.out, "comparisons"), std::to_string(2016 * 1000));
  EXPECT_EQ(field(r.out, "checksum").size(), 32u);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({"run", "--n-v", "8", "--n-f", "16", "--n-phases", "2", "--phase", "2"}).code, 1);
  EXPECT_EQ(cli({"run", "--n-v", "8", "--n-f", "16", "--num-way", "5"}).code, 1);
  EXPECT_EQ(cli({"run", "--n-v", "8", "--n-f", "16", "--n-pv", "9"}).code, 1);
  EXPECT_EQ(cli({"run", "--input", "/nonexistent/data.bin"}).code, 3);
  EXPECT_EQ(cli({"verify", "--out-dir", "/nonexistent/run"}).code, 3);
  EXPECT_EQ(cli({"bogus"}).code, 1);
}

TEST(Cli, EnginesAgree) {
  std::string sum;
  for (const char* engine : {"reference", "kernel", "multi"}) {
    const auto r = cli({"run", "--num-way", "3", "--n-v", "10", "--n-f", "77", "--n-pv", "2", "--n-pf", "2",
                        "--engine", engine});
    ASSERT_EQ(r.code, 0) << r.err;
    if (sum.empty()) sum = field(r.out, "checksum");
    EXPECT_EQ(field(r.out, "checksum"), sum) << engine;
  }
}

TEST(Cli, VerifiableSyntheticSparse) {
  EXPECT_EQ(cli({"run", "--n-v", "12", "--n-f", "300", "--synthetic", "verifiable", "--verify", "--n-pv", "3"}).code,
            0);
  EXPECT_EQ(cli({"run", "--n-v", "12", "--n-f", "300", "--sparse", "--verify", "--n-pv", "2", "--precision",
                 "single"})
                .code,
            0);
}

TEST(Cli, StagesUnionToFullRun) {
  const auto full = field(cli({"run", "--num-way", "3", "--n-v", "12", "--n-f", "50", "--n-pv", "3"}).out,
                          "checksum");
  Checksum sum;
  for (int st = 0; st < 3; ++st) {
    const auto r = cli({"run", "--num-way", "3", "--n-v", "12", "--n-f", "50", "--n-pv", "3", "--n-st", "3",
                        "--stage", std::to_string(st)});
    ASSERT_EQ(r.code, 0) << r.err;
    sum += Checksum::from_hex(field(r.out, "checksum"));
  }
  EXPECT_EQ(sum.hex(), full);
}

TEST_F(TempDir, GenPermuteRun) {
  ASSERT_EQ(cli({"gen", "--n-v", "10", "--n-f", "130", "--seed", "4", "-o", p("a.bin")}).code, 0);
  ASSERT_EQ(cli({"permute", "--input", p("a.bin"), "--output", p("b.bin"), "--seed", "2", "--map", p("b.perm")})
                .code,
            0);
  const auto a = cli({"run", "--input", p("a.bin"), "--n-pv", "2", "--verify"});
  const auto b = cli({"run", "--input", p("b.bin"), "--n-pv", "3", "--verify"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(field(a.out, "records"), field(b.out, "records"));

  // Relabeling the permuted run's records through the map recovers the original checksum.
  const auto perm = read_permutation(p("b.perm"));
  const auto inv = perm.inverse();
  const auto out = kernel_run2(read_dataset(p("b.bin")), CCCParams{});
  Checksum relabeled;
  for (const auto& r : out.sorted_records()) {
    auto i = inv.forward[r.i], j = inv.forward[r.j];
    relabeled.add_pair(std::min(i, j), std::max(i, j), i < j ? r.tally : r.tally.transposed());
  }
  EXPECT_EQ(relabeled.hex(), field(a.out, "checksum"));
}

TEST_F(TempDir, RunWritesVerifiableDirectory) {
  const auto r = cli({"run", "--num-way", "3", "--n-v", "24", "--n-f", "200", "--n-pv", "3", "--n-pr", "2",
                      "--n-st", "4", "--stage", "3", "--verify", "--out-dir", p("three")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto sum = field(r.out, "checksum");
  EXPECT_EQ(cli({"verify", "--out-dir", p("three")}).code, 0);
  EXPECT_EQ(cli({"verify", "--out-dir", p("three"), "--checksum", sum}).code, 0);
  EXPECT_EQ(cli({"verify", "--out-dir", p("three"), "--checksum", std::string(32, '0')}).code, 2);

  // Tamper with one stored record file.
  const auto m = read_manifest(dir_ / "three" / "manifest.json");
  for (const auto& e : m.ranks)
    if (e.records > 0) {
      fs::resize_file(dir_ / "three" / e.file, fs::file_size(dir_ / "three" / e.file) - 8);
      break;
    }
  EXPECT_NE(cli({"verify", "--out-dir", p("three")}).code, 0);
}

TEST_F(TempDir, ThresholdInfinityKeepsNothing) {
  const auto r = cli({"run", "--n-v", "16", "--n-f", "64", "--threshold", "inf", "--out-dir", p("none")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "records"), "120 (kept 0)");
  EXPECT_TRUE(fs::exists(dir_ / "none" / "manifest.json"));
  EXPECT_TRUE(keys_in(dir_ / "none", 2, Precision::f64).empty());
}

TEST_F(TempDir, ConfigFileFlagsWin) {
  {
    std::ofstream f(p("run.ini"));
    f << "n-v=10\nn-f=40\nnum-way=3\nn-pv=2\n";
  }
  const auto from_file = cli({"run", "--config", p("run.ini")});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(field(from_file.out, "records"), "120 (kept 120)");
  const auto overridden = cli({"run", "--config", p("run.ini"), "--n-v", "6"});
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  EXPECT_EQ(field(overridden.out, "records"), "20 (kept 20)");
  {
    std::ofstream f(p("sec.ini"));
    f << "[run]\nn-v=5\nn-f=40\n";
  }
  EXPECT_EQ(field(cli({"run", "--config", p("sec.ini")}).out, "records"), "10 (kept 10)");
}
