#include "comet_app.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ccc/bitgrid.hpp"
#include "ccc/dataset_io.hpp"
#include "ccc/decomp.hpp"
#include "ccc/engine.hpp"
#include "ccc/error.hpp"
#include "ccc/oracle.hpp"
#include "ccc/perf_model.hpp"
#include "ccc/record_file.hpp"
#include "ccc/run_config.hpp"

namespace comet {

namespace {

using namespace ccc;

class MismatchError : public Error {
 public:
  using Error::Error;
};

// Each rank generates its own tile of the seeded random dataset.
class SyntheticSource final : public TileSource {
 public:
  SyntheticSource(std::size_t n_v, std::size_t n_f, std::uint64_t seed, bool sparse, double rate)
      : n_v_(n_v), n_f_(n_f), seed_(seed), sparse_(sparse), rate_(rate) {}
  std::size_t num_vectors() const override { return n_v_; }
  std::size_t num_fields() const override { return n_f_; }
  bool sparse() const override { return sparse_; }
  PackedVectorSet read(Range vectors, Range fields) const override {
    return generate_random_tile(seed_, vectors, fields, sparse_, sparse_ ? rate_ : 0.0);
  }

 private:
  std::size_t n_v_, n_f_;
  std::uint64_t seed_;
  bool sparse_;
  double rate_;
};

struct Inputs {
  std::unique_ptr<TileSource> source;
  std::optional<PackedVectorSet> full;  // loaded lazily
  std::optional<VerifiableLayout> layout;

  const PackedVectorSet& all() {
    if (!full) full = source->read({0, source->num_vectors()}, {0, source->num_fields()});
    return *full;
  }
};

Inputs load_inputs(RunConfig& cfg, bool sparse_given) {
  Inputs in;
  if (!cfg.input.empty()) {
    auto fs = std::make_unique<FileSource>(cfg.input);
    if ((cfg.n_v && cfg.n_v != fs->num_vectors()) || (cfg.n_f && cfg.n_f != fs->num_fields()))
      throw ValidationError("--n-v/--n-f disagree with the dataset header");
    if (sparse_given && cfg.sparse != fs->sparse())
      throw ValidationError("--sparse disagrees with the dataset header");
    cfg.n_v = fs->num_vectors();
    cfg.n_f = fs->num_fields();
    cfg.sparse = fs->sparse();
    in.source = std::move(fs);
    return in;
  }
  if (cfg.synthetic == SyntheticKind::verifiable) {
    if (cfg.sparse) throw ValidationError("verifiable datasets are dense");
    auto [set, layout] = generate_verifiable(cfg.n_v, cfg.n_f, cfg.seed);
    in.full = std::move(set);
    in.layout = std::move(layout);
    in.source = std::make_unique<InMemorySource>(*in.full);
    return in;
  }
  in.source = std::make_unique<SyntheticSource>(cfg.n_v, cfg.n_f, cfg.seed, cfg.sparse,
                                                cfg.missing_rate);
  return in;
}

template <typename Record, typename Pred>
RunOutput<Record> filter(const RunOutput<Record>& out, Pred&& keep) {
  RunOutput<Record> r;
  r.stats = out.stats;
  for (const auto& rank : out.ranks) {
    RankOutput<Record> ro{rank.rank, {}, {}};
    for (const auto& rec : rank.records)
      if (keep(rec)) {
        ro.records.push_back(rec);
        add_to_checksum(ro.checksum, rec);
      }
    r.ranks.push_back(std::move(ro));
  }
  return r;
}

template <typename Record>
std::string key_text(const Record& r) {
  std::string s = "(";
  const auto k = r.key();
  for (std::size_t n = 0; n < k.size(); ++n) s += (n ? "," : "") + std::to_string(k[n]);
  return s + ")";
}

// Checks the run against the reference engine (restricted to the same
// selection) and, for verifiable data, against the closed-form tallies.
template <typename Record, typename Expected>
void verify_output(const RunOutput<Record>& got, const RunOutput<Record>& want,
                   Expected&& closed_form, std::ostream& out) {
  const auto a = got.sorted_records();
  const auto b = want.sorted_records();
  for (std::size_t n = 0; n < std::max(a.size(), b.size()); ++n) {
    if (n >= a.size()) throw MismatchError("missing record " + key_text(b[n]));
    if (n >= b.size()) throw MismatchError("unexpected record " + key_text(a[n]));
    if (a[n].key() != b[n].key() || !(a[n].tally == b[n].tally))
      throw MismatchError("record " + key_text(a[n]) + " differs from the reference");
    if (!closed_form(a[n])) throw MismatchError("record " + key_text(a[n]) + " differs from the planted tallies");
  }
  if (!(got.checksum() == want.checksum())) throw MismatchError("checksum differs from the reference");
  out << "verify: ok (reference " << want.checksum().hex() << ")\n";
}

template <typename Record>
void report(const RunOutput<Record>& result, const RunConfig& cfg, double elapsed,
            std::ostream& out) {
  std::size_t kept = 0;
  for (const auto& rank : result.ranks)
    for (const auto& r : rank.records) kept += keep_record(r.max_value(), cfg.threshold);
  out << "records: " << result.record_count() << " (kept " << kept << ")\n";
  out << "comparisons: " << result.stats.comparisons << "\n";
  out << "elapsed_s: " << elapsed << "\n";
  if (elapsed > 0 && result.stats.comparisons > 0) {
    const auto rate = rate_report(elapsed, static_cast<double>(result.stats.comparisons));
    out << "comparisons_per_sec: " << rate.per_second << "\n";
  }
  if (cfg.checksum) out << "checksum: " << result.checksum().hex() << "\n";
  if (!cfg.out_dir.empty()) {
    const auto m = write_run_outputs(result, cfg.precision, cfg.threshold, cfg.out_dir);
    out << "manifest: " << (std::filesystem::path(cfg.out_dir) / "manifest.json").string() << " ("
        << m.ranks.size() << " rank files)\n";
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int do_run(RunConfig cfg, bool sparse_given, std::ostream& out) {
  cfg.validate();
  Inputs in = load_inputs(cfg, sparse_given);
  cfg.validate();
  const CCCParams params = cfg.params();
  if (cfg.engine == EngineKind::reference && (cfg.stage || cfg.phase))
    throw ValidationError("the reference engine does not take --stage or --phase");
  if (cfg.engine == EngineKind::kernel && cfg.phase)
    throw ValidationError("the kernel engine has no 2-way phases");

  const RankGrid grid = make_grid(cfg.n_v, cfg.n_f, cfg.n_pf, cfg.n_pv, cfg.n_pr);
  const RunOptions options{cfg.phase, cfg.stage, cfg.mode};
  const auto t0 = std::chrono::steady_clock::now();

  if (cfg.num_way == 2) {
    RunOutput2 result;
    std::optional<BlockPlan2> plan;
    switch (cfg.engine) {
      case EngineKind::reference: result = reference_run2(decode(in.all()), params); break;
      case EngineKind::kernel: result = kernel_run2(in.all(), params); break;
      case EngineKind::multi_rank:
        plan = plan2(grid, cfg.n_phases);
        result = run2(*in.source, grid, *plan, params, options);
        break;
    }
    report(result, cfg, seconds_since(t0), out);
    if (cfg.verify) {
      std::set<std::array<std::size_t, 2>> selected;
      if (plan && cfg.phase)
        for (const auto& p : planned_pairs(grid, *plan, cfg.phase)) selected.insert(p);
      const auto ref = filter(reference_run2(decode(in.all()), params), [&](const Record2& r) {
        return selected.empty() || selected.count({r.i, r.j});
      });
      verify_output(result, ref, [&](const Record2& r) {
        return !in.layout || in.layout->expected_pair(r.i, r.j) == r.tally;
      }, out);
    }
  } else {
    RunOutput3 result;
    std::optional<BlockPlan3> plan;
    switch (cfg.engine) {
      case EngineKind::reference: result = reference_run3(decode(in.all()), params); break;
      case EngineKind::kernel: result = kernel_run3(in.all(), params, cfg.n_st, cfg.stage); break;
      case EngineKind::multi_rank:
        plan = plan3(grid, cfg.n_st);
        result = run3(*in.source, grid, *plan, params, options);
        break;
    }
    report(result, cfg, seconds_since(t0), out);
    if (cfg.verify) {
      std::set<std::array<std::size_t, 3>> selected;
      if (plan && cfg.stage)
        for (const auto& t : planned_triples(grid, *plan, cfg.stage)) selected.insert(t);
      const bool kernel_stage = !plan && cfg.stage;
      const auto ref = filter(reference_run3(decode(in.all()), params), [&](const Record3& r) {
        if (kernel_stage) return r.j % cfg.n_st == *cfg.stage;
        return selected.empty() || selected.count({r.i, r.j, r.k}) > 0;
      });
      verify_output(result, ref, [&](const Record3& r) {
        return !in.layout || in.layout->expected_triple(r.i, r.j, r.k) == r.tally;
      }, out);
    }
  }
  return kOk;
}

int do_verify(const std::string& dir, const std::string& expected, std::ostream& out) {
  const auto m = read_manifest(std::filesystem::path(dir) / "manifest.json");
  Checksum sum;
  for (const auto& e : m.ranks) {
    const auto recs = read_record_file(std::filesystem::path(dir) / e.file, m.num_way, m.precision);
    if (recs.size() != e.records)
      throw MismatchError(e.file + ": record count differs from the manifest");
    for (const auto& r : recs) {
      bool ordered = r.index[0] < r.index[1] && (m.num_way == 2 || r.index[1] < r.index[2]);
      double max_value = -INFINITY;
      for (double v : r.values) max_value = std::max(max_value, v);
      if (!ordered) throw MismatchError(e.file + ": indices not in canonical order");
      if (!keep_record(max_value, m.threshold))
        throw MismatchError(e.file + ": record at or below the threshold");
    }
    sum += e.checksum;
  }
  if (!(sum == m.checksum)) throw MismatchError("rank checksums do not sum to the run checksum");
  if (!expected.empty() && !(Checksum::from_hex(expected) == m.checksum))
    throw MismatchError("run checksum " + m.checksum.hex() + " != expected " + expected);
  out << "verify: ok " << m.checksum.hex() << "\n";
  return kOk;
}

// Splices the entries of `run --config FILE` in front of the other run
// arguments, so that flags given on the command line override the file.
std::vector<std::string> with_config_file(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  auto run = std::find(args.begin(), args.end(), "run");
  if (run != args.end()) {
    for (auto it = run + 1; it != args.end(); ++it) {
      std::string path;
      if (*it == "--config" && it + 1 != args.end()) {
        path = *(it + 1);
        it = args.erase(it, it + 2);
      } else if (it->rfind("--config=", 0) == 0) {
        path = it->substr(9);
        it = args.erase(it);
      } else {
        continue;
      }
      std::ifstream in(path);
      if (!in) throw FormatError(FormatErrorKind::io, "cannot open config file " + path);
      std::vector<std::string> extra;
      for (const auto& item : CLI::ConfigINI().from_config(in)) {
        if (!item.parents.empty() && item.parents != std::vector<std::string>{"run"}) continue;
        if (item.name == "++" || item.name == "--") continue;  // section markers
        std::string name = item.name;
        std::replace(name.begin(), name.end(), '_', '-');
        if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
          const bool on = item.inputs[0] == "true";
          if (on) extra.push_back("--" + name);
          else if (name == "checksum") extra.push_back("--no-checksum");
          continue;
        }
        extra.push_back("--" + name);
        extra.insert(extra.end(), item.inputs.begin(), item.inputs.end());
      }
      run = std::find(args.begin(), args.end(), "run");
      args.insert(run + 1, extra.begin(), extra.end());
      break;
    }
  }
  std::reverse(args.begin(), args.end());
  return args;
}

}  // namespace

int run_cli(int argc, char** argv) { return run_cli(argc, argv, std::cout, std::cerr); }

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"comet: custom correlation coefficient metrics over 2-bit allele vectors"};
  app.require_subcommand(1);

  // gen
  std::size_t gen_n_v = 0, gen_n_f = 0;
  std::uint64_t gen_seed = 1;
  bool gen_sparse = false;
  double gen_rate = 0.1;
  std::string gen_kind = "random", gen_output;
  auto* gen = app.add_subcommand("gen", "Write a synthetic packed dataset");
  gen->add_option("--n-v", gen_n_v, "Number of vectors")->required();
  gen->add_option("--n-f", gen_n_f, "Elements per vector")->required();
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_flag("--sparse", gen_sparse, "Include missing entries");
  gen->add_option("--missing-rate", gen_rate, "Fraction of missing entries (sparse)");
  gen->add_option("--synthetic", gen_kind, "random | verifiable");
  gen->add_option("--output,-o", gen_output, "Output file")->required();

  // permute
  std::string perm_input, perm_output, perm_map;
  std::uint64_t perm_seed = 1;
  auto* permute = app.add_subcommand("permute", "Shuffle the vectors of a packed dataset");
  permute->add_option("--input,-i", perm_input, "Input dataset")->required();
  permute->add_option("--output,-o", perm_output, "Output dataset")->required();
  permute->add_option("--seed", perm_seed, "Shuffle seed");
  permute->add_option("--map", perm_map, "Write the permutation here");

  // run
  RunConfig cfg;
  std::string precision = "double", threshold = "0", engine = "multi", synthetic = "random";
  bool sequential = false;
  auto* run = app.add_subcommand("run", "Compute metrics");
  run->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  run->add_option("--config", config_path, "key=value file; command-line flags take precedence");
  run->add_option("--num-way", cfg.num_way, "2 or 3")->check(CLI::IsMember({2, 3}));
  run->add_option("--n-v", cfg.n_v, "Number of vectors (synthetic)");
  run->add_option("--n-f", cfg.n_f, "Elements per vector (synthetic)");
  run->add_option("--n-pf", cfg.n_pf, "Ranks along the field axis");
  run->add_option("--n-pv", cfg.n_pv, "Ranks along the vector axis");
  run->add_option("--n-pr", cfg.n_pr, "Replica ranks per vector rank");
  run->add_option("--n-st", cfg.n_st, "3-way stages");
  run->add_option("--stage", cfg.stage, "Compute only this 3-way stage");
  run->add_option("--n-phases", cfg.n_phases, "2-way phases");
  run->add_option("--phase", cfg.phase, "Compute only this 2-way phase");
  run->add_option("--gamma", cfg.gamma, "CCC gamma")->default_str("0.6666666666666666");
  run->add_option("--threshold", threshold, "Keep records whose largest value exceeds this (inf keeps none)");
  auto* sparse_opt = run->add_flag("--sparse", cfg.sparse, "Sparse data with missing entries");
  run->add_option("--missing-rate", cfg.missing_rate, "Missing fraction for sparse synthetic data");
  run->add_option("--precision", precision, "single | double");
  run->add_option("--seed", cfg.seed, "Synthetic data seed");
  run->add_option("--input,-i", cfg.input, "Packed dataset file");
  run->add_option("--synthetic", synthetic, "random | verifiable");
  run->add_option("--out-dir", cfg.out_dir, "Directory for per-rank record files");
  run->add_flag("--verify", cfg.verify, "Check against the reference engine");
  run->add_flag("--checksum,!--no-checksum", cfg.checksum, "Print the run checksum");
  run->add_option("--engine", engine, "reference | kernel | multi");
  run->add_flag("--sequential", sequential, "Run ranks one at a time");

  // estimate
  PerfModelParams pm;
  int est_way = 2;
  auto* estimate = app.add_subcommand("estimate", "Evaluate the run time model");
  estimate->add_option("--num-way", est_way, "2 or 3")->check(CLI::IsMember({2, 3}));
  estimate->add_option("--t-c", pm.t_c, "Setup time");
  estimate->add_option("--t-tv", pm.t_tv, "Vector transfer time per step");
  estimate->add_option("--t-tm", pm.t_tm, "Metrics transfer time");
  estimate->add_option("--t-cpu", pm.t_cpu, "Host metric time");
  estimate->add_option("--t-g2", pm.t_g2, "2-way block time");
  estimate->add_option("--t-g3", pm.t_g3, "3-way block step time");
  estimate->add_option("--load", pm.load, "Blocks per worker");
  estimate->add_option("--n-vp", pm.n_vp, "Vectors per tile");
  estimate->add_option("--n-st", pm.n_st, "Stages");

  // verify
  std::string verify_dir, verify_checksum;
  auto* verify = app.add_subcommand("verify", "Check a run directory against its manifest");
  verify->add_option("--out-dir", verify_dir, "Run output directory")->required();
  verify->add_option("--checksum", verify_checksum, "Expected run checksum (32 hex digits)");

  try {
    app.parse(with_config_file(argc, argv));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const FormatError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return kOk;
    }
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  try {
    if (gen->parsed()) {
      PackedVectorSet set;
      const SyntheticKind kind = parse_synthetic(gen_kind);
      if (kind == SyntheticKind::verifiable) {
        if (gen_sparse) throw ValidationError("verifiable datasets are dense");
        set = generate_verifiable(gen_n_v, gen_n_f, gen_seed).first;
      } else {
        if (gen_n_v == 0 || gen_n_f == 0) throw ValidationError("--n-v and --n-f must be positive");
        set = gen_sparse ? generate_random_sparse(gen_n_v, gen_n_f, gen_seed, gen_rate)
                         : generate_random(gen_n_v, gen_n_f, gen_seed);
      }
      write_dataset(set, gen_output);
      out << "wrote " << gen_output << " (" << set.num_vectors() << " x " << set.num_fields()
          << (set.sparse() ? ", sparse" : "") << ")\n";
      return kOk;
    }
    if (permute->parsed()) {
      auto [set, perm] = permute_vectors(read_dataset(perm_input), perm_seed);
      write_dataset(set, perm_output);
      if (!perm_map.empty()) write_permutation(perm, perm_map);
      out << "wrote " << perm_output << "\n";
      return kOk;
    }
    if (run->parsed()) {
      cfg.precision = parse_precision(precision);
      cfg.threshold = parse_threshold(threshold);
      cfg.engine = parse_engine(engine);
      cfg.synthetic = parse_synthetic(synthetic);
      cfg.mode = sequential ? ExecMode::sequential : ExecMode::threaded;
      return do_run(cfg, sparse_opt->count() > 0, out);
    }
    if (estimate->parsed()) {
      out << "estimated_s: " << estimate_time(pm, est_way) << "\n";
      return kOk;
    }
    if (verify->parsed()) return do_verify(verify_dir, verify_checksum, out);
  } catch (const MismatchError& e) {
    err << "verification failed: " << e.what() << "\n";
    return kMismatch;
  } catch (const FormatError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kValidation;
}

}  // namespace comet
