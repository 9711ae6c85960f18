#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "ccc/comm.hpp"
#include "ccc/metrics.hpp"

namespace ccc {

enum class EngineKind { reference, kernel, multi_rank };
enum class SyntheticKind { random, verifiable };

struct RunConfig {
  int num_way = 2;
  std::size_t n_v = 0;
  std::size_t n_f = 0;
  std::size_t n_pf = 1;
  std::size_t n_pv = 1;
  std::size_t n_pr = 1;
  std::size_t n_st = 1;
  std::size_t n_phases = 1;
  std::optional<std::size_t> stage;
  std::optional<std::size_t> phase;
  /// Records are kept when their largest CCC value exceeds this; infinity
  /// keeps none.
  double threshold = 0.0;
  double gamma = 2.0 / 3.0;
  bool sparse = false;
  double missing_rate = 0.1;
  Precision precision = Precision::f64;
  std::uint64_t seed = 1;
  std::string input;  // packed dataset; synthetic when empty
  SyntheticKind synthetic = SyntheticKind::random;
  std::string out_dir;
  bool checksum = true;
  bool verify = false;
  EngineKind engine = EngineKind::multi_rank;
  ExecMode mode = ExecMode::threaded;

  CCCParams params() const { return {gamma, sparse, num_way, precision}; }
  /// Throws ValidationError.
  void validate() const;
};

EngineKind parse_engine(const std::string& name);
SyntheticKind parse_synthetic(const std::string& name);
Precision parse_precision(const std::string& name);
/// Accepts a decimal number, "inf" or "infinity".
double parse_threshold(const std::string& text);

}  // namespace ccc
