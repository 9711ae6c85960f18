#pragma once

// Per-rank metric output files and the run manifest.
//
// Record file: a flat sequence of little-endian records, each the u64
// indices (2 or 3) followed by the 4 or 8 CCC values as f32 or f64.
// manifest.json lists every rank file with its record count and checksum
// contribution, plus the run checksum.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccc/checksum.hpp"
#include "ccc/engine.hpp"
#include "ccc/metrics.hpp"

namespace ccc {

struct RankFileEntry {
  std::size_t rank = 0;
  std::string file;
  std::uint64_t records = 0;
  Checksum checksum;
};

struct Manifest {
  int num_way = 2;
  Precision precision = Precision::f64;
  double threshold = 0.0;
  std::uint64_t comparisons = 0;
  std::vector<RankFileEntry> ranks;
  Checksum checksum;
};

inline bool keep_record(double max_value, double threshold) { return max_value > threshold; }

/// Writes one file per rank into `dir` (created if missing) plus the
/// manifest. Throws FormatError(io) on failure.
Manifest write_run_outputs(const RunOutput2& out, Precision precision, double threshold,
                           const std::filesystem::path& dir);
Manifest write_run_outputs(const RunOutput3& out, Precision precision, double threshold,
                           const std::filesystem::path& dir);

void write_manifest(const Manifest& m, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

struct StoredRecord {
  std::array<std::uint64_t, 3> index{};  // unused slots are 0
  std::vector<double> values;
};

std::vector<StoredRecord> read_record_file(const std::filesystem::path& path, int num_way,
                                           Precision precision);

}  // namespace ccc
