#pragma once

// Packed binary dataset files.
//
// Layout (all integers little-endian):
//   bytes  0..7   magic "CCCPACK1"
//   bytes  8..11  u32 version (1)
//   bytes 12..15  u32 flags: bit 0 sparse, bits 8..15 element encoding id
//   bytes 16..23  u64 n_v
//   bytes 24..31  u64 n_f
//   payload: for each vector, plane0 words then plane1 words (u64 each,
//            ceil(n_f/64) words per plane)

#include <cstdint>
#include <filesystem>
#include <memory>

#include "ccc/bitgrid.hpp"

namespace ccc {

inline constexpr char kDatasetMagic[8] = {'C', 'C', 'C', 'P', 'A', 'C', 'K', '1'};
inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::uint32_t kEncodingSplitPlane = 1;
inline constexpr std::size_t kDatasetHeaderBytes = 32;

struct DatasetHeader {
  std::uint32_t version = kDatasetVersion;
  std::uint64_t num_vectors = 0;
  std::uint64_t num_fields = 0;
  bool sparse = false;
  std::uint32_t encoding = kEncodingSplitPlane;

  std::uint64_t payload_bytes() const { return num_vectors * 2 * words_for(num_fields) * 8; }
};

void write_dataset(const PackedVectorSet& set, const std::filesystem::path& path);
PackedVectorSet read_dataset(const std::filesystem::path& path);

/// Validates the header and the file length against it.
DatasetHeader read_dataset_header(const std::filesystem::path& path);

/// Reads only vectors [vectors) restricted to fields [fields); seeks past
/// everything else.
PackedVectorSet read_dataset_range(const std::filesystem::path& path, Range vectors, Range fields);

/// Permutation record: magic "CCCPERM1", u64 n, n x u64 forward map.
void write_permutation(const VectorPermutation& perm, const std::filesystem::path& path);
VectorPermutation read_permutation(const std::filesystem::path& path);

/// Plain-text element list: one vector per line, whitespace-separated
/// tokens "00", "01", "10", "11"; in sparse mode "." (or "NA") marks a
/// missing entry.
PackedVectorSet read_element_text(const std::filesystem::path& path, bool sparse);

/// Per-rank access to a dataset. Implementations must be safe to call from
/// several threads at once.
class TileSource {
 public:
  virtual ~TileSource() = default;
  virtual std::size_t num_vectors() const = 0;
  virtual std::size_t num_fields() const = 0;
  virtual bool sparse() const = 0;
  virtual PackedVectorSet read(Range vectors, Range fields) const = 0;
};

class InMemorySource final : public TileSource {
 public:
  explicit InMemorySource(const PackedVectorSet& set) : set_(&set) {}
  std::size_t num_vectors() const override { return set_->num_vectors(); }
  std::size_t num_fields() const override { return set_->num_fields(); }
  bool sparse() const override { return set_->sparse(); }
  PackedVectorSet read(Range vectors, Range fields) const override {
    return set_->slice(vectors, fields);
  }

 private:
  const PackedVectorSet* set_;
};

class FileSource final : public TileSource {
 public:
  explicit FileSource(std::filesystem::path path);
  std::size_t num_vectors() const override { return header_.num_vectors; }
  std::size_t num_fields() const override { return header_.num_fields; }
  bool sparse() const override { return header_.sparse; }
  PackedVectorSet read(Range vectors, Range fields) const override;

 private:
  std::filesystem::path path_;
  DatasetHeader header_;
};

}  // namespace ccc
