#include "ccc/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "ccc/error.hpp"

namespace ccc {

namespace {

constexpr char kPermMagic[8] = {'C', 'C', 'C', 'P', 'E', 'R', 'M', '1'};

template <typename T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    T r = 0;
    for (std::size_t n = 0; n < sizeof(T); ++n) r = (r << 8) | ((v >> (8 * n)) & 0xff);
    return r;
  }
  return v;
}

template <typename T>
void put(std::ostream& os, T v) {
  v = to_le(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof v);
  return to_le(v);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError(FormatErrorKind::io, "cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError(FormatErrorKind::io, "cannot open " + path.string());
  return is;
}

void read_words(std::ifstream& is, std::uint64_t offset, std::span<std::uint64_t> out,
                const std::filesystem::path& path) {
  is.seekg(static_cast<std::streamoff>(offset));
  is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size() * 8));
  if (static_cast<std::size_t>(is.gcount()) != out.size() * 8)
    throw FormatError(FormatErrorKind::truncated_payload, path.string() + ": truncated payload");
  if constexpr (std::endian::native == std::endian::big)
    for (auto& w : out) w = to_le(w);
}

}  // namespace

void write_dataset(const PackedVectorSet& set, const std::filesystem::path& path) {
  auto os = open_out(path);
  os.write(kDatasetMagic, 8);
  put<std::uint32_t>(os, kDatasetVersion);
  put<std::uint32_t>(os, (set.sparse() ? 1U : 0U) | (kEncodingSplitPlane << 8));
  put<std::uint64_t>(os, set.num_vectors());
  put<std::uint64_t>(os, set.num_fields());
  for (auto w : set.words()) put<std::uint64_t>(os, w);
  if (!os) throw FormatError(FormatErrorKind::io, "write failed: " + path.string());
}

DatasetHeader read_dataset_header(const std::filesystem::path& path) {
  auto is = open_in(path);
  std::array<unsigned char, kDatasetHeaderBytes> raw{};
  is.read(reinterpret_cast<char*>(raw.data()), raw.size());
  if (static_cast<std::size_t>(is.gcount()) < 8 || std::memcmp(raw.data(), kDatasetMagic, 8) != 0)
    throw FormatError(FormatErrorKind::bad_magic, path.string() + ": not a packed dataset");
  if (static_cast<std::size_t>(is.gcount()) != raw.size())
    throw FormatError(FormatErrorKind::truncated_payload, path.string() + ": truncated header");
  DatasetHeader h;
  h.version = get<std::uint32_t>(raw.data() + 8);
  if (h.version != kDatasetVersion)
    throw FormatError(FormatErrorKind::bad_version,
                      path.string() + ": unsupported version " + std::to_string(h.version));
  const auto flags = get<std::uint32_t>(raw.data() + 12);
  h.sparse = (flags & 1U) != 0;
  h.encoding = (flags >> 8) & 0xffU;
  if (h.encoding != kEncodingSplitPlane || (flags & ~0xff01U) != 0)
    throw FormatError(FormatErrorKind::header_mismatch, path.string() + ": unknown flags");
  h.num_vectors = get<std::uint64_t>(raw.data() + 16);
  h.num_fields = get<std::uint64_t>(raw.data() + 24);
  if (h.num_vectors == 0 || h.num_fields == 0)
    throw FormatError(FormatErrorKind::header_mismatch, path.string() + ": empty dimensions");

  const auto size = std::filesystem::file_size(path);
  const auto expected = kDatasetHeaderBytes + h.payload_bytes();
  if (size < expected)
    throw FormatError(FormatErrorKind::truncated_payload,
                      path.string() + ": truncated payload (" + std::to_string(size) + " of " +
                          std::to_string(expected) + " bytes)");
  if (size > expected)
    throw FormatError(FormatErrorKind::header_mismatch,
                      path.string() + ": payload longer than header declares");
  return h;
}

PackedVectorSet read_dataset(const std::filesystem::path& path) {
  const auto h = read_dataset_header(path);
  auto is = open_in(path);
  std::vector<std::uint64_t> words(h.payload_bytes() / 8);
  read_words(is, kDatasetHeaderBytes, words, path);
  try {
    return PackedVectorSet::from_words(h.num_vectors, h.num_fields, h.sparse, std::move(words));
  } catch (const ValidationError& e) {
    throw FormatError(FormatErrorKind::header_mismatch, path.string() + ": " + e.what());
  }
}

PackedVectorSet read_dataset_range(const std::filesystem::path& path, Range vectors,
                                   Range fields) {
  return FileSource(path).read(vectors, fields);
}

FileSource::FileSource(std::filesystem::path path)
    : path_(std::move(path)), header_(read_dataset_header(path_)) {}

PackedVectorSet FileSource::read(Range vectors, Range fields) const {
  if (vectors.end > header_.num_vectors || fields.end > header_.num_fields ||
      vectors.begin > vectors.end || fields.begin > fields.end)
    throw ValidationError("ranged read outside dataset bounds");
  const std::size_t n_words = words_for(header_.num_fields);
  PackedVectorSet out(vectors.size(), fields.size(), header_.sparse);
  if (fields.empty() || vectors.empty()) return out;

  // Only the words covering [fields) are read; extract re-bases them.
  const std::size_t w0 = fields.begin / kBitsPerWord;
  const std::size_t w1 = (fields.end - 1) / kBitsPerWord + 1;
  std::vector<std::uint64_t> buf(w1 - w0);
  auto is = open_in(path_);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    PackedVectorSet one(1, (w1 - w0) * kBitsPerWord, header_.sparse);
    for (int r = 0; r < 2; ++r) {
      const std::uint64_t offset =
          kDatasetHeaderBytes +
          ((2 * (vectors.begin + i) + static_cast<std::size_t>(r)) * n_words + w0) * 8;
      read_words(is, offset, buf, path_);
      std::copy(buf.begin(), buf.end(), one.mutable_plane(0, r).begin());
    }
    const auto part =
        one.slice({0, 1}, {fields.begin - w0 * kBitsPerWord, fields.end - w0 * kBitsPerWord});
    for (int r = 0; r < 2; ++r) {
      auto src = part.plane(0, r);
      std::copy(src.begin(), src.end(), out.mutable_plane(i, r).begin());
    }
  }
  return out;
}

void write_permutation(const VectorPermutation& perm, const std::filesystem::path& path) {
  auto os = open_out(path);
  os.write(kPermMagic, 8);
  put<std::uint64_t>(os, perm.forward.size());
  for (auto p : perm.forward) put<std::uint64_t>(os, p);
  if (!os) throw FormatError(FormatErrorKind::io, "write failed: " + path.string());
}

VectorPermutation read_permutation(const std::filesystem::path& path) {
  auto is = open_in(path);
  std::array<unsigned char, 16> head{};
  is.read(reinterpret_cast<char*>(head.data()), head.size());
  if (is.gcount() < 8 || std::memcmp(head.data(), kPermMagic, 8) != 0)
    throw FormatError(FormatErrorKind::bad_magic, path.string() + ": not a permutation record");
  if (is.gcount() != 16)
    throw FormatError(FormatErrorKind::truncated_payload, path.string() + ": truncated");
  const auto n = get<std::uint64_t>(head.data() + 8);
  if (std::filesystem::file_size(path) != 16 + 8 * n)
    throw FormatError(FormatErrorKind::truncated_payload, path.string() + ": length mismatch");
  VectorPermutation perm;
  perm.forward.resize(n);
  read_words(is, 16, perm.forward, path);
  return perm;
}

PackedVectorSet read_element_text(const std::filesystem::path& path, bool sparse) {
  std::ifstream is(path);
  if (!is) throw FormatError(FormatErrorKind::io, "cannot open " + path.string());
  OptionalElementMatrix rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    auto& row = rows.emplace_back();
    while (ls >> tok) {
      if (tok == "." || tok == "NA") {
        if (!sparse)
          throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                ": missing entries require sparse mode");
        row.emplace_back(std::nullopt);
      } else if (tok.size() == 2 && (tok[0] == '0' || tok[0] == '1') &&
                 (tok[1] == '0' || tok[1] == '1')) {
        row.emplace_back(Element2{static_cast<std::uint8_t>(tok[0] - '0'),
                                  static_cast<std::uint8_t>(tok[1] - '0')});
      } else {
        throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": bad token '" +
                              tok + "'");
      }
    }
  }
  if (sparse) return encode_sparse(rows);
  ElementMatrix dense;
  dense.reserve(rows.size());
  for (const auto& r : rows) {
    auto& d = dense.emplace_back();
    for (const auto& e : r) d.push_back(*e);
  }
  return encode(dense, false);
}

}  // namespace ccc
