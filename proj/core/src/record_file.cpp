#include "ccc/record_file.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "ccc/error.hpp"
#include "json.hpp"

namespace ccc {

namespace {

using nlohmann::json;

void put_u64(std::string& buf, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= std::uint64_t{static_cast<unsigned char>(p[b])} << (8 * b);
  return v;
}

void put_value(std::string& buf, double v, Precision precision) {
  if (precision == Precision::f32) {
    const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((u >> (8 * b)) & 0xff));
  } else {
    put_u64(buf, std::bit_cast<std::uint64_t>(v));
  }
}

std::string rank_file_name(std::size_t rank) {
  char name[32];
  std::snprintf(name, sizeof name, "rank_%05zu.ccc", rank);
  return name;
}

std::size_t record_bytes(int num_way, Precision precision) {
  const std::size_t values = num_way == 2 ? 4 : 8;
  return 8 * static_cast<std::size_t>(num_way) + values * (precision == Precision::f32 ? 4 : 8);
}

void append(std::string& buf, const Record2& r, Precision p) {
  put_u64(buf, r.i);
  put_u64(buf, r.j);
  for (double v : r.ccc) put_value(buf, v, p);
}

void append(std::string& buf, const Record3& r, Precision p) {
  put_u64(buf, r.i);
  put_u64(buf, r.j);
  put_u64(buf, r.k);
  for (double v : r.ccc) put_value(buf, v, p);
}

template <typename Record>
Manifest write_outputs(const RunOutput<Record>& out, int num_way, Precision precision,
                       double threshold, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FormatError(FormatErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());

  Manifest m;
  m.num_way = num_way;
  m.precision = precision;
  m.threshold = threshold;
  m.comparisons = out.stats.comparisons;
  for (const auto& rank : out.ranks) {
    RankFileEntry e;
    e.rank = rank.rank;
    e.file = rank_file_name(rank.rank);
    e.checksum = rank.checksum;
    std::string buf;
    for (const auto& r : rank.records)
      if (keep_record(r.max_value(), threshold)) {
        append(buf, r, precision);
        ++e.records;
      }
    std::ofstream f(dir / e.file, std::ios::binary | std::ios::trunc);
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw FormatError(FormatErrorKind::io, "cannot write " + (dir / e.file).string());
    m.checksum += e.checksum;
    m.ranks.push_back(std::move(e));
  }
  write_manifest(m, dir / "manifest.json");
  return m;
}

}  // namespace

Manifest write_run_outputs(const RunOutput2& out, Precision precision, double threshold,
                           const std::filesystem::path& dir) {
  return write_outputs(out, 2, precision, threshold, dir);
}

Manifest write_run_outputs(const RunOutput3& out, Precision precision, double threshold,
                           const std::filesystem::path& dir) {
  return write_outputs(out, 3, precision, threshold, dir);
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  json j;
  j["num_way"] = m.num_way;
  j["precision"] = m.precision == Precision::f32 ? "single" : "double";
  j["threshold"] = std::isinf(m.threshold) ? json("inf") : json(m.threshold);
  j["comparisons"] = m.comparisons;
  j["checksum"] = m.checksum.hex();
  j["ranks"] = json::array();
  for (const auto& e : m.ranks)
    j["ranks"].push_back(
        {{"rank", e.rank}, {"file", e.file}, {"records", e.records}, {"checksum", e.checksum.hex()}});
  std::ofstream f(path, std::ios::trunc);
  f << j.dump(2) << "\n";
  if (!f) throw FormatError(FormatErrorKind::io, "cannot write " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw FormatError(FormatErrorKind::io, "cannot open " + path.string());
  Manifest m;
  try {
    const json j = json::parse(f);
    m.num_way = j.at("num_way").get<int>();
    m.precision = j.at("precision").get<std::string>() == "single" ? Precision::f32 : Precision::f64;
    const auto& t = j.at("threshold");
    m.threshold = t.is_string() ? INFINITY : t.get<double>();
    m.comparisons = j.at("comparisons").get<std::uint64_t>();
    m.checksum = Checksum::from_hex(j.at("checksum").get<std::string>());
    for (const auto& r : j.at("ranks"))
      m.ranks.push_back({r.at("rank").get<std::size_t>(), r.at("file").get<std::string>(),
                         r.at("records").get<std::uint64_t>(),
                         Checksum::from_hex(r.at("checksum").get<std::string>())});
  } catch (const json::exception& e) {
    throw FormatError(FormatErrorKind::header_mismatch, "bad manifest: " + std::string(e.what()));
  }
  return m;
}

std::vector<StoredRecord> read_record_file(const std::filesystem::path& path, int num_way,
                                           Precision precision) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError(FormatErrorKind::io, "cannot open " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const std::size_t size = record_bytes(num_way, precision);
  if (buf.size() % size != 0)
    throw FormatError(FormatErrorKind::truncated_payload, "partial record in " + path.string());
  std::vector<StoredRecord> out;
  for (std::size_t off = 0; off < buf.size(); off += size) {
    const char* p = buf.data() + off;
    StoredRecord r;
    for (int n = 0; n < num_way; ++n, p += 8) r.index[static_cast<std::size_t>(n)] = get_u64(p);
    const std::size_t values = num_way == 2 ? 4 : 8;
    for (std::size_t n = 0; n < values; ++n) {
      if (precision == Precision::f32) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= std::uint32_t{static_cast<unsigned char>(p[b])} << (8 * b);
        r.values.push_back(std::bit_cast<float>(u));
        p += 4;
      } else {
        r.values.push_back(std::bit_cast<double>(get_u64(p)));
        p += 8;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace ccc
