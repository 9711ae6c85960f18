#include "ccc/checksum.hpp"

#include <array>
#include <cstdio>

#include "ccc/error.hpp"

namespace ccc {

std::uint64_t fmix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

Checksum::u128 Checksum::record_digest(std::span<const std::uint64_t> fields) {
  std::uint64_t lane0 = 0x243f6a8885a308d3ULL ^ fields.size();
  std::uint64_t lane1 = 0x13198a2e03707344ULL;
  for (std::size_t n = 0; n < fields.size(); ++n) {
    lane0 = (lane0 ^ fields[n]) * 0x100000001b3ULL + n;
    lane1 = ((lane1 << 23) | (lane1 >> 41)) + (fields[n] ^ 0xa4093822299f31d0ULL) * 0x9e3779b97f4a7c15ULL;
  }
  lane0 = fmix64(fmix64(lane0));
  lane1 = fmix64(fmix64(lane1 ^ lane0));
  return (static_cast<u128>(lane1) << 64) | lane0;
}

void Checksum::add_record(std::span<const std::uint64_t> fields) { acc_ += record_digest(fields); }

void Checksum::add_pair(std::uint64_t i, std::uint64_t j, const TallyTable2& tally) {
  const std::array<std::uint64_t, 7> f{2, i, j, tally.t[0], tally.t[1], tally.t[2], tally.t[3]};
  add_record(f);
}

void Checksum::add_triple(std::uint64_t i, std::uint64_t j, std::uint64_t k,
                          const TallyTable3& tally) {
  std::array<std::uint64_t, 12> f{3, i, j, k};
  for (std::size_t n = 0; n < 8; ++n) f[4 + n] = tally.t[n];
  add_record(f);
}

std::string Checksum::hex() const {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(high()),
                static_cast<unsigned long long>(low()));
  return buf;
}

Checksum Checksum::from_hex(const std::string& hex) {
  if (hex.size() != 32) throw ValidationError("checksum must be 32 hex digits");
  Checksum c;
  for (char ch : hex) {
    unsigned v;
    if (ch >= '0' && ch <= '9')
      v = static_cast<unsigned>(ch - '0');
    else if (ch >= 'a' && ch <= 'f')
      v = static_cast<unsigned>(ch - 'a' + 10);
    else
      throw ValidationError("bad hex digit in checksum");
    c.acc_ = (c.acc_ << 4) | v;
  }
  return c;
}

}  // namespace ccc
