#pragma once

// Order-independent exact checksum over metric records.
//
// Each record (num_way, indices, integer tallies) is folded into a 128-bit
// digest; both 64-bit lanes then go through two rounds of the murmur3
// finalizer and the result is added into the accumulator mod 2^128. Equal
// record multisets give equal checksums however they are ordered or split.

#include <cstdint>
#include <span>
#include <string>

#include "ccc/tally_table.hpp"

namespace ccc {

std::uint64_t fmix64(std::uint64_t x);

class Checksum {
 public:
  using u128 = unsigned __int128;

  void add_record(std::span<const std::uint64_t> fields);
  void add_pair(std::uint64_t i, std::uint64_t j, const TallyTable2& tally);
  void add_triple(std::uint64_t i, std::uint64_t j, std::uint64_t k, const TallyTable3& tally);

  Checksum& operator+=(const Checksum& o) {
    acc_ += o.acc_;
    return *this;
  }
  friend Checksum operator+(Checksum a, const Checksum& b) { return a += b; }
  friend bool operator==(const Checksum&, const Checksum&) = default;

  std::uint64_t high() const { return static_cast<std::uint64_t>(acc_ >> 64); }
  std::uint64_t low() const { return static_cast<std::uint64_t>(acc_); }
  /// 32 lowercase hex digits.
  std::string hex() const;
  static Checksum from_hex(const std::string& hex);

  /// Digest contributed by a single record.
  static u128 record_digest(std::span<const std::uint64_t> fields);

 private:
  u128 acc_ = 0;
};

}  // namespace ccc
