#pragma once

#include <array>
#include <cstdint>
#include <numeric>

namespace ccc {

/// 2x2 table of pairing counts for a vector pair; cell (a,b) holds
/// sum_q rho_i(a) * rho_j(b).
struct TallyTable2 {
  std::array<std::uint64_t, 4> t{};

  std::uint64_t& at(int a, int b) { return t[static_cast<std::size_t>(2 * a + b)]; }
  std::uint64_t at(int a, int b) const { return t[static_cast<std::size_t>(2 * a + b)]; }
  std::uint64_t sum() const { return std::accumulate(t.begin(), t.end(), std::uint64_t{0}); }

  TallyTable2& operator+=(const TallyTable2& o) {
    for (std::size_t n = 0; n < 4; ++n) t[n] += o.t[n];
    return *this;
  }
  TallyTable2 transposed() const { return {{t[0], t[2], t[1], t[3]}}; }
  friend bool operator==(const TallyTable2&, const TallyTable2&) = default;
};

/// 2x2x2 table for a vector triple; cell (a,b,c) holds
/// sum_q rho_i(a) * rho_j(b) * rho_k(c).
struct TallyTable3 {
  std::array<std::uint64_t, 8> t{};

  std::uint64_t& at(int a, int b, int c) { return t[static_cast<std::size_t>(4 * a + 2 * b + c)]; }
  std::uint64_t at(int a, int b, int c) const {
    return t[static_cast<std::size_t>(4 * a + 2 * b + c)];
  }
  std::uint64_t sum() const { return std::accumulate(t.begin(), t.end(), std::uint64_t{0}); }

  TallyTable3& operator+=(const TallyTable3& o) {
    for (std::size_t n = 0; n < 8; ++n) t[n] += o.t[n];
    return *this;
  }

  /// Relabels slots. Input slot s describes the vector that sits in slot
  /// dest[s] of the result.
  TallyTable3 permuted(const std::array<int, 3>& dest) const {
    TallyTable3 r;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          const int out[3] = {a, b, c};
          r.at(a, b, c) = at(out[dest[0]], out[dest[1]], out[dest[2]]);
        }
    return r;
  }
  friend bool operator==(const TallyTable3&, const TallyTable3&) = default;
};

}  // namespace ccc
