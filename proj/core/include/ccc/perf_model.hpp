#pragma once

// Run time estimator driven by measured per-step component times, and the
// rate arithmetic used in throughput reports.

#include <cstdint>

namespace ccc {

struct PerfModelParams {
  double t_c = 0;    // vector load and setup
  double t_tv = 0;   // vector transfer per step
  double t_tm = 0;   // metrics transfer
  double t_cpu = 0;  // host-side metric work
  double t_g2 = 0;   // one 2-way block product
  double t_g3 = 0;   // one 3-way block step
  double load = 1;   // blocks per worker
  double n_vp = 1;   // vectors per tile
  double n_st = 1;   // stages

  /// Throws ValidationError on negative times or nonpositive n_st.
  void validate() const;
};

/// 2-way: t_c + t_tv + load*t_g2 + t_tm + t_cpu.
/// 3-way: t_c + t_tv + load*(3*((n_vp/6)/n_st)*t_g3 + t_tv + t_tm + t_cpu).
double estimate_time(const PerfModelParams& p, int num_way);

struct RateReport {
  double per_second = 0;
  double per_comparison = 0;
};

/// Throws ValidationError unless elapsed > 0 and count > 0.
RateReport rate_report(double elapsed_seconds, double comparisons);

}  // namespace ccc
