#include "ccc/perf_model.hpp"

#include "ccc/error.hpp"

namespace ccc {

void PerfModelParams::validate() const {
  for (double t : {t_c, t_tv, t_tm, t_cpu, t_g2, t_g3, load, n_vp})
    if (!(t >= 0)) throw ValidationError("performance model inputs must be non-negative");
  if (!(n_st > 0)) throw ValidationError("performance model n_st must be positive");
}

double estimate_time(const PerfModelParams& p, int num_way) {
  p.validate();
  if (num_way == 2) return p.t_c + p.t_tv + p.load * p.t_g2 + p.t_tm + p.t_cpu;
  if (num_way == 3)
    return p.t_c + p.t_tv +
           p.load * (3 * ((p.n_vp / 6) / p.n_st) * p.t_g3 + p.t_tv + p.t_tm + p.t_cpu);
  throw ValidationError("num_way must be 2 or 3");
}

RateReport rate_report(double elapsed_seconds, double comparisons) {
  if (!(elapsed_seconds > 0)) throw ValidationError("elapsed time must be positive");
  if (!(comparisons > 0)) throw ValidationError("comparison count must be positive");
  return {comparisons / elapsed_seconds, elapsed_seconds / comparisons};
}

}  // namespace ccc
