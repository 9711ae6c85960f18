#include "ccc/run_config.hpp"

#include <cmath>

#include "ccc/error.hpp"

namespace ccc {

void RunConfig::validate() const {
  params().validate();
  if (input.empty() && (n_v == 0 || n_f == 0))
    throw ValidationError("n_v and n_f are required for synthetic data");
  if (n_pf == 0 || n_pv == 0 || n_pr == 0) throw ValidationError("rank counts must be positive");
  if (n_st == 0 || n_phases == 0) throw ValidationError("n_st and n_phases must be positive");
  if (stage && *stage >= n_st) throw ValidationError("--stage must be less than --n-st");
  if (phase && *phase >= n_phases) throw ValidationError("--phase must be less than --n-phases");
  if (std::isnan(threshold) || threshold < 0) throw ValidationError("threshold must be >= 0");
  if (!(missing_rate >= 0 && missing_rate <= 1))
    throw ValidationError("missing rate must be in [0, 1]");
  if (num_way == 2 && stage) throw ValidationError("--stage applies to 3-way runs");
  if (num_way == 3 && phase) throw ValidationError("--phase applies to 2-way runs");
}

EngineKind parse_engine(const std::string& name) {
  if (name == "reference") return EngineKind::reference;
  if (name == "kernel") return EngineKind::kernel;
  if (name == "multi" || name == "multi-rank") return EngineKind::multi_rank;
  throw ValidationError("unknown engine: " + name);
}

SyntheticKind parse_synthetic(const std::string& name) {
  if (name == "random") return SyntheticKind::random;
  if (name == "verifiable") return SyntheticKind::verifiable;
  throw ValidationError("unknown synthetic kind: " + name);
}

Precision parse_precision(const std::string& name) {
  if (name == "single") return Precision::f32;
  if (name == "double") return Precision::f64;
  throw ValidationError("precision must be single or double");
}

double parse_threshold(const std::string& text) {
  if (text == "inf" || text == "infinity" || text == "∞")
    return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ValidationError("bad threshold: " + text);
  }
  if (used != text.size() || std::isnan(v) || v < 0) throw ValidationError("bad threshold: " + text);
  return v;
}

}  // namespace ccc
