#include "oodkit/react.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "oodkit/error.hpp"
#include "oodkit/parallel.hpp"

namespace oodkit {

ReactConfig ReactConfig::threshold(float c) {
  if (!std::isfinite(c)) throw Error(Errc::invalid_argument, "ReAct threshold must be finite");
  return ReactConfig(Mode::threshold, c);
}

ReactConfig ReactConfig::percentile(double p) {
  if (!(p > 0.0 && p < 100.0)) {
    throw Error(Errc::invalid_argument, "ReAct percentile must lie in (0, 100)");
  }
  return ReactConfig(Mode::percentile, p);
}

std::string to_string(ReactConfig::Mode mode) {
  switch (mode) {
    case ReactConfig::Mode::disabled: return "none";
    case ReactConfig::Mode::threshold: return "threshold";
    case ReactConfig::Mode::percentile: return "percentile";
  }
  return "none";
}

FeatureMatrix apply_react(const FeatureMatrix& features, float c, unsigned threads) {
  if (!std::isfinite(c)) throw Error(Errc::invalid_argument, "ReAct threshold must be finite");
  FeatureMatrix out = features;
  auto dst = out.values();
  detail::parallel_chunks(features.rows(), threads, [&](std::size_t begin, std::size_t end) {
    const std::size_t cols = features.cols();
    for (std::size_t i = begin * cols; i < end * cols; ++i) dst[i] = std::min(dst[i], c);
  });
  return out;
}

float calibrate_threshold(const FeatureMatrix& id_features, double p) {
  require_nonempty(id_features, "calibration features");
  if (!(p > 0.0 && p < 100.0)) {
    throw Error(Errc::invalid_argument, "percentile must lie in (0, 100)");
  }
  std::vector<float> sorted(id_features.values().begin(), id_features.values().end());
  std::sort(sorted.begin(), sorted.end());

  const std::size_t n = sorted.size();
  const double rank = 1.0 + (p / 100.0) * static_cast<double>(n - 1);  // 1-based
  const double floor_rank = std::floor(rank);
  const auto lo = std::min(static_cast<std::size_t>(floor_rank) - 1, n - 1);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = rank - floor_rank;
  const double lo_v = sorted[lo];
  const double c = lo_v + frac * (static_cast<double>(sorted[hi]) - lo_v);
  return static_cast<float>(c);
}

double coverage_fraction(const FeatureMatrix& id_features, float c) {
  require_nonempty(id_features, "coverage features");
  const auto values = id_features.values();
  const auto below = std::count_if(values.begin(), values.end(), [c](float v) { return v <= c; });
  return static_cast<double>(below) / static_cast<double>(values.size());
}

std::optional<float> resolve_clamp(const ReactConfig& config, const FeatureMatrix* calibration) {
  switch (config.mode()) {
    case ReactConfig::Mode::disabled:
      return std::nullopt;
    case ReactConfig::Mode::threshold:
      return static_cast<float>(config.value());
    case ReactConfig::Mode::percentile:
      if (calibration == nullptr) {
        throw Error(Errc::invalid_argument, "percentile mode needs calibration features");
      }
      return calibrate_threshold(*calibration, config.value());
  }
  return std::nullopt;
}

}  // namespace oodkit
