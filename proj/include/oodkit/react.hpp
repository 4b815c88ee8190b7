#pragma once

#include <optional>
#include <string>

#include "oodkit/types.hpp"

namespace oodkit {

/// Clamp threshold from the original tuned EVA-CLIP run.
inline constexpr float kPresetReactThreshold = -0.7685358381271362f;

/// How the clamp threshold c is chosen. A disabled config leaves features
/// untouched.
class ReactConfig {
 public:
  enum class Mode { disabled, threshold, percentile };

  static ReactConfig disabled() { return ReactConfig(Mode::disabled, 0.0); }
  /// Throws Error(invalid_argument) for non-finite c.
  static ReactConfig threshold(float c);
  /// Throws Error(invalid_argument) unless 0 < p < 100.
  static ReactConfig percentile(double p);

  Mode mode() const noexcept { return mode_; }
  /// c in threshold mode, p in percentile mode, 0 when disabled.
  double value() const noexcept { return value_; }

  bool operator==(const ReactConfig&) const = default;

 private:
  ReactConfig(Mode mode, double value) : mode_(mode), value_(value) {}
  Mode mode_;
  double value_;
};

std::string to_string(ReactConfig::Mode mode);

/// Elementwise min(x, c). Input is not modified.
FeatureMatrix apply_react(const FeatureMatrix& features, float c, unsigned threads = 1);

/// p-th percentile of all N*m activations pooled together, with linear
/// interpolation between closest ranks: rank = 1 + (p/100)(n-1) on the
/// ascending sorted values.
float calibrate_threshold(const FeatureMatrix& id_features, double p);

/// Fraction of all activations <= c.
double coverage_fraction(const FeatureMatrix& id_features, float c);

/// Resolves a config to the clamp actually applied: nullopt when disabled,
/// c in threshold mode, calibrate_threshold(calibration, p) in percentile
/// mode. Percentile mode requires calibration features.
std::optional<float> resolve_clamp(const ReactConfig& config, const FeatureMatrix* calibration);

}  // namespace oodkit
