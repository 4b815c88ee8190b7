#pragma once

#include <optional>
#include <span>
#include <vector>

#include "oodkit/metrics.hpp"
#include "oodkit/react.hpp"
#include "oodkit/scorer.hpp"

namespace oodkit {

struct ScoredViews {
  LogitMatrix logits;  // ensembled
  ScoreVector scores;
  LabelVector predictions;
};

/// Per view: clamp (when `clamp` is set), apply the head; then average the
/// view logits and take the temperature-scaled MSP.
ScoredViews score_views(std::span<const FeatureMatrix> views, const ClassifierHead& head,
                        std::optional<float> clamp, double temperature, unsigned threads = 1);

struct SweepGrid {
  std::vector<ReactConfig> react = {ReactConfig::disabled()};
  std::vector<double> temperatures = {kPresetTemperature};
  /// Each entry k uses views 0..k-1. Empty means "all views".
  std::vector<std::size_t> view_counts;
};

struct SweepInputs {
  std::span<const FeatureMatrix> id_views;
  std::span<const FeatureMatrix> ood_views;
  const ClassifierHead* head = nullptr;
  const LabelVector* id_labels = nullptr;
  /// Features percentile configs calibrate on; defaults to id_views[0].
  const FeatureMatrix* calibration = nullptr;
  double tpr_target = 0.95;
  unsigned threads = 1;
};

/// One report per grid point, ordered react-major, then temperature, then
/// view count.
std::vector<EvalReport> sweep(const SweepInputs& inputs, const SweepGrid& grid);

}  // namespace oodkit
