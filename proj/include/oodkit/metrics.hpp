#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "oodkit/react.hpp"

namespace oodkit {

/// P(random ID score > random OOD score), ties counted as 1/2.
double auroc(std::span<const float> id_scores, std::span<const float> ood_scores);

struct FprAtTpr {
  double fpr;  // fraction of OOD scores >= tau
  double tpr;  // fraction of ID scores >= tau, never below the target
  float tau;
};

/// tau is the k-th largest ID score, k the smallest count with k/n_id >= target;
/// both rates count scores >= tau. No interpolation between thresholds.
FprAtTpr fpr_at_tpr(std::span<const float> id_scores, std::span<const float> ood_scores,
                    double tpr_target);

double id_accuracy(std::span<const std::uint32_t> predictions, std::span<const std::uint32_t> truth);

/// Pipeline settings echoed into a report. Unset fields serialize as null.
struct ReportConfig {
  std::optional<double> temperature;
  ReactConfig::Mode react_mode = ReactConfig::Mode::disabled;
  std::optional<double> react_value;  // c or p, as configured
  std::optional<float> react_c;       // clamp actually applied
  std::optional<std::size_t> n_views;
  double tpr_target = 0.95;

  bool operator==(const ReportConfig&) const = default;
};

struct EvalReport {
  double auroc = 0.0;
  double fpr_at_95tpr = 0.0;
  std::optional<double> id_accuracy;
  float tau_at_95tpr = 0.0f;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
  ReportConfig config;

  bool operator==(const EvalReport&) const = default;
};

struct LabelledPredictions {
  std::span<const std::uint32_t> predictions;
  std::span<const std::uint32_t> truth;
};

EvalReport evaluate(std::span<const float> id_scores, std::span<const float> ood_scores,
                    std::optional<LabelledPredictions> labelled, const ReportConfig& config);

/// Flat object: auroc, fpr_at_95tpr, id_accuracy, tau_at_95tpr, n_id, n_ood,
/// temperature, react_mode, react_value, n_views, react_c, tpr_target.
nlohmann::ordered_json to_json(const EvalReport& report);

/// Config-only subset of the report keys, used for score-file sidecars.
nlohmann::ordered_json to_json(const ReportConfig& config);
ReportConfig config_from_json(const nlohmann::json& j);

/// Fixed-width text table, one line per report, header first.
std::string format_table(std::span<const EvalReport> reports);

}  // namespace oodkit
