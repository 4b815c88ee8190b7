#include "oodkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include "oodkit/error.hpp"

namespace oodkit {
namespace {

void require_sides(std::span<const float> id_scores, std::span<const float> ood_scores) {
  if (id_scores.empty()) throw Error(Errc::invalid_argument, "no ID scores");
  if (ood_scores.empty()) throw Error(Errc::invalid_argument, "no OOD scores");
  require_finite(id_scores, "ID scores");
  require_finite(ood_scores, "OOD scores");
}

template <class T>
nlohmann::ordered_json nullable(const std::optional<T>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

ReactConfig::Mode mode_from_string(const std::string& s) {
  if (s == "threshold") return ReactConfig::Mode::threshold;
  if (s == "percentile") return ReactConfig::Mode::percentile;
  if (s == "none") return ReactConfig::Mode::disabled;
  throw Error(Errc::invalid_argument, "unknown react_mode '" + s + "'");
}

template <class T>
std::optional<T> optional_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

double auroc(std::span<const float> id_scores, std::span<const float> ood_scores) {
  require_sides(id_scores, ood_scores);
  std::vector<float> ood(ood_scores.begin(), ood_scores.end());
  std::sort(ood.begin(), ood.end());
  // Twice the Mann-Whitney U statistic, kept integral so the result is exact.
  std::uint64_t twice_u = 0;
  for (float s : id_scores) {
    const auto [lo, hi] = std::equal_range(ood.begin(), ood.end(), s);
    twice_u += 2 * static_cast<std::uint64_t>(lo - ood.begin()) + static_cast<std::uint64_t>(hi - lo);
  }
  const std::uint64_t pairs = static_cast<std::uint64_t>(id_scores.size()) * ood_scores.size();
  return static_cast<double>(twice_u) / static_cast<double>(2 * pairs);
}

FprAtTpr fpr_at_tpr(std::span<const float> id_scores, std::span<const float> ood_scores,
                    double tpr_target) {
  require_sides(id_scores, ood_scores);
  if (!(tpr_target > 0.0 && tpr_target <= 1.0)) {
    throw Error(Errc::invalid_argument, "TPR target must lie in (0, 1]");
  }
  const std::size_t n = id_scores.size();
  const auto n_d = static_cast<double>(n);
  // Smallest k with k/n >= target in double arithmetic; the ceil guess can be
  // off by one when target*n lands a rounding error away from an integer.
  auto k = static_cast<std::size_t>(std::ceil(tpr_target * n_d));
  k = std::clamp<std::size_t>(k, 1, n);
  while (k > 1 && static_cast<double>(k - 1) / n_d >= tpr_target) --k;
  while (k < n && static_cast<double>(k) / n_d < tpr_target) ++k;

  std::vector<float> sorted(id_scores.begin(), id_scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   sorted.end(), std::greater<>());
  const float tau = sorted[k - 1];

  const auto at_least = [tau](float s) { return s >= tau; };
  const auto id_hits = std::count_if(id_scores.begin(), id_scores.end(), at_least);
  const auto ood_hits = std::count_if(ood_scores.begin(), ood_scores.end(), at_least);
  return FprAtTpr{
      .fpr = static_cast<double>(ood_hits) / static_cast<double>(ood_scores.size()),
      .tpr = static_cast<double>(id_hits) / n_d,
      .tau = tau,
  };
}

double id_accuracy(std::span<const std::uint32_t> predictions,
                   std::span<const std::uint32_t> truth) {
  if (predictions.size() != truth.size()) {
    throw Error(Errc::shape_mismatch, std::to_string(predictions.size()) + " predictions vs " +
                                          std::to_string(truth.size()) + " labels");
  }
  if (predictions.empty()) throw Error(Errc::invalid_argument, "no predictions");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predictions[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

EvalReport evaluate(std::span<const float> id_scores, std::span<const float> ood_scores,
                    std::optional<LabelledPredictions> labelled, const ReportConfig& config) {
  EvalReport report;
  report.auroc = auroc(id_scores, ood_scores);
  const auto op = fpr_at_tpr(id_scores, ood_scores, config.tpr_target);
  report.fpr_at_95tpr = op.fpr;
  report.tau_at_95tpr = op.tau;
  if (labelled) {
    if (labelled->predictions.size() != id_scores.size()) {
      throw Error(Errc::shape_mismatch, "prediction count differs from ID score count");
    }
    report.id_accuracy = id_accuracy(labelled->predictions, labelled->truth);
  }
  report.n_id = id_scores.size();
  report.n_ood = ood_scores.size();
  report.config = config;
  return report;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["auroc"] = report.auroc;
  j["fpr_at_95tpr"] = report.fpr_at_95tpr;
  j["id_accuracy"] = nullable(report.id_accuracy);
  j["tau_at_95tpr"] = report.tau_at_95tpr;
  j["n_id"] = report.n_id;
  j["n_ood"] = report.n_ood;
  const auto config = to_json(report.config);
  for (const auto& [key, value] : config.items()) j[key] = value;
  return j;
}

nlohmann::ordered_json to_json(const ReportConfig& config) {
  nlohmann::ordered_json j;
  j["temperature"] = nullable(config.temperature);
  j["react_mode"] = to_string(config.react_mode);
  j["react_value"] = nullable(config.react_value);
  j["n_views"] = nullable(config.n_views);
  j["react_c"] = nullable(config.react_c);
  j["tpr_target"] = config.tpr_target;
  return j;
}

ReportConfig config_from_json(const nlohmann::json& j) {
  try {
    ReportConfig c;
    c.temperature = optional_field<double>(j, "temperature");
    c.react_mode = mode_from_string(j.value("react_mode", std::string("none")));
    c.react_value = optional_field<double>(j, "react_value");
    c.react_c = optional_field<float>(j, "react_c");
    c.n_views = optional_field<std::size_t>(j, "n_views");
    c.tpr_target = j.value("tpr_target", 0.95);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("bad report config: ") + e.what());
  }
}

std::string format_table(std::span<const EvalReport> reports) {
  std::ostringstream out;
  const auto opt = [](const auto& v, int precision) {
    std::ostringstream s;
    if (v) s << std::fixed << std::setprecision(precision) << *v;
    else s << "-";
    return s.str();
  };
  out << std::left << std::setw(11) << "react" << std::right << std::setw(12) << "value"
      << std::setw(14) << "c" << std::setw(7) << "T" << std::setw(6) << "views" << std::setw(9)
      << "AUROC" << std::setw(9) << "FPR" << std::setw(12) << "tau" << std::setw(9) << "ACC"
      << std::setw(8) << "n_id" << std::setw(8) << "n_ood" << '\n';
  for (const auto& r : reports) {
    const auto& c = r.config;
    out << std::left << std::setw(11) << to_string(c.react_mode) << std::right << std::setw(12)
        << opt(c.react_value, 4) << std::setw(14) << opt(c.react_c, 6) << std::setw(7)
        << opt(c.temperature, 3) << std::setw(6) << opt(c.n_views, 0) << std::fixed
        << std::setprecision(4) << std::setw(9) << r.auroc << std::setw(9) << r.fpr_at_95tpr
        << std::setprecision(6) << std::setw(12) << r.tau_at_95tpr << std::setw(9)
        << opt(r.id_accuracy, 4) << std::setw(8) << r.n_id << std::setw(8) << r.n_ood << '\n';
  }
  return out.str();
}

}  // namespace oodkit
