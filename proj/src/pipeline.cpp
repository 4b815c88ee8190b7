#include "oodkit/pipeline.hpp"

#include <string>

#include "oodkit/error.hpp"

namespace oodkit {
namespace {

std::vector<LogitMatrix> view_logits(std::span<const FeatureMatrix> views,
                                     const ClassifierHead& head, std::optional<float> clamp,
                                     unsigned threads) {
  std::vector<LogitMatrix> logits;
  logits.reserve(views.size());
  for (const auto& view : views) {
    logits.push_back(clamp ? compute_logits(apply_react(view, *clamp, threads), head, threads)
                           : compute_logits(view, head, threads));
  }
  return logits;
}

void require_aligned(std::span<const FeatureMatrix> views, const char* what) {
  if (views.empty()) throw Error(Errc::invalid_argument, std::string("no ") + what + " views");
  for (std::size_t v = 0; v < views.size(); ++v) {
    require_nonempty(views[v], what);
    if (views[v].rows() != views[0].rows() || views[v].cols() != views[0].cols()) {
      throw Error(Errc::shape_mismatch, std::string(what) + " view " + std::to_string(v) +
                                            " does not match view 0");
    }
  }
}

}  // namespace

ScoredViews score_views(std::span<const FeatureMatrix> views, const ClassifierHead& head,
                        std::optional<float> clamp, double temperature, unsigned threads) {
  require_aligned(views, "feature");
  const auto per_view = view_logits(views, head, clamp, threads);
  ScoredViews out{.logits = ensemble_logits(per_view, threads), .scores = {}, .predictions = {}};
  out.scores = msp_score(out.logits, temperature, threads);
  out.predictions = predict_class(out.logits, threads);
  return out;
}

std::vector<EvalReport> sweep(const SweepInputs& inputs, const SweepGrid& grid) {
  if (inputs.head == nullptr) throw Error(Errc::invalid_argument, "sweep needs a head");
  require_aligned(inputs.id_views, "ID");
  require_aligned(inputs.ood_views, "OOD");
  if (grid.react.empty() || grid.temperatures.empty()) {
    throw Error(Errc::invalid_argument, "sweep grid is empty");
  }
  const std::size_t max_views = std::min(inputs.id_views.size(), inputs.ood_views.size());
  std::vector<std::size_t> view_counts = grid.view_counts;
  if (view_counts.empty()) {
    if (inputs.id_views.size() != inputs.ood_views.size()) {
      throw Error(Errc::shape_mismatch, "ID and OOD view counts differ");
    }
    view_counts.push_back(max_views);
  }
  for (auto k : view_counts) {
    if (k < 1 || k > max_views) {
      throw Error(Errc::invalid_argument, "view count " + std::to_string(k) + " not in [1, " +
                                              std::to_string(max_views) + "]");
    }
  }
  if (inputs.id_labels) require_labels_below(*inputs.id_labels, inputs.head->classes(), "labels");

  const FeatureMatrix& calibration =
      inputs.calibration ? *inputs.calibration : inputs.id_views.front();

  std::vector<EvalReport> reports;
  for (const auto& react : grid.react) {
    const auto clamp = resolve_clamp(react, &calibration);
    const auto id_logits = view_logits(inputs.id_views, *inputs.head, clamp, inputs.threads);
    const auto ood_logits = view_logits(inputs.ood_views, *inputs.head, clamp, inputs.threads);
    for (double t : grid.temperatures) {
      for (auto k : view_counts) {
        const auto id = ensemble_logits(std::span(id_logits).first(k), inputs.threads);
        const auto ood = ensemble_logits(std::span(ood_logits).first(k), inputs.threads);
        const auto id_scores = msp_score(id, t, inputs.threads);
        const auto ood_scores = msp_score(ood, t, inputs.threads);

        ReportConfig config;
        config.temperature = t;
        config.react_mode = react.mode();
        if (react.mode() != ReactConfig::Mode::disabled) config.react_value = react.value();
        config.react_c = clamp;
        config.n_views = k;
        config.tpr_target = inputs.tpr_target;

        std::optional<LabelledPredictions> labelled;
        LabelVector predictions;
        if (inputs.id_labels) {
          predictions = predict_class(id, inputs.threads);
          labelled = LabelledPredictions{predictions, *inputs.id_labels};
        }
        reports.push_back(evaluate(id_scores, ood_scores, labelled, config));
      }
    }
  }
  return reports;
}

}  // namespace oodkit
