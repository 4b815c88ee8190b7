// oodkit command-line driver.
//
// Exit codes: 0 success, 1 runtime or data error, 2 usage error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oodkit/error.hpp"
#include "oodkit/metrics.hpp"
#include "oodkit/pipeline.hpp"
#include "oodkit/react.hpp"
#include "oodkit/scorer.hpp"
#include "oodkit/synth.hpp"
#include "oodkit/tensor_store.hpp"

namespace fs = std::filesystem;
using namespace oodkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path sidecar_path(const fs::path& scores) { return fs::path(scores.string() + ".json"); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(Errc::io, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(Errc::io, "write failed for " + path.string());
}

std::vector<FeatureMatrix> load_views(const std::vector<std::string>& paths) {
  std::vector<FeatureMatrix> views;
  for (const auto& p : paths) views.push_back(load_features(p));
  return views;
}

void require_percentile(double p) {
  if (!(p > 0.0 && p < 100.0)) {
    throw UsageError("--react-percentile must lie strictly between 0 and 100");
  }
}

// Shared --react-* handling for `score`.
struct ReactFlags {
  std::optional<float> c;
  std::optional<double> p;
  bool disabled = false;
  std::string calib_features;

  void add_to(CLI::App* app) {
    auto* c_opt = app->add_option("--react-c", c, "ReAct clamp threshold (default " +
                                                      std::to_string(kPresetReactThreshold) + ")");
    auto* p_opt = app->add_option("--react-percentile", p,
                                  "calibrate c as this percentile of --calib-features");
    auto* off = app->add_flag("--no-react", disabled, "disable ReAct clamping");
    c_opt->excludes(p_opt)->excludes(off);
    p_opt->excludes(off);
    app->add_option("--calib-features", calib_features,
                    "ID features used for percentile calibration");
  }

  ReactConfig config() const {
    if (disabled) return ReactConfig::disabled();
    if (p) {
      require_percentile(*p);
      if (calib_features.empty()) throw UsageError("--react-percentile needs --calib-features");
      return ReactConfig::percentile(*p);
    }
    const float value = c.value_or(kPresetReactThreshold);
    if (!std::isfinite(value)) throw UsageError("--react-c must be finite");
    return ReactConfig::threshold(value);
  }
};

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string features;
  double percentile = 90.0;
  bool pretty = false;
};

int run_calibrate(const CalibrateArgs& a) {
  require_percentile(a.percentile);
  const auto features = load_features(a.features);
  const float c = calibrate_threshold(features, a.percentile);
  const double coverage = coverage_fraction(features, c);
  if (a.pretty) {
    std::printf("percentile %.6g -> c = %.9g (coverage %.6f over %zu activations)\n", a.percentile,
                c, coverage, features.values().size());
  } else {
    nlohmann::ordered_json j;
    j["percentile"] = a.percentile;
    j["c"] = c;
    j["coverage"] = coverage;
    j["n_values"] = features.values().size();
    std::cout << j.dump() << '\n';
  }
  return kExitOk;
}

// -------------------------------------------------------------------- score

struct ScoreArgs {
  std::vector<std::string> features;
  std::string head_weights;
  std::string head_bias;
  ReactFlags react;
  double temperature = kPresetTemperature;
  std::string out;
  std::string logits_out;
  std::string predictions_out;
  unsigned threads = 1;
};

int run_score(const ScoreArgs& a) {
  if (!(a.temperature > 0.0)) throw UsageError("--temperature must be positive");
  const auto react = a.react.config();
  const auto views = load_views(a.features);
  const auto head = load_head(a.head_weights, a.head_bias);

  std::optional<FeatureMatrix> calibration;
  if (react.mode() == ReactConfig::Mode::percentile) {
    calibration = load_features(a.react.calib_features);
  }
  const auto clamp = resolve_clamp(react, calibration ? &*calibration : nullptr);
  const auto scored = score_views(views, head, clamp, a.temperature, a.threads);

  save_scores(a.out, scored.scores);
  if (!a.logits_out.empty()) save_logits(a.logits_out, scored.logits);
  if (!a.predictions_out.empty()) save_labels(a.predictions_out, scored.predictions);

  ReportConfig config;
  config.temperature = a.temperature;
  config.react_mode = react.mode();
  if (react.mode() != ReactConfig::Mode::disabled) config.react_value = react.value();
  config.react_c = clamp;
  config.n_views = views.size();
  const auto sidecar = to_json(config);
  write_text(sidecar_path(a.out), sidecar.dump(2) + "\n");
  std::cout << sidecar.dump() << '\n';
  return kExitOk;
}

// ----------------------------------------------------------------- ensemble

struct EnsembleArgs {
  std::vector<std::string> logits;
  std::string out;
  unsigned threads = 1;
};

int run_ensemble(const EnsembleArgs& a) {
  std::vector<LogitMatrix> views;
  for (const auto& p : a.logits) views.push_back(load_logits(p));
  const auto mean = ensemble_logits(views, a.threads);
  save_logits(a.out, mean);
  nlohmann::ordered_json j;
  j["n_views"] = views.size();
  j["rows"] = mean.rows();
  j["classes"] = mean.cols();
  std::cout << j.dump() << '\n';
  return kExitOk;
}

// ----------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string id_scores;
  std::string ood_scores;
  std::string predictions;
  std::string labels;
  std::optional<double> tpr_target;
  bool pretty = false;
};

void print_reports(const std::vector<EvalReport>& reports, bool pretty) {
  if (pretty) {
    std::cout << format_table(reports);
    return;
  }
  for (const auto& r : reports) std::cout << to_json(r).dump() << '\n';
}

int run_evaluate(const EvaluateArgs& a) {
  if (a.predictions.empty() != a.labels.empty()) {
    throw UsageError("--predictions and --labels must be given together");
  }
  ReportConfig config;
  const auto sidecar = sidecar_path(a.id_scores);
  if (fs::exists(sidecar)) {
    std::ifstream f(sidecar);
    nlohmann::json j;
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::invalid_argument, sidecar.string() + ": " + e.what());
    }
    config = config_from_json(j);
  }
  if (a.tpr_target) {
    if (!(*a.tpr_target > 0.0 && *a.tpr_target <= 1.0)) {
      throw UsageError("--tpr-target must lie in (0, 1]");
    }
    config.tpr_target = *a.tpr_target;
  }

  const auto id = load_scores(a.id_scores);
  const auto ood = load_scores(a.ood_scores);
  LabelVector predictions;
  LabelVector labels;
  std::optional<LabelledPredictions> labelled;
  if (!a.labels.empty()) {
    predictions = load_labels(a.predictions);
    labels = load_labels(a.labels);
    labelled = LabelledPredictions{predictions, labels};
  }
  print_reports({evaluate(id, ood, labelled, config)}, a.pretty);
  return kExitOk;
}

// -------------------------------------------------------------------- sweep

struct SweepArgs {
  std::vector<std::string> id_features;
  std::vector<std::string> ood_features;
  std::string head_weights;
  std::string head_bias;
  std::string labels;
  std::string calib_features;
  bool no_react = false;
  std::vector<double> percentiles;
  std::vector<float> thresholds;
  std::vector<double> temperatures;
  std::vector<std::size_t> view_counts;
  double tpr_target = 0.95;
  std::string out;
  std::string table;
  bool pretty = false;
  unsigned threads = 1;
};

int run_sweep(const SweepArgs& a) {
  SweepGrid grid;
  grid.react.clear();
  if (a.no_react) grid.react.push_back(ReactConfig::disabled());
  for (double p : a.percentiles) {
    require_percentile(p);
    grid.react.push_back(ReactConfig::percentile(p));
  }
  for (float c : a.thresholds) {
    if (!std::isfinite(c)) throw UsageError("--react-c must be finite");
    grid.react.push_back(ReactConfig::threshold(c));
  }
  if (grid.react.empty()) grid.react.push_back(ReactConfig::threshold(kPresetReactThreshold));
  if (!a.temperatures.empty()) grid.temperatures = a.temperatures;
  for (double t : grid.temperatures) {
    if (!(t > 0.0)) throw UsageError("--temperature must be positive");
  }
  grid.view_counts = a.view_counts;
  if (!(a.tpr_target > 0.0 && a.tpr_target <= 1.0)) {
    throw UsageError("--tpr-target must lie in (0, 1]");
  }

  const auto id_views = load_views(a.id_features);
  const auto ood_views = load_views(a.ood_features);
  const auto head = load_head(a.head_weights, a.head_bias);
  std::optional<LabelVector> labels;
  if (!a.labels.empty()) labels = load_labels(a.labels);
  std::optional<FeatureMatrix> calibration;
  if (!a.calib_features.empty()) calibration = load_features(a.calib_features);

  const SweepInputs inputs{
      .id_views = id_views,
      .ood_views = ood_views,
      .head = &head,
      .id_labels = labels ? &*labels : nullptr,
      .calibration = calibration ? &*calibration : nullptr,
      .tpr_target = a.tpr_target,
      .threads = a.threads,
  };
  const auto reports = sweep(inputs, grid);

  if (!a.out.empty()) {
    std::string lines;
    for (const auto& r : reports) lines += to_json(r).dump() + "\n";
    write_text(a.out, lines);
  }
  if (!a.table.empty()) write_text(a.table, format_table(reports));
  print_reports(reports, a.pretty);
  return kExitOk;
}

// ---------------------------------------------------------------- gen-synth

struct GenSynthArgs {
  synth::SynthSpec spec;
  std::string out;
};

int run_gen_synth(const GenSynthArgs& a) {
  try {
    synth::validate(a.spec);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto data = synth::generate(a.spec);
  synth::write_fixture(a.out, a.spec, data);
  std::cout << synth::to_json(a.spec).dump() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Post-hoc OOD scoring: ReAct clamping, temperature-scaled MSP, TTA logit "
               "ensembling and AUROC/FPR95 evaluation over .oodt tensor files"};
  app.require_subcommand(1);

  CalibrateArgs calibrate;
  auto* cal = app.add_subcommand("calibrate", "percentile-calibrate the ReAct threshold c");
  cal->add_option("--features", calibrate.features, "ID feature tensor (N x m)")->required();
  cal->add_option("--react-percentile,--percentile", calibrate.percentile, "percentile p in (0, 100)")
      ->required();
  cal->add_flag("--pretty", calibrate.pretty, "human-readable output");

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "clamp, apply head, ensemble views, write MSP scores");
  sc->add_option("--features", score.features, "feature tensor per view (repeatable)")
      ->required()
      ->take_all();
  sc->add_option("--head-weights", score.head_weights, "W (m x C)")->required();
  sc->add_option("--head-bias", score.head_bias, "b (C)")->required();
  score.react.add_to(sc);
  sc->add_option("--temperature", score.temperature, "softmax temperature T")
      ->capture_default_str();
  sc->add_option("--out", score.out, "output score tensor")->required();
  sc->add_option("--logits-out", score.logits_out, "also write the ensembled logits");
  sc->add_option("--predictions-out", score.predictions_out, "also write argmax predictions");
  sc->add_option("--threads", score.threads, "worker threads")->capture_default_str();

  EnsembleArgs ensemble;
  auto* en = app.add_subcommand("ensemble", "average logit tensors elementwise");
  en->add_option("--logits", ensemble.logits, "logit tensor per view (repeatable)")
      ->required()
      ->take_all();
  en->add_option("--out", ensemble.out, "output logit tensor")->required();
  en->add_option("--threads", ensemble.threads, "worker threads")->capture_default_str();

  EvaluateArgs evaluate_args;
  auto* ev = app.add_subcommand("evaluate", "AUROC, FPR@95TPR and accuracy from score tensors");
  ev->add_option("--id-scores", evaluate_args.id_scores, "ID score tensor")->required();
  ev->add_option("--ood-scores", evaluate_args.ood_scores, "OOD score tensor")->required();
  ev->add_option("--predictions", evaluate_args.predictions, "predicted ID classes");
  ev->add_option("--labels", evaluate_args.labels, "true ID classes");
  ev->add_option("--tpr-target", evaluate_args.tpr_target, "TPR operating point (default 0.95)");
  ev->add_flag("--pretty", evaluate_args.pretty, "aligned text table instead of JSON");

  SweepArgs sweep_args;
  auto* sw = app.add_subcommand("sweep", "evaluate a grid of ReAct / temperature / view settings");
  sw->add_option("--features", sweep_args.id_features, "ID feature tensor per view")
      ->required()
      ->take_all();
  sw->add_option("--ood-features", sweep_args.ood_features, "OOD feature tensor per view")
      ->required()
      ->take_all();
  sw->add_option("--head-weights", sweep_args.head_weights, "W (m x C)")->required();
  sw->add_option("--head-bias", sweep_args.head_bias, "b (C)")->required();
  sw->add_option("--labels", sweep_args.labels, "true ID classes");
  sw->add_option("--calib-features", sweep_args.calib_features,
                 "features for percentile calibration (default: first ID view)");
  sw->add_flag("--no-react", sweep_args.no_react, "include a grid point without ReAct");
  sw->add_option("--react-percentile", sweep_args.percentiles, "percentile grid")->take_all();
  sw->add_option("--react-c", sweep_args.thresholds, "explicit threshold grid")->take_all();
  sw->add_option("--temperature", sweep_args.temperatures, "temperature grid")->take_all();
  sw->add_option("--views", sweep_args.view_counts, "view-count grid (first k views)")
      ->take_all();
  sw->add_option("--tpr-target", sweep_args.tpr_target, "TPR operating point")
      ->capture_default_str();
  sw->add_option("--out", sweep_args.out, "write JSON lines here");
  sw->add_option("--table", sweep_args.table, "write the text table here");
  sw->add_flag("--pretty", sweep_args.pretty, "print the text table instead of JSON lines");
  sw->add_option("--threads", sweep_args.threads, "worker threads")->capture_default_str();

  GenSynthArgs gen;
  auto& spec = gen.spec;
  auto* gs = app.add_subcommand("gen-synth", "write a synthetic fixture directory");
  gs->add_option("--out", gen.out, "output directory")->required();
  gs->add_option("--seed", spec.seed)->capture_default_str();
  gs->add_option("--n-id", spec.n_id)->capture_default_str();
  gs->add_option("--n-ood", spec.n_ood)->capture_default_str();
  gs->add_option("--dim", spec.dim)->capture_default_str();
  gs->add_option("--classes", spec.classes)->capture_default_str();
  gs->add_option("--id-shift", spec.id_mean_shift)->capture_default_str();
  gs->add_option("--ood-shift", spec.ood_mean_shift)->capture_default_str();
  gs->add_option("--sigma", spec.sigma)->capture_default_str();
  gs->add_option("--heavy-tail-dof", spec.heavy_tail_dof, "0 = Gaussian ID noise")
      ->capture_default_str();
  gs->add_option("--head-noise", spec.head_noise)->capture_default_str();
  gs->add_option("--views", spec.n_views)->capture_default_str();
  gs->add_option("--view-sigma", spec.view_sigma)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*cal) return run_calibrate(calibrate);
    if (*sc) return run_score(score);
    if (*en) return run_ensemble(ensemble);
    if (*ev) return run_evaluate(evaluate_args);
    if (*sw) return run_sweep(sweep_args);
    if (*gs) return run_gen_synth(gen);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
