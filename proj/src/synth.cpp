#include "oodkit/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "oodkit/error.hpp"
#include "oodkit/tensor_store.hpp"

namespace oodkit::synth {
namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool normalize(Vec& v) {
  const double n = std::sqrt(dot(v, v));
  if (n < 1e-9) return false;
  for (auto& x : v) x /= n;
  return true;
}

Vec random_direction(Sampler& rng, std::size_t dim) {
  Vec v(dim);
  for (auto& x : v) x = rng.normal();
  return v;
}

// Removes the components along `basis` (assumed orthonormal).
void project_out(Vec& v, const std::vector<Vec>& basis) {
  for (const auto& b : basis) {
    const double d = dot(v, b);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * b[i];
  }
}

FeatureMatrix jitter(const FeatureMatrix& base, double sigma, Sampler& rng) {
  FeatureMatrix out = base;
  for (auto& x : out.values()) x = static_cast<float>(x + sigma * rng.normal());
  return out;
}

}  // namespace

double Sampler::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Sampler::normal() {
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Sampler::student_t(std::uint64_t dof) {
  const double z = normal();
  double chi2 = 0.0;
  for (std::uint64_t i = 0; i < dof; ++i) {
    const double g = normal();
    chi2 += g * g;
  }
  return z / std::sqrt(chi2 / static_cast<double>(dof));
}

void validate(const SynthSpec& spec) {
  const auto fail = [](const std::string& what) { throw Error(Errc::invalid_argument, what); };
  if (spec.n_id < 1) fail("n_id must be >= 1");
  if (spec.n_ood < 1) fail("n_ood must be >= 1");
  if (spec.dim < 1) fail("dim must be >= 1");
  if (spec.classes < 2) fail("classes must be >= 2");
  if (spec.n_views < 1) fail("n_views must be >= 1");
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) fail("sigma must be positive");
  if (!std::isfinite(spec.id_mean_shift) || !std::isfinite(spec.ood_mean_shift)) {
    fail("mean shifts must be finite");
  }
  if (!(spec.head_noise >= 0.0) || !std::isfinite(spec.head_noise)) {
    fail("head_noise must be >= 0");
  }
  if (!(spec.view_sigma >= 0.0) || !std::isfinite(spec.view_sigma)) {
    fail("view_sigma must be >= 0");
  }
}

nlohmann::ordered_json to_json(const SynthSpec& spec) {
  nlohmann::ordered_json j;
  j["n_id"] = spec.n_id;
  j["n_ood"] = spec.n_ood;
  j["dim"] = spec.dim;
  j["classes"] = spec.classes;
  j["id_mean_shift"] = spec.id_mean_shift;
  j["ood_mean_shift"] = spec.ood_mean_shift;
  j["sigma"] = spec.sigma;
  j["seed"] = spec.seed;
  j["heavy_tail_dof"] = spec.heavy_tail_dof;
  j["head_noise"] = spec.head_noise;
  j["n_views"] = spec.n_views;
  j["view_sigma"] = spec.view_sigma;
  j["rng"] = kRngName;
  j["normal_transform"] = kNormalTransform;
  return j;
}

SynthSpec spec_from_json(const nlohmann::json& j) {
  try {
    SynthSpec s;
    s.n_id = j.at("n_id").get<std::uint64_t>();
    s.n_ood = j.at("n_ood").get<std::uint64_t>();
    s.dim = j.at("dim").get<std::uint64_t>();
    s.classes = j.at("classes").get<std::uint64_t>();
    s.id_mean_shift = j.at("id_mean_shift").get<double>();
    s.ood_mean_shift = j.at("ood_mean_shift").get<double>();
    s.sigma = j.at("sigma").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.heavy_tail_dof = j.value("heavy_tail_dof", std::uint64_t{0});
    s.head_noise = j.value("head_noise", 0.0);
    s.n_views = j.value("n_views", std::uint64_t{1});
    s.view_sigma = j.value("view_sigma", 0.1);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("bad synth spec: ") + e.what());
  }
}

SynthData generate(const SynthSpec& spec) {
  validate(spec);
  Sampler rng(spec.seed);
  const std::size_t m = spec.dim;
  const std::size_t classes = spec.classes;
  const bool orthonormal = m >= classes;

  // 1. class prototypes
  std::vector<Vec> prototypes;
  for (std::size_t k = 0; k < classes; ++k) {
    Vec u = random_direction(rng, m);
    if (orthonormal) project_out(u, prototypes);
    if (!normalize(u)) u.assign(m, 1.0 / std::sqrt(static_cast<double>(m)));
    prototypes.push_back(std::move(u));
  }

  // 2. OOD directions, orthogonal to all prototypes when there is room
  std::vector<Vec> ood_dirs;
  for (std::size_t k = 0; k < classes; ++k) {
    Vec z = random_direction(rng, m);
    if (orthonormal) project_out(z, prototypes);
    if (!normalize(z)) z.assign(m, 0.0);
    ood_dirs.push_back(std::move(z));
  }

  // 3. head: W[:, k] = u_k + head_noise * N(0, 1), small bias
  WeightMatrix w(m, classes);
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t r = 0; r < m; ++r) {
      w(r, k) = static_cast<float>(prototypes[k][r] + spec.head_noise * rng.normal());
    }
  }
  std::vector<float> bias(classes);
  for (auto& b : bias) b = static_cast<float>(0.05 * rng.normal());

  // 4. ID samples
  FeatureMatrix id(spec.n_id, m);
  LabelVector labels(spec.n_id);
  for (std::size_t i = 0; i < spec.n_id; ++i) {
    const auto k = static_cast<std::size_t>(rng.index(classes));
    labels[i] = static_cast<std::uint32_t>(k);
    auto row = id.row(i);
    for (std::size_t r = 0; r < m; ++r) {
      const double noise =
          spec.heavy_tail_dof == 0 ? rng.normal() : rng.student_t(spec.heavy_tail_dof);
      row[r] = static_cast<float>(spec.id_mean_shift * prototypes[k][r] + spec.sigma * noise);
    }
  }

  // 5. OOD samples
  FeatureMatrix ood(spec.n_ood, m);
  const double along = std::max(spec.id_mean_shift - spec.ood_mean_shift, 0.0);
  for (std::size_t i = 0; i < spec.n_ood; ++i) {
    const auto k = static_cast<std::size_t>(rng.index(classes));
    auto row = ood.row(i);
    for (std::size_t r = 0; r < m; ++r) {
      const double centre = along * prototypes[k][r] + spec.ood_mean_shift * ood_dirs[k][r];
      row[r] = static_cast<float>(centre + spec.sigma * rng.normal());
    }
  }

  // 6. augmented views: ID views 1.., then OOD views 1..
  SynthData data{.id_views = {id},
                 .ood_views = {ood},
                 .head = ClassifierHead(std::move(w), std::move(bias)),
                 .id_labels = std::move(labels)};
  for (std::size_t v = 1; v < spec.n_views; ++v) {
    data.id_views.push_back(jitter(id, spec.view_sigma, rng));
  }
  for (std::size_t v = 1; v < spec.n_views; ++v) {
    data.ood_views.push_back(jitter(ood, spec.view_sigma, rng));
  }
  return data;
}

std::filesystem::path id_view_file(std::size_t view) {
  return "id_features_v" + std::to_string(view) + ".oodt";
}

std::filesystem::path ood_view_file(std::size_t view) {
  return "ood_features_v" + std::to_string(view) + ".oodt";
}

void write_fixture(const std::filesystem::path& dir, const SynthSpec& spec, const SynthData& data) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t v = 0; v < data.id_views.size(); ++v) {
    save_features(dir / id_view_file(v), data.id_views[v]);
  }
  for (std::size_t v = 0; v < data.ood_views.size(); ++v) {
    save_features(dir / ood_view_file(v), data.ood_views[v]);
  }
  save_head(dir / kHeadWeightsFile, dir / kHeadBiasFile, data.head);
  save_labels(dir / kIdLabelsFile, data.id_labels);

  std::ofstream f(dir / kSidecarFile, std::ios::trunc);
  if (!f) throw Error(Errc::io, "cannot write " + (dir / kSidecarFile).string());
  f << to_json(spec).dump(2) << '\n';
  if (!f) throw Error(Errc::io, "write failed for " + (dir / kSidecarFile).string());
}

ScoreVector gaussian_scores(std::size_t n, double mean, double sigma, std::uint64_t seed) {
  Sampler rng(seed);
  ScoreVector out(n);
  for (auto& s : out) s = static_cast<float>(mean + sigma * rng.normal());
  return out;
}

}  // namespace oodkit::synth
