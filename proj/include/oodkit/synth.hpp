#pragma once

// Synthetic fixtures with known structure.
//
// Random stream: std::mt19937_64 seeded with SynthSpec::seed (its output
// sequence is fixed by the C++ standard). Uniforms take the top 53 bits of
// each draw. Normals use the Box-Muller cosine branch, one normal per pair
// of uniforms, u1 in (0, 1]. Student-t noise with integer dof d is
// z / sqrt(chi2_d / d), chi2_d summed from d squared normals. Draw order is
// part of the fixture format; see generate().

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include <json.hpp>

#include "oodkit/types.hpp"

namespace oodkit::synth {

inline constexpr const char* kRngName = "mt19937_64";
inline constexpr const char* kNormalTransform = "box-muller-cos";

struct SynthSpec {
  std::uint64_t n_id = 1000;
  std::uint64_t n_ood = 1000;
  std::uint64_t dim = 64;
  std::uint64_t classes = 10;
  double id_mean_shift = 4.0;   // distance of each ID cluster centre from the origin
  double ood_mean_shift = 2.0;  // how far OOD centres move off the class prototypes
  double sigma = 1.0;
  std::uint64_t seed = 0;
  /// 0 means Gaussian ID noise; otherwise Student-t with this many dof.
  std::uint64_t heavy_tail_dof = 0;
  /// Std-dev of the perturbation added to the ideal head (misspecification).
  double head_noise = 0.0;
  std::uint64_t n_views = 1;
  double view_sigma = 0.1;

  bool operator==(const SynthSpec&) const = default;
};

/// Throws Error(invalid_argument) on zero counts or non-positive sigma.
void validate(const SynthSpec& spec);

nlohmann::ordered_json to_json(const SynthSpec& spec);
SynthSpec spec_from_json(const nlohmann::json& j);

struct SynthData {
  std::vector<FeatureMatrix> id_views;  // view 0 is the unperturbed sample
  std::vector<FeatureMatrix> ood_views;
  ClassifierHead head;
  LabelVector id_labels;
};

/// Pure function of the spec: the same spec yields bit-identical output.
///
/// Prototypes u_k are unit vectors (orthonormal when dim >= classes) and the
/// ideal head maps features to <u_k, x>. ID rows: id_mean_shift * u_k plus
/// noise. OOD rows pick a cluster k and sit at
/// max(id_mean_shift - ood_mean_shift, 0) * u_k + ood_mean_shift * z_k
/// plus Gaussian noise, z_k a unit direction orthogonal to every prototype,
/// so ood_mean_shift = 0 reproduces the Gaussian ID distribution.
SynthData generate(const SynthSpec& spec);

/// File names written by write_fixture, relative to the output directory.
std::filesystem::path id_view_file(std::size_t view);
std::filesystem::path ood_view_file(std::size_t view);
inline constexpr const char* kHeadWeightsFile = "head_weights.oodt";
inline constexpr const char* kHeadBiasFile = "head_bias.oodt";
inline constexpr const char* kIdLabelsFile = "id_labels.oodt";
inline constexpr const char* kSidecarFile = "synth.json";

/// Writes every tensor of `data` plus the synth.json sidecar into `dir`.
void write_fixture(const std::filesystem::path& dir, const SynthSpec& spec, const SynthData& data);

/// n scores drawn from Normal(mean, sigma) with the documented stream.
ScoreVector gaussian_scores(std::size_t n, double mean, double sigma, std::uint64_t seed);

/// Seeded sampler exposing the documented transforms; used by generate() and
/// by tests that need reproducible random inputs.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// [0, 1)
  double uniform();
  /// [0, n)
  std::uint64_t index(std::uint64_t n) { return next_u64() % n; }
  double normal();
  double student_t(std::uint64_t dof);

 private:
  std::mt19937_64 engine_;
};

}  // namespace oodkit::synth
