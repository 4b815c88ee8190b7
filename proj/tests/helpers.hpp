#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "oodkit/synth.hpp"
#include "oodkit/types.hpp"

namespace oodkit::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("oodkit_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline FeatureMatrix random_features(synth::Sampler& rng, std::size_t rows, std::size_t cols,
                                     double scale = 1.0) {
  FeatureMatrix m(rows, cols);
  for (auto& v : m.values()) v = static_cast<float>(scale * rng.normal());
  return m;
}

inline LogitMatrix random_logits(synth::Sampler& rng, std::size_t rows, std::size_t cols,
                                 double scale = 3.0) {
  LogitMatrix m(rows, cols);
  for (auto& v : m.values()) v = static_cast<float>(scale * rng.normal());
  return m;
}

inline ClassifierHead random_head(synth::Sampler& rng, std::size_t dim, std::size_t classes) {
  WeightMatrix w(dim, classes);
  for (auto& v : w.values()) v = static_cast<float>(rng.normal());
  std::vector<float> b(classes);
  for (auto& v : b) v = static_cast<float>(rng.normal());
  return ClassifierHead(std::move(w), std::move(b));
}

/// Scores on a coarse grid so ties are common.
inline std::vector<float> quantized_scores(synth::Sampler& rng, std::size_t n, int levels) {
  std::vector<float> s(n);
  for (auto& v : s) v = static_cast<float>(rng.index(levels)) / static_cast<float>(levels);
  return s;
}

}  // namespace oodkit::test
