#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace oodkit {

/// Row-major float matrix. The tag keeps features, logits and head weights
/// from being mixed up at call sites even though they share storage.
template <class Tag>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<float> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return values_.empty(); }

  std::span<const float> values() const noexcept { return values_; }
  std::span<float> values() noexcept { return values_; }

  std::span<const float> row(std::size_t i) const noexcept {
    return std::span<const float>(values_).subspan(i * cols_, cols_);
  }
  std::span<float> row(std::size_t i) noexcept {
    return std::span<float>(values_).subspan(i * cols_, cols_);
  }

  float operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }
  float& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

struct FeatureTag;
struct LogitTag;
struct WeightTag;

/// N x m penultimate activations, one row per sample.
using FeatureMatrix = DenseMatrix<FeatureTag>;
/// N x C class logits.
using LogitMatrix = DenseMatrix<LogitTag>;
/// m x C weights of the final linear layer.
using WeightMatrix = DenseMatrix<WeightTag>;

using LabelVector = std::vector<std::uint32_t>;
using ScoreVector = std::vector<float>;

extern template class DenseMatrix<FeatureTag>;
extern template class DenseMatrix<LogitTag>;
extern template class DenseMatrix<WeightTag>;

/// Final linear layer: logits = W^T h + b.
class ClassifierHead {
 public:
  /// Throws Error(shape_mismatch) when W has fewer than two columns or the
  /// bias length differs, and Error(non_finite) on NaN/Inf.
  ClassifierHead(WeightMatrix weights, std::vector<float> bias);

  const WeightMatrix& weights() const noexcept { return weights_; }
  std::span<const float> bias() const noexcept { return bias_; }
  std::size_t feature_dim() const noexcept { return weights_.rows(); }
  std::size_t classes() const noexcept { return weights_.cols(); }

 private:
  WeightMatrix weights_;
  std::vector<float> bias_;
};

// Validation helpers; each throws oodkit::Error naming `what` on failure.
void require_finite(std::span<const float> values, std::string_view what);
void require_nonempty(const FeatureMatrix& m, std::string_view what);
void require_labels_below(std::span<const std::uint32_t> labels, std::size_t classes,
                          std::string_view what);

}  // namespace oodkit
