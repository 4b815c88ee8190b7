#include "oodkit/types.hpp"

#include <cmath>
#include <string>

#include "oodkit/error.hpp"

namespace oodkit {

template <class Tag>
DenseMatrix<Tag>::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0f) {}

template <class Tag>
DenseMatrix<Tag>::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw Error(Errc::shape_mismatch, "matrix " + std::to_string(rows_) + "x" +
                                          std::to_string(cols_) + " given " +
                                          std::to_string(values_.size()) + " values");
  }
}

template class DenseMatrix<FeatureTag>;
template class DenseMatrix<LogitTag>;
template class DenseMatrix<WeightTag>;

ClassifierHead::ClassifierHead(WeightMatrix weights, std::vector<float> bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.cols() < 2) {
    throw Error(Errc::shape_mismatch, "classifier head needs at least 2 classes");
  }
  if (weights_.rows() < 1) {
    throw Error(Errc::shape_mismatch, "classifier head has zero feature rows");
  }
  if (weights_.cols() != bias_.size()) {
    throw Error(Errc::shape_mismatch, "head weights have " + std::to_string(weights_.cols()) +
                                          " columns but bias has " +
                                          std::to_string(bias_.size()) + " entries");
  }
  require_finite(weights_.values(), "head weights");
  require_finite(bias_, "head bias");
}

void require_finite(std::span<const float> values, std::string_view what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(Errc::non_finite,
                  std::string(what) + ": non-finite value at index " + std::to_string(i));
    }
  }
}

void require_nonempty(const FeatureMatrix& m, std::string_view what) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw Error(Errc::invalid_argument, std::string(what) + " is empty");
  }
}

void require_labels_below(std::span<const std::uint32_t> labels, std::size_t classes,
                          std::string_view what) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) {
      throw Error(Errc::invalid_argument, std::string(what) + ": label " +
                                              std::to_string(labels[i]) + " at index " +
                                              std::to_string(i) + " is not below " +
                                              std::to_string(classes));
    }
  }
}

}  // namespace oodkit
