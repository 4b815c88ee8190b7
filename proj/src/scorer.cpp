#include "oodkit/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oodkit/error.hpp"
#include "oodkit/parallel.hpp"

namespace oodkit {
namespace {

void require_temperature(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw Error(Errc::invalid_argument, "temperature must be positive and finite");
  }
}

}  // namespace

LogitMatrix compute_logits(const FeatureMatrix& features, const ClassifierHead& head,
                           unsigned threads) {
  if (features.cols() != head.feature_dim()) {
    throw Error(Errc::shape_mismatch, "features have " + std::to_string(features.cols()) +
                                          " columns, head expects " +
                                          std::to_string(head.feature_dim()));
  }
  const std::size_t dim = head.feature_dim();
  const std::size_t classes = head.classes();
  const auto& w = head.weights();
  const auto bias = head.bias();
  LogitMatrix out(features.rows(), classes);

  detail::parallel_chunks(features.rows(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> acc(classes);
    for (std::size_t i = begin; i < end; ++i) {
      std::fill(acc.begin(), acc.end(), 0.0);
      const auto h = features.row(i);
      for (std::size_t k = 0; k < dim; ++k) {
        const double hk = h[k];
        const auto wk = w.row(k);
        for (std::size_t c = 0; c < classes; ++c) acc[c] += hk * static_cast<double>(wk[c]);
      }
      auto dst = out.row(i);
      for (std::size_t c = 0; c < classes; ++c) {
        dst[c] = static_cast<float>(acc[c] + static_cast<double>(bias[c]));
      }
    }
  });
  return out;
}

LogitMatrix ensemble_logits(std::span<const LogitMatrix> views, unsigned threads) {
  if (views.empty()) throw Error(Errc::invalid_argument, "no logit views to ensemble");
  const auto& first = views.front();
  for (std::size_t v = 1; v < views.size(); ++v) {
    if (views[v].rows() != first.rows() || views[v].cols() != first.cols()) {
      throw Error(Errc::shape_mismatch, "view " + std::to_string(v) + " is " +
                                            std::to_string(views[v].rows()) + "x" +
                                            std::to_string(views[v].cols()) + ", view 0 is " +
                                            std::to_string(first.rows()) + "x" +
                                            std::to_string(first.cols()));
    }
  }
  LogitMatrix out(first.rows(), first.cols());
  auto dst = out.values();
  const double k = static_cast<double>(views.size());
  detail::parallel_chunks(first.rows(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin * first.cols(); i < end * first.cols(); ++i) {
      double sum = 0.0;
      for (const auto& view : views) sum += view.values()[i];
      dst[i] = static_cast<float>(sum / k);
    }
  });
  return out;
}

void softmax_row(std::span<const float> logits, double temperature, std::span<double> probs) {
  require_temperature(temperature);
  if (logits.empty() || probs.size() != logits.size()) {
    throw Error(Errc::shape_mismatch, "softmax output size differs from input");
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    probs[j] = std::exp((static_cast<double>(logits[j]) - top) / temperature);
    total += probs[j];
  }
  for (auto& p : probs) p /= total;
}

ScoreVector msp_score(const LogitMatrix& logits, double temperature, unsigned threads) {
  require_temperature(temperature);
  ScoreVector scores(logits.rows());
  detail::parallel_chunks(logits.rows(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> probs(logits.cols());
    for (std::size_t i = begin; i < end; ++i) {
      softmax_row(logits.row(i), temperature, probs);
      scores[i] = static_cast<float>(*std::max_element(probs.begin(), probs.end()));
    }
  });
  return scores;
}

std::vector<Decision> classify(std::span<const float> scores, double tau) {
  if (!std::isfinite(tau)) throw Error(Errc::invalid_argument, "tau must be finite");
  std::vector<Decision> out(scores.size());
  std::transform(scores.begin(), scores.end(), out.begin(), [tau](float s) {
    return static_cast<double>(s) > tau ? Decision::id : Decision::ood;
  });
  return out;
}

LabelVector predict_class(const LogitMatrix& logits, unsigned threads) {
  LabelVector out(logits.rows());
  detail::parallel_chunks(logits.rows(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = logits.row(i);
      // max_element returns the first maximum.
      out[i] = static_cast<std::uint32_t>(std::max_element(row.begin(), row.end()) - row.begin());
    }
  });
  return out;
}

}  // namespace oodkit
