#include "oodkit/oracles.hpp"

#include <cmath>
#include <string>

#include "oodkit/error.hpp"

namespace oodkit::oracle {
namespace {

void cap(std::size_t n, std::size_t limit, const char* what) {
  if (n > limit) {
    throw Error(Errc::oracle_cap_exceeded, std::string(what) + ": " + std::to_string(n) +
                                               " exceeds oracle cap " + std::to_string(limit));
  }
}

void nonempty(std::span<const float> id, std::span<const float> ood) {
  if (id.empty() || ood.empty()) throw Error(Errc::invalid_argument, "oracle needs both sides");
}

// k-th smallest (0-based) by counting: x qualifies when #{< x} <= k < #{<= x}.
double order_statistic(std::span<const float> values, std::size_t k) {
  for (float x : values) {
    std::size_t less = 0;
    std::size_t less_equal = 0;
    for (float y : values) {
      less += y < x;
      less_equal += y <= x;
    }
    if (less <= k && k < less_equal) return x;
  }
  throw Error(Errc::invalid_argument, "order statistic out of range");
}

}  // namespace

double auroc(std::span<const float> id_scores, std::span<const float> ood_scores) {
  nonempty(id_scores, ood_scores);
  cap(id_scores.size(), kMaxPairwiseSide, "ID side");
  cap(ood_scores.size(), kMaxPairwiseSide, "OOD side");
  std::uint64_t wins = 0;
  std::uint64_t ties = 0;
  for (float a : id_scores) {
    for (float b : ood_scores) {
      if (a > b) ++wins;
      else if (a == b) ++ties;
    }
  }
  const std::uint64_t pairs = static_cast<std::uint64_t>(id_scores.size()) * ood_scores.size();
  return static_cast<double>(2 * wins + ties) / static_cast<double>(2 * pairs);
}

FprAtTpr fpr_at_tpr(std::span<const float> id_scores, std::span<const float> ood_scores,
                    double tpr_target) {
  nonempty(id_scores, ood_scores);
  cap(id_scores.size(), kMaxPairwiseSide, "ID side");
  cap(ood_scores.size(), kMaxPairwiseSide, "OOD side");
  const auto rate = [](std::span<const float> s, float t) {
    std::size_t hits = 0;
    for (float x : s) hits += x >= t;
    return static_cast<double>(hits) / static_cast<double>(s.size());
  };
  bool found = false;
  FprAtTpr best{};
  for (float t : id_scores) {
    const double tpr = rate(id_scores, t);
    if (tpr >= tpr_target && (!found || t > best.tau)) {
      best = FprAtTpr{rate(ood_scores, t), tpr, t};
      found = true;
    }
  }
  if (!found) throw Error(Errc::invalid_argument, "no threshold reaches the TPR target");
  return best;
}

double percentile(std::span<const float> values, double p) {
  if (values.empty()) throw Error(Errc::invalid_argument, "percentile of empty set");
  cap(values.size(), kMaxPercentileValues, "percentile values");
  const std::size_t n = values.size();
  const double rank = 1.0 + (p / 100.0) * static_cast<double>(n - 1);
  const auto lo_rank = static_cast<std::size_t>(std::floor(rank));
  const double frac = rank - static_cast<double>(lo_rank);
  const double lo = order_statistic(values, lo_rank - 1);
  if (lo_rank >= n) return lo;
  const double hi = order_statistic(values, lo_rank);
  return lo + frac * (hi - lo);
}

std::vector<long double> matmul(const FeatureMatrix& features, const ClassifierHead& head) {
  const std::size_t n = features.rows();
  const std::size_t m = head.feature_dim();
  const std::size_t c = head.classes();
  if (features.cols() != m) throw Error(Errc::shape_mismatch, "oracle matmul dims");
  cap(n * m * c, kMaxMatmulOps, "matmul work");
  std::vector<long double> out(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      long double s = head.bias()[j];
      for (std::size_t k = 0; k < m; ++k) {
        s += static_cast<long double>(features(i, k)) * head.weights()(k, j);
      }
      out[i * c + j] = s;
    }
  }
  return out;
}

std::vector<long double> softmax(std::span<const long double> logits, long double temperature) {
  cap(logits.size(), kMaxSoftmaxClasses, "softmax classes");
  std::vector<long double> out(logits.size());
  long double total = 0.0L;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = std::exp(logits[j] / temperature);
    total += out[j];
  }
  for (auto& v : out) v /= total;
  return out;
}

}  // namespace oodkit::oracle
