#pragma once

// Brute-force reference implementations. They share no code with the fast
// paths they check and refuse inputs above the documented caps with
// Error(oracle_cap_exceeded).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "oodkit/types.hpp"

namespace oodkit::oracle {

inline constexpr std::size_t kMaxPairwiseSide = 10'000;
inline constexpr std::size_t kMaxPercentileValues = 20'000;
inline constexpr std::size_t kMaxMatmulOps = 100'000'000;
inline constexpr std::size_t kMaxSoftmaxClasses = 100'000;

/// Pairwise count over every (id, ood) pair: wins 1, ties 1/2.
double auroc(std::span<const float> id_scores, std::span<const float> ood_scores);

struct FprAtTpr {
  double fpr;
  double tpr;
  float tau;
};

/// Tries every observed ID score as threshold and keeps the largest whose
/// ID acceptance (>=) reaches the target.
FprAtTpr fpr_at_tpr(std::span<const float> id_scores, std::span<const float> ood_scores,
                    double tpr_target);

/// Linear-interpolation percentile, order statistics found by counting.
double percentile(std::span<const float> values, double p);

/// Triple-loop W^T h + b in long double, row-major N x C.
std::vector<long double> matmul(const FeatureMatrix& features, const ClassifierHead& head);

/// Direct exp(f_i/T) / sum_j exp(f_j/T) in long double, no max subtraction.
std::vector<long double> softmax(std::span<const long double> logits, long double temperature);

}  // namespace oodkit::oracle
