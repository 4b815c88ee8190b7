#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oodkit/types.hpp"

namespace oodkit {

/// Softmax temperature tuned for the original EVA-CLIP submission.
inline constexpr double kPresetTemperature = 1.1;

enum class Decision : std::uint8_t { id, ood };

/// Row i = W^T h_i + b, dot products accumulated in double.
LogitMatrix compute_logits(const FeatureMatrix& features, const ClassifierHead& head,
                           unsigned threads = 1);

/// Elementwise mean over views, summed in double in view order 0..K-1.
LogitMatrix ensemble_logits(std::span<const LogitMatrix> views, unsigned threads = 1);

/// Numerically stable softmax of logits / T, written into `probs`.
void softmax_row(std::span<const float> logits, double temperature, std::span<double> probs);

/// Maximum softmax probability of each row at temperature T.
ScoreVector msp_score(const LogitMatrix& logits, double temperature, unsigned threads = 1);

/// ID iff score > tau; a score equal to tau is OOD.
std::vector<Decision> classify(std::span<const float> scores, double tau);

/// Row argmax, lowest index wins ties.
LabelVector predict_class(const LogitMatrix& logits, unsigned threads = 1);

}  // namespace oodkit
