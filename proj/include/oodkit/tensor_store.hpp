#pragma once

// .oodt tensor container
//
//   offset 0   magic    "OODT"
//   offset 4   version  u32 LE (always 1)
//   offset 8   dtype    u8 (1 = f32, 2 = u32)
//   offset 9   ndim     u8 (1 or 2)
//   offset 10  dims     ndim x u64 LE
//   then       payload  row-major LE values, exactly product(dims) elements
//
// Float payloads containing NaN or Inf are rejected on load.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "oodkit/types.hpp"

namespace oodkit {

enum class DType : std::uint8_t { f32 = 1, u32 = 2 };

inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr std::size_t kTensorMaxRank = 2;

struct Tensor {
  std::vector<std::uint64_t> shape;
  std::variant<std::vector<float>, std::vector<std::uint32_t>> data;

  DType dtype() const noexcept {
    return std::holds_alternative<std::vector<float>>(data) ? DType::f32 : DType::u32;
  }
  std::size_t element_count() const noexcept;

  /// Same shape, dtype and payload bytes.
  friend bool bitwise_equal(const Tensor& a, const Tensor& b) noexcept;
};

std::vector<std::byte> encode_tensor(std::span<const std::uint64_t> shape,
                                     std::span<const float> data);
std::vector<std::byte> encode_tensor(std::span<const std::uint64_t> shape,
                                     std::span<const std::uint32_t> data);

/// Parses an in-memory .oodt image. Never reads past `bytes`; any malformed
/// input results in oodkit::Error.
Tensor decode_tensor(std::span<const std::byte> bytes);

void write_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> shape,
                  std::span<const float> data);
void write_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> shape,
                  std::span<const std::uint32_t> data);
void write_tensor(const std::filesystem::path& path, const Tensor& tensor);

Tensor read_tensor(const std::filesystem::path& path);

// Typed views over tensor files.
FeatureMatrix load_features(const std::filesystem::path& path);
LogitMatrix load_logits(const std::filesystem::path& path);
ClassifierHead load_head(const std::filesystem::path& weights, const std::filesystem::path& bias);
LabelVector load_labels(const std::filesystem::path& path);
ScoreVector load_scores(const std::filesystem::path& path);

void save_features(const std::filesystem::path& path, const FeatureMatrix& m);
void save_logits(const std::filesystem::path& path, const LogitMatrix& m);
void save_head(const std::filesystem::path& weights, const std::filesystem::path& bias,
               const ClassifierHead& head);
void save_labels(const std::filesystem::path& path, std::span<const std::uint32_t> labels);
void save_scores(const std::filesystem::path& path, std::span<const float> scores);

}  // namespace oodkit
