#include "oodkit/tensor_store.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "oodkit/error.hpp"

namespace oodkit {
namespace {

constexpr std::array<std::byte, 4> kMagic = {std::byte{'O'}, std::byte{'O'}, std::byte{'D'},
                                             std::byte{'T'}};
constexpr std::size_t kFixedHeader = 10;

void put_le(std::vector<std::byte>& out, std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) {
    out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xffu));
  }
}

std::uint64_t get_le(const std::byte* p, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(std::to_integer<std::uint8_t>(p[i])) << (8 * i);
  }
  return v;
}

std::uint64_t checked_count(std::span<const std::uint64_t> shape) {
  std::uint64_t n = 1;
  for (auto d : shape) {
    if (d != 0 && n > UINT64_MAX / d) {
      throw Error(Errc::shape_mismatch, "shape product overflows");
    }
    n *= d;
  }
  return n;
}

template <class T>
std::vector<std::byte> encode(std::span<const std::uint64_t> shape, std::span<const T> data,
                              DType dtype) {
  if (shape.empty() || shape.size() > kTensorMaxRank) {
    throw Error(Errc::bad_rank, "tensor rank must be 1 or 2, got " + std::to_string(shape.size()));
  }
  if (checked_count(shape) != data.size()) {
    throw Error(Errc::shape_mismatch, "shape holds " + std::to_string(checked_count(shape)) +
                                          " elements but " + std::to_string(data.size()) +
                                          " were given");
  }
  std::vector<std::byte> out;
  out.reserve(kFixedHeader + 8 * shape.size() + 4 * data.size());
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_le(out, kTensorVersion, 4);
  out.push_back(static_cast<std::byte>(dtype));
  out.push_back(static_cast<std::byte>(shape.size()));
  for (auto d : shape) put_le(out, d, 8);
  for (const T& v : data) put_le(out, std::bit_cast<std::uint32_t>(v), 4);
  return out;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  f.close();
  if (!f) throw Error(Errc::io, "write failed for " + path.string());
}

std::vector<std::byte> read_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io, "cannot open " + path.string());
  f.seekg(0, std::ios::end);
  const auto size = f.tellg();
  if (size < 0) throw Error(Errc::io, "cannot size " + path.string());
  f.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(static_cast<std::size_t>(size));
  f.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!f) throw Error(Errc::io, "read failed for " + path.string());
  return bytes;
}

Tensor expect_rank(Tensor t, std::size_t rank, DType dtype, const std::filesystem::path& path) {
  if (t.shape.size() != rank) {
    throw Error(Errc::bad_rank, path.string() + ": expected rank " + std::to_string(rank) +
                                    ", got " + std::to_string(t.shape.size()));
  }
  if (t.dtype() != dtype) {
    throw Error(Errc::unsupported_dtype, path.string() + ": wrong dtype for this role");
  }
  return t;
}

template <class Matrix>
Matrix load_matrix(const std::filesystem::path& path) {
  auto t = expect_rank(read_tensor(path), 2, DType::f32, path);
  return Matrix(t.shape[0], t.shape[1], std::get<std::vector<float>>(std::move(t.data)));
}

template <class Matrix>
void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  const std::array<std::uint64_t, 2> shape = {m.rows(), m.cols()};
  write_tensor(path, shape, m.values());
}

}  // namespace

std::size_t Tensor::element_count() const noexcept {
  return std::visit([](const auto& v) { return v.size(); }, data);
}

bool bitwise_equal(const Tensor& a, const Tensor& b) noexcept {
  if (a.shape != b.shape || a.data.index() != b.data.index()) return false;
  return std::visit(
      [&](const auto& va) {
        using V = std::decay_t<decltype(va)>;
        const auto& vb = std::get<V>(b.data);
        return va.size() == vb.size() &&
               (va.empty() ||
                std::memcmp(va.data(), vb.data(), va.size() * sizeof(typename V::value_type)) == 0);
      },
      a.data);
}

std::vector<std::byte> encode_tensor(std::span<const std::uint64_t> shape,
                                     std::span<const float> data) {
  return encode(shape, data, DType::f32);
}

std::vector<std::byte> encode_tensor(std::span<const std::uint64_t> shape,
                                     std::span<const std::uint32_t> data) {
  return encode(shape, data, DType::u32);
}

Tensor decode_tensor(std::span<const std::byte> bytes) {
  if (bytes.size() < kFixedHeader) {
    throw Error(Errc::truncated, "header needs " + std::to_string(kFixedHeader) + " bytes, got " +
                                     std::to_string(bytes.size()));
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(Errc::bad_magic, "not an OODT file");
  }
  const auto version = get_le(bytes.data() + 4, 4);
  if (version != kTensorVersion) {
    throw Error(Errc::unsupported_version, "version " + std::to_string(version));
  }
  const auto dtype_code = std::to_integer<std::uint8_t>(bytes[8]);
  if (dtype_code != static_cast<std::uint8_t>(DType::f32) &&
      dtype_code != static_cast<std::uint8_t>(DType::u32)) {
    throw Error(Errc::unsupported_dtype, "dtype code " + std::to_string(dtype_code));
  }
  const auto ndim = std::to_integer<std::uint8_t>(bytes[9]);
  if (ndim < 1 || ndim > kTensorMaxRank) {
    throw Error(Errc::bad_rank, "ndim " + std::to_string(ndim));
  }
  const std::size_t header = kFixedHeader + 8u * ndim;
  if (bytes.size() < header) {
    throw Error(Errc::truncated, "dims section cut short");
  }

  Tensor t;
  t.shape.resize(ndim);
  // Bound the element count by what the payload can hold before multiplying,
  // so hostile dims can neither overflow nor trigger a huge allocation.
  const std::uint64_t max_elems = (bytes.size() - header) / 4;
  std::uint64_t count = 1;
  bool too_big = false;
  for (std::size_t i = 0; i < ndim; ++i) {
    const auto d = get_le(bytes.data() + kFixedHeader + 8 * i, 8);
    t.shape[i] = d;
    if (d == 0) {
      count = 0;
    } else if (!too_big && count != 0) {
      if (count > max_elems / d) too_big = true;
      else count *= d;
    }
  }
  if (too_big && count != 0) {
    throw Error(Errc::truncated, "dims describe more data than the file holds");
  }
  const std::size_t payload = bytes.size() - header;
  if (payload < count * 4) {
    throw Error(Errc::truncated, "payload has " + std::to_string(payload) + " bytes, expected " +
                                     std::to_string(count * 4));
  }
  if (payload > count * 4) {
    throw Error(Errc::trailing_bytes, std::to_string(payload - count * 4) + " bytes after payload");
  }

  const std::byte* p = bytes.data() + header;
  if (dtype_code == static_cast<std::uint8_t>(DType::f32)) {
    std::vector<float> v(count);
    for (std::size_t i = 0; i < count; ++i) {
      v[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(p + 4 * i, 4)));
      if (!std::isfinite(v[i])) {
        throw Error(Errc::non_finite, "non-finite float at element " + std::to_string(i));
      }
    }
    t.data = std::move(v);
  } else {
    std::vector<std::uint32_t> v(count);
    for (std::size_t i = 0; i < count; ++i) {
      v[i] = static_cast<std::uint32_t>(get_le(p + 4 * i, 4));
    }
    t.data = std::move(v);
  }
  return t;
}

void write_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> shape,
                  std::span<const float> data) {
  write_bytes(path, encode_tensor(shape, data));
}

void write_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> shape,
                  std::span<const std::uint32_t> data) {
  write_bytes(path, encode_tensor(shape, data));
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  std::visit([&](const auto& v) { write_tensor(path, tensor.shape, std::span(v)); }, tensor.data);
}

Tensor read_tensor(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  try {
    return decode_tensor(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  auto m = load_matrix<FeatureMatrix>(path);
  require_nonempty(m, path.string());
  return m;
}

LogitMatrix load_logits(const std::filesystem::path& path) {
  auto m = load_matrix<LogitMatrix>(path);
  if (m.rows() == 0 || m.cols() < 2) {
    throw Error(Errc::shape_mismatch, path.string() + ": logits need N >= 1 rows and C >= 2");
  }
  return m;
}

ClassifierHead load_head(const std::filesystem::path& weights, const std::filesystem::path& bias) {
  auto w = load_matrix<WeightMatrix>(weights);
  auto b = expect_rank(read_tensor(bias), 1, DType::f32, bias);
  return ClassifierHead(std::move(w), std::get<std::vector<float>>(std::move(b.data)));
}

LabelVector load_labels(const std::filesystem::path& path) {
  auto t = expect_rank(read_tensor(path), 1, DType::u32, path);
  return std::get<std::vector<std::uint32_t>>(std::move(t.data));
}

ScoreVector load_scores(const std::filesystem::path& path) {
  auto t = expect_rank(read_tensor(path), 1, DType::f32, path);
  return std::get<std::vector<float>>(std::move(t.data));
}

void save_features(const std::filesystem::path& path, const FeatureMatrix& m) {
  save_matrix(path, m);
}

void save_logits(const std::filesystem::path& path, const LogitMatrix& m) { save_matrix(path, m); }

void save_head(const std::filesystem::path& weights, const std::filesystem::path& bias,
               const ClassifierHead& head) {
  save_matrix(weights, head.weights());
  const std::array<std::uint64_t, 1> shape = {head.bias().size()};
  write_tensor(bias, shape, head.bias());
}

void save_labels(const std::filesystem::path& path, std::span<const std::uint32_t> labels) {
  const std::array<std::uint64_t, 1> shape = {labels.size()};
  write_tensor(path, shape, labels);
}

void save_scores(const std::filesystem::path& path, std::span<const float> scores) {
  const std::array<std::uint64_t, 1> shape = {scores.size()};
  write_tensor(path, shape, scores);
}

}  // namespace oodkit
