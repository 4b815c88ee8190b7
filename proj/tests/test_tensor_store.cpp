#include <doctest.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "helpers.hpp"
#include "oodkit/error.hpp"
#include "oodkit/tensor_store.hpp"

using namespace oodkit;
using oodkit::test::TempDir;

namespace {

Errc decode_error(std::span<const std::byte> bytes) {
  try {
    decode_tensor(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("decode unexpectedly succeeded");
  return Errc::io;
}

std::vector<std::byte> header(const char* magic, std::uint32_t version, std::uint8_t dtype,
                              std::uint8_t ndim, std::initializer_list<std::uint64_t> dims) {
  std::vector<std::byte> out;
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>(magic[i]));
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((version >> (8 * i)) & 0xff));
  out.push_back(static_cast<std::byte>(dtype));
  out.push_back(static_cast<std::byte>(ndim));
  for (auto d : dims) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::byte>((d >> (8 * i)) & 0xff));
  }
  return out;
}

void append_f32(std::vector<std::byte>& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((bits >> (8 * i)) & 0xff));
}

}  // namespace

TEST_SUITE("tensor_store") {

TEST_CASE("2x3 float tensor is a 50-byte file laid out as documented") {
  TempDir dir("ts");
  const std::array<std::uint64_t, 2> shape = {2, 3};
  const std::array<float, 6> data = {1, 2, 3, 4, 5, 6};
  write_tensor(dir / "a.oodt", shape, std::span<const float>(data));

  const auto bytes = oodkit::test::slurp(dir / "a.oodt");
  REQUIRE(bytes.size() == 50);
  CHECK(bytes.substr(0, 4) == "OODT");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[8] == 1);   // f32
  CHECK(bytes[9] == 2);   // ndim
  CHECK(bytes[10] == 2);  // dims[0] low byte
  CHECK(bytes[18] == 3);  // dims[1] low byte
  float first = 0;
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= std::uint32_t(std::uint8_t(bytes[26 + i])) << (8 * i);
  first = std::bit_cast<float>(bits);
  CHECK(first == 1.0f);

  const auto t = read_tensor(dir / "a.oodt");
  CHECK(t.shape == std::vector<std::uint64_t>{2, 3});
  CHECK(t.dtype() == DType::f32);
  const auto& v = std::get<std::vector<float>>(t.data);
  CHECK(std::memcmp(v.data(), data.data(), sizeof(data)) == 0);
}

TEST_CASE("minimal u32 tensor") {
  TempDir dir("ts");
  const std::array<std::uint64_t, 1> shape = {1};
  const std::array<std::uint32_t, 1> data = {0};
  write_tensor(dir / "m.oodt", shape, std::span<const std::uint32_t>(data));
  CHECK(std::filesystem::file_size(dir / "m.oodt") == 22);
  const auto t = read_tensor(dir / "m.oodt");
  CHECK(t.dtype() == DType::u32);
  CHECK(std::get<std::vector<std::uint32_t>>(t.data) == std::vector<std::uint32_t>{0});
}

TEST_CASE("write rejects shape/data mismatch and bad rank") {
  TempDir dir("ts");
  const std::array<std::uint64_t, 2> shape = {2, 3};
  const std::array<float, 5> five = {1, 2, 3, 4, 5};
  CHECK_THROWS_AS(write_tensor(dir / "x.oodt", shape, std::span<const float>(five)), Error);
  try {
    write_tensor(dir / "x.oodt", shape, std::span<const float>(five));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::shape_mismatch);
  }
  const std::array<std::uint64_t, 3> rank3 = {1, 1, 1};
  const std::array<float, 1> one = {1};
  CHECK_THROWS_AS(encode_tensor(rank3, std::span<const float>(one)), Error);
  CHECK_THROWS_AS(encode_tensor(std::span<const std::uint64_t>{}, std::span<const float>(one)),
                  Error);
}

TEST_CASE("decode errors are typed") {
  auto good = header("OODT", 1, 1, 1, {1});
  append_f32(good, 0.5f);
  CHECK(decode_tensor(good).element_count() == 1);

  auto bad_magic = good;
  std::memcpy(bad_magic.data(), "XXXX", 4);
  CHECK(decode_error(bad_magic) == Errc::bad_magic);

  auto nan = header("OODT", 1, 1, 1, {2});
  append_f32(nan, 1.0f);
  append_f32(nan, std::numeric_limits<float>::quiet_NaN());
  CHECK(decode_error(nan) == Errc::non_finite);

  auto inf = header("OODT", 1, 1, 1, {1});
  append_f32(inf, -std::numeric_limits<float>::infinity());
  CHECK(decode_error(inf) == Errc::non_finite);

  auto v2 = header("OODT", 2, 1, 1, {1});
  append_f32(v2, 1.0f);
  CHECK(decode_error(v2) == Errc::unsupported_version);

  auto dt = header("OODT", 1, 3, 1, {1});
  append_f32(dt, 1.0f);
  CHECK(decode_error(dt) == Errc::unsupported_dtype);

  CHECK(decode_error(header("OODT", 1, 1, 0, {})) == Errc::bad_rank);
  CHECK(decode_error(header("OODT", 1, 1, 3, {1, 1, 1})) == Errc::bad_rank);

  auto trailing = good;
  trailing.push_back(std::byte{0});
  CHECK(decode_error(trailing) == Errc::trailing_bytes);

  auto cut = good;
  cut.pop_back();
  CHECK(decode_error(cut) == Errc::truncated);

  CHECK(decode_error(std::span(good).first(5)) == Errc::truncated);
  CHECK(decode_error(std::span(good).first(12)) == Errc::truncated);
}

TEST_CASE("hostile dims are rejected before allocation") {
  const std::uint64_t big = std::uint64_t{1} << 40;
  CHECK(decode_error(header("OODT", 1, 1, 2, {big, big})) == Errc::truncated);
  CHECK(decode_error(header("OODT", 1, 2, 2, {UINT64_MAX, UINT64_MAX})) == Errc::truncated);
  CHECK(decode_error(header("OODT", 1, 1, 1, {UINT64_MAX})) == Errc::truncated);
  // A zero dimension means an empty payload, whatever the other dim says.
  CHECK(decode_tensor(header("OODT", 1, 1, 2, {0, UINT64_MAX})).element_count() == 0);
}

TEST_CASE("round-trip is bitwise for random shapes and payloads") {
  synth::Sampler rng(7);
  for (int iter = 0; iter < 300; ++iter) {
    const std::size_t rank = 1 + rng.index(2);
    std::vector<std::uint64_t> shape;
    std::size_t count = 1;
    for (std::size_t r = 0; r < rank; ++r) {
      shape.push_back(rng.index(9));
      count *= shape.back();
    }
    Tensor t;
    t.shape = shape;
    if (rng.index(2) == 0) {
      std::vector<float> v(count);
      for (auto& x : v) {
        // Random finite bit patterns cover subnormals and signed zeros.
        do {
          x = std::bit_cast<float>(static_cast<std::uint32_t>(rng.next_u64()));
        } while (!std::isfinite(x));
      }
      t.data = std::move(v);
    } else {
      std::vector<std::uint32_t> v(count);
      for (auto& x : v) x = static_cast<std::uint32_t>(rng.next_u64());
      t.data = std::move(v);
    }
    const auto bytes = std::visit(
        [&](const auto& v) { return encode_tensor(t.shape, std::span(v)); }, t.data);
    CHECK(bitwise_equal(decode_tensor(bytes), t));
  }
}

TEST_CASE("random byte strings never escape as anything but oodkit::Error") {
  synth::Sampler rng(11);
  for (int iter = 0; iter < 20'000; ++iter) {
    std::vector<std::byte> bytes(rng.index(64));
    for (auto& b : bytes) b = static_cast<std::byte>(rng.next_u64());
    // Half the cases get a valid prefix so the deeper checks are reached.
    if (iter % 2 == 0 && bytes.size() >= 10) {
      std::memcpy(bytes.data(), "OODT\x01\x00\x00\x00", 8);
      bytes[8] = static_cast<std::byte>(1 + rng.index(2));
      bytes[9] = static_cast<std::byte>(1 + rng.index(2));
    }
    try {
      decode_tensor(bytes);
    } catch (const Error&) {
    }
  }
}

TEST_CASE("typed loaders enforce role") {
  TempDir dir("ts");
  const std::array<std::uint64_t, 2> shape = {2, 2};
  const std::array<float, 4> w = {1, 0, 0, 1};
  write_tensor(dir / "w.oodt", shape, std::span<const float>(w));
  const std::array<std::uint64_t, 1> bshape = {2};
  const std::array<float, 2> b = {0.5f, -0.5f};
  write_tensor(dir / "b.oodt", bshape, std::span<const float>(b));
  const std::array<std::uint32_t, 2> labels = {1, 0};
  write_tensor(dir / "l.oodt", bshape, std::span<const std::uint32_t>(labels));

  const auto head = load_head(dir / "w.oodt", dir / "b.oodt");
  CHECK(head.classes() == 2);
  CHECK(head.bias()[0] == 0.5f);
  CHECK(load_labels(dir / "l.oodt") == LabelVector{1, 0});
  CHECK(load_features(dir / "w.oodt").rows() == 2);

  CHECK_THROWS_AS(load_labels(dir / "b.oodt"), Error);    // f32 where u32 expected
  CHECK_THROWS_AS(load_features(dir / "b.oodt"), Error);  // rank 1
  CHECK_THROWS_AS(load_head(dir / "w.oodt", dir / "w.oodt"), Error);
  CHECK_THROWS_AS(read_tensor(dir / "missing.oodt"), Error);

  const std::array<float, 3> b3 = {0, 0, 0};
  const std::array<std::uint64_t, 1> b3shape = {3};
  write_tensor(dir / "b3.oodt", b3shape, std::span<const float>(b3));
  CHECK_THROWS_AS(load_head(dir / "w.oodt", dir / "b3.oodt"), Error);
}

TEST_CASE("head validation") {
  CHECK_THROWS_AS(ClassifierHead(WeightMatrix(3, 1), {0.0f}), Error);
  WeightMatrix w(2, 2);
  w(0, 1) = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(ClassifierHead(w, {0.0f, 0.0f}), Error);
}

}  // TEST_SUITE
