#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "oodkit/error.hpp"
#include "oodkit/oracles.hpp"
#include "oodkit/scorer.hpp"

using namespace oodkit;

namespace {

ClassifierHead identity_head(float b0, float b1) {
  return ClassifierHead(WeightMatrix(2, 2, {1, 0, 0, 1}), {b0, b1});
}

std::vector<long double> widen(std::span<const float> v) {
  return {v.begin(), v.end()};
}

}  // namespace

TEST_SUITE("scorer") {

TEST_CASE("logits through identity heads") {
  const FeatureMatrix h(1, 2, {3.0f, -1.0f});
  CHECK(compute_logits(h, identity_head(0, 0)) == LogitMatrix(1, 2, {3.0f, -1.0f}));
  CHECK(compute_logits(h, identity_head(1, 1)) == LogitMatrix(1, 2, {4.0f, 0.0f}));
}

TEST_CASE("logits match the triple-loop oracle") {
  synth::Sampler rng(21);
  for (int iter = 0; iter < 1000; ++iter) {
    const std::size_t n = 1 + rng.index(6);
    const std::size_t m = 1 + rng.index(8);
    const std::size_t c = 2 + rng.index(5);
    const auto h = test::random_features(rng, n, m);
    const auto head = test::random_head(rng, m, c);
    const auto got = compute_logits(h, head);
    const auto want = oracle::matmul(h, head);
    for (std::size_t i = 0; i < want.size(); ++i) {
      const double w = static_cast<double>(want[i]);
      REQUIRE(std::abs(got.values()[i] - w) <= 1e-5 * std::max(1.0, std::abs(w)));
    }
  }
}

TEST_CASE("logits reject dimension mismatch") {
  CHECK_THROWS_AS(compute_logits(FeatureMatrix(1, 3), identity_head(0, 0)), Error);
}

TEST_CASE("ensemble examples") {
  synth::Sampler rng(22);
  const auto a = test::random_logits(rng, 5, 4);
  const std::vector<LogitMatrix> one = {a};
  CHECK(ensemble_logits(one) == a);

  const std::vector<LogitMatrix> pair = {LogitMatrix(1, 2, {2, 0}), LogitMatrix(1, 2, {0, 2})};
  CHECK(ensemble_logits(pair) == LogitMatrix(1, 2, {1, 1}));

  const std::vector<LogitMatrix> same(4, a);
  CHECK(ensemble_logits(same) == a);
}

TEST_CASE("ensemble equals the sequential double-precision mean") {
  synth::Sampler rng(23);
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n = 1 + rng.index(20);
    const std::size_t c = 2 + rng.index(10);
    std::vector<LogitMatrix> views;
    for (int v = 0; v < 4; ++v) views.push_back(test::random_logits(rng, n, c, 50.0));
    LogitMatrix want(n, c);
    for (std::size_t i = 0; i < n * c; ++i) {
      double sum = 0.0;
      for (const auto& view : views) sum += view.values()[i];
      want.values()[i] = static_cast<float>(sum / 4.0);
    }
    REQUIRE(ensemble_logits(views) == want);
    REQUIRE(ensemble_logits(views, 5) == want);
  }
}

TEST_CASE("ensemble errors") {
  CHECK_THROWS_AS(ensemble_logits(std::span<const LogitMatrix>{}), Error);
  const std::vector<LogitMatrix> mismatched = {LogitMatrix(2, 3), LogitMatrix(2, 4)};
  CHECK_THROWS_AS(ensemble_logits(mismatched), Error);
}

TEST_CASE("msp examples") {
  CHECK(msp_score(LogitMatrix(1, 4, {0, 0, 0, 0}), 1.0)[0] == 0.25f);
  CHECK(msp_score(LogitMatrix(1, 4, {0, 0, 0, 0}), 1.1)[0] == 0.25f);

  const LogitMatrix two(1, 2, {2, 0});
  CHECK(msp_score(two, 1.0)[0] == doctest::Approx(0.880797).epsilon(1e-5));
  // e^(2/1.1) / (e^(2/1.1) + 1), evaluated independently to 16 digits.
  CHECK(msp_score(two, 1.1)[0] == doctest::Approx(0.8603478165832398).epsilon(1e-6));
  const auto oracle = oracle::softmax(std::vector<long double>{2.0L, 0.0L}, 1.1L);
  CHECK(msp_score(two, 1.1)[0] == doctest::Approx(static_cast<double>(oracle[0])).epsilon(1e-7));
}

TEST_CASE("msp rejects bad temperatures") {
  const LogitMatrix two(1, 2, {2, 0});
  CHECK_THROWS_AS(msp_score(two, 0.0), Error);
  CHECK_THROWS_AS(msp_score(two, -1.0), Error);
  CHECK_THROWS_AS(msp_score(two, std::nan("")), Error);
}

TEST_CASE("softmax normalization, bounds and oracle agreement") {
  synth::Sampler rng(24);
  const std::array<double, 4> temps = {0.5, 1.0, 1.1, 10.0};
  for (int iter = 0; iter < 1000; ++iter) {
    const std::size_t c = 2 + rng.index(20);
    const auto logits = test::random_logits(rng, 1, c, 5.0);
    const double t = temps[rng.index(temps.size())];
    std::vector<double> probs(c);
    softmax_row(logits.row(0), t, probs);
    REQUIRE(std::accumulate(probs.begin(), probs.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));
    const auto want = oracle::softmax(widen(logits.row(0)), t);
    for (std::size_t j = 0; j < c; ++j) {
      REQUIRE(probs[j] == doctest::Approx(static_cast<double>(want[j])).epsilon(1e-9));
    }
    const float s = msp_score(logits, t)[0];
    REQUIRE(s > 1.0f / static_cast<float>(c));
    REQUIRE(s <= 1.0f);
  }
}

TEST_CASE("huge logits stay finite") {
  const LogitMatrix big(1, 3, {3e38f, -3e38f, 1e38f});
  const auto s = msp_score(big, 0.5);
  CHECK(std::isfinite(s[0]));
  CHECK(s[0] == 1.0f);
}

TEST_CASE("shift invariance") {
  synth::Sampler rng(25);
  for (int iter = 0; iter < 500; ++iter) {
    auto logits = test::random_logits(rng, 1, 2 + rng.index(10));
    const float before = msp_score(logits, 1.1)[0];
    const auto shift = static_cast<float>(20.0 * rng.normal());
    for (auto& v : logits.values()) v += shift;
    REQUIRE(msp_score(logits, 1.1)[0] == doctest::Approx(before).epsilon(1e-6));
  }
}

TEST_CASE("argmax is unchanged by temperature") {
  synth::Sampler rng(26);
  const auto logits = test::random_logits(rng, 500, 7);
  const auto base = predict_class(logits);
  for (double t : {0.5, 1.0, 1.1, 10.0}) {
    std::vector<double> probs(7);
    for (std::size_t i = 0; i < logits.rows(); ++i) {
      softmax_row(logits.row(i), t, probs);
      const auto arg = std::max_element(probs.begin(), probs.end()) - probs.begin();
      REQUIRE(static_cast<std::uint32_t>(arg) == base[i]);
    }
  }
}

TEST_CASE("classify boundary is OOD") {
  const std::vector<float> s = {0.9f, 0.5f};
  CHECK(classify(s, 0.7) == std::vector<Decision>{Decision::id, Decision::ood});
  const std::vector<float> at = {0.7f};
  CHECK(classify(at, static_cast<double>(0.7f)) == std::vector<Decision>{Decision::ood});
  const std::vector<float> pos = {0.1f, 0.25f, 1.0f};
  CHECK(classify(pos, 0.0) == std::vector<Decision>(3, Decision::id));
  CHECK_THROWS_AS(classify(pos, std::nan("")), Error);
}

TEST_CASE("predict_class picks the first maximum") {
  CHECK(predict_class(LogitMatrix(1, 3, {1, 3, 2})) == LabelVector{1});
  CHECK(predict_class(LogitMatrix(1, 2, {5, 5})) == LabelVector{0});
  CHECK(predict_class(LogitMatrix(2, 3, {0, 7, 7, 9, 9, 9})) == LabelVector{1, 0});
}

TEST_CASE("row-parallel results do not depend on thread count") {
  synth::Sampler rng(27);
  const auto h = test::random_features(rng, 777, 16);
  const auto head = test::random_head(rng, 16, 9);
  const auto l1 = compute_logits(h, head, 1);
  const auto l8 = compute_logits(h, head, 8);
  CHECK(l1 == l8);
  CHECK(msp_score(l1, 1.1, 1) == msp_score(l1, 1.1, 8));
  CHECK(predict_class(l1, 1) == predict_class(l1, 3));
}

}  // TEST_SUITE
