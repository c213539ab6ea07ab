#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "varq/error.hpp"
#include "varq/variation.hpp"

using namespace varq;
using testing::scalar_path;

namespace {

// Independent enumeration: every subset of indices, increments summed in order.
double enumerate_vq(const SamplePath& path, double q) {
  const std::size_t n = path.size();
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double acc = 0.0;
    long prev = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!((mask >> i) & 1U)) continue;
      if (prev >= 0) acc += std::pow(norm(path.values()[i] - path.values()[prev]), q);
      prev = static_cast<long>(i);
    }
    best = std::max(best, acc);
  }
  return std::pow(best, 1.0 / q);
}

double chain_value(const SamplePath& path, const std::vector<std::size_t>& chain, double q) {
  double acc = 0.0;
  for (std::size_t i = 1; i < chain.size(); ++i)
    acc += std::pow(norm(path.values()[chain[i]] - path.values()[chain[i - 1]]), q);
  return std::pow(acc, 1.0 / q);
}

SamplePath drop(const SamplePath& path, std::size_t k) {
  std::vector<double> labels;
  std::vector<Point> values;
  for (std::size_t i = 0; i < path.size(); ++i)
    if (i != k) {
      labels.push_back(path.labels()[i]);
      values.push_back(path.values()[i]);
    }
  return SamplePath(labels, values);
}

}  // namespace

TEST_CASE("worked examples, both routes") {
  for (auto* f : {&vq_bruteforce, &vq_dp}) {
    auto r = (*f)(scalar_path({0, 3}), 2.5);
    CHECK(r.value == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(r.chain == std::vector<std::size_t>{0, 1});

    r = (*f)(scalar_path({0, 1, 2, 3}), 2.0);
    CHECK(r.value == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(r.chain == std::vector<std::size_t>{0, 3});

    r = (*f)(scalar_path({1, -1, 1, -1, 1}), 2.0);
    CHECK(r.value == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(r.chain == std::vector<std::size_t>{0, 1, 2, 3, 4});
  }
}

TEST_CASE("degenerate paths") {
  auto r = vq_dp(scalar_path({2.5}), 2.0);
  CHECK(r.value == 0.0);
  CHECK(r.chain.empty());
  r = vq_dp(scalar_path({1, 1, 1}), 3.0);
  CHECK(r.value == 0.0);
  CHECK(r.chain.empty());
  CHECK(vq_stream_lower(scalar_path({1, 1, 1}), 2.0) == 0.0);
}

TEST_CASE("q = 1 is the sum of adjacent increments") {
  // zig-zag: every interior point is a strict turning point, so the full chain is the unique optimum
  const auto path = scalar_path({0, 2, -1, 3, 1, 4});
  const auto r = vq_dp(path, 1.0);
  CHECK(r.value == doctest::Approx(2 + 3 + 4 + 2 + 3).epsilon(1e-15));
  CHECK(r.chain == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  CHECK(vq_stream_lower(path, 1.0) == r.value);

  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto p = testing::random_path(rng, Space(3, NormKind::l1()), 2 + rng.below(10));
    CHECK(testing::rel_diff(vq_dp(p, 1.0).value, vq_stream_lower(p, 1.0)) <= 1e-12);
  }
}

TEST_CASE("stream lower bound") {
  CHECK(vq_stream_lower(scalar_path({0, 1, 2, 3}), 2.0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const auto p = testing::random_path(rng, Space(2, NormKind::linf()), 1 + rng.below(15));
    CHECK(vq_stream_lower(p, 2.5) <= vq_dp(p, 2.5).value * (1 + 1e-12));
  }
}

TEST_CASE("bruteforce matches an independent enumeration") {
  Rng rng(7);
  for (int i = 0; i < 60; ++i) {
    const auto p = testing::random_path(rng, Space(2, NormKind::l2()), 1 + rng.below(10));
    const double q = 1.0 + 3.0 * rng.uniform();
    CHECK(testing::rel_diff(vq_bruteforce(p, q).value, enumerate_vq(p, q)) <= 1e-12);
  }
}

TEST_CASE("dp equals bruteforce and its chain reproduces the value") {
  Rng rng(8);
  const Space spaces[] = {Space(2, NormKind::l1()), Space(3, NormKind::l2()), Space(4, NormKind::linf())};
  const double qs[] = {1.0, 2.0, 2.5, 4.0};
  for (int i = 0; i < 300; ++i) {
    const auto p = testing::random_path(rng, spaces[i % 3], 1 + rng.below(13));
    const double q = qs[(i / 3) % 4];
    const auto dp = vq_dp(p, q);
    const auto bf = vq_bruteforce(p, q);
    CHECK(testing::rel_diff(dp.value, bf.value) <= 1e-12);
    CHECK(dp.chain == bf.chain);
    if (!dp.chain.empty()) CHECK(testing::rel_diff(chain_value(p, dp.chain, q), dp.value) <= 1e-12);
    for (std::size_t j = 1; j < dp.chain.size(); ++j) CHECK(dp.chain[j - 1] < dp.chain[j]);
  }
}

TEST_CASE("structural laws") {
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    const Space s(1 + rng.below(4), i % 2 ? NormKind::l2() : NormKind::linf());
    const auto p = testing::random_path(rng, s, 2 + rng.below(12));
    const double q = 1.0 + 3.0 * rng.uniform(), q2 = q + 2.0 * rng.uniform();
    const double v = vq_dp(p, q).value;
    CHECK(vq_dp(p, q2).value <= v * (1 + 1e-12));
    CHECK(vq_dp(drop(p, rng.below(p.size())), q).value <= v * (1 + 1e-12));

    const double lambda = rng.uniform(-4, 4);
    const Point shift = testing::random_point(rng, s, 5.0);
    std::vector<Point> scaled, shifted;
    for (const auto& x : p.values()) {
      scaled.push_back(lambda * x);
      shifted.push_back(x + shift);
    }
    CHECK(testing::rel_diff(vq_dp(SamplePath(p.labels(), scaled), q).value, std::abs(lambda) * v) <= 1e-12);
    CHECK(testing::rel_diff(vq_dp(SamplePath(p.labels(), shifted), q).value, v) <= 1e-12);
  }
}

TEST_CASE("flat variants agree with the path routine") {
  Rng rng(10);
  for (int i = 0; i < 50; ++i) {
    const Space s(3, NormKind::lr(1.5));
    const auto p = testing::random_path(rng, s, 1 + rng.below(20));
    std::vector<double> flat, dist(p.size() * p.size());
    for (const auto& v : p.values()) flat.insert(flat.end(), v.coords().begin(), v.coords().end());
    for (std::size_t a = 0; a < p.size(); ++a)
      for (std::size_t b = a + 1; b < p.size(); ++b) dist[a * p.size() + b] = norm(p.values()[b] - p.values()[a]);
    const double v = vq_dp(p, 3.0).value;
    CHECK(testing::rel_diff(vq_value(flat, p.size(), s, 3.0), v) <= 1e-12);
    CHECK(testing::rel_diff(vq_value_distances(dist, p.size(), 3.0), v) <= 1e-12);
  }
}

TEST_CASE("large paths run") {
  Rng rng(13);
  const auto p = testing::random_path(rng, Space(1, NormKind::l2()), 10001);
  CHECK(vq_dp(p, 2.0).value >= vq_stream_lower(p, 2.0));
}

TEST_CASE("errors") {
  const auto p = scalar_path({0, 1});
  CHECK_THROWS_AS(vq_dp(p, 0.5), Error);
  CHECK_THROWS_AS(vq_bruteforce(p, 0.9), Error);
  std::vector<double> many(22, 0.0);
  try {
    vq_bruteforce(scalar_path(many), 2.0);
    FAIL("expected a size error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::size);
  }
  const Space s(1, NormKind::l2());
  CHECK_THROWS_AS(SamplePath({1.0, 1.0}, {Point::zero(s), Point::zero(s)}), Error);
  CHECK_THROWS_AS(SamplePath({1.0, 2.0}, {Point::zero(s), Point::zero(Space(2, NormKind::l2()))}), Error);
}
