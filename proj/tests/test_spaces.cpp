#include <doctest.h>

#include <cmath>
#include <limits>

#include "support.hpp"
#include "varq/error.hpp"
#include "varq/spaces.hpp"

using namespace varq;

TEST_CASE("norm examples") {
  CHECK(norm(Point(Space(2, NormKind::l2()), {3, 4})) == 5.0);
  CHECK(norm(Point(Space(2, NormKind::linf()), {1, -2})) == 2.0);
  CHECK(norm(Point(Space(3, NormKind::l1()), {1, -2, 3})) == 6.0);
  CHECK(norm(Point(Space(2, NormKind::lr(3)), {1, 1})) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-15));
}

TEST_CASE("axpy examples") {
  const Space s(2, NormKind::l2());
  const Point v(s, {1, 0}), w(s, {0, 1});
  CHECK(axpy(0.0, Point(s, {7, -3}), w) == w);
  CHECK(axpy(1.0, v, w) == Point(s, {1, 1}));
  CHECK(axpy(-1.0, w, w) == Point::zero(s));
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(NormKind::lr(0.5), Error);
  CHECK_THROWS_AS(Space(0, NormKind::l2()), Error);
  const Space s(2, NormKind::l2());
  CHECK_THROWS_AS(Point(s, {1.0}), Error);
  CHECK_THROWS_AS(Point(s, {1.0, std::numeric_limits<double>::quiet_NaN()}), Error);
  const Point a(s, {1, 2});
  const Point b(Space(2, NormKind::l1()), {1, 2});
  try {
    axpy(1.0, a, b);
    FAIL("expected a space mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::space_mismatch);
  }
  CHECK_THROWS_AS(axpy(1.0, a, Point(Space(3, NormKind::l2()), {1, 2, 3})), Error);
}

TEST_CASE("triangle inequality and homogeneity on seeded pairs") {
  Rng rng(11);
  const NormKind kinds[] = {NormKind::l1(), NormKind::l2(), NormKind::lr(3.5), NormKind::linf()};
  for (int i = 0; i < 1000; ++i) {
    const Space s(1 + rng.below(6), kinds[i % 4]);
    const Point v = testing::random_point(rng, s, 10.0), w = testing::random_point(rng, s, 10.0);
    const double nv = norm(v), nw = norm(w);
    CHECK(norm(v + w) <= nv + nw + 1e-12 * (nv + nw));
    const double alpha = rng.uniform(-5, 5);
    CHECK(testing::rel_diff(norm(alpha * v), std::abs(alpha) * nv) <= 1e-12);
  }
}

TEST_CASE("norm is nonincreasing in r") {
  Rng rng(12);
  const double rs[] = {1.0, 1.5, 2.0, 3.0, 7.0};
  for (int i = 0; i < 200; ++i) {
    const std::size_t dim = 1 + rng.below(8);
    std::vector<double> c(dim);
    for (auto& x : c) x = rng.uniform(-3, 3);
    double prev = std::numeric_limits<double>::infinity();
    for (double r : rs) {
      const double n = norm(Point(Space(dim, NormKind::lr(r)), c));
      CHECK(n <= prev * (1 + 1e-14));
      prev = n;
    }
    CHECK(norm(Point(Space(dim, NormKind::linf()), c)) <= prev * (1 + 1e-14));
  }
}
