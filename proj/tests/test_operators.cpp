#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "support.hpp"
#include "varq/error.hpp"
#include "varq/operators.hpp"

using namespace varq;
using std::numbers::pi;
using testing::scalar_step;

namespace {

// Kernels written out again from their definitions, with their jump points.
double kernel(KernelTag tag, double t, double R, double y) {
  const double u = y / t;
  switch (tag) {
    case KernelTag::average: return std::abs(y) < t ? 0.5 / t : 0.0;
    case KernelTag::truncated_hilbert: return std::abs(y) > t ? 1.0 / (pi * y) : 0.0;
    case KernelTag::doubly_truncated_hilbert: return std::abs(y) > t && std::abs(y) < R ? 1.0 / (pi * y) : 0.0;
    case KernelTag::poisson: return t / (pi * (t * t + y * y));
    case KernelTag::conjugate_poisson: return y / (pi * (t * t + y * y));
    case KernelTag::phi_plus: return u >= 1 ? 1.0 / (pi * t) / (u * (1 + u * u)) : 0.0;
    case KernelTag::phi_minus: return u <= -1 ? 1.0 / (pi * t) / (-u * (1 + u * u)) : 0.0;
    case KernelTag::rho_plus: return u >= 0 && u <= 1 ? u / (pi * t * (1 + u * u)) : 0.0;
    case KernelTag::rho_minus: return u >= -1 && u <= 0 ? -u / (pi * t * (1 + u * u)) : 0.0;
  }
  return 0.0;
}

Point oracle(const KernelFamily& fam, const StepFunction& f, double t, double x) {
  const double R = fam.outer_radius;
  std::vector<double> jumps{-t, 0.0, t, -R, R};
  std::vector<double> out(f.space().dim(), 0.0);
  const auto& bp = f.breakpoints();
  for (std::size_t i = 0; i < f.intervals(); ++i) {
    const double lo = x - bp[i + 1], hi = x - bp[i];
    std::vector<double> cuts{lo, hi};
    for (double j : jumps)
      if (j > lo && j < hi) cuts.push_back(j);
    std::sort(cuts.begin(), cuts.end());
    double w = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double a = cuts[c], b = cuts[c + 1], h = 1e-13 * std::max(1.0, std::abs(b - a));
      if (b - a <= 2 * h) continue;
      w += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double y) { return kernel(fam.tag, t, R, std::clamp(y, a + h, b - h)); }, a, b, 15, 1e-14);
    }
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += w * f.values()[i][d];
  }
  return Point(f.space(), out);
}

// Integral over x of the piecewise linear function x -> A_t f(x).
double average_integral(const StepFunction& f, double t) {
  std::vector<double> xs;
  for (double b : f.breakpoints()) {
    xs.push_back(b - t);
    xs.push_back(b + t);
  }
  std::sort(xs.begin(), xs.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    acc += 0.5 * (xs[i + 1] - xs[i]) *
           (eval(KernelFamily::average(), f, t, xs[i])[0] + eval(KernelFamily::average(), f, t, xs[i + 1])[0]);
  return acc;
}

}  // namespace

TEST_CASE("closed-form anchors") {
  const auto unit = scalar_step({0, 1}, {1});
  const auto sym = scalar_step({-1, 1}, {1});
  CHECK(eval(KernelFamily::average(), unit, 1.0, 0.0)[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eval(KernelFamily::poisson(), sym, 1.0, 0.0)[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eval(KernelFamily::truncated_hilbert(), unit, 0.5, 2.0)[0] == doctest::Approx(std::log(2.0) / pi).epsilon(1e-14));
  for (double e : {0.01, 1.0, 30.0}) CHECK(std::abs(eval(KernelFamily::conjugate_poisson(), sym, e, 0.0)[0]) <= 1e-16);
  CHECK(hilbert_full(sym, 2.0)[0] == doctest::Approx(std::log(3.0) / pi).epsilon(1e-14));
  CHECK(hilbert_full(sym, -2.0)[0] == doctest::Approx(-std::log(3.0) / pi).epsilon(1e-14));
  try {
    hilbert_full(sym, 1.0);
    FAIL("expected a singularity");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::singularity);
  }
}

TEST_CASE("lp norms") {
  const auto unit = scalar_step({0, 1}, {1});
  for (double p : {1.0, 1.5, 2.0, 7.0}) CHECK(lp_norm(unit, p) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lp_norm(scalar_step({0, 3}, {2}), 2.0) == doctest::Approx(2 * std::sqrt(3.0)).epsilon(1e-15));
  const Space s(2, NormKind::linf());
  const StepFunction g({0, 1, 2}, {Point(s, {1, 0}), Point(s, {0, 1})});
  CHECK(lp_norm(g, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(lp_norm(unit, 0.5), Error);
}

TEST_CASE("quadrature convolution examples") {
  const auto sym = scalar_step({-1, 1}, {1});
  const Point pq = quad_eval(KernelFamily::poisson(), sym, 1.0, 0.0, 1e-12);
  CHECK(std::abs(pq[0] - eval(KernelFamily::poisson(), sym, 1.0, 0.0)[0]) <= 1e-8);
  CHECK(quad_convolve([](double) { return 1.0; }, scalar_step({0, 1}, {1}), 3.7, 1e-12)[0] ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(quad_convolve([](double y) { return 1.0 / (1 + y * y); }, scalar_step({0, 1}, {0}), 0.3, 1e-12)[0] == 0.0);
}

TEST_CASE("every family matches an independent quadrature oracle") {
  Rng rng(21);
  std::vector<KernelFamily> fams = all_kernel_families();
  fams.push_back(KernelFamily::doubly_truncated_hilbert(2.5));
  for (const auto& fam : fams) {
    CAPTURE(fam.name());
    double worst = 0.0, worst_quad = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Space s(1 + rng.below(3), NormKind::l2());
      const auto f = testing::random_step(rng, s, 1 + rng.below(5));
      const double t = std::exp(rng.uniform(std::log(0.05), std::log(4.0)));
      const double x = rng.uniform(f.support_min() - 2, f.support_max() + 2);
      const Point closed = eval(fam, f, t, x);
      worst = std::max(worst, testing::max_abs_diff(closed, oracle(fam, f, t, x)));
      worst_quad = std::max(worst_quad, testing::max_abs_diff(closed, quad_eval(fam, f, t, x, 1e-11)));
    }
    CHECK(worst <= 1e-8);
    CHECK(worst_quad <= 1e-8);
  }
}

TEST_CASE("average conserves mass") {
  Rng rng(22);
  for (int i = 0; i < 100; ++i) {
    const auto f = testing::random_step(rng, Space(1, NormKind::l2()), 1 + rng.below(6));
    double mass = 0.0;
    for (std::size_t k = 0; k < f.intervals(); ++k)
      mass += (f.breakpoints()[k + 1] - f.breakpoints()[k]) * f.values()[k][0];
    const double t = rng.uniform(0.01, 3.0);
    CHECK(std::abs(average_integral(f, t) - mass) <= 1e-12 * std::max(1.0, std::abs(mass)) + 1e-14);
  }
}

TEST_CASE("dilation covariance") {
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    const auto f = testing::random_step(rng, Space(2, NormKind::l2()), 1 + rng.below(5));
    const double lambda = std::exp(rng.uniform(-2, 2));
    // f_lambda(x) = f(lambda x)
    const StepFunction fl = f.dilated(lambda);
    const double t = rng.uniform(0.05, 2.0), x = rng.uniform(-3, 3);
    for (const auto& fam : {KernelFamily::average(), KernelFamily::truncated_hilbert(), KernelFamily::poisson()}) {
      const Point a = eval(fam, fl, t, x), b = eval(fam, f, lambda * t, lambda * x);
      CHECK(testing::max_abs_diff(a, b) <= 1e-12 * std::max(1.0, norm(b)));
    }
  }
}

TEST_CASE("decomposition residual") {
  CHECK(decomposition_residual(scalar_step({0, 1}, {1}), 0.3, 0.7) <= 1e-10);
  Rng rng(24);
  const auto g = testing::random_step(rng, Space(2, NormKind::l2()), 5);
  CHECK(decomposition_residual(g, 1.5, -2.0) <= 1e-10);
  CHECK(decomposition_residual(scalar_step({0, 1}, {1}), 10.0, 500.0) <= 1e-10);
  CHECK(decomposition_residual(scalar_step({0, 1}, {0}), 10.0, 500.0) == 0.0);
  for (int i = 0; i < 100; ++i) {
    const auto f = testing::random_step(rng, Space(1 + rng.below(3), NormKind::linf()), 1 + rng.below(6));
    CHECK(decomposition_residual(f, std::exp(rng.uniform(-3, 2)), rng.uniform(-4, 4)) <= 1e-10);
  }
}

TEST_CASE("conjugate Poisson identities") {
  Rng rng(25);
  for (int i = 0; i < 10; ++i) {
    const auto f = testing::random_step(rng, Space(2, NormKind::l2()), 1 + rng.below(4));
    const double e = std::exp(rng.uniform(std::log(0.05), std::log(5.0)));
    const double x = f.support_max() + 0.3 + rng.uniform();
    const Point q = eval(KernelFamily::conjugate_poisson(), f, e, x);
    CHECK(testing::max_abs_diff(q, poisson_of_hilbert(f, e, x)) <= 1e-6);
    CHECK(testing::max_abs_diff(q, hilbert_weighted_average(f, e, x)) <= 1e-6);
  }
  CHECK(std::abs(hilbert_average_weight_mass() - 1.0) <= 1e-10);
  // the tampered kernel is visibly off
  const auto f = scalar_step({0, 1}, {1});
  CHECK(std::abs(poisson_of_hilbert(f, 0.5, 2.0, true)[0] - eval(KernelFamily::conjugate_poisson(), f, 0.5, 2.0)[0]) >
        1e-3);
}

TEST_CASE("kernel hypotheses") {
  for (auto tag : {KernelTag::phi_plus, KernelTag::phi_minus, KernelTag::rho_plus, KernelTag::rho_minus}) {
    const auto h = kernel_hypothesis_check(tag);
    CHECK(h.passes);
    CHECK(std::isfinite(h.integral));
  }
  // rho+ has Phi'(y) = (1/pi)(1 - y^2)/(1 + y^2)^2 on [0, 1]
  const auto rho_integrand = [](double y) { return y * std::abs((1 - y * y) / (pi * (1 + y * y) * (1 + y * y))); };
  const auto rho = kernel_hypothesis_check(KernelTag::rho_plus);
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  CHECK(rho.integral == doctest::Approx(GK::integrate(rho_integrand, rho.cutoff, 1.0, 15, 1e-14)).epsilon(1e-6));
  CHECK(rho.integral == doctest::Approx(GK::integrate(rho_integrand, 0.0, 1.0, 15, 1e-14)).epsilon(1e-2));
  CHECK(kernel_hypothesis_check(KernelTag::phi_plus).limit_ok);

  KernelProfile inverse{"inverse_x", KernelSupport::tail, [](double x) { return 1.0 / x; },
                        [](double x) { return -1.0 / (x * x); }};
  CHECK_FALSE(kernel_hypothesis_check(inverse).passes);
}

TEST_CASE("errors") {
  const auto unit = scalar_step({0, 1}, {1});
  CHECK_THROWS_AS(eval(KernelFamily::average(), unit, 0.0, 0.0), Error);
  CHECK_THROWS_AS(eval(KernelFamily::poisson(), unit, -1.0, 0.0), Error);
  CHECK_THROWS_AS(KernelFamily::doubly_truncated_hilbert(0.0), Error);
  CHECK_THROWS_AS(scalar_step({1, 0}, {1}), Error);
  CHECK_THROWS_AS(scalar_step({0, 1, 2}, {1}), Error);
  CHECK_THROWS_AS(ScaleGrid({1.0, 0.5}), Error);
  CHECK_THROWS_AS(ScaleGrid({0.0, 0.5}), Error);
  CHECK_THROWS_AS(KernelFamily::from_name("gaussian"), Error);
}

TEST_CASE("scale grids") {
  const auto g = ScaleGrid::geometric(0x1p-6, 0x1p6, 33);
  CHECK(g.size() == 33);
  CHECK(g.min() == 0x1p-6);
  CHECK(g.max() == 0x1p6);
  // nested refinement: every point of the 17-grid is in the 33-grid
  const auto coarse = ScaleGrid::geometric(0x1p-6, 0x1p6, 17);
  for (std::size_t i = 0; i < coarse.size(); ++i) CHECK(coarse.scales()[i] == g.scales()[2 * i]);
}
