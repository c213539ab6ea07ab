#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "support.hpp"
#include "varq/error.hpp"
#include "varq/harness.hpp"

using namespace varq;

namespace {

ExperimentConfig small_config(std::uint64_t seed = 3) {
  ExperimentConfig c;
  c.id = "small";
  c.space = Space(2, NormKind::l2());
  c.p = 2.0;
  c.q = 3.0;
  c.family = KernelFamily::poisson();
  c.scales = ScaleGrid::geometric(0.125, 2.0, 9);
  c.corpus.count = 4;
  c.corpus.seed = seed;
  c.optimizer.restarts = 2;
  c.optimizer.iterations = 6;
  c.optimizer.seed = seed + 1;
  c.spatial.points_per_unit = 16.0;
  c.spatial.richardson_gate = 0.05;
  return c;
}

// Two scales: V_q is the distance between the two averages, so the field norm
// is an ordinary integral with kinks at x = a +- t and b +- t.
double two_scale_oracle(double t1, double t2, double p) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const auto avg = [](double t, double x) {
    return std::max(0.0, std::min(1.0, x + t) - std::max(0.0, x - t)) / (2 * t);
  };
  const auto g = [&](double x) { return std::pow(std::abs(avg(t1, x) - avg(t2, x)), p); };
  std::vector<double> cuts{-t2, -t1, t1, t2, 1 - t2, 1 - t1, 1 + t1, 1 + t2};
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i)
    if (cuts[i] > cuts[i - 1]) acc += GK::integrate(g, cuts[i - 1], cuts[i], 10, 1e-14);
  return std::pow(acc, 1.0 / p);
}

}  // namespace

TEST_CASE("field norm of the zero function") {
  const Space s(2, NormKind::l2());
  const auto f = StepFunction::indicator(0.0, 1.0, Point::zero(s));
  const auto v = field_vq_lp(f, KernelFamily::poisson(), ScaleGrid::geometric(0.1, 1.0, 5), 2.0, 2.0, {});
  CHECK(v.value == 0.0);
  CHECK(v.gap == 0.0);
}

TEST_CASE("two-scale field norm against a direct integral") {
  const auto f = testing::scalar_step({0.0, 1.0}, {1.0});
  for (double p : {1.5, 2.0, 3.0}) {
    const double t1 = 0.25, t2 = 0.75;
    SpatialSpec sp;
    sp.points_per_unit = 256.0;
    sp.tail_multiplier = 2.0;
    const auto v = field_vq_lp(f, KernelFamily::average(), ScaleGrid({t1, t2}), 2.0, p, sp);
    CHECK(testing::rel_diff(v.value, two_scale_oracle(t1, t2, p)) <= 1e-5);
    CHECK(v.endpoint_increment == doctest::Approx(v.value).epsilon(1e-12));
  }
}

TEST_CASE("scale refinement never decreases the field norm") {
  Rng rng(51);
  for (int i = 0; i < 6; ++i) {
    const auto f = testing::random_step(rng, Space(2, NormKind::linf()), 1 + rng.below(3));
    const auto family = i % 2 ? KernelFamily::average() : KernelFamily::poisson();
    SpatialSpec sp;
    sp.points_per_unit = 16.0;
    sp.richardson_gate = 0.05;
    // nested grids on the same spatial grid: 5, 9, 17 points between 1/8 and 2
    double prev = 0.0;
    for (std::size_t count : {5, 9, 17}) {
      const auto v = field_vq_lp(f, family, ScaleGrid::geometric(0.125, 2.0, count), 3.0, 2.0, sp);
      CHECK(v.value >= prev * (1 - 1e-12));
      prev = v.value;
    }
  }
}

TEST_CASE("estimate is deterministic and invariant") {
  const auto c = small_config();
  const auto a = estimate_constant(c), b = estimate_constant(c);
  CHECK(a == b);
  CHECK(to_csv({a}) == to_csv({b}));
  CHECK(a.estimate >= a.diagnostic("sanity_lower_bound") * (1 - 1e-12));
  CHECK(a.trace.size() == c.optimizer.restarts * c.optimizer.iterations);
  for (std::size_t i = 1; i < a.trace.size(); ++i) CHECK(a.trace[i] >= a.trace[i - 1]);

  // explicit corpus, so scaling and dilation act on the same functions
  auto base = small_config();
  base.corpus.functions = build_corpus(base.corpus, base.space);
  base.corpus.count = 0;
  const double ref = estimate_constant(base).estimate;

  for (double lambda : {3.0, 0.5}) {
    auto scaled = base;
    for (auto& f : scaled.corpus.functions) f = f.scaled(lambda);
    CHECK(testing::rel_diff(estimate_constant(scaled).estimate, ref) <= 1e-10);
  }
  for (double delta : {2.0, 3.0}) {
    auto dil = base;
    for (auto& f : dil.corpus.functions) f = f.dilated(1.0 / delta);
    dil.scales = base.scales.dilated(delta);
    CHECK(testing::rel_diff(estimate_constant(dil).estimate, ref) <= 1e-10);
  }
}

TEST_CASE("estimate errors") {
  auto c = small_config();
  c.q = 1.5;
  CHECK_THROWS_AS(estimate_constant(c), Error);
  c = small_config();
  c.corpus.amplitude = 0.0;
  try {
    estimate_constant(c);
    FAIL("expected a degenerate input error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate);
  }
}

TEST_CASE("sweeps") {
  auto c = small_config();
  c.optimizer.iterations = 2;
  const auto qs = sweep(c, SweepAxis::parse("q=2,3,4"));
  CHECK(qs.rows.size() == 3);
  CHECK(qs.fixed_f_monotone);
  for (std::size_t i = 1; i < qs.fixed_f_curve.size(); ++i)
    CHECK(qs.fixed_f_curve[i] <= qs.fixed_f_curve[i - 1] * (1 + 1e-12));

  c.corpus.scalar_embedded = true;
  const auto dims = sweep(c, SweepAxis::parse("dim=1,2,3"));
  CHECK(dims.fixed_f_monotone);
  for (double v : dims.fixed_f_curve) CHECK(testing::rel_diff(v, dims.fixed_f_curve[0]) <= 1e-10);

  const auto tsv = plot_tsv(qs);
  CHECK(tsv.find("\n\n") != std::string::npos);
  CHECK_THROWS_AS(SweepAxis::parse("speed=1,2"), Error);
  CHECK_THROWS_AS(SweepAxis::parse("q"), Error);
}

TEST_CASE("identity suite") {
  IdentityOptions opt;
  opt.triples = 12;
  const auto rows = identity_suite(61, opt);
  CHECK(all_pass(rows));
  bool control = false;
  for (const auto& r : rows) {
    CAPTURE(r.experiment_id);
    CHECK(r.status == "PASS");
    control = control || r.experiment_id == "identities/negative_control";
  }
  CHECK(control);

  opt.corrupt_kernel = true;
  CHECK_FALSE(all_pass(identity_suite(61, opt)));
}

TEST_CASE("cotype rows") {
  const auto r = cotype_row(Space(4, NormKind::linf()), 4, 3.0, 1);
  CHECK(r.estimate == 4.0);
  const auto h = cotype_row(Space(3, NormKind::l2()), 5, 2.0, 2);
  CHECK(h.estimate == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("CSV layout") {
  ReportRow row;
  row.experiment_id = "a,b";
  row.kind = "estimate";
  row.space = "l2";
  row.estimate = 1.5;
  row.diagnostics = {{"x", 1.0}};
  const auto csv = to_csv({row});
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.rfind("experiment_id,kind,space,dim,p,q,family,estimate,diagnostic,seed\n", 0) == 0);
  CHECK(csv.find("\"a,b\"") != std::string::npos);
  CHECK(to_csv({row}) == csv);
}
