#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "varq/operators.hpp"
#include "varq/random.hpp"
#include "varq/spaces.hpp"
#include "varq/variation.hpp"

namespace testing {

inline varq::Point random_point(varq::Rng& rng, const varq::Space& space, double amp = 1.0) {
  std::vector<double> c(space.dim());
  for (auto& x : c) x = rng.uniform(-amp, amp);
  return varq::Point(space, std::move(c));
}

inline varq::SamplePath random_path(varq::Rng& rng, const varq::Space& space, std::size_t samples) {
  std::vector<double> labels(samples);
  std::vector<varq::Point> values;
  double t = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    t += 0.1 + rng.uniform();
    labels[i] = t;
    values.push_back(random_point(rng, space));
  }
  return varq::SamplePath(std::move(labels), std::move(values));
}

inline varq::StepFunction random_step(varq::Rng& rng, const varq::Space& space, std::size_t intervals,
                                      double start = -1.0) {
  std::vector<double> bps{start + rng.uniform(-0.5, 0.5)};
  std::vector<varq::Point> values;
  for (std::size_t i = 0; i < intervals; ++i) {
    bps.push_back(bps.back() + 0.1 + rng.uniform());
    values.push_back(random_point(rng, space));
  }
  return varq::StepFunction(std::move(bps), std::move(values));
}

inline varq::StepFunction scalar_step(std::vector<double> bps, const std::vector<double>& values) {
  const varq::Space s(1, varq::NormKind::l2());
  std::vector<varq::Point> pts;
  for (double v : values) pts.push_back(varq::Point::scalar(s, v));
  return varq::StepFunction(std::move(bps), std::move(pts));
}

inline varq::SamplePath scalar_path(const std::vector<double>& values) {
  const varq::Space s(1, varq::NormKind::l2());
  std::vector<varq::Point> pts;
  for (double v : values) pts.push_back(varq::Point::scalar(s, v));
  return varq::SamplePath::indexed(std::move(pts));
}

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline double max_abs_diff(const varq::Point& a, const varq::Point& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
