#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "varq/error.hpp"

namespace varq {

struct SimpsonOptions {
  double abs_tol = 1e-10;
  int max_depth = 48;
  std::size_t max_evaluations = 4'000'000;
};

/// Adaptive Simpson quadrature with Richardson correction. The tolerance is
/// absolute over [a, b] and split evenly between halves on each bisection.
/// Throws QuadratureError (carrying the estimate reached) when a panel cannot
/// meet its share of the tolerance within the depth/evaluation budget.
template <class F>
double adaptive_simpson(F&& f, double a, double b, const SimpsonOptions& opt = {}) {
  if (a == b) return 0.0;
  if (b < a) return -adaptive_simpson(f, b, a, opt);

  struct Panel {
    double a, b, fa, fm, fb, whole, tol;
    int depth;
  };
  const auto simpson = [](double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  };

  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  std::size_t evaluations = 3;
  std::vector<Panel> stack;
  stack.push_back({a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), opt.abs_tol, 0});

  double total = 0.0;
  bool failed = false;
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + mid), rm = 0.5 * (mid + p.b);
    const double flm = f(lm), frm = f(rm);
    evaluations += 2;
    const double left = simpson(p.a, mid, p.fa, flm, p.fm);
    const double right = simpson(mid, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.whole;
    const bool tiny = (p.b - p.a) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid));
    if (std::abs(delta) <= 15.0 * p.tol || tiny) {
      total += left + right + delta / 15.0;
      continue;
    }
    if (p.depth >= opt.max_depth || evaluations >= opt.max_evaluations) {
      failed = true;
      total += left + right + delta / 15.0;
      continue;
    }
    stack.push_back({mid, p.b, p.fm, frm, p.fb, right, 0.5 * p.tol, p.depth + 1});
    stack.push_back({p.a, mid, p.fa, flm, p.fm, left, 0.5 * p.tol, p.depth + 1});
  }
  if (failed) throw QuadratureError("adaptive Simpson did not converge", total);
  return total;
}

}  // namespace varq
