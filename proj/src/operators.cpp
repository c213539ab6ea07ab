#include "varq/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "varq/error.hpp"
#include "varq/quadrature.hpp"
#include "varq/variation.hpp"

namespace varq {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// int over [a, b] ∩ {t < |y| < R} of dy / y. With t == 0 the principal value
// is taken when the interval straddles the origin.
double inverse_y_mass(double a, double b, double t, double R) {
  a = std::max(a, -R);
  b = std::min(b, R);
  if (!(b > a)) return 0.0;
  if (t == 0.0 && a < 0.0 && b > 0.0) return std::log(b / -a);
  double s = 0.0;
  const double plo = std::max(a, t), phi = b;
  if (phi > plo) s += std::log(phi / plo);
  const double nlo = a, nhi = std::min(b, -t);
  if (nhi > nlo) s += std::log(nhi / nlo);  // both negative: log(|hi| / |lo|)
  return s;
}

// int_{[lo, hi] ∩ [1, inf)} du / (u (u^2 + 1)), primitive -1/2 log(1 + u^-2).
double phi_plus_mass(double lo, double hi) {
  lo = std::max(lo, 1.0);
  if (!(hi > lo)) return 0.0;
  const auto F = [](double u) { return std::isinf(u) ? 0.0 : -0.5 * std::log1p(1.0 / (u * u)); };
  return (F(hi) - F(lo)) / kPi;
}

// int_{[lo, hi] ∩ [0, 1]} u du / (u^2 + 1), primitive 1/2 log(1 + u^2).
double rho_plus_mass(double lo, double hi) {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, 1.0);
  if (!(hi > lo)) return 0.0;
  return 0.5 * (std::log1p(hi * hi) - std::log1p(lo * lo)) / kPi;
}

void require_scale(double t) {
  if (!(t > 0.0) || std::isinf(t)) throw Error(ErrorKind::domain, "scale parameter must be positive and finite");
}

// Integrates g over (0, inf): first over [0, L] split at `breaks`, then over
// dyadic shells [L, 2L] until a shell contributes less than tol.
template <class G>
double integrate_half_line(G&& g, std::vector<double> breaks, double tol) {
  std::sort(breaks.begin(), breaks.end());
  double L = 1.0;
  for (double b : breaks)
    if (b > 0.0 && std::isfinite(b)) L = std::max(L, b);
  double total = 0.0;
  double left = 0.0;
  SimpsonOptions opt;
  opt.abs_tol = tol / static_cast<double>(breaks.size() + 2);
  for (double b : breaks) {
    if (!(b > left) || b >= L) continue;
    total += adaptive_simpson(g, left, b, opt);
    left = b;
  }
  total += adaptive_simpson(g, left, L, opt);
  opt.abs_tol = tol;
  for (int k = 0; k < 80; ++k) {
    const double shell = adaptive_simpson(g, L, 2.0 * L, opt);
    total += shell;
    L *= 2.0;
    if (std::abs(shell) < tol) return total;
  }
  throw QuadratureError("half-line integral did not settle under cutoff doubling", total);
}

}  // namespace

// ---------------------------------------------------------------------------
// StepFunction

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<Point> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorKind::domain, "step function needs at least one interval");
  if (breakpoints_.size() != values_.size() + 1)
    throw Error(ErrorKind::domain, "step function needs exactly one more breakpoint than values");
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    if (!std::isfinite(breakpoints_[i])) throw Error(ErrorKind::domain, "breakpoints must be finite");
    if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1]))
      throw Error(ErrorKind::domain, "breakpoints must be strictly increasing");
  }
  for (const auto& v : values_) require_same_space(v.space(), values_.front().space(), "step function values");
}

StepFunction StepFunction::indicator(double a, double b, const Point& value) { return StepFunction({a, b}, {value}); }

StepFunction StepFunction::scaled(double lambda) const {
  std::vector<Point> v;
  v.reserve(values_.size());
  for (const auto& p : values_) v.push_back(lambda * p);
  return StepFunction(breakpoints_, std::move(v));
}

StepFunction StepFunction::dilated(double lambda) const {
  if (!(lambda > 0.0)) throw Error(ErrorKind::domain, "dilation factor must be positive");
  std::vector<double> b(breakpoints_.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = breakpoints_[i] / lambda;
  return StepFunction(std::move(b), values_);
}

bool StepFunction::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](const Point& p) { return norm(p) == 0.0; });
}

// ---------------------------------------------------------------------------
// KernelFamily / ScaleGrid

KernelFamily KernelFamily::doubly_truncated_hilbert(double R) {
  if (!(R > 0.0) || std::isinf(R)) throw Error(ErrorKind::domain, "outer truncation radius must be positive");
  return {KernelTag::doubly_truncated_hilbert, R};
}

std::string KernelFamily::name() const {
  switch (tag) {
    case KernelTag::average: return "average";
    case KernelTag::truncated_hilbert: return "truncated_hilbert";
    case KernelTag::doubly_truncated_hilbert: return "doubly_truncated_hilbert";
    case KernelTag::poisson: return "poisson";
    case KernelTag::conjugate_poisson: return "conjugate_poisson";
    case KernelTag::phi_plus: return "phi_plus";
    case KernelTag::phi_minus: return "phi_minus";
    case KernelTag::rho_plus: return "rho_plus";
    case KernelTag::rho_minus: return "rho_minus";
  }
  return "unknown";
}

KernelFamily KernelFamily::from_name(const std::string& name, double outer_radius) {
  if (name == "average") return average();
  if (name == "truncated_hilbert") return truncated_hilbert();
  if (name == "doubly_truncated_hilbert") return doubly_truncated_hilbert(outer_radius);
  if (name == "poisson") return poisson();
  if (name == "conjugate_poisson") return conjugate_poisson();
  if (name == "phi_plus") return phi_plus();
  if (name == "phi_minus") return phi_minus();
  if (name == "rho_plus") return rho_plus();
  if (name == "rho_minus") return rho_minus();
  throw Error(ErrorKind::domain, "unknown kernel family '" + name + "'");
}

std::vector<KernelFamily> all_kernel_families() {
  return {KernelFamily::average(),   KernelFamily::truncated_hilbert(), KernelFamily::doubly_truncated_hilbert(3.0),
          KernelFamily::poisson(),   KernelFamily::conjugate_poisson(), KernelFamily::phi_plus(),
          KernelFamily::phi_minus(), KernelFamily::rho_plus(),          KernelFamily::rho_minus()};
}

ScaleGrid::ScaleGrid(std::vector<double> scales) : scales_(std::move(scales)) {
  if (scales_.empty()) throw Error(ErrorKind::domain, "scale grid must be nonempty");
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    if (!(scales_[i] > 0.0) || std::isinf(scales_[i])) throw Error(ErrorKind::domain, "scales must be positive");
    if (i > 0 && !(scales_[i] > scales_[i - 1])) throw Error(ErrorKind::domain, "scales must be strictly increasing");
  }
}

ScaleGrid ScaleGrid::geometric(double t_min, double t_max, std::size_t count) {
  if (count == 0) throw Error(ErrorKind::domain, "geometric grid needs a positive count");
  if (!(t_min > 0.0) || !(t_max >= t_min)) throw Error(ErrorKind::domain, "geometric grid needs 0 < min <= max");
  if (count == 1) return ScaleGrid({t_min});
  if (t_max == t_min) throw Error(ErrorKind::domain, "geometric grid with several points needs min < max");
  std::vector<double> s(count);
  const double log_ratio = std::log(t_max / t_min);
  for (std::size_t k = 0; k < count; ++k)
    s[k] = t_min * std::exp(log_ratio * static_cast<double>(k) / static_cast<double>(count - 1));
  s.front() = t_min;
  s.back() = t_max;
  return ScaleGrid(std::move(s));
}

ScaleGrid ScaleGrid::dilated(double lambda) const {
  std::vector<double> s(scales_.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = scales_[i] * lambda;
  return ScaleGrid(std::move(s));
}

// ---------------------------------------------------------------------------
// Closed forms

double kernel_mass(const KernelFamily& kind, double t, double a, double b) {
  if (!(b > a)) return 0.0;
  switch (kind.tag) {
    case KernelTag::average: {
      const double lo = std::max(a, -t), hi = std::min(b, t);
      return hi > lo ? (hi - lo) / (2.0 * t) : 0.0;
    }
    case KernelTag::truncated_hilbert:
      return inverse_y_mass(a, b, t, kInf) / kPi;
    case KernelTag::doubly_truncated_hilbert:
      return inverse_y_mass(a, b, t, kind.outer_radius) / kPi;
    case KernelTag::poisson:
      // arctan(b/t) - arctan(a/t) without cancellation.
      return std::atan2((b - a) * t, t * t + a * b) / kPi;
    case KernelTag::conjugate_poisson:
      return std::log((t * t + b * b) / (t * t + a * a)) / (2.0 * kPi);
    case KernelTag::phi_plus: return phi_plus_mass(a / t, b / t);
    case KernelTag::phi_minus: return phi_plus_mass(-b / t, -a / t);
    case KernelTag::rho_plus: return rho_plus_mass(a / t, b / t);
    case KernelTag::rho_minus: return rho_plus_mass(-b / t, -a / t);
  }
  return 0.0;
}

double kernel_density(const KernelFamily& kind, double t, double y) {
  const double u = y / t;
  switch (kind.tag) {
    case KernelTag::average: return std::abs(y) < t ? 1.0 / (2.0 * t) : 0.0;
    case KernelTag::truncated_hilbert: return std::abs(y) > t ? 1.0 / (kPi * y) : 0.0;
    case KernelTag::doubly_truncated_hilbert:
      return (std::abs(y) > t && std::abs(y) < kind.outer_radius) ? 1.0 / (kPi * y) : 0.0;
    case KernelTag::poisson: return t / (kPi * (t * t + y * y));
    case KernelTag::conjugate_poisson: return y / (kPi * (t * t + y * y));
    case KernelTag::phi_plus: return u >= 1.0 ? 1.0 / (kPi * t * u * (u * u + 1.0)) : 0.0;
    case KernelTag::phi_minus: return u <= -1.0 ? 1.0 / (kPi * t * -u * (u * u + 1.0)) : 0.0;
    case KernelTag::rho_plus: return (u >= 0.0 && u <= 1.0) ? u / (kPi * t * (u * u + 1.0)) : 0.0;
    case KernelTag::rho_minus: return (u >= -1.0 && u <= 0.0) ? -u / (kPi * t * (u * u + 1.0)) : 0.0;
  }
  return 0.0;
}

std::vector<double> kernel_breaks(const KernelFamily& kind, double t) {
  switch (kind.tag) {
    case KernelTag::average: return {-t, t};
    case KernelTag::truncated_hilbert: return {-t, 0.0, t};
    case KernelTag::doubly_truncated_hilbert:
      return {-kind.outer_radius, -t, 0.0, t, kind.outer_radius};
    case KernelTag::poisson:
    case KernelTag::conjugate_poisson: return {};
    case KernelTag::phi_plus: return {t};
    case KernelTag::phi_minus: return {-t};
    case KernelTag::rho_plus: return {0.0, t};
    case KernelTag::rho_minus: return {-t, 0.0};
  }
  return {};
}

void eval_into(const KernelFamily& kind, const StepFunction& f, double t, double x, std::span<double> out) {
  require_scale(t);
  std::fill(out.begin(), out.end(), 0.0);
  const auto& bp = f.breakpoints();
  for (std::size_t i = 0; i < f.intervals(); ++i) {
    const double w = kernel_mass(kind, t, x - bp[i + 1], x - bp[i]);
    if (w == 0.0) continue;
    const auto c = f.values()[i].coords();
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += w * c[d];
  }
}

Point eval(const KernelFamily& kind, const StepFunction& f, double t, double x) {
  std::vector<double> out(f.space().dim());
  eval_into(kind, f, t, x, out);
  return Point(f.space(), std::move(out));
}

Point hilbert_full(const StepFunction& f, double x) {
  const auto& bp = f.breakpoints();
  for (double b : bp)
    if (x == b) throw Error(ErrorKind::singularity, "Hilbert transform diverges at a breakpoint");
  std::vector<double> out(f.space().dim(), 0.0);
  for (std::size_t i = 0; i < f.intervals(); ++i) {
    const double w = std::log(std::abs(x - bp[i]) / std::abs(x - bp[i + 1])) / kPi;
    const auto c = f.values()[i].coords();
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += w * c[d];
  }
  return Point(f.space(), std::move(out));
}

double lp_norm(const StepFunction& f, double p) {
  if (!(p >= 1.0) || std::isinf(p)) throw Error(ErrorKind::domain, "L^p norm needs 1 <= p < inf");
  const auto& bp = f.breakpoints();
  double s = 0.0;
  for (std::size_t i = 0; i < f.intervals(); ++i) s += (bp[i + 1] - bp[i]) * std::pow(norm(f.values()[i]), p);
  return std::pow(s, 1.0 / p);
}

// ---------------------------------------------------------------------------
// Quadrature oracles

Point quad_convolve(const ScalarKernel& kernel, const StepFunction& f, double x, double tol,
                    std::span<const double> breaks) {
  if (!(tol > 0.0)) throw Error(ErrorKind::domain, "quadrature tolerance must be positive");
  const auto& bp = f.breakpoints();
  std::vector<double> out(f.space().dim(), 0.0);
  SimpsonOptions opt;
  for (std::size_t i = 0; i < f.intervals(); ++i) {
    const double a = x - bp[i + 1], b = x - bp[i];
    std::vector<double> cuts{a};
    for (double c : breaks)
      if (c > a && c < b) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(b);
    opt.abs_tol = tol / static_cast<double>(cuts.size() - 1);
    double mass = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double lo = cuts[k], hi = cuts[k + 1];
      const double nudge = 1e-14 * std::max({1.0, std::abs(lo), std::abs(hi)});
      const double inner_lo = std::min(lo + nudge, 0.5 * (lo + hi));
      const double inner_hi = std::max(hi - nudge, 0.5 * (lo + hi));
      mass += adaptive_simpson([&](double y) { return kernel(std::clamp(y, inner_lo, inner_hi)); }, lo, hi, opt);
    }
    const auto c = f.values()[i].coords();
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += mass * c[d];
  }
  return Point(f.space(), std::move(out));
}

Point quad_eval(const KernelFamily& kind, const StepFunction& f, double t, double x, double tol) {
  require_scale(t);
  const auto breaks = kernel_breaks(kind, t);
  return quad_convolve([&](double y) { return kernel_density(kind, t, y); }, f, x, tol, breaks);
}

double decomposition_residual(const StepFunction& f, double eps, double x) {
  require_scale(eps);
  const Point lhs = eval(KernelFamily::truncated_hilbert(), f, eps, x) - eval(KernelFamily::conjugate_poisson(), f, eps, x);
  const Point rhs = eval(KernelFamily::phi_plus(), f, eps, x) - eval(KernelFamily::phi_minus(), f, eps, x) -
                    eval(KernelFamily::rho_plus(), f, eps, x) + eval(KernelFamily::rho_minus(), f, eps, x);
  return norm(lhs - rhs);
}

Point poisson_of_hilbert(const StepFunction& f, double eps, double x, bool corrupt_kernel) {
  require_scale(eps);
  // Hf(s) = (1/pi) sum_i v_i (log|s - x_{i-1}| - log|s - x_i|), so by linearity
  // P_e(Hf)(x) = (1/pi) sum_i v_i (J(x_{i-1}) - J(x_i)) with
  // J(b) = int P_e(x - s) log|s - b| ds = int_0^inf [P_e(x-b-u) + P_e(x-b+u)] log u du.
  const auto poisson = [&](double y) {
    const double w = (corrupt_kernel && y > 0.0) ? 2.0 * eps : eps;
    return w / (kPi * (w * w + y * y));
  };
  const double tol = 1e-13;
  const auto J = [&](double b) {
    const double d = x - b;
    const auto g = [&](double u) { return u > 0.0 ? (poisson(d - u) + poisson(d + u)) * std::log(u) : 0.0; };
    const double u0 = std::abs(d);
    const double inner = u0 > 0.0 ? 0.5 * u0 : eps;
    const double outer = u0 + 16.0 * eps + 1.0;
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    const double head = ts.integrate(g, 0.0, inner, tol);
    const double body = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, inner, outer, 20, tol);
    const double tail = es.integrate(g, outer, kInf, tol);
    return head + body + tail;
  };
  const auto& bp = f.breakpoints();
  std::vector<double> j(bp.size());
  for (std::size_t i = 0; i < bp.size(); ++i) j[i] = J(bp[i]);
  std::vector<double> out(f.space().dim(), 0.0);
  for (std::size_t i = 0; i < f.intervals(); ++i) {
    const double w = (j[i] - j[i + 1]) / kPi;
    const auto c = f.values()[i].coords();
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += w * c[d];
  }
  return Point(f.space(), std::move(out));
}

double hilbert_average_weight(double y) {
  const double s = 1.0 + y * y;
  return 2.0 * y / (s * s);
}

double hilbert_average_weight_mass(double tol) {
  return integrate_half_line([](double y) { return hilbert_average_weight(y); }, {}, tol);
}

Point hilbert_weighted_average(const StepFunction& f, double eps, double x, double tol) {
  require_scale(eps);
  const auto& bp = f.breakpoints();
  std::vector<double> out(f.space().dim(), 0.0);
  const auto th = KernelFamily::truncated_hilbert();
  for (std::size_t i = 0; i < f.intervals(); ++i) {
    const double a = x - bp[i + 1], b = x - bp[i];
    // H_{e y} of one interval; y = 0 is the untruncated (principal value) limit.
    const auto g = [&](double y) {
      const double t = eps * y;
      return (t > 0.0 ? kernel_mass(th, t, a, b) : inverse_y_mass(a, b, 0.0, kInf) / kPi) *
             hilbert_average_weight(y);
    };
    const double mass = integrate_half_line(g, {std::abs(a) / eps, std::abs(b) / eps}, tol);
    const auto c = f.values()[i].coords();
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += mass * c[d];
  }
  return Point(f.space(), std::move(out));
}

PointwiseVariationBound conjugate_variation_bound(const StepFunction& f, const ScaleGrid& grid, double q, double x,
                                                  double tol) {
  const std::size_t dim = f.space().dim();
  const std::size_t J = grid.size();
  std::vector<double> flat(J * dim);
  const auto fill = [&](const KernelFamily& kind, double factor) {
    for (std::size_t j = 0; j < J; ++j)
      eval_into(kind, f, factor * grid.scales()[j], x, std::span<double>(flat).subspan(j * dim, dim));
  };

  PointwiseVariationBound out;
  fill(KernelFamily::conjugate_poisson(), 1.0);
  out.conjugate_variation = vq_value(flat, J, f.space(), q);

  std::vector<double> breaks;
  for (double s : grid.scales())
    for (double b : f.breakpoints()) breaks.push_back(std::abs(x - b) / s);
  const auto integrand = [&](double y) {
    if (y <= 0.0) return 0.0;
    fill(KernelFamily::truncated_hilbert(), y);
    return vq_value(flat, J, f.space(), q) * hilbert_average_weight(y);
  };
  out.averaged_hilbert_variation = integrate_half_line(integrand, breaks, tol);
  return out;
}

// ---------------------------------------------------------------------------
// Kernel hypotheses

KernelProfile kernel_profile(KernelTag which) {
  // phi(x) = 1 / (pi x (x^2 + 1)), rho(x) = x / (pi (x^2 + 1)); the minus
  // kernels are reflections and share the same profile on the positive side.
  const auto phi = [](double x) { return 1.0 / (kPi * x * (x * x + 1.0)); };
  const auto dphi = [](double x) {
    const double s = x * x + 1.0;
    return -(3.0 * x * x + 1.0) / (kPi * x * x * s * s);
  };
  const auto rho = [](double x) { return x / (kPi * (x * x + 1.0)); };
  const auto drho = [](double x) {
    const double s = x * x + 1.0;
    return (1.0 - x * x) / (kPi * s * s);
  };
  switch (which) {
    case KernelTag::phi_plus: return {"phi_plus", KernelSupport::tail, phi, dphi};
    case KernelTag::phi_minus: return {"phi_minus", KernelSupport::tail, phi, dphi};
    case KernelTag::rho_plus: return {"rho_plus", KernelSupport::unit, rho, drho};
    case KernelTag::rho_minus: return {"rho_minus", KernelSupport::unit, rho, drho};
    default: break;
  }
  throw Error(ErrorKind::domain, "kernel hypotheses are defined for the phi/rho kernels only");
}

HypothesisCheck kernel_hypothesis_check(const KernelProfile& profile) {
  constexpr int kMinShells = 4;
  constexpr int kMaxShells = 40;
  constexpr double kStability = 0.01;
  const auto g = [&](double x) { return x * std::abs(profile.derivative(x)); };

  HypothesisCheck out;
  SimpsonOptions opt;
  opt.abs_tol = 1e-10;
  // Shells [c/2, c] toward 0 for the unit support, [c, 2c] toward inf for the tail.
  double c = 1.0;
  for (int k = 0; k < kMaxShells; ++k) {
    const double lo = profile.support == KernelSupport::unit ? 0.5 * c : c;
    const double hi = profile.support == KernelSupport::unit ? c : 2.0 * c;
    const double shell = adaptive_simpson(g, lo, hi, opt);
    out.integral += shell;
    c = profile.support == KernelSupport::unit ? lo : hi;
    out.cutoff = c;
    if (!std::isfinite(out.integral)) break;
    if (k + 1 >= kMinShells && std::abs(shell) <= kStability * std::abs(out.integral)) {
      out.integral_stable = true;
      break;
    }
  }
  if (profile.support == KernelSupport::tail) {
    const double at_one = std::abs(profile.phi(1.0));
    out.limit_ok = std::abs(profile.phi(out.cutoff)) <= 1e-3 * std::max(at_one, 1e-300) &&
                   std::abs(profile.phi(2.0 * out.cutoff)) <= std::abs(profile.phi(out.cutoff));
  }
  out.passes = out.integral_stable && out.limit_ok;
  return out;
}

HypothesisCheck kernel_hypothesis_check(KernelTag which) { return kernel_hypothesis_check(kernel_profile(which)); }

}  // namespace varq
