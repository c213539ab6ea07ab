#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "varq/spaces.hpp"

namespace varq {

/// Compactly supported X-valued step function: value v_i on [x_{i-1}, x_i),
/// zero outside [x_0, x_K].
class StepFunction {
 public:
  StepFunction(std::vector<double> breakpoints, std::vector<Point> values);

  /// value * 1_[a, b).
  static StepFunction indicator(double a, double b, const Point& value);

  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<Point>& values() const noexcept { return values_; }
  const Space& space() const noexcept { return values_.front().space(); }
  std::size_t intervals() const noexcept { return values_.size(); }
  double support_min() const noexcept { return breakpoints_.front(); }
  double support_max() const noexcept { return breakpoints_.back(); }

  /// x -> lambda * f(x).
  StepFunction scaled(double lambda) const;
  /// x -> f(lambda * x), lambda > 0.
  StepFunction dilated(double lambda) const;

  bool is_zero() const;

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  std::vector<double> breakpoints_;
  std::vector<Point> values_;
};

enum class KernelTag {
  average,
  truncated_hilbert,
  doubly_truncated_hilbert,
  poisson,
  conjugate_poisson,
  phi_plus,
  phi_minus,
  rho_plus,
  rho_minus,
};

/// One-parameter operator family T_t f = K_t * f on the line. For the phi/rho
/// kernels K_t(y) = K(y / t) / t.
///
/// phi_minus and rho_minus are the reflections y -> -y of phi_plus and
/// rho_plus, i.e. the nonnegative kernels acting on f(x + y); with that
/// orientation H_e - Q_e = A+ - A- - G+ + G-.
struct KernelFamily {
  KernelTag tag = KernelTag::average;
  double outer_radius = 0.0;  // R of the doubly truncated transform

  static KernelFamily average() { return {KernelTag::average}; }
  static KernelFamily truncated_hilbert() { return {KernelTag::truncated_hilbert}; }
  static KernelFamily doubly_truncated_hilbert(double R);
  static KernelFamily poisson() { return {KernelTag::poisson}; }
  static KernelFamily conjugate_poisson() { return {KernelTag::conjugate_poisson}; }
  static KernelFamily phi_plus() { return {KernelTag::phi_plus}; }
  static KernelFamily phi_minus() { return {KernelTag::phi_minus}; }
  static KernelFamily rho_plus() { return {KernelTag::rho_plus}; }
  static KernelFamily rho_minus() { return {KernelTag::rho_minus}; }

  /// Stable identifier used in configs and reports ("average", "poisson", ...).
  std::string name() const;
  static KernelFamily from_name(const std::string& name, double outer_radius = 0.0);

  /// Hilbert-type families are singular at breakpoints as t -> 0.
  bool hilbert_type() const noexcept {
    return tag == KernelTag::truncated_hilbert || tag == KernelTag::doubly_truncated_hilbert;
  }

  friend bool operator==(const KernelFamily&, const KernelFamily&) = default;
};

/// Every family, with R = 3 for the doubly truncated transform.
std::vector<KernelFamily> all_kernel_families();

/// Finite increasing set of positive scales.
class ScaleGrid {
 public:
  explicit ScaleGrid(std::vector<double> scales);
  /// count points equally spaced in log between t_min and t_max (inclusive).
  static ScaleGrid geometric(double t_min, double t_max, std::size_t count);

  const std::vector<double>& scales() const noexcept { return scales_; }
  std::size_t size() const noexcept { return scales_.size(); }
  double min() const noexcept { return scales_.front(); }
  double max() const noexcept { return scales_.back(); }

  ScaleGrid dilated(double lambda) const;

 private:
  std::vector<double> scales_;
};

/// Exact integral of K_t over [a, b] (a <= b) from elementary primitives.
double kernel_mass(const KernelFamily& kind, double t, double a, double b);

/// Pointwise kernel K_t(y); used only by quadrature oracles.
double kernel_density(const KernelFamily& kind, double t, double y);

/// Points where K_t jumps or is singular; quadrature splits there.
std::vector<double> kernel_breaks(const KernelFamily& kind, double t);

/// T_t f(x) in closed form. t <= 0 is a domain error.
Point eval(const KernelFamily& kind, const StepFunction& f, double t, double x);

/// Allocation-free variant of eval writing space().dim() doubles into out.
void eval_into(const KernelFamily& kind, const StepFunction& f, double t, double x, std::span<double> out);

/// Untruncated Hilbert transform; singular at breakpoints.
Point hilbert_full(const StepFunction& f, double x);

/// (sum_i (x_i - x_{i-1}) ||v_i||^p)^{1/p}.
double lp_norm(const StepFunction& f, double p);

using ScalarKernel = std::function<double(double)>;

/// sum_i v_i * int_{x - x_i}^{x - x_{i-1}} kernel(y) dy by adaptive Simpson with
/// absolute tolerance tol per interval. Each interval is split at `breaks`, and
/// the kernel is sampled just inside the pieces so that jumps at breaks are
/// resolved one-sidedly.
Point quad_convolve(const ScalarKernel& kernel, const StepFunction& f, double x, double tol,
                    std::span<const double> breaks = {});

/// Convenience: quad_convolve with the family's own density and breaks.
Point quad_eval(const KernelFamily& kind, const StepFunction& f, double t, double x, double tol);

/// ||(H_e - Q_e) f(x) - (A+_e - A-_e - G+_e + G-_e) f(x)||, analytically zero.
double decomposition_residual(const StepFunction& f, double eps, double x);

/// P_e(Hf)(x) computed by quadrature of the Poisson integral of the closed
/// form Hf. With `corrupt_kernel` the Poisson width is doubled on y > 0
/// (negative control for the conjugate-Poisson identity).
Point poisson_of_hilbert(const StepFunction& f, double eps, double x, bool corrupt_kernel = false);

/// int_0^inf H_{e y} f(x) 2y / (1 + y^2)^2 dy by adaptive quadrature in y with
/// cutoff doubling.
Point hilbert_weighted_average(const StepFunction& f, double eps, double x, double tol = 1e-10);

/// The weight 2y / (1 + y^2)^2 and its numerically integrated mass over (0, inf).
double hilbert_average_weight(double y);
double hilbert_average_weight_mass(double tol = 1e-13);

/// Sides of the pointwise comparison V_q(Q_e f(x) : e in G) <=
/// int_0^inf V_q(H_{y e} f(x) : e in G) w(y) dy on a finite scale grid G.
struct PointwiseVariationBound {
  double conjugate_variation = 0.0;  // left-hand side
  double averaged_hilbert_variation = 0.0;  // right-hand side
};
PointwiseVariationBound conjugate_variation_bound(const StepFunction& f, const ScaleGrid& grid, double q,
                                                  double x, double tol = 1e-9);

enum class KernelSupport { unit, tail };  // [0, 1] or [1, inf)

/// A profile Phi with derivative, as in the kernel hypotheses for dilation
/// families Phi_t(x) = Phi(x / t) / t.
struct KernelProfile {
  std::string name;
  KernelSupport support = KernelSupport::unit;
  std::function<double(double)> phi;
  std::function<double(double)> derivative;
};

/// Built-in profiles for phi+/phi-/rho+/rho- (the minus kernels reflected onto
/// the positive half line).
KernelProfile kernel_profile(KernelTag which);

struct HypothesisCheck {
  double integral = 0.0;   // int x |Phi'(x)| dx over the support, up to the last cutoff
  double cutoff = 0.0;     // last inner (unit) or outer (tail) cutoff used
  bool integral_stable = false;
  bool limit_ok = true;    // Phi(x) -> 0 at infinity (tail support only)
  bool passes = false;
};

/// Evaluates int x |Phi'(x)| dx by adaptive quadrature over dyadic shells
/// [c, 2c] moving toward the open end of the support; passes once adding a
/// shell changes the total by less than 1%.
HypothesisCheck kernel_hypothesis_check(const KernelProfile& profile);
HypothesisCheck kernel_hypothesis_check(KernelTag which);

}  // namespace varq
