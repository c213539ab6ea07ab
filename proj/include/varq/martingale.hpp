#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "varq/spaces.hpp"

namespace varq {

/// Largest number of dyadic generations; expectations are exact sums over 2^m atoms.
inline constexpr std::size_t kMaxGenerations = 20;

/// Sign epsilon_k(omega) in {+1, -1} of atom `atom` among 2^m. Atoms are
/// ordered with epsilon_1 as the most significant sign and + before -.
inline int dyadic_sign(std::size_t atom, std::size_t m, std::size_t k) {
  return ((atom >> (m - k)) & 1U) ? -1 : 1;
}

/// X-valued function on {-1, 1}^m, one Point per atom.
class DyadicFunction {
 public:
  DyadicFunction(std::size_t m, std::vector<Point> values);
  static DyadicFunction constant(std::size_t m, const Point& value);

  std::size_t generations() const noexcept { return m_; }
  std::size_t atoms() const noexcept { return values_.size(); }
  const std::vector<Point>& values() const noexcept { return values_; }
  const Point& operator[](std::size_t atom) const { return values_[atom]; }
  const Space& space() const noexcept { return values_.front().space(); }

  friend bool operator==(const DyadicFunction&, const DyadicFunction&) = default;

 private:
  std::size_t m_;
  std::vector<Point> values_;
};

/// Walsh-Paley martingale given by its predictable tables:
/// M_k - M_{k-1} = phi_k(eps_1, ..., eps_{k-1}) eps_k, M_0 = 0.
/// Table k (1-based) has 2^{k-1} entries indexed like atoms of {-1, 1}^{k-1}.
class WalshMartingale {
 public:
  WalshMartingale(Space space, std::vector<std::vector<Point>> tables);

  std::size_t generations() const noexcept { return tables_.size(); }
  const Space& space() const noexcept { return space_; }
  const std::vector<Point>& table(std::size_t k) const { return tables_.at(k - 1); }
  const std::vector<std::vector<Point>>& tables() const noexcept { return tables_; }

  /// phi_k evaluated at the first k-1 signs of an atom of {-1, 1}^m.
  const Point& predictable(std::size_t k, std::size_t atom) const {
    return tables_[k - 1][atom >> (tables_.size() - k + 1)];
  }

  bool is_zero() const;

 private:
  Space space_;
  std::vector<std::vector<Point>> tables_;
};

/// E_k g: average over the signs k+1..m. E_m is the identity, E_0 the mean.
DyadicFunction conditional_expectation(const DyadicFunction& g, std::size_t k);

/// M_0 = 0, M_1, ..., M_m. Each M_k is checked against E_k M_m.
std::vector<DyadicFunction> partial_sums(const WalshMartingale& M);

struct CotypeRatio {
  double numerator = 0.0;    // sum_k E ||M_k - M_{k-1}||^q
  double denominator = 0.0;  // sup_k E ||M_k||^q
  double ratio = 0.0;
};

/// Exact over all atoms. Zero martingale is a degenerate-input error.
CotypeRatio cotype_ratio(const WalshMartingale& M, double q);

/// || V_q(E_k g : k = 0..m) ||_{L^p(Omega)}, pathwise DP then exact average.
double martingale_vq_lp(const DyadicFunction& g, double q, double p);

/// phi_k = e_k in l^inf_n, k = 1..m.
WalshMartingale witness_linfty(std::size_t n, std::size_t m);

/// Tables with entries uniform in [-amplitude, amplitude]^n, reproducible from seed.
WalshMartingale random_martingale(std::uint64_t seed, const Space& space, std::size_t m, double amplitude);

}  // namespace varq
