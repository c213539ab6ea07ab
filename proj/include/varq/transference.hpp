#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "varq/martingale.hpp"
#include "varq/spaces.hpp"

namespace varq {

/// Complexified vector re + i im of X. Its modulus is the norm of the
/// concatenated pair (re, im) in the same l^r structure: the canonical complex
/// norm for l^2 and an equivalent norm otherwise.
struct CPoint {
  Point re;
  Point im;

  explicit CPoint(const Point& real) : re(real), im(Point::zero(real.space())) {}
  CPoint(Point real, Point imag);
};

double modulus(const CPoint& z);

/// Upper bound for sup_a modulus(e^{ia} z). Exact for l^2, and for real z
/// when r >= 2.
double rotation_bound(const CPoint& z);

/// Fejer mean of the square wave sgn(cos 2 pi theta) (a real even polynomial).
struct SquareWave {
  int degree = 0;
  std::vector<double> coeffs;  // exponential coefficients at j = -degree..degree
  double error_exponent = 2.0;
  double lq_error = 0.0;       // measured ||S - sgn cos||_{L^q[0,1]} on a midpoint grid
  std::size_t error_grid = 0;

  double coefficient(int j) const;
  double operator()(double theta) const;
  /// Frequencies carrying a nonzero coefficient (odd j, |j| <= degree).
  std::vector<int> support() const;
};

SquareWave fejer_squarewave(int degree, double error_exponent = 2.0, std::size_t error_grid = std::size_t{1} << 14);

/// Walsh coefficients c_A of a table on {-1, 1}^{k-1}: phi(s) = sum_A c_A prod_{i in A} s_i.
/// Indexed by subset mask, bit (i - 1) set iff i in A.
std::vector<Point> walsh_expand(std::span<const Point> table);

/// X-valued trigonometric polynomial on T^k,
/// sum c_{m_1..m_{k-1}, j} e^{2 pi i (m_1 th_1 + ... + j th_k)}, with every j != 0.
class MultiTrigPoly {
 public:
  MultiTrigPoly(std::size_t k, Space space);

  void add_term(std::span<const int> freq, const CPoint& coeff);

  std::size_t k() const noexcept { return k_; }
  const Space& space() const noexcept { return space_; }
  std::size_t terms() const noexcept { return freqs_.size() / k_; }
  std::span<const int> freq(std::size_t t) const { return {freqs_.data() + t * k_, k_}; }
  CPoint coeff(std::size_t t) const;
  /// Largest |m_i| (i < k) and |j| over all terms.
  const std::vector<int>& bounds() const noexcept { return bounds_; }

  /// Direct sum at a point of T^k (only the first k angles are read).
  CPoint evaluate(std::span<const double> thetas) const;

  /// Adds c * (re + i im) without building Points; re, im have space().dim() entries.
  void add_term(std::span<const int> freq, double c, std::span<const double> re, std::span<const double> im);

  /// Raw storage for hot loops: terms() * space().dim() doubles each.
  std::span<const double> re_data() const noexcept { return re_; }
  std::span<const double> im_data() const noexcept { return im_; }

 private:
  std::size_t k_;
  Space space_;
  std::vector<int> bounds_;
  std::vector<int> freqs_;
  std::vector<double> re_;
  std::vector<double> im_;
};

/// The lifted martingale blocks f_k = a_k b_k together with their ingredients.
struct BlockSet {
  std::size_t generations = 0;
  Space space = Space(1, NormKind::l2());
  SquareWave wave;
  std::vector<std::vector<Point>> walsh;  // per block, walsh_expand(phi_k)
  std::vector<MultiTrigPoly> blocks;
  std::vector<double> lift_error;         // ||f_k - lift(dM_k)||_{L^q(T^k)} per block
  double error_exponent = 2.0;
  std::size_t lift_grid = 0;

  /// f_k(theta_1..theta_k) from the factored form a_k * b_k.
  Point block_value(std::size_t k, std::span<const double> thetas) const;
};

/// Largest martingale length build_blocks accepts.
inline constexpr std::size_t kMaxTransferGenerations = 4;

BlockSet build_blocks(const WalshMartingale& M, int fejer_degree, double error_exponent = 2.0,
                      std::size_t lift_grid = 16);

/// Trigonometric polynomial in one angle theta obtained by restricting a block
/// to theta_i + n_i theta with theta_1..theta_m fixed. Carries an elapsed
/// Poisson time; coefficient(t) = base * e^{-|nu| time}.
class DiagonalPoly {
 public:
  explicit DiagonalPoly(Space space);

  static DiagonalPoly from_block(const MultiTrigPoly& block, std::span<const std::int64_t> n,
                                 std::span<const double> thetas);
  static DiagonalPoly single(std::int64_t nu, const CPoint& coeff);

  /// Adds coefficient at frequency nu (merged with an existing entry).
  void add(std::int64_t nu, const CPoint& coeff);

  const Space& space() const noexcept { return space_; }
  std::size_t terms() const noexcept { return nu_.size(); }
  std::int64_t frequency(std::size_t t) const { return nu_[t]; }
  /// Coefficient after the elapsed Poisson time.
  CPoint coefficient(std::size_t t) const;
  double time() const noexcept { return time_; }
  std::int64_t max_frequency() const;

  CPoint evaluate(double theta) const;
  /// Values at theta = i / grid, i = 0..grid-1, via an exact fold of the
  /// spectrum modulo `grid` and one inverse DFT per coordinate.
  std::vector<CPoint> evaluate_grid(std::size_t grid) const;
  /// Same, flattened as (re, im) pairs per coordinate: out[(i * dim + d) * 2 + {0,1}].
  std::vector<double> evaluate_grid_raw(std::size_t grid) const;

  DiagonalPoly with_time(double time) const;

 private:
  void normalize();
  Space space_;
  std::vector<std::int64_t> nu_;
  std::vector<double> re_;
  std::vector<double> im_;
  double time_ = 0.0;
  friend DiagonalPoly poisson_flow(const DiagonalPoly&, double);
};

/// Multiplies each coefficient by e^{-|nu| t}; t = inf keeps only nu = 0.
DiagonalPoly poisson_flow(const DiagonalPoly& g, double t);

/// Certified output of the lacunary selection: n_1 = 1 < n_2 < ..., and
/// inf = l_0 > l_1 > ... > l_m = 0, with coefficient-sum bounds valid for every
/// theta and every choice of theta_1..theta_m.
struct SelectionCertificate {
  double eps = 0.0;
  std::vector<std::int64_t> n;         // n_1..n_m
  std::vector<double> l;               // l_0..l_m
  std::vector<double> decay_bound;     // k = 1..m: sup_{t >= l_{k-1}} ||P_t f_k|| <= this < eps / 2^k
  std::vector<double> settle_bound;    // k = 1..m: sum_{j<=k} ||P_{l_k} f_j - P_t f_j|| <= this < eps, t in [0, l_k]
  std::vector<std::int64_t> radius;    // k = 2..m: frequency radius N the choice of n_k had to exceed (0 for k = 1)
  std::vector<int> halvings;           // search steps spent on l_k
  std::vector<int> doublings;          // search steps spent on n_k
};

SelectionCertificate select_sequences(const std::vector<MultiTrigPoly>& blocks, double eps);

/// Grid confirmation of a certificate on a theta grid and sampled theta_1..theta_m.
struct CertificateCheck {
  std::vector<double> decay_sup;   // measured sup ||P_t f_k||, t in {l_{k-1}, 2 l_{k-1}, 4 l_{k-1}}
  std::vector<double> settle_sup;  // measured sup sum_{j<=k} ||P_{l_k} f_j - P_t f_j||, t in {0, l_k/4, l_k/2}
  bool conditions_hold = false;    // every measured value strictly below its threshold
  bool bounds_dominate = false;    // every certified bound >= its measured value
};

CertificateCheck verify_certificate(const std::vector<MultiTrigPoly>& blocks, const SelectionCertificate& cert,
                                    std::size_t grid = 4096, std::size_t samples = 4, std::uint64_t seed = 0);

/// Per index i, grid sup of ||sum_k (P_{l_i} - P_{l_{i-1}}) f_k - f_i||.
std::vector<double> telescoping_error(const std::vector<MultiTrigPoly>& blocks, const SelectionCertificate& cert,
                                      std::size_t grid = 4096, std::size_t samples = 4, std::uint64_t seed = 0);

/// Discrete ||V_q(P_t g : t in times)||_{L^p[0,1]} on theta = i / grid.
double circle_poisson_vq(const DiagonalPoly& g, double q, double p, std::span<const double> times, std::size_t grid);

struct ChainLink {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;           // lhs / rhs, 0 when both vanish
  /// max(|d lhs|, |d rhs|) / max(|lhs|, |rhs|) under grid doubling.
  double richardson_gap = 0.0;
  double lhs_gap = 0.0;  // plain relative change of the left side
  bool finite = true;
};

struct ChainReport {
  double q = 2.0;
  double eps = 0.0;
  int fejer_degree = 0;
  std::size_t resolution = 0;           // torus grid points per axis at the fine level (2G)
  std::size_t twisted_resolution = 0;   // torus points per axis of the direct twisted sum
  std::size_t twisted_theta_points = 0; // theta points of the direct twisted sum
  std::string norm_surrogate;
  SelectionCertificate certificate;
  std::vector<double> lift_error;
  std::vector<double> telescoping_sup;
  std::vector<double> block_energy;            // int ||f_i||^q
  std::vector<double> telescoped_energy;       // int ||sum_k (P_{l_i} - P_{l_{i-1}}) f_k||^q
  std::vector<double> telescoping_residual;    // int ||sum_k (P_{l_i} - P_{l_{i-1}}) f_k - f_i||^q
  double total_energy = 0.0;                   // int ||sum_k f_k||^q
  double block_energy_twisted = 0.0;           // sum_i of int_{T^m} int_0^1 ||f_{i,(n)}||^q, direct
  double total_energy_twisted = 0.0;
  double martingale_increments = 0.0;          // sum_k E ||M_k - M_{k-1}||^q
  double martingale_terminal = 0.0;            // E ||M_m||^q
  std::vector<ChainLink> links;
  double max_richardson_gap = 0.0;
};

/// Evaluates every inequality of the transference chain at desk scale (m <= 3).
/// Torus integrals are Riemann sums on G^m node grids computed at G and 2G; a
/// relative disagreement above 5% on a gated link raises a ResolutionError.
/// `resolution` is G (0 picks 256, 64, 64 for m = 1, 2, 3). The direct twisted
/// sums use `twisted_resolution` points per torus axis (0 picks 64, 32, 16).
ChainReport cotype_chain_report(const WalshMartingale& M, double q, double eps, int fejer_degree,
                                std::size_t resolution = 0, std::size_t twisted_resolution = 0,
                                std::uint64_t seed = 0);

}  // namespace varq
