#include "varq/transference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>

#include "fft.hpp"
#include "varq/error.hpp"
#include "varq/random.hpp"
#include "varq/variation.hpp"

namespace varq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double power(double x, double q) { return q == 2.0 ? x * x : std::pow(x, q); }

double abs_freq(std::int64_t nu) { return static_cast<double>(nu < 0 ? -nu : nu); }

// e^{-|nu| t}, with P_0 the identity and P_inf the projection onto nu = 0.
double damping(std::int64_t nu, double t) {
  if (nu == 0 || t == 0.0) return 1.0;
  if (std::isinf(t)) return 0.0;
  return std::exp(-abs_freq(nu) * t);
}

// 1 - e^{-|nu| t}
double settle_factor(std::int64_t nu, double t) {
  if (std::isinf(t)) return nu == 0 ? 0.0 : 1.0;
  return -std::expm1(-abs_freq(nu) * t);
}

std::int64_t diagonal_frequency(std::span<const int> freq, std::span<const std::int64_t> n) {
  __int128 nu = 0;
  for (std::size_t i = 0; i < freq.size(); ++i) nu += static_cast<__int128>(freq[i]) * n[i];
  constexpr __int128 limit = static_cast<__int128>(1) << 62;
  if (nu >= limit || nu <= -limit) throw Error(ErrorKind::precision, "diagonal frequency exceeds 2^62");
  return static_cast<std::int64_t>(nu);
}

double frac(double x) { return x - std::floor(x); }

void require_exponent(double q, const char* what) {
  if (!(q >= 1.0) || std::isinf(q)) throw Error(ErrorKind::domain, what);
}

// Norm of the concatenated pair (re, im) in the l^r structure of the space,
// from a = ||re|| and b = ||im||.
double pair_norm(const NormKind& kind, double a, double b) {
  if (kind.is_infinite()) return std::max(a, b);
  if (kind.r() == 2.0) return std::hypot(a, b);
  if (kind.r() == 1.0) return a + b;
  const double s = std::max(a, b);
  if (s == 0.0) return 0.0;
  return s * std::pow(std::pow(a / s, kind.r()) + std::pow(b / s, kind.r()), 1.0 / kind.r());
}

// Modulus of the point stored at slot i of a raw (re, im) grid buffer.
double raw_modulus(const Space& space, const std::vector<double>& raw, std::size_t i, std::vector<double>& re,
                   std::vector<double>& im) {
  const std::size_t dim = space.dim();
  for (std::size_t d = 0; d < dim; ++d) {
    re[d] = raw[(i * dim + d) * 2];
    im[d] = raw[(i * dim + d) * 2 + 1];
  }
  return pair_norm(space.norm(), space.norm_of(re), space.norm_of(im));
}

std::vector<double> grid_moduli(const Space& space, const std::vector<double>& raw, std::size_t grid) {
  std::vector<double> re(space.dim()), im(space.dim()), out(grid);
  for (std::size_t i = 0; i < grid; ++i) out[i] = raw_modulus(space, raw, i, re, im);
  return out;
}

void accumulate(std::vector<double>& into, const std::vector<double>& raw, double sign) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += sign * raw[i];
}

// a = sum_A c_A prod_{i in A} s_i for Walsh coefficients of a block.
void walsh_combine(const std::vector<Point>& walsh, std::span<const double> signs, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t mask = 0; mask < walsh.size(); ++mask) {
    double prod = 1.0;
    for (std::size_t i = 0; i < signs.size(); ++i)
      if (mask & (std::size_t{1} << i)) prod *= signs[i];
    if (prod == 0.0) continue;
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += prod * walsh[mask][d];
  }
}

std::vector<std::vector<std::int64_t>> block_frequencies(const std::vector<MultiTrigPoly>& blocks,
                                                         std::span<const std::int64_t> n) {
  std::vector<std::vector<std::int64_t>> out;
  for (const auto& b : blocks) {
    std::vector<std::int64_t> nus(b.terms());
    for (std::size_t t = 0; t < b.terms(); ++t) nus[t] = diagonal_frequency(b.freq(t), n.first(b.k()));
    out.push_back(std::move(nus));
  }
  return out;
}

void require_blocks(const std::vector<MultiTrigPoly>& blocks) {
  if (blocks.empty()) throw Error(ErrorKind::domain, "no blocks");
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (blocks[k].k() != k + 1) throw Error(ErrorKind::domain, "block k must have k torus variables");
    require_same_space(blocks[k].space(), blocks.front().space(), "blocks");
  }
}

std::vector<std::vector<double>> sample_angles(std::size_t samples, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> out(std::max<std::size_t>(samples, 1), std::vector<double>(m));
  for (auto& s : out)
    for (auto& th : s) th = rng.uniform();
  return out;
}

}  // namespace

CPoint::CPoint(Point real, Point imag) : re(std::move(real)), im(std::move(imag)) {
  require_same_space(re.space(), im.space(), "complexified point");
}

double modulus(const CPoint& z) { return pair_norm(z.re.space().norm(), norm(z.re), norm(z.im)); }

// e^{ia} z = cos a (re, im) + sin a (-im, re), and (-im, re) has the same
// modulus, so sqrt 2 |z| bounds it; componentwise, |(cos a, sin a)|_r (a + b).
double rotation_bound(const CPoint& z) {
  const auto& kind = z.re.space().norm();
  const double a = norm(z.re), b = norm(z.im);
  if (!kind.is_infinite() && kind.r() == 2.0) return std::hypot(a, b);
  const double circle = (kind.is_infinite() || kind.r() >= 2.0) ? 1.0 : std::pow(2.0, 1.0 / kind.r() - 0.5);
  return std::min(std::sqrt(2.0) * pair_norm(kind, a, b), circle * (a + b));
}

double SquareWave::coefficient(int j) const {
  if (j < -degree || j > degree) return 0.0;
  return coeffs[static_cast<std::size_t>(j + degree)];
}

double SquareWave::operator()(double theta) const {
  double s = coefficient(0);
  for (int j = 1; j <= degree; j += 2) s += 2.0 * coefficient(j) * std::cos(kTwoPi * j * theta);
  return s;
}

std::vector<int> SquareWave::support() const {
  std::vector<int> out;
  for (int j = -degree; j <= degree; ++j)
    if (coefficient(j) != 0.0) out.push_back(j);
  return out;
}

SquareWave fejer_squarewave(int degree, double error_exponent, std::size_t error_grid) {
  if (degree < 1) throw Error(ErrorKind::domain, "Fejer degree must be at least 1");
  require_exponent(error_exponent, "error exponent must satisfy 1 <= q < inf");
  if (error_grid == 0) throw Error(ErrorKind::domain, "error grid must be nonempty");
  SquareWave w;
  w.degree = degree;
  w.error_exponent = error_exponent;
  w.error_grid = error_grid;
  w.coeffs.assign(static_cast<std::size_t>(2 * degree + 1), 0.0);
  for (int j = -degree; j <= degree; ++j) {
    const int a = std::abs(j);
    if (a % 2 == 0) continue;
    const double sign = ((a - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
    const double fejer = 1.0 - static_cast<double>(a) / (degree + 1);
    w.coeffs[static_cast<std::size_t>(j + degree)] = 2.0 / std::numbers::pi * sign / a * fejer;
  }
  double acc = 0.0;
  for (std::size_t g = 0; g < error_grid; ++g) {
    const double theta = (static_cast<double>(g) + 0.5) / static_cast<double>(error_grid);
    const double target = std::cos(kTwoPi * theta) > 0.0 ? 1.0 : -1.0;
    acc += power(std::abs(w(theta) - target), error_exponent);
  }
  w.lq_error = std::pow(acc / static_cast<double>(error_grid), 1.0 / error_exponent);
  return w;
}

std::vector<Point> walsh_expand(std::span<const Point> table) {
  const std::size_t size = table.size();
  if (size == 0 || !std::has_single_bit(size)) throw Error(ErrorKind::size, "Walsh table size must be a power of two");
  const Space& space = table.front().space();
  for (const auto& p : table) require_same_space(p.space(), space, "Walsh table");
  const std::size_t bits = static_cast<std::size_t>(std::countr_zero(size));
  const std::size_t dim = space.dim();

  // Move sign i (the MSB-first bit i-1 of a table index) to bit i-1 of the
  // position, so that position bit i-1 and subset-mask bit i-1 both refer to s_i.
  std::vector<double> a(size * dim);
  for (std::size_t idx = 0; idx < size; ++idx) {
    std::size_t pos = 0;
    for (std::size_t b = 0; b < bits; ++b)
      if (idx & (std::size_t{1} << b)) pos |= std::size_t{1} << (bits - 1 - b);
    for (std::size_t d = 0; d < dim; ++d) a[pos * dim + d] = table[idx][d];
  }
  for (std::size_t h = 1; h < size; h <<= 1)
    for (std::size_t i = 0; i < size; i += 2 * h)
      for (std::size_t j = i; j < i + h; ++j)
        for (std::size_t d = 0; d < dim; ++d) {
          const double x = a[j * dim + d], y = a[(j + h) * dim + d];
          a[j * dim + d] = x + y;
          a[(j + h) * dim + d] = x - y;
        }
  std::vector<Point> out;
  out.reserve(size);
  for (std::size_t mask = 0; mask < size; ++mask) {
    std::vector<double> c(a.begin() + mask * dim, a.begin() + (mask + 1) * dim);
    for (auto& x : c) x /= static_cast<double>(size);
    out.emplace_back(space, std::move(c));
  }
  return out;
}

MultiTrigPoly::MultiTrigPoly(std::size_t k, Space space) : k_(k), space_(space), bounds_(k, 0) {
  if (k == 0) throw Error(ErrorKind::domain, "trigonometric block needs k >= 1");
}

void MultiTrigPoly::add_term(std::span<const int> freq, double c, std::span<const double> re,
                             std::span<const double> im) {
  if (freq.size() != k_) throw Error(ErrorKind::size, "multi-index length must equal k");
  if (freq.back() == 0) throw Error(ErrorKind::domain, "block terms need a nonzero last frequency");
  if (re.size() != space_.dim() || im.size() != space_.dim())
    throw Error(ErrorKind::space_mismatch, "coefficient dimension differs from the block space");
  for (std::size_t i = 0; i < k_; ++i) bounds_[i] = std::max(bounds_[i], std::abs(freq[i]));
  freqs_.insert(freqs_.end(), freq.begin(), freq.end());
  for (double x : re) re_.push_back(c * x);
  for (double x : im) im_.push_back(c * x);
}

void MultiTrigPoly::add_term(std::span<const int> freq, const CPoint& coeff) {
  require_same_space(coeff.re.space(), space_, "block coefficient");
  add_term(freq, 1.0, coeff.re.coords(), coeff.im.coords());
}

CPoint MultiTrigPoly::coeff(std::size_t t) const {
  const std::size_t d = space_.dim();
  return CPoint(Point(space_, std::vector<double>(re_.begin() + t * d, re_.begin() + (t + 1) * d)),
                Point(space_, std::vector<double>(im_.begin() + t * d, im_.begin() + (t + 1) * d)));
}

CPoint MultiTrigPoly::evaluate(std::span<const double> thetas) const {
  if (thetas.size() < k_) throw Error(ErrorKind::size, "need one angle per torus variable");
  const std::size_t dim = space_.dim();
  std::vector<double> re(dim, 0.0), im(dim, 0.0);
  for (std::size_t t = 0; t < terms(); ++t) {
    double phase = 0.0;
    for (std::size_t i = 0; i < k_; ++i) phase += freqs_[t * k_ + i] * thetas[i];
    const double a = kTwoPi * frac(phase), c = std::cos(a), s = std::sin(a);
    for (std::size_t d = 0; d < dim; ++d) {
      re[d] += c * re_[t * dim + d] - s * im_[t * dim + d];
      im[d] += s * re_[t * dim + d] + c * im_[t * dim + d];
    }
  }
  return CPoint(Point(space_, std::move(re)), Point(space_, std::move(im)));
}

Point BlockSet::block_value(std::size_t k, std::span<const double> thetas) const {
  if (k == 0 || k > generations) throw Error(ErrorKind::domain, "block index out of range");
  if (thetas.size() < k) throw Error(ErrorKind::size, "need one angle per torus variable");
  std::vector<double> s(k - 1);
  for (std::size_t i = 0; i + 1 < k; ++i) s[i] = wave(thetas[i]);
  std::vector<double> a(space.dim());
  walsh_combine(walsh[k - 1], s, a);
  const double b = wave(thetas[k - 1]);
  for (auto& x : a) x *= b;
  return Point(space, std::move(a));
}

BlockSet build_blocks(const WalshMartingale& M, int fejer_degree, double error_exponent, std::size_t lift_grid) {
  const std::size_t m = M.generations();
  if (m > kMaxTransferGenerations) throw Error(ErrorKind::size, "transference runs are limited to m <= 4");
  if (lift_grid == 0) throw Error(ErrorKind::domain, "lift grid must be nonempty");
  BlockSet out;
  out.generations = m;
  out.space = M.space();
  out.wave = fejer_squarewave(fejer_degree, error_exponent);
  out.error_exponent = error_exponent;
  out.lift_grid = lift_grid;
  const std::vector<int> support = out.wave.support();
  const std::size_t dim = M.space().dim();
  const std::vector<double> zeros(dim, 0.0);

  for (std::size_t k = 1; k <= m; ++k) {
    out.walsh.push_back(walsh_expand(M.table(k)));
    const auto& walsh = out.walsh.back();
    MultiTrigPoly poly(k, M.space());
    std::vector<int> freq(k);
    for (std::size_t mask = 0; mask < walsh.size(); ++mask) {
      if (norm(walsh[mask]) == 0.0) continue;
      std::vector<std::size_t> axes;
      for (std::size_t i = 0; i + 1 < k; ++i)
        if (mask & (std::size_t{1} << i)) axes.push_back(i);
      axes.push_back(k - 1);
      // Odometer over one support index per active axis.
      std::vector<std::size_t> idx(axes.size(), 0);
      for (;;) {
        std::fill(freq.begin(), freq.end(), 0);
        double c = 1.0;
        for (std::size_t a = 0; a < axes.size(); ++a) {
          freq[axes[a]] = support[idx[a]];
          c *= out.wave.coefficient(support[idx[a]]);
        }
        poly.add_term(freq, c, walsh[mask].coords(), zeros);
        std::size_t a = axes.size();
        while (a > 0 && ++idx[a - 1] == support.size()) idx[--a] = 0;
        if (a == 0) break;
      }
    }
    out.blocks.push_back(std::move(poly));

    // Lift error on a midpoint tensor grid, capped at 2^20 points.
    std::size_t g = lift_grid;
    while (g > 1 && std::pow(static_cast<double>(g), static_cast<double>(k)) > static_cast<double>(1 << 20)) g /= 2;
    std::vector<double> approx(g), sign(g);
    for (std::size_t i = 0; i < g; ++i) {
      const double theta = (static_cast<double>(i) + 0.5) / static_cast<double>(g);
      approx[i] = out.wave(theta);
      sign[i] = std::cos(kTwoPi * theta) > 0.0 ? 1.0 : -1.0;
    }
    std::vector<std::size_t> at(k, 0);
    std::vector<double> s_approx(k - 1), s_sign(k - 1), fa(dim), fs(dim), diff(dim);
    double acc = 0.0;
    std::size_t count = 0;
    for (;;) {
      for (std::size_t i = 0; i + 1 < k; ++i) {
        s_approx[i] = approx[at[i]];
        s_sign[i] = sign[at[i]];
      }
      walsh_combine(walsh, s_approx, fa);
      walsh_combine(walsh, s_sign, fs);
      for (std::size_t d = 0; d < dim; ++d) diff[d] = fa[d] * approx[at[k - 1]] - fs[d] * sign[at[k - 1]];
      acc += power(M.space().norm_of(diff), error_exponent);
      ++count;
      std::size_t a = k;
      while (a > 0 && ++at[a - 1] == g) at[--a] = 0;
      if (a == 0) break;
    }
    out.lift_error.push_back(std::pow(acc / static_cast<double>(count), 1.0 / error_exponent));
  }
  return out;
}

DiagonalPoly::DiagonalPoly(Space space) : space_(space) {}

DiagonalPoly DiagonalPoly::from_block(const MultiTrigPoly& block, std::span<const std::int64_t> n,
                                      std::span<const double> thetas) {
  const std::size_t k = block.k();
  if (n.size() < k || thetas.size() < k) throw Error(ErrorKind::size, "need n_i and theta_i for every block variable");
  DiagonalPoly out(block.space());
  const std::size_t dim = block.space().dim();
  const auto re = block.re_data();
  const auto im = block.im_data();
  out.nu_.resize(block.terms());
  out.re_.resize(block.terms() * dim);
  out.im_.resize(block.terms() * dim);
  for (std::size_t t = 0; t < block.terms(); ++t) {
    const auto f = block.freq(t);
    out.nu_[t] = diagonal_frequency(f, n.first(k));
    double phase = 0.0;
    for (std::size_t i = 0; i < k; ++i) phase += f[i] * thetas[i];
    const double a = kTwoPi * frac(phase), c = std::cos(a), s = std::sin(a);
    for (std::size_t d = 0; d < dim; ++d) {
      out.re_[t * dim + d] = c * re[t * dim + d] - s * im[t * dim + d];
      out.im_[t * dim + d] = s * re[t * dim + d] + c * im[t * dim + d];
    }
  }
  out.normalize();
  return out;
}

DiagonalPoly DiagonalPoly::single(std::int64_t nu, const CPoint& coeff) {
  DiagonalPoly out(coeff.re.space());
  out.add(nu, coeff);
  return out;
}

void DiagonalPoly::add(std::int64_t nu, const CPoint& coeff) {
  require_same_space(coeff.re.space(), space_, "diagonal coefficient");
  const std::size_t dim = space_.dim();
  const double scale = 1.0 / damping(nu, time_);
  if (!std::isfinite(scale)) throw Error(ErrorKind::domain, "cannot add a coefficient after infinite Poisson time");
  const auto it = std::lower_bound(nu_.begin(), nu_.end(), nu);
  const std::size_t pos = static_cast<std::size_t>(it - nu_.begin());
  if (it == nu_.end() || *it != nu) {
    nu_.insert(it, nu);
    re_.insert(re_.begin() + pos * dim, dim, 0.0);
    im_.insert(im_.begin() + pos * dim, dim, 0.0);
  }
  for (std::size_t d = 0; d < dim; ++d) {
    re_[pos * dim + d] += scale * coeff.re[d];
    im_[pos * dim + d] += scale * coeff.im[d];
  }
}

void DiagonalPoly::normalize() {
  const std::size_t dim = space_.dim();
  std::vector<std::size_t> order(nu_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nu_[a] < nu_[b]; });
  std::vector<std::int64_t> nu;
  std::vector<double> re, im;
  for (std::size_t o : order) {
    if (nu.empty() || nu.back() != nu_[o]) {
      nu.push_back(nu_[o]);
      re.insert(re.end(), dim, 0.0);
      im.insert(im.end(), dim, 0.0);
    }
    const std::size_t pos = nu.size() - 1;
    for (std::size_t d = 0; d < dim; ++d) {
      re[pos * dim + d] += re_[o * dim + d];
      im[pos * dim + d] += im_[o * dim + d];
    }
  }
  nu_ = std::move(nu);
  re_ = std::move(re);
  im_ = std::move(im);
}

CPoint DiagonalPoly::coefficient(std::size_t t) const {
  const std::size_t dim = space_.dim();
  const double w = damping(nu_[t], time_);
  std::vector<double> re(dim), im(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    re[d] = w * re_[t * dim + d];
    im[d] = w * im_[t * dim + d];
  }
  return CPoint(Point(space_, std::move(re)), Point(space_, std::move(im)));
}

std::int64_t DiagonalPoly::max_frequency() const {
  std::int64_t best = 0;
  for (auto nu : nu_) best = std::max(best, nu < 0 ? -nu : nu);
  return best;
}

CPoint DiagonalPoly::evaluate(double theta) const {
  const std::size_t dim = space_.dim();
  std::vector<double> re(dim, 0.0), im(dim, 0.0);
  for (std::size_t t = 0; t < nu_.size(); ++t) {
    const double w = damping(nu_[t], time_);
    if (w == 0.0) continue;
    const long double x = static_cast<long double>(nu_[t]) * static_cast<long double>(theta);
    const double a = kTwoPi * static_cast<double>(x - std::floor(x));
    const double c = std::cos(a), s = std::sin(a);
    for (std::size_t d = 0; d < dim; ++d) {
      re[d] += w * (c * re_[t * dim + d] - s * im_[t * dim + d]);
      im[d] += w * (s * re_[t * dim + d] + c * im_[t * dim + d]);
    }
  }
  return CPoint(Point(space_, std::move(re)), Point(space_, std::move(im)));
}

std::vector<double> DiagonalPoly::evaluate_grid_raw(std::size_t grid) const {
  if (grid == 0) throw Error(ErrorKind::domain, "theta grid must be nonempty");
  const std::size_t dim = space_.dim();
  const auto g = static_cast<std::int64_t>(grid);
  std::vector<std::complex<double>> buf(grid * dim);
  for (std::size_t t = 0; t < nu_.size(); ++t) {
    const double w = damping(nu_[t], time_);
    if (w == 0.0) continue;
    const auto r = static_cast<std::size_t>(((nu_[t] % g) + g) % g);
    for (std::size_t d = 0; d < dim; ++d) buf[d * grid + r] += w * std::complex<double>(re_[t * dim + d], im_[t * dim + d]);
  }
  detail::inverse_dft(buf.data(), {static_cast<int>(grid)}, dim);
  std::vector<double> out(grid * dim * 2);
  for (std::size_t i = 0; i < grid; ++i)
    for (std::size_t d = 0; d < dim; ++d) {
      out[(i * dim + d) * 2] = buf[d * grid + i].real();
      out[(i * dim + d) * 2 + 1] = buf[d * grid + i].imag();
    }
  return out;
}

std::vector<CPoint> DiagonalPoly::evaluate_grid(std::size_t grid) const {
  const auto raw = evaluate_grid_raw(grid);
  const std::size_t dim = space_.dim();
  std::vector<CPoint> out;
  out.reserve(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    std::vector<double> re(dim), im(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      re[d] = raw[(i * dim + d) * 2];
      im[d] = raw[(i * dim + d) * 2 + 1];
    }
    out.emplace_back(Point(space_, std::move(re)), Point(space_, std::move(im)));
  }
  return out;
}

DiagonalPoly DiagonalPoly::with_time(double time) const {
  if (!(time >= 0.0)) throw Error(ErrorKind::domain, "Poisson time must be >= 0");
  DiagonalPoly out = *this;
  out.time_ = time;
  return out;
}

DiagonalPoly poisson_flow(const DiagonalPoly& g, double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::domain, "Poisson time must be >= 0 or infinite");
  DiagonalPoly out = g;
  out.time_ = g.time_ + t;
  return out;
}

SelectionCertificate select_sequences(const std::vector<MultiTrigPoly>& blocks, double eps) {
  require_blocks(blocks);
  if (!(eps > 0.0) || std::isinf(eps)) throw Error(ErrorKind::domain, "epsilon must be a positive real");
  const std::size_t m = blocks.size();
  constexpr int kMaxSteps = 200;
  constexpr std::int64_t kMaxN = std::int64_t{1} << 52;

  std::vector<std::vector<double>> mu;
  for (const auto& b : blocks) {
    std::vector<double> w(b.terms());
    for (std::size_t t = 0; t < b.terms(); ++t) w[t] = rotation_bound(b.coeff(t));
    mu.push_back(std::move(w));
  }

  SelectionCertificate cert;
  cert.eps = eps;
  cert.n = {1};
  cert.l = {kInf};
  cert.radius = {0};
  cert.doublings = {0};
  std::vector<std::vector<std::int64_t>> nus;

  const auto frequencies_of = [&](std::size_t k) {
    std::vector<std::int64_t> out(blocks[k].terms());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = diagonal_frequency(blocks[k].freq(t), cert.n);
    return out;
  };
  // Sum over blocks 1..k of the coefficient bounds times (1 - e^{-l |nu|}).
  const auto settle = [&](std::size_t k, double l) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t t = 0; t < mu[j].size(); ++t) s += mu[j][t] * settle_factor(nus[j][t], l);
    return s;
  };
  const auto decay = [&](std::size_t k, const std::vector<std::int64_t>& nu, double l) {
    double s = 0.0;
    for (std::size_t t = 0; t < mu[k].size(); ++t) s += mu[k][t] * damping(nu[t], l);
    return s;
  };

  nus.push_back(frequencies_of(0));
  cert.decay_bound.push_back(decay(0, nus[0], kInf));

  for (std::size_t k = 1; k < m; ++k) {
    // l_k by halving.
    double l = std::isinf(cert.l.back()) ? 1.0 : cert.l.back() / 2.0;
    int steps = 0;
    double s = settle(k, l);
    while (!(s < eps)) {
      if (++steps >= kMaxSteps || l / 2.0 < std::numeric_limits<double>::min())
        throw Error(ErrorKind::precision, "settle condition for l_" + std::to_string(k) +
                                              " cannot be certified before l underflows");
      l /= 2.0;
      s = settle(k, l);
    }
    cert.l.push_back(l);
    cert.settle_bound.push_back(s);
    cert.halvings.push_back(steps);

    // n_{k+1} by doubling above the radius of the lower-order frequencies.
    __int128 radius = 0;
    for (std::size_t t = 0; t < blocks[k].terms(); ++t) {
      __int128 r = 0;
      const auto f = blocks[k].freq(t);
      for (std::size_t i = 0; i < k; ++i) r += static_cast<__int128>(f[i]) * cert.n[i];
      radius = std::max(radius, r < 0 ? -r : r);
    }
    if (radius >= kMaxN) throw Error(ErrorKind::precision, "frequency radius exceeds 2^52");
    std::int64_t candidate = std::max(static_cast<std::int64_t>(radius) + 1, cert.n.back() + 1);
    const double threshold = eps / std::ldexp(1.0, static_cast<int>(k + 1));
    steps = 0;
    std::vector<std::int64_t> nu;
    double d = 0.0;
    for (;;) {
      cert.n.push_back(candidate);
      nu = frequencies_of(k);
      d = decay(k, nu, l);
      if (d < threshold) break;
      cert.n.pop_back();
      if (++steps >= kMaxSteps || candidate > kMaxN / 2)
        throw Error(ErrorKind::precision, "decay condition for n_" + std::to_string(k + 1) +
                                              " cannot be certified below 2^52");
      candidate *= 2;
    }
    nus.push_back(std::move(nu));
    cert.radius.push_back(static_cast<std::int64_t>(radius));
    cert.doublings.push_back(steps);
    cert.decay_bound.push_back(d);
  }
  cert.l.push_back(0.0);
  cert.settle_bound.push_back(settle(m, 0.0));
  cert.halvings.push_back(0);
  return cert;
}

CertificateCheck verify_certificate(const std::vector<MultiTrigPoly>& blocks, const SelectionCertificate& cert,
                                    std::size_t grid, std::size_t samples, std::uint64_t seed) {
  require_blocks(blocks);
  const std::size_t m = blocks.size();
  if (cert.n.size() != m || cert.l.size() != m + 1) throw Error(ErrorKind::size, "certificate does not match blocks");
  const Space& space = blocks.front().space();
  CertificateCheck out;
  out.decay_sup.assign(m, 0.0);
  out.settle_sup.assign(m, 0.0);

  for (const auto& angles : sample_angles(samples, m, seed)) {
    std::vector<DiagonalPoly> diag;
    for (const auto& b : blocks) diag.push_back(DiagonalPoly::from_block(b, cert.n, angles));
    for (std::size_t k = 1; k <= m; ++k) {
      const double lo = cert.l[k - 1];
      const std::vector<double> times = std::isinf(lo) ? std::vector<double>{kInf} : std::vector<double>{lo, 2 * lo, 4 * lo};
      for (double t : times)
        for (double v : grid_moduli(space, poisson_flow(diag[k - 1], t).evaluate_grid_raw(grid), grid))
          out.decay_sup[k - 1] = std::max(out.decay_sup[k - 1], v);

      const double lk = cert.l[k];
      for (double t : {0.0, lk / 4.0, lk / 2.0}) {
        std::vector<double> total(grid, 0.0);
        std::vector<double> re(space.dim()), im(space.dim());
        for (std::size_t j = 0; j < k; ++j) {
          auto raw = poisson_flow(diag[j], lk).evaluate_grid_raw(grid);
          accumulate(raw, poisson_flow(diag[j], t).evaluate_grid_raw(grid), -1.0);
          for (std::size_t i = 0; i < grid; ++i) total[i] += raw_modulus(space, raw, i, re, im);
        }
        for (double v : total) out.settle_sup[k - 1] = std::max(out.settle_sup[k - 1], v);
      }
    }
  }
  out.conditions_hold = true;
  out.bounds_dominate = true;
  for (std::size_t k = 1; k <= m; ++k) {
    const double decay_threshold = cert.eps / std::ldexp(1.0, static_cast<int>(k));
    if (!(out.decay_sup[k - 1] < decay_threshold) || !(out.settle_sup[k - 1] < cert.eps)) out.conditions_hold = false;
    const double slack = 1e-12;
    if (out.decay_sup[k - 1] > cert.decay_bound[k - 1] * (1 + slack) + 1e-15 ||
        out.settle_sup[k - 1] > cert.settle_bound[k - 1] * (1 + slack) + 1e-15)
      out.bounds_dominate = false;
  }
  return out;
}

std::vector<double> telescoping_error(const std::vector<MultiTrigPoly>& blocks, const SelectionCertificate& cert,
                                      std::size_t grid, std::size_t samples, std::uint64_t seed) {
  require_blocks(blocks);
  const std::size_t m = blocks.size();
  if (cert.n.size() != m || cert.l.size() != m + 1) throw Error(ErrorKind::size, "certificate does not match blocks");
  const Space& space = blocks.front().space();
  std::vector<double> out(m, 0.0);
  for (const auto& angles : sample_angles(samples, m, seed)) {
    std::vector<DiagonalPoly> diag;
    for (const auto& b : blocks) diag.push_back(DiagonalPoly::from_block(b, cert.n, angles));
    for (std::size_t i = 1; i <= m; ++i) {
      std::vector<double> raw(grid * space.dim() * 2, 0.0);
      for (const auto& d : diag) {
        accumulate(raw, poisson_flow(d, cert.l[i]).evaluate_grid_raw(grid), 1.0);
        accumulate(raw, poisson_flow(d, cert.l[i - 1]).evaluate_grid_raw(grid), -1.0);
      }
      accumulate(raw, diag[i - 1].evaluate_grid_raw(grid), -1.0);
      for (double v : grid_moduli(space, raw, grid)) out[i - 1] = std::max(out[i - 1], v);
    }
  }
  return out;
}

double circle_poisson_vq(const DiagonalPoly& g, double q, double p, std::span<const double> times, std::size_t grid) {
  require_exponent(q, "variation exponent must satisfy 1 <= q < inf");
  require_exponent(p, "integrability exponent must satisfy 1 <= p < inf");
  if (times.empty() || grid == 0) throw Error(ErrorKind::domain, "time and theta grids must be nonempty");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || std::isinf(times[i])) throw Error(ErrorKind::domain, "Poisson times must be positive and finite");
    if (i > 0 && !(times[i] > times[i - 1])) throw Error(ErrorKind::domain, "Poisson times must increase strictly");
  }
  const std::size_t count = times.size();
  const std::size_t dim = g.space().dim();
  std::vector<std::vector<double>> raws;
  for (double t : times) raws.push_back(poisson_flow(g, t).evaluate_grid_raw(grid));
  std::vector<double> dist(count * count, 0.0), re(dim), im(dim);
  double acc = 0.0;
  for (std::size_t x = 0; x < grid; ++x) {
    for (std::size_t a = 0; a < count; ++a)
      for (std::size_t b = a + 1; b < count; ++b) {
        for (std::size_t d = 0; d < dim; ++d) {
          const std::size_t s = (x * dim + d) * 2;
          re[d] = raws[b][s] - raws[a][s];
          im[d] = raws[b][s + 1] - raws[a][s + 1];
        }
        dist[a * count + b] = pair_norm(g.space().norm(), g.space().norm_of(re), g.space().norm_of(im));
      }
    acc += power(vq_value_distances(dist, count, q), p);
  }
  return std::pow(acc / static_cast<double>(grid), 1.0 / p);
}

namespace {

// Riemann-sum integrals over T^m of the lifted blocks, on a G^m node grid.
struct TorusEnergies {
  std::vector<double> block, telescoped, residual;
  double total = 0.0;
};

class TorusField {
 public:
  TorusField(std::size_t m, std::size_t grid, const Space& space)
      : m_(m), grid_(grid), space_(space), points_(1) {
    for (std::size_t a = 0; a < m; ++a) points_ *= grid;
    data_.assign(points_ * space.dim(), {0.0, 0.0});
  }

  // Adds w(t) * coefficient of every term of the block.
  template <class Weight>
  void add(const MultiTrigPoly& block, Weight&& w) {
    const std::size_t dim = space_.dim();
    const auto g = static_cast<long>(grid_);
    const auto re = block.re_data();
    const auto im = block.im_data();
    for (std::size_t t = 0; t < block.terms(); ++t) {
      const double weight = w(t);
      if (weight == 0.0) continue;
      const auto f = block.freq(t);
      std::size_t idx = 0;
      for (std::size_t a = 0; a < m_; ++a) {
        const long v = a < f.size() ? f[a] : 0;
        idx = idx * grid_ + static_cast<std::size_t>(((v % g) + g) % g);
      }
      for (std::size_t d = 0; d < dim; ++d)
        data_[d * points_ + idx] += weight * std::complex<double>(re[t * dim + d], im[t * dim + d]);
    }
  }

  void transform() { detail::inverse_dft(data_.data(), std::vector<int>(m_, static_cast<int>(grid_)), space_.dim()); }

  // Mean of ||this - other||^q (other may be null).
  double energy(double q, const TorusField* other = nullptr) const {
    const std::size_t dim = space_.dim();
    std::vector<double> re(dim), im(dim);
    double acc = 0.0;
    for (std::size_t i = 0; i < points_; ++i) {
      for (std::size_t d = 0; d < dim; ++d) {
        auto z = data_[d * points_ + i];
        if (other) z -= other->data_[d * points_ + i];
        re[d] = z.real();
        im[d] = z.imag();
      }
      acc += power(pair_norm(space_.norm(), space_.norm_of(re), space_.norm_of(im)), q);
    }
    return acc / static_cast<double>(points_);
  }

 private:
  std::size_t m_, grid_;
  Space space_;
  std::size_t points_;
  std::vector<std::complex<double>> data_;
};

TorusEnergies torus_energies(const std::vector<MultiTrigPoly>& blocks, const SelectionCertificate& cert,
                             const std::vector<std::vector<std::int64_t>>& nus, std::size_t grid, double q) {
  const std::size_t m = blocks.size();
  const Space& space = blocks.front().space();
  TorusEnergies out;
  for (std::size_t i = 1; i <= m; ++i) {
    TorusField fi(m, grid, space), ti(m, grid, space);
    fi.add(blocks[i - 1], [](std::size_t) { return 1.0; });
    for (std::size_t k = 0; k < m; ++k)
      ti.add(blocks[k], [&](std::size_t t) { return damping(nus[k][t], cert.l[i]) - damping(nus[k][t], cert.l[i - 1]); });
    fi.transform();
    ti.transform();
    out.block.push_back(fi.energy(q));
    out.telescoped.push_back(ti.energy(q));
    out.residual.push_back(ti.energy(q, &fi));
  }
  TorusField total(m, grid, space);
  for (const auto& b : blocks) total.add(b, [](std::size_t) { return 1.0; });
  total.transform();
  out.total = total.energy(q);
  return out;
}

double relative_gap(double coarse, double fine) {
  const double scale = std::max(std::abs(coarse), std::abs(fine));
  return scale == 0.0 ? 0.0 : std::abs(coarse - fine) / scale;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

bool is_prime(std::size_t n) {
  if (n < 2) return false;
  for (std::size_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

}  // namespace

ChainReport cotype_chain_report(const WalshMartingale& M, double q, double eps, int fejer_degree,
                                std::size_t resolution, std::size_t twisted_resolution, std::uint64_t seed) {
  const std::size_t m = M.generations();
  if (m > 3) throw Error(ErrorKind::size, "chain reports integrate over T^m and need m <= 3");
  require_exponent(q, "cotype exponent must satisfy 1 <= q < inf");
  if (!(eps > 0.0) || std::isinf(eps)) throw Error(ErrorKind::domain, "epsilon must be a positive real");
  if (resolution == 0) resolution = m == 1 ? 256 : 64;
  if (twisted_resolution == 0) twisted_resolution = m == 1 ? 64 : (m == 2 ? 32 : 16);

  ChainReport r;
  r.q = q;
  r.eps = eps;
  r.fejer_degree = fejer_degree;
  r.resolution = 2 * resolution;
  r.twisted_resolution = twisted_resolution;
  r.norm_surrogate = "concatenated (re, im) in " + M.space().norm().label();

  const BlockSet bs = build_blocks(M, fejer_degree, q);
  r.lift_error = bs.lift_error;
  r.certificate = select_sequences(bs.blocks, eps);
  r.telescoping_sup = telescoping_error(bs.blocks, r.certificate, 4096, 4, seed);
  const auto nus = block_frequencies(bs.blocks, r.certificate.n);

  const TorusEnergies coarse = torus_energies(bs.blocks, r.certificate, nus, resolution, q);
  const TorusEnergies fine = torus_energies(bs.blocks, r.certificate, nus, 2 * resolution, q);
  r.block_energy = fine.block;
  r.telescoped_energy = fine.telescoped;
  r.telescoping_residual = fine.residual;
  r.total_energy = fine.total;

  // Direct twisted sums: theta_a + n_a theta on a shifted torus grid times a prime theta grid.
  std::size_t theta_points = 4 * twisted_resolution + 1;
  while (!is_prime(theta_points)) ++theta_points;
  r.twisted_theta_points = theta_points;
  {
    Rng rng(seed);
    std::vector<double> shift(m);
    for (auto& s : shift) s = rng.uniform() / static_cast<double>(twisted_resolution);
    std::vector<std::size_t> at(m, 0);
    std::vector<double> args(m);
    std::vector<double> total(M.space().dim());
    double blocks_acc = 0.0, total_acc = 0.0;
    std::size_t count = 0;
    for (;;) {
      for (std::size_t j = 0; j < theta_points; ++j) {
        for (std::size_t a = 0; a < m; ++a) {
          const auto step = static_cast<std::size_t>(
              (static_cast<unsigned __int128>(r.certificate.n[a]) * j) % theta_points);
          args[a] = frac(static_cast<double>(at[a]) / static_cast<double>(twisted_resolution) + shift[a] +
                         static_cast<double>(step) / static_cast<double>(theta_points));
        }
        std::fill(total.begin(), total.end(), 0.0);
        for (std::size_t k = 1; k <= m; ++k) {
          const Point f = bs.block_value(k, args);
          blocks_acc += power(norm(f), q);
          for (std::size_t d = 0; d < total.size(); ++d) total[d] += f[d];
        }
        total_acc += power(M.space().norm_of(total), q);
        ++count;
      }
      std::size_t a = m;
      while (a > 0 && ++at[a - 1] == twisted_resolution) at[--a] = 0;
      if (a == 0) break;
    }
    r.block_energy_twisted = blocks_acc / static_cast<double>(count);
    r.total_energy_twisted = total_acc / static_cast<double>(count);
  }

  {
    const auto sums = partial_sums(M);
    const double atoms = static_cast<double>(sums.back().atoms());
    for (std::size_t k = 1; k <= m; ++k)
      for (std::size_t a = 0; a < sums[k].atoms(); ++a)
        r.martingale_increments += power(norm(sums[k][a] - sums[k - 1][a]), q) / atoms;
    for (const auto& v : sums.back().values()) r.martingale_terminal += power(norm(v), q) / atoms;
  }

  const double cq = std::pow(2.0, q - 1.0);
  // lhs_c, rhs_c: the same sides at resolution G. Both sides are compared
  // against the size of the link, so a tiny error term next to its budget
  // does not count as unresolved.
  const auto link = [&](std::string name, double lhs, double rhs, double lhs_c, double rhs_c, bool gated) {
    ChainLink l;
    l.name = std::move(name);
    l.lhs = lhs;
    l.rhs = rhs;
    l.ratio = (lhs == 0.0 && rhs == 0.0) ? 0.0 : lhs / rhs;
    const double size = std::max(std::abs(lhs), std::abs(rhs));
    l.richardson_gap = size == 0.0 ? 0.0 : std::max(std::abs(lhs - lhs_c), std::abs(rhs - rhs_c)) / size;
    l.lhs_gap = relative_gap(lhs_c, lhs);
    l.finite = std::isfinite(lhs) && std::isfinite(rhs) && std::isfinite(l.ratio);
    r.max_richardson_gap = std::max(r.max_richardson_gap, l.richardson_gap);
    if (gated && l.richardson_gap > 0.05)
      throw ResolutionError("torus grid too coarse for link " + l.name, lhs_c, lhs);
    r.links.push_back(std::move(l));
  };
  const double blocks_f = sum(fine.block), blocks_c = sum(coarse.block);
  const double tel_f = sum(fine.telescoped), tel_c = sum(coarse.telescoped);
  const double res_f = sum(fine.residual), res_c = sum(coarse.residual);
  const double budget = static_cast<double>(m) * power(3.0 * eps, q);
  const double twisted = r.block_energy_twisted + r.total_energy_twisted;
  const double final_rhs = r.martingale_terminal + static_cast<double>(m) * power(eps, q);

  link("control", blocks_f, cq * (tel_f + res_f), blocks_c, cq * (tel_c + res_c), true);
  link("telescoping", res_f, budget, res_c, budget, false);
  link("poisson_variation", tel_f, fine.total, tel_c, coarse.total, true);
  link("change_of_variables", twisted, blocks_f + fine.total, twisted, blocks_c + coarse.total, false);
  link("transfer", blocks_f, r.martingale_increments, blocks_c, r.martingale_increments, true);
  link("cotype_final", r.martingale_increments, final_rhs, r.martingale_increments, final_rhs, false);
  return r;
}

}  // namespace varq
