#include "varq/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "varq/error.hpp"
#include "varq/random.hpp"
#include "varq/variation.hpp"

namespace varq {

namespace {

void require_generations(std::size_t m) {
  if (m == 0 || m > kMaxGenerations) throw Error(ErrorKind::size, "dyadic generations must be in 1..20");
}

double power(double x, double q) { return q == 2.0 ? x * x : std::pow(x, q); }

}  // namespace

DyadicFunction::DyadicFunction(std::size_t m, std::vector<Point> values) : m_(m), values_(std::move(values)) {
  require_generations(m);
  if (values_.size() != (std::size_t{1} << m)) throw Error(ErrorKind::size, "dyadic function needs 2^m values");
  for (const auto& v : values_) require_same_space(v.space(), values_.front().space(), "dyadic function values");
}

DyadicFunction DyadicFunction::constant(std::size_t m, const Point& value) {
  require_generations(m);
  return DyadicFunction(m, std::vector<Point>(std::size_t{1} << m, value));
}

WalshMartingale::WalshMartingale(Space space, std::vector<std::vector<Point>> tables)
    : space_(space), tables_(std::move(tables)) {
  require_generations(tables_.size());
  for (std::size_t k = 1; k <= tables_.size(); ++k) {
    if (tables_[k - 1].size() != (std::size_t{1} << (k - 1)))
      throw Error(ErrorKind::size, "martingale table k must have 2^(k-1) entries");
    for (const auto& p : tables_[k - 1]) require_same_space(p.space(), space_, "martingale table entry");
  }
}

bool WalshMartingale::is_zero() const {
  for (const auto& t : tables_)
    for (const auto& p : t)
      if (norm(p) != 0.0) return false;
  return true;
}

DyadicFunction conditional_expectation(const DyadicFunction& g, std::size_t k) {
  const std::size_t m = g.generations();
  if (k > m) throw Error(ErrorKind::domain, "conditional expectation index exceeds generations");
  const std::size_t block = std::size_t{1} << (m - k);
  const std::size_t dim = g.space().dim();
  std::vector<Point> out;
  out.reserve(g.atoms());
  std::vector<double> acc(dim);
  for (std::size_t start = 0; start < g.atoms(); start += block) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t a = start; a < start + block; ++a)
      for (std::size_t d = 0; d < dim; ++d) acc[d] += g[a][d];
    for (auto& c : acc) c /= static_cast<double>(block);
    const Point mean(g.space(), acc);
    for (std::size_t a = 0; a < block; ++a) out.push_back(mean);
  }
  return DyadicFunction(m, std::move(out));
}

std::vector<DyadicFunction> partial_sums(const WalshMartingale& M) {
  const std::size_t m = M.generations();
  const std::size_t atoms = std::size_t{1} << m;
  const std::size_t dim = M.space().dim();
  std::vector<std::vector<double>> current(atoms, std::vector<double>(dim, 0.0));
  std::vector<DyadicFunction> sums;
  sums.reserve(m + 1);
  const auto snapshot = [&] {
    std::vector<Point> v;
    v.reserve(atoms);
    for (const auto& c : current) v.emplace_back(M.space(), c);
    return DyadicFunction(m, std::move(v));
  };
  sums.push_back(snapshot());
  for (std::size_t k = 1; k <= m; ++k) {
    for (std::size_t a = 0; a < atoms; ++a) {
      const Point& phi = M.predictable(k, a);
      const double s = dyadic_sign(a, m, k);
      for (std::size_t d = 0; d < dim; ++d) current[a][d] += s * phi[d];
    }
    sums.push_back(snapshot());
  }

  // Martingale consistency: M_k must coincide with E_k M_m up to rounding.
  double scale = 0.0;
  for (const auto& p : sums.back().values()) scale = std::max(scale, norm(p));
  for (std::size_t k = 0; k <= m; ++k) {
    const auto e = conditional_expectation(sums.back(), k);
    for (std::size_t a = 0; a < atoms; ++a)
      if (norm(e[a] - sums[k][a]) > 1e-12 * std::max(1.0, scale) * static_cast<double>(m))
        throw std::logic_error("partial sums violate the martingale property");
  }
  return sums;
}

CotypeRatio cotype_ratio(const WalshMartingale& M, double q) {
  if (!(q >= 2.0) || std::isinf(q)) throw Error(ErrorKind::domain, "cotype exponent must satisfy 2 <= q < inf");
  if (M.is_zero()) throw Error(ErrorKind::degenerate, "cotype ratio of the zero martingale");
  const auto sums = partial_sums(M);
  const std::size_t m = M.generations();
  const double atoms = static_cast<double>(std::size_t{1} << m);

  CotypeRatio out;
  for (std::size_t k = 1; k <= m; ++k) {
    double inc = 0.0, level = 0.0;
    for (std::size_t a = 0; a < sums[k].atoms(); ++a) {
      inc += power(norm(sums[k][a] - sums[k - 1][a]), q);
      level += power(norm(sums[k][a]), q);
    }
    out.numerator += inc / atoms;
    out.denominator = std::max(out.denominator, level / atoms);
  }
  out.ratio = out.numerator / out.denominator;
  return out;
}

double martingale_vq_lp(const DyadicFunction& g, double q, double p) {
  if (!(q >= 2.0) || std::isinf(q)) throw Error(ErrorKind::domain, "variation exponent must satisfy 2 <= q < inf");
  if (!(p > 1.0) || std::isinf(p)) throw Error(ErrorKind::domain, "integrability exponent must satisfy 1 < p < inf");
  const std::size_t m = g.generations();
  const std::size_t dim = g.space().dim();
  std::vector<DyadicFunction> levels;
  levels.reserve(m + 1);
  for (std::size_t k = 0; k <= m; ++k) levels.push_back(conditional_expectation(g, k));

  std::vector<double> flat((m + 1) * dim);
  double acc = 0.0;
  for (std::size_t a = 0; a < g.atoms(); ++a) {
    for (std::size_t k = 0; k <= m; ++k)
      std::copy(levels[k][a].coords().begin(), levels[k][a].coords().end(), flat.begin() + k * dim);
    acc += std::pow(vq_value(flat, m + 1, g.space(), q), p);
  }
  return std::pow(acc / static_cast<double>(g.atoms()), 1.0 / p);
}

WalshMartingale witness_linfty(std::size_t n, std::size_t m) {
  if (m > n) throw Error(ErrorKind::domain, "l^inf witness needs m <= n");
  require_generations(m);
  const Space space(n, NormKind::linf());
  std::vector<std::vector<Point>> tables;
  for (std::size_t k = 1; k <= m; ++k)
    tables.emplace_back(std::size_t{1} << (k - 1), Point::basis(space, k - 1));
  return WalshMartingale(space, std::move(tables));
}

WalshMartingale random_martingale(std::uint64_t seed, const Space& space, std::size_t m, double amplitude) {
  if (!(amplitude >= 0.0) || std::isinf(amplitude)) throw Error(ErrorKind::domain, "amplitude must be nonnegative");
  require_generations(m);
  Rng rng(seed);
  std::vector<std::vector<Point>> tables;
  for (std::size_t k = 1; k <= m; ++k) {
    std::vector<Point> table;
    for (std::size_t i = 0; i < (std::size_t{1} << (k - 1)); ++i) {
      std::vector<double> c(space.dim());
      for (auto& x : c) x = rng.uniform(-amplitude, amplitude);
      table.emplace_back(space, std::move(c));
    }
    tables.push_back(std::move(table));
  }
  return WalshMartingale(space, std::move(tables));
}

}  // namespace varq
