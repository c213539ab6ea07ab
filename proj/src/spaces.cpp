#include "varq/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "varq/error.hpp"

namespace varq {

NormKind NormKind::lr(double r) {
  if (std::isinf(r) && r > 0) return linf();
  if (!(r >= 1.0)) throw Error(ErrorKind::domain, "norm exponent must satisfy r >= 1");
  return NormKind(false, r);
}

std::string NormKind::label() const {
  if (infinite_) return "linf";
  if (r_ == 1.0) return "l1";
  if (r_ == 2.0) return "l2";
  std::ostringstream os;
  os.precision(17);
  os << "l" << r_;
  return os.str();
}

Space::Space(std::size_t dim, NormKind norm) : dim_(dim), norm_(norm) {
  if (dim == 0) throw Error(ErrorKind::domain, "space dimension must be positive");
}

double Space::norm_of(std::span<const double> coords) const {
  if (norm_.is_infinite()) {
    double m = 0.0;
    for (double c : coords) m = std::max(m, std::abs(c));
    return m;
  }
  const double r = norm_.r();
  if (r == 1.0) {
    double s = 0.0;
    for (double c : coords) s += std::abs(c);
    return s;
  }
  // Scale by the largest entry so that |v_i|^r neither overflows nor underflows.
  double m = 0.0;
  for (double c : coords) m = std::max(m, std::abs(c));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  if (r == 2.0) {
    for (double c : coords) {
      const double u = c / m;
      s += u * u;
    }
    return m * std::sqrt(s);
  }
  for (double c : coords) s += std::pow(std::abs(c) / m, r);
  return m * std::pow(s, 1.0 / r);
}

Point::Point(Space space, std::vector<double> coords) : space_(space), coords_(std::move(coords)) {
  if (coords_.size() != space_.dim())
    throw Error(ErrorKind::space_mismatch, "coordinate count differs from space dimension");
  for (double c : coords_)
    if (std::isnan(c)) throw Error(ErrorKind::domain, "NaN coordinate");
}

Point Point::zero(const Space& space) { return Point(space, std::vector<double>(space.dim(), 0.0)); }

Point Point::scalar(const Space& space, double value) {
  std::vector<double> c(space.dim(), 0.0);
  c[0] = value;
  return Point(space, std::move(c));
}

Point Point::basis(const Space& space, std::size_t i) {
  if (i >= space.dim()) throw Error(ErrorKind::domain, "basis index out of range");
  std::vector<double> c(space.dim(), 0.0);
  c[i] = 1.0;
  return Point(space, std::move(c));
}

double norm(const Point& v) { return v.space().norm_of(v.coords()); }

void require_same_space(const Space& a, const Space& b, const char* context) {
  if (!(a == b)) throw Error(ErrorKind::space_mismatch, context);
}

Point axpy(double alpha, const Point& v, const Point& w) {
  require_same_space(v.space(), w.space(), "axpy operands");
  std::vector<double> out(w.coords().begin(), w.coords().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha * v[i];
  return Point(w.space(), std::move(out));
}

Point operator+(const Point& a, const Point& b) { return axpy(1.0, a, b); }

Point operator-(const Point& a, const Point& b) {
  require_same_space(a.space(), b.space(), "point difference");
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return Point(a.space(), std::move(out));
}

Point operator*(double alpha, const Point& v) {
  std::vector<double> out(v.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * v[i];
  return Point(v.space(), std::move(out));
}

}  // namespace varq
