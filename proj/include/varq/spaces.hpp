#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace varq {

/// Exponent r of an l^r norm, 1 <= r <= infinity. Infinity is a separate
/// state, not a large float, so that max semantics are exact.
class NormKind {
 public:
  static NormKind lr(double r);
  static NormKind linf() { return NormKind(true, 0.0); }
  static NormKind l1() { return lr(1.0); }
  static NormKind l2() { return lr(2.0); }

  bool is_infinite() const noexcept { return infinite_; }
  /// Finite exponent; meaningless when is_infinite().
  double r() const noexcept { return r_; }

  /// "l1", "l2", "linf" or "l<r>".
  std::string label() const;

  friend bool operator==(const NormKind&, const NormKind&) = default;

 private:
  NormKind(bool infinite, double r) : infinite_(infinite), r_(r) {}
  bool infinite_;
  double r_;
};

/// The finite-dimensional normed space l^r_n standing in for the Banach space X.
class Space {
 public:
  Space(std::size_t dim, NormKind norm);

  std::size_t dim() const noexcept { return dim_; }
  const NormKind& norm() const noexcept { return norm_; }

  /// Norm of a raw coordinate vector (length is not checked).
  double norm_of(std::span<const double> coords) const;

  friend bool operator==(const Space&, const Space&) = default;

 private:
  std::size_t dim_;
  NormKind norm_;
};

/// An element of a Space. Immutable after construction.
class Point {
 public:
  Point(Space space, std::vector<double> coords);
  static Point zero(const Space& space);
  /// Scalar embedded along the first basis vector.
  static Point scalar(const Space& space, double value);
  static Point basis(const Space& space, std::size_t i);

  const Space& space() const noexcept { return space_; }
  std::span<const double> coords() const noexcept { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::size_t dim() const noexcept { return coords_.size(); }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  Space space_;
  std::vector<double> coords_;
};

double norm(const Point& v);

/// alpha * v + w.
Point axpy(double alpha, const Point& v, const Point& w);

Point operator+(const Point& a, const Point& b);
Point operator-(const Point& a, const Point& b);
Point operator*(double alpha, const Point& v);

/// Throws ErrorKind::space_mismatch unless a and b share a space.
void require_same_space(const Space& a, const Space& b, const char* context);

}  // namespace varq
