#pragma once

#include <stdexcept>
#include <string>

namespace varq {

enum class ErrorKind {
  domain,          // argument outside the mathematical domain (q < 1, t <= 0, ...)
  size,            // enumeration or construction guard exceeded
  space_mismatch,  // operands live in different spaces
  singularity,     // evaluation at a point of logarithmic divergence
  degenerate,      // input carries no information (zero martingale, zero corpus)
  quadrature,      // adaptive quadrature ran out of subdivisions
  resolution,      // grid refinement disagreement above the reporting gate
  precision,       // a search hit the limits of double precision
  io,              // file or format problems
};

const char* to_string(ErrorKind kind);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

  /// Process exit code used by the CLI: 3 for resolution/precision, 1 otherwise.
  int exit_code() const noexcept;

 private:
  ErrorKind kind_;
};

/// Quadrature failure; carries the estimate reached before giving up.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double estimate);
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

/// Richardson-style disagreement between a coarse and a fine evaluation.
class ResolutionError : public Error {
 public:
  ResolutionError(const std::string& what, double coarse, double fine);
  double coarse() const noexcept { return coarse_; }
  double fine() const noexcept { return fine_; }

 private:
  double coarse_;
  double fine_;
};

}  // namespace varq
