#include "varq/error.hpp"

namespace varq {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::size: return "size";
    case ErrorKind::space_mismatch: return "space mismatch";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::degenerate: return "degenerate input";
    case ErrorKind::quadrature: return "quadrature";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::precision: return "precision";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

int Error::exit_code() const noexcept {
  return (kind_ == ErrorKind::resolution || kind_ == ErrorKind::precision) ? 3 : 1;
}

QuadratureError::QuadratureError(const std::string& what, double estimate)
    : Error(ErrorKind::quadrature, what + " (estimate " + std::to_string(estimate) + ")"),
      estimate_(estimate) {}

ResolutionError::ResolutionError(const std::string& what, double coarse, double fine)
    : Error(ErrorKind::resolution,
            what + " (coarse " + std::to_string(coarse) + ", fine " + std::to_string(fine) + ")"),
      coarse_(coarse),
      fine_(fine) {}

}  // namespace varq
