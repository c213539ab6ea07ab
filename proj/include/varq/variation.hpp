#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "varq/spaces.hpp"

namespace varq {

/// Samples a_{t_0}, ..., a_{t_J} of an X-valued family at strictly increasing
/// positive labels.
class SamplePath {
 public:
  SamplePath(std::vector<double> labels, std::vector<Point> values);

  /// Path with labels 1, 2, ..., values.size().
  static SamplePath indexed(std::vector<Point> values);

  const std::vector<double>& labels() const noexcept { return labels_; }
  const std::vector<Point>& values() const noexcept { return values_; }
  const Space& space() const noexcept { return values_.front().space(); }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> labels_;
  std::vector<Point> values_;
};

/// Optimal value of the q-variation and a chain of sample indices achieving it.
struct VariationResult {
  double value = 0.0;
  std::vector<std::size_t> chain;
};

/// Largest J (number of increments) accepted by vq_bruteforce.
inline constexpr std::size_t kBruteForceMaxIncrements = 20;

/// Exhaustive maximisation over all index subsequences. Exponential; guarded
/// by kBruteForceMaxIncrements. Serves as the oracle for vq_dp.
VariationResult vq_bruteforce(const SamplePath& path, double q);

/// Exact q-variation as a maximum-weight chain in the complete DAG on the
/// samples with edge weights ||a_j - a_i||^q. O(J^2) time, O(J) memory.
///
/// Ties are broken toward fewer chain nodes, then the lexicographically
/// smallest index sequence; an all-constant path yields the empty chain.
VariationResult vq_dp(const SamplePath& path, double q);

/// q-variation value of `count` samples stored contiguously (row-major,
/// space.dim() doubles per sample). No chain is reconstructed. Used by hot
/// loops that would otherwise allocate a Point per sample.
double vq_value(std::span<const double> flat, std::size_t count, const Space& space, double q);

/// Same as vq_value for a metric given as a row-major count x count matrix;
/// only entries (i, j) with i < j are read.
double vq_value_distances(std::span<const double> distances, std::size_t count, double q);

/// Value of the full adjacent chain; a cheap lower bound for vq_dp.
double vq_stream_lower(const SamplePath& path, double q);

}  // namespace varq
