#include "varq/variation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "varq/error.hpp"

namespace varq {

namespace {

void require_exponent(double q) {
  if (!(q >= 1.0) || std::isinf(q)) throw Error(ErrorKind::domain, "variation exponent must satisfy 1 <= q < inf");
}

// Both the DP and the enumeration go through this so that the same chain
// produces bit-identical sums on either route.
inline double increment_weight(double distance, double q) {
  if (q == 1.0) return distance;
  if (q == 2.0) return distance * distance;
  return std::pow(distance, q);
}

inline double root(double sum, double q) {
  if (q == 1.0) return sum;
  if (q == 2.0) return std::sqrt(sum);
  return std::pow(sum, 1.0 / q);
}

class Increments {
 public:
  Increments(std::span<const double> flat, std::size_t count, const Space& space, double q)
      : flat_(flat), count_(count), space_(space), q_(q), scratch_(space.dim()) {}

  double operator()(std::size_t i, std::size_t j) const {
    const std::size_t d = space_.dim();
    for (std::size_t c = 0; c < d; ++c) scratch_[c] = flat_[j * d + c] - flat_[i * d + c];
    return increment_weight(space_.norm_of(scratch_), q_);
  }

 private:
  std::span<const double> flat_;
  std::size_t count_;
  const Space& space_;
  double q_;
  mutable std::vector<double> scratch_;
};

std::vector<double> flatten(const SamplePath& path) {
  const std::size_t d = path.space().dim();
  std::vector<double> flat(path.size() * d);
  for (std::size_t i = 0; i < path.size(); ++i)
    std::copy(path.values()[i].coords().begin(), path.values()[i].coords().end(), flat.begin() + i * d);
  return flat;
}

// Chain ending at `end`, read off the parent links.
std::vector<std::size_t> unwind(const std::vector<std::ptrdiff_t>& parent, std::size_t end) {
  std::vector<std::size_t> chain;
  for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(end); k >= 0; k = parent[k]) chain.push_back(k);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

// Strict preference: larger value, then fewer nodes, then lexicographically smaller.
bool preferred(double value, std::size_t nodes, const std::vector<std::size_t>& chain, double best_value,
               std::size_t best_nodes, const std::vector<std::size_t>& best_chain) {
  if (value != best_value) return value > best_value;
  if (nodes != best_nodes) return nodes < best_nodes;
  return std::lexicographical_compare(chain.begin(), chain.end(), best_chain.begin(), best_chain.end());
}

struct DpTables {
  std::vector<double> sum;
  std::vector<std::size_t> nodes;
  std::vector<std::ptrdiff_t> parent;
};

template <class Weight>
DpTables run_dp(const Weight& w, std::size_t n, bool track_ties) {
  DpTables t{std::vector<double>(n, 0.0), std::vector<std::size_t>(n, 1), std::vector<std::ptrdiff_t>(n, -1)};
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double cand = t.sum[i] + w(i, j);
      const std::size_t cand_nodes = t.nodes[i] + 1;
      bool take = false;
      if (cand != t.sum[j]) {
        take = cand > t.sum[j];
      } else if (cand_nodes != t.nodes[j]) {
        take = cand_nodes < t.nodes[j];
      } else if (track_ties && t.parent[j] >= 0) {
        // Same value and length, both chains end at j: compare the prefixes.
        const auto a = unwind(t.parent, i);
        const auto b = unwind(t.parent, static_cast<std::size_t>(t.parent[j]));
        take = std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
      }
      if (take) {
        t.sum[j] = cand;
        t.nodes[j] = cand_nodes;
        t.parent[j] = static_cast<std::ptrdiff_t>(i);
      }
    }
  }
  return t;
}

}  // namespace

SamplePath::SamplePath(std::vector<double> labels, std::vector<Point> values)
    : labels_(std::move(labels)), values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorKind::domain, "sample path needs at least one sample");
  if (labels_.size() != values_.size()) throw Error(ErrorKind::domain, "label and value counts differ");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!(labels_[i] > 0.0)) throw Error(ErrorKind::domain, "sample labels must be positive");
    if (i > 0 && !(labels_[i] > labels_[i - 1]))
      throw Error(ErrorKind::domain, "sample labels must be strictly increasing");
    require_same_space(values_[i].space(), values_.front().space(), "sample path values");
  }
}

SamplePath SamplePath::indexed(std::vector<Point> values) {
  std::vector<double> labels(values.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<double>(i + 1);
  return SamplePath(std::move(labels), std::move(values));
}

VariationResult vq_bruteforce(const SamplePath& path, double q) {
  require_exponent(q);
  const std::size_t n = path.size();
  if (n - 1 > kBruteForceMaxIncrements)
    throw Error(ErrorKind::size, "brute-force q-variation limited to J <= 20 increments");
  const auto flat = flatten(path);
  const Increments w(flat, n, path.space(), q);

  std::vector<double> weight(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) weight[i * n + j] = w(i, j);

  double best_sum = 0.0;
  std::vector<std::size_t> best_chain;
  std::vector<std::size_t> chain;
  const std::uint64_t subsets = std::uint64_t{1} << n;
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    chain.clear();
    for (std::size_t k = 0; k < n; ++k)
      if (mask & (std::uint64_t{1} << k)) chain.push_back(k);
    if (chain.size() < 2) continue;
    double sum = 0.0;
    for (std::size_t k = 1; k < chain.size(); ++k) sum += weight[chain[k - 1] * n + chain[k]];
    if (preferred(sum, chain.size(), chain, best_sum, best_chain.size(), best_chain)) {
      best_sum = sum;
      best_chain = chain;
    }
  }
  return {root(best_sum, q), best_chain};
}

VariationResult vq_dp(const SamplePath& path, double q) {
  require_exponent(q);
  const std::size_t n = path.size();
  const auto flat = flatten(path);
  const Increments w(flat, n, path.space(), q);
  const DpTables t = run_dp(w, n, true);

  double best_sum = 0.0;
  std::vector<std::size_t> best_chain;
  for (std::size_t j = 0; j < n; ++j) {
    if (t.nodes[j] < 2) continue;
    if (t.sum[j] < best_sum) continue;
    auto chain = unwind(t.parent, j);
    if (preferred(t.sum[j], t.nodes[j], chain, best_sum, best_chain.size(), best_chain)) {
      best_sum = t.sum[j];
      best_chain = std::move(chain);
    }
  }
  return {root(best_sum, q), best_chain};
}

double vq_value(std::span<const double> flat, std::size_t count, const Space& space, double q) {
  require_exponent(q);
  if (flat.size() != count * space.dim()) throw Error(ErrorKind::domain, "flat sample buffer has wrong length");
  if (count < 2) return 0.0;
  const Increments w(flat, count, space, q);
  const DpTables t = run_dp(w, count, false);
  return root(*std::max_element(t.sum.begin(), t.sum.end()), q);
}

double vq_value_distances(std::span<const double> distances, std::size_t count, double q) {
  require_exponent(q);
  if (distances.size() != count * count) throw Error(ErrorKind::domain, "distance matrix has wrong size");
  if (count < 2) return 0.0;
  const auto w = [&](std::size_t i, std::size_t j) { return increment_weight(distances[i * count + j], q); };
  const DpTables t = run_dp(w, count, false);
  return root(*std::max_element(t.sum.begin(), t.sum.end()), q);
}

double vq_stream_lower(const SamplePath& path, double q) {
  require_exponent(q);
  const auto flat = flatten(path);
  const Increments w(flat, path.size(), path.space(), q);
  double sum = 0.0;
  for (std::size_t j = 1; j < path.size(); ++j) sum += w(j - 1, j);
  return root(sum, q);
}

}  // namespace varq
