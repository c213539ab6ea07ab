#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "varq/martingale.hpp"
#include "varq/operators.hpp"
#include "varq/spaces.hpp"
#include "varq/transference.hpp"

namespace varq {

enum class ExperimentKind { variation, estimate, sweep, identities, cotype, transfer };

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Seeded random step functions, optionally followed by explicit ones.
struct CorpusSpec {
  std::size_t count = 8;
  std::size_t max_intervals = 4;
  double amplitude = 1.0;
  std::uint64_t seed = 0;
  bool scalar_embedded = false;  // values along the first basis vector only
  std::vector<StepFunction> functions;
};

struct OptimizerSpec {
  std::size_t restarts = 16;
  std::size_t iterations = 200;
  double step_scale = 0.25;  // initial relative step
  std::uint64_t seed = 0;
};

/// Midpoint grid on [x_0 - M t_max, x_K + M t_max]. The unit of length is
/// sqrt(t_min t_max), so a grid dilated together with f gives the same points.
struct SpatialSpec {
  double points_per_unit = 64.0;
  double tail_multiplier = 4.0;
  double richardson_gate = 0.01;
};

struct ExperimentConfig {
  std::string id = "experiment";
  ExperimentKind kind = ExperimentKind::estimate;
  Space space = Space(1, NormKind::l2());
  double p = 2.0;
  double q = 3.0;
  KernelFamily family = KernelFamily::average();
  ScaleGrid scales = ScaleGrid::geometric(0x1p-6, 0x1p6, 33);
  CorpusSpec corpus;
  OptimizerSpec optimizer;
  SpatialSpec spatial;

  /// Throws ErrorKind::domain on p <= 1, q < 2, nonpositive counts, ...
  void validate() const;
};

/// One line of a report. Every estimate travels with its diagnostics.
struct ReportRow {
  std::string experiment_id;
  std::string kind;
  std::string space;   // norm label, e.g. "l2"
  std::size_t dim = 1;
  double p = 0.0;
  double q = 0.0;
  std::string family;
  double estimate = 0.0;
  std::string status;  // PASS/FAIL for checks, empty otherwise
  std::vector<std::pair<std::string, double>> diagnostics;
  std::uint64_t seed = 0;
  std::vector<double> trace;                // best ratio after each search step
  std::optional<StepFunction> witness;      // maximiser found by the search

  /// Value of a diagnostic; throws if absent.
  double diagnostic(const std::string& key) const;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct FieldValue {
  double value = 0.0;   // fine-grid value
  double coarse = 0.0;  // value at the requested resolution
  double gap = 0.0;     // |coarse - value| / max(|coarse|, |value|)
  std::size_t points = 0;
  double endpoint_increment = 0.0;  // ||T_{t_max} f - T_{t_min} f||_p on the fine grid
};

/// Discrete ||V_q(T_t f(x) : t in grid)||_{L^p(dx)} on the spatial grid, at
/// the requested resolution and at twice it; the finer value is reported.
/// Raises ResolutionError when the two differ by more than the Richardson gate.
FieldValue field_vq_lp(const StepFunction& f, const KernelFamily& family, const ScaleGrid& grid, double q, double p,
                       const SpatialSpec& spatial);

/// Explicit functions first, then `count` seeded random ones.
std::vector<StepFunction> build_corpus(const CorpusSpec& spec, const Space& space);

/// Maximises field_vq_lp(f) / ||f||_p over the corpus plus hill climbing.
/// The value is a lower bound for the best constant of the finite grids.
ReportRow estimate_constant(const ExperimentConfig& config);

struct SweepAxis {
  enum class Kind { q, dim, refinement } kind = Kind::q;
  std::vector<double> values;

  /// "q=2,2.5,3", "dim=1,2,4" or "refinement=9,17,33" (scale counts).
  static SweepAxis parse(const std::string& text);
  std::string name() const;
};

struct SweepResult {
  SweepAxis axis;
  std::vector<ReportRow> rows;
  std::vector<double> fixed_f_curve;  // field_vq_lp(f)/||f||_p for the first corpus function
  bool fixed_f_monotone = true;       // nonincreasing for q, nondecreasing for refinement, constant for dim
  bool estimates_monotone = true;     // same test applied to the optimised estimates
};

SweepResult sweep(const ExperimentConfig& config, const SweepAxis& axis);

/// Two-column TSV (axis value, estimate) followed by a blank line and the
/// fixed-f curve in the same layout.
std::string plot_tsv(const SweepResult& result);

struct IdentityOptions {
  std::size_t triples = 100;
  bool corrupt_kernel = false;  // run the conjugate identity with the tampered Poisson kernel
};

/// Every analytic identity at seeded (f, eps, x) triples, one row each with
/// status PASS or FAIL. Includes a negative-control row that passes only if
/// the tampered kernel is detected.
std::vector<ReportRow> identity_suite(std::uint64_t seed, const IdentityOptions& options = {});

bool all_pass(const std::vector<ReportRow>& rows);

/// witness_linfty(dim, m) when the space is l^inf and m <= dim, else a
/// seeded random martingale of unit amplitude.
WalshMartingale demo_martingale(const Space& space, std::size_t m, std::uint64_t seed);

/// Cotype ratio of the l^inf witness (when the space is l^inf and m <= dim) or
/// of a seeded random martingale.
ReportRow cotype_row(const Space& space, std::size_t m, double q, std::uint64_t seed);

/// Rows summarising a transference run: one for the certificate, one per chain link.
std::vector<ReportRow> transfer_rows(const ChainReport& report, std::size_t m, std::uint64_t seed);

/// CSV with header experiment_id,kind,space,dim,p,q,family,estimate,diagnostic,seed.
std::string to_csv(const std::vector<ReportRow>& rows);

}  // namespace varq
