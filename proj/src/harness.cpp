#include "varq/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "varq/error.hpp"
#include "varq/parallel.hpp"
#include "varq/random.hpp"
#include "varq/variation.hpp"

namespace varq {

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double power(double x, double p) { return p == 2.0 ? x * x : std::pow(x, p); }

void require_finite_exponent(double v, double lo, bool strict, const char* what) {
  if (std::isnan(v) || std::isinf(v) || (strict ? !(v > lo) : !(v >= lo))) throw Error(ErrorKind::domain, what);
}

// Number of cells for a length measured in grid units; exact integers are not
// pushed up by rounding noise.
std::size_t cell_count(double units) {
  const double r = std::round(units);
  const double n = std::abs(units - r) <= 1e-9 * std::max(1.0, r) ? r : std::ceil(units);
  return static_cast<std::size_t>(std::max(1.0, n));
}

struct LevelValue {
  double vq = 0.0;
  double increment = 0.0;
};

LevelValue evaluate_level(const StepFunction& f, const KernelFamily& family, const ScaleGrid& grid, double q, double p,
                          double lo, double hi, std::size_t n) {
  const double h = (hi - lo) / static_cast<double>(n);
  const std::size_t dim = f.space().dim();
  const std::size_t count = grid.size();
  const auto& bps = f.breakpoints();
  std::vector<double> vq(n), inc(n);
  constexpr std::size_t kChunk = 512;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<double> flat(count * dim), diff(dim);
    for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
      double x = lo + (static_cast<double>(i) + 0.5) * h;
      if (family.hilbert_type()) {
        const auto it = std::lower_bound(bps.begin(), bps.end(), x);
        const bool near = (it != bps.end() && std::abs(*it - x) < 1e-9 * h) ||
                          (it != bps.begin() && std::abs(*(it - 1) - x) < 1e-9 * h);
        if (near) x += 0.25 * h;
      }
      for (std::size_t k = 0; k < count; ++k)
        eval_into(family, f, grid.scales()[k], x, std::span<double>(flat).subspan(k * dim, dim));
      vq[i] = vq_value(flat, count, f.space(), q);
      for (std::size_t d = 0; d < dim; ++d) diff[d] = flat[(count - 1) * dim + d] - flat[d];
      inc[i] = f.space().norm_of(diff);
    }
  });
  LevelValue out;
  for (std::size_t i = 0; i < n; ++i) {
    out.vq += power(vq[i], p) * h;
    out.increment += power(inc[i], p) * h;
  }
  out.vq = std::pow(out.vq, 1.0 / p);
  out.increment = std::pow(out.increment, 1.0 / p);
  return out;
}

struct Evaluation {
  FieldValue field;
  double increment = 0.0;  // ||T_max f - T_min f||_p on the fine grid
  double norm = 0.0;
  double ratio = 0.0;
};

Evaluation evaluate(const StepFunction& f, const ExperimentConfig& c);

bool is_zero_norm(const StepFunction& f, double p) { return f.is_zero() || lp_norm(f, p) == 0.0; }

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::variation: return "variation";
    case ExperimentKind::estimate: return "estimate";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::identities: return "identities";
    case ExperimentKind::cotype: return "cotype";
    case ExperimentKind::transfer: return "transfer";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::variation, ExperimentKind::estimate, ExperimentKind::sweep, ExperimentKind::identities,
                 ExperimentKind::cotype, ExperimentKind::transfer})
    if (name == to_string(k)) return k;
  throw Error(ErrorKind::domain, "unknown experiment kind '" + name + "'");
}

void ExperimentConfig::validate() const {
  require_finite_exponent(p, 1.0, true, "p must satisfy 1 < p < inf");
  require_finite_exponent(q, 2.0, false, "q must satisfy 2 <= q < inf");
  if (corpus.count + corpus.functions.size() == 0) throw Error(ErrorKind::domain, "corpus must be nonempty");
  if (corpus.max_intervals == 0) throw Error(ErrorKind::domain, "corpus max_intervals must be positive");
  if (!(corpus.amplitude >= 0.0) || std::isinf(corpus.amplitude))
    throw Error(ErrorKind::domain, "corpus amplitude must be finite and nonnegative");
  for (const auto& f : corpus.functions) require_same_space(f.space(), space, "corpus function");
  if (optimizer.restarts == 0) throw Error(ErrorKind::domain, "optimizer restarts must be positive");
  if (!(optimizer.step_scale > 0.0) || std::isinf(optimizer.step_scale))
    throw Error(ErrorKind::domain, "optimizer step_scale must be positive");
  if (!(spatial.points_per_unit > 0.0) || std::isinf(spatial.points_per_unit))
    throw Error(ErrorKind::domain, "points_per_unit must be positive");
  if (!(spatial.tail_multiplier >= 0.0) || std::isinf(spatial.tail_multiplier))
    throw Error(ErrorKind::domain, "tail_multiplier must be nonnegative");
  if (!(spatial.richardson_gate > 0.0)) throw Error(ErrorKind::domain, "richardson_gate must be positive");
}

double ReportRow::diagnostic(const std::string& key) const {
  for (const auto& [k, v] : diagnostics)
    if (k == key) return v;
  throw Error(ErrorKind::domain, "report row has no diagnostic '" + key + "'");
}

FieldValue field_vq_lp(const StepFunction& f, const KernelFamily& family, const ScaleGrid& grid, double q, double p,
                       const SpatialSpec& spatial) {
  require_finite_exponent(q, 1.0, false, "q must satisfy 1 <= q < inf");
  require_finite_exponent(p, 1.0, false, "p must satisfy 1 <= p < inf");
  const double unit = std::sqrt(grid.min() * grid.max());
  const double lo = f.support_min() - spatial.tail_multiplier * grid.max();
  const double hi = f.support_max() + spatial.tail_multiplier * grid.max();
  const std::size_t n = cell_count((hi - lo) / unit * spatial.points_per_unit);
  FieldValue out;
  out.points = 2 * n;
  if (f.is_zero()) return out;
  out.coarse = evaluate_level(f, family, grid, q, p, lo, hi, n).vq;
  const LevelValue fine = evaluate_level(f, family, grid, q, p, lo, hi, 2 * n);
  out.value = fine.vq;
  out.endpoint_increment = fine.increment;
  const double scale = std::max(std::abs(out.coarse), std::abs(out.value));
  out.gap = scale == 0.0 ? 0.0 : std::abs(out.coarse - out.value) / scale;
  if (out.gap > spatial.richardson_gate)
    throw ResolutionError("spatial grid disagreement " + format_double(out.gap) + " above gate", out.coarse, out.value);
  return out;
}

namespace {

Evaluation evaluate(const StepFunction& f, const ExperimentConfig& c) {
  Evaluation e;
  e.norm = lp_norm(f, c.p);
  e.field = field_vq_lp(f, c.family, c.scales, c.q, c.p, c.spatial);
  e.increment = e.field.endpoint_increment / e.norm;
  e.ratio = e.field.value / e.norm;
  return e;
}

// One random coordinate move: a breakpoint shifted by a fraction of the
// support width, or a value coordinate shifted by a fraction of the largest
// coordinate. Returns nullopt when the move would break the ordering.
std::optional<StepFunction> perturb(const StepFunction& f, double step, bool scalar_only, Rng& rng) {
  const std::size_t k = f.intervals();
  const std::size_t dim = scalar_only ? 1 : f.space().dim();
  const std::size_t coords = (k + 1) + k * dim;
  const std::size_t pick = rng.below(coords);
  const double u = 2.0 * rng.uniform() - 1.0;
  auto bps = f.breakpoints();
  auto values = f.values();
  if (pick <= k) {
    const double width = f.support_max() - f.support_min();
    bps[pick] += step * width * u;
    for (std::size_t i = 1; i < bps.size(); ++i)
      if (!(bps[i] > bps[i - 1])) return std::nullopt;
  } else {
    double scale = 0.0;
    for (const auto& v : values)
      for (double x : v.coords()) scale = std::max(scale, std::abs(x));
    const std::size_t slot = pick - (k + 1);
    const std::size_t i = slot / dim, d = slot % dim;
    std::vector<double> c(values[i].coords().begin(), values[i].coords().end());
    c[d] += step * scale * u;
    values[i] = Point(f.space(), std::move(c));
  }
  return StepFunction(std::move(bps), std::move(values));
}

}  // namespace

std::vector<StepFunction> build_corpus(const CorpusSpec& spec, const Space& space) {
  std::vector<StepFunction> out = spec.functions;
  for (const auto& f : out) require_same_space(f.space(), space, "corpus function");
  if (spec.max_intervals == 0) throw Error(ErrorKind::domain, "corpus max_intervals must be positive");
  Rng rng(spec.seed);
  for (std::size_t c = 0; c < spec.count; ++c) {
    const std::size_t k = 1 + rng.below(spec.max_intervals);
    std::vector<double> bps{0.0};
    for (std::size_t i = 0; i < k; ++i) bps.push_back(bps.back() + 0.1 + 0.9 * rng.uniform());
    std::vector<Point> values;
    for (std::size_t i = 0; i < k; ++i) {
      if (spec.scalar_embedded) {
        values.push_back(Point::scalar(space, spec.amplitude * (2.0 * rng.uniform() - 1.0)));
      } else {
        std::vector<double> v(space.dim());
        for (auto& x : v) x = spec.amplitude * (2.0 * rng.uniform() - 1.0);
        values.emplace_back(space, std::move(v));
      }
    }
    out.emplace_back(std::move(bps), std::move(values));
  }
  return out;
}

ReportRow estimate_constant(const ExperimentConfig& config) {
  config.validate();
  const auto corpus = build_corpus(config.corpus, config.space);

  struct Candidate {
    StepFunction f;
    Evaluation e;
  };
  std::vector<std::optional<Evaluation>> evals(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t i) {
    if (!is_zero_norm(corpus[i], config.p)) evals[i] = evaluate(corpus[i], config);
  });
  std::vector<Candidate> cands;
  double sanity = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (evals[i]) {
      cands.push_back({corpus[i], *evals[i]});
      sanity = std::max(sanity, evals[i]->increment);
    }
  if (cands.empty()) throw Error(ErrorKind::degenerate, "every corpus function is zero");
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.e.ratio > b.e.ratio; });
  if (cands.size() > config.optimizer.restarts) cands.erase(cands.begin() + static_cast<std::ptrdiff_t>(config.optimizer.restarts), cands.end());

  Candidate best = cands.front();
  std::size_t evaluations = corpus.size(), rejected = 0, accepted = 0;
  std::vector<double> trace;
  for (std::size_t r = 0; r < cands.size(); ++r) {
    Rng rng(config.optimizer.seed * 0x9E3779B97F4A7C15ULL + r + 1);
    Candidate cur = cands[r];
    double step = config.optimizer.step_scale;
    for (std::size_t it = 0; it < config.optimizer.iterations; ++it) {
      bool improved = false;
      if (auto moved = perturb(cur.f, step, config.corpus.scalar_embedded, rng); moved && !is_zero_norm(*moved, config.p)) {
        ++evaluations;
        try {
          const Evaluation e = evaluate(*moved, config);
          if (e.ratio > cur.e.ratio * (1.0 + 1e-12)) {
            cur = {std::move(*moved), e};
            improved = true;
            ++accepted;
          }
        } catch (const ResolutionError&) {
          ++rejected;
        }
      }
      if (!improved) step *= 0.5;
      if (cur.e.ratio > best.e.ratio) best = cur;
      trace.push_back(best.e.ratio);
    }
    if (cur.e.ratio > best.e.ratio) best = cur;
  }

  ReportRow row;
  row.experiment_id = config.id;
  row.kind = to_string(ExperimentKind::estimate);
  row.space = config.space.norm().label();
  row.dim = config.space.dim();
  row.p = config.p;
  row.q = config.q;
  row.family = config.family.name();
  row.estimate = best.e.ratio;
  row.seed = config.optimizer.seed;
  row.diagnostics = {
      {"sanity_lower_bound", sanity},
      {"richardson_gap", best.e.field.gap},
      {"grid_points", static_cast<double>(best.e.field.points)},
      {"scales", static_cast<double>(config.scales.size())},
      {"corpus_size", static_cast<double>(corpus.size())},
      {"restarts", static_cast<double>(cands.size())},
      {"iterations", static_cast<double>(config.optimizer.iterations)},
      {"evaluations", static_cast<double>(evaluations)},
      {"accepted_moves", static_cast<double>(accepted)},
      {"resolution_rejections", static_cast<double>(rejected)},
      {"field_value", best.e.field.value},
      {"lp_norm", best.e.norm},
      {"corpus_seed", static_cast<double>(config.corpus.seed)},
  };
  row.trace = std::move(trace);
  row.witness = best.f;
  return row;
}

SweepAxis SweepAxis::parse(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw Error(ErrorKind::domain, "sweep axis must look like name=v1,v2,...");
  const std::string name = text.substr(0, eq);
  SweepAxis axis;
  if (name == "q") axis.kind = Kind::q;
  else if (name == "dim") axis.kind = Kind::dim;
  else if (name == "refinement") axis.kind = Kind::refinement;
  else throw Error(ErrorKind::domain, "unknown sweep axis '" + name + "'");
  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw Error(ErrorKind::domain, "bad sweep value '" + item + "'");
    axis.values.push_back(v);
  }
  if (axis.values.empty()) throw Error(ErrorKind::domain, "sweep axis is empty");
  if (axis.kind != Kind::q)
    for (double v : axis.values)
      if (!(v >= 1.0) || v != std::floor(v)) throw Error(ErrorKind::domain, "dim and refinement values must be positive integers");
  return axis;
}

std::string SweepAxis::name() const {
  switch (kind) {
    case Kind::q: return "q";
    case Kind::dim: return "dim";
    case Kind::refinement: return "refinement";
  }
  return "?";
}

SweepResult sweep(const ExperimentConfig& config, const SweepAxis& axis) {
  if (axis.values.empty()) throw Error(ErrorKind::domain, "sweep axis is empty");
  SweepResult out;
  out.axis = axis;
  for (double v : axis.values) {
    ExperimentConfig c = config;
    c.id = config.id + "/" + axis.name() + "=" + format_double(v);
    switch (axis.kind) {
      case SweepAxis::Kind::q: c.q = v; break;
      case SweepAxis::Kind::dim: c.space = Space(static_cast<std::size_t>(v), config.space.norm()); break;
      case SweepAxis::Kind::refinement:
        c.scales = ScaleGrid::geometric(config.scales.min(), config.scales.max(), static_cast<std::size_t>(v));
        break;
    }
    c.validate();
    const auto corpus = build_corpus(c.corpus, c.space);
    const auto first = std::find_if(corpus.begin(), corpus.end(), [&](const StepFunction& f) { return !is_zero_norm(f, c.p); });
    if (first == corpus.end()) throw Error(ErrorKind::degenerate, "every corpus function is zero");
    out.fixed_f_curve.push_back(field_vq_lp(*first, c.family, c.scales, c.q, c.p, c.spatial).value / lp_norm(*first, c.p));

    ReportRow row = estimate_constant(c);
    row.kind = to_string(ExperimentKind::sweep);
    row.diagnostics.insert(row.diagnostics.begin(), {{"axis_value", v}, {"fixed_f_ratio", out.fixed_f_curve.back()}});
    out.rows.push_back(std::move(row));
  }
  const auto monotone = [&](const std::vector<double>& ys) {
    for (std::size_t i = 1; i < ys.size(); ++i) {
      const double a = ys[i - 1], b = ys[i];
      const double tol = 1e-12 * std::max(std::abs(a), std::abs(b));
      switch (axis.kind) {
        case SweepAxis::Kind::q: if (b > a + tol) return false; break;
        case SweepAxis::Kind::refinement: if (b < a - tol) return false; break;
        case SweepAxis::Kind::dim: if (std::abs(b - ys.front()) > 1e-12 * std::abs(ys.front())) return false; break;
      }
    }
    return true;
  };
  std::vector<double> estimates;
  for (const auto& r : out.rows) estimates.push_back(r.estimate);
  out.fixed_f_monotone = monotone(out.fixed_f_curve);
  out.estimates_monotone = monotone(estimates);
  for (auto& r : out.rows) {
    r.diagnostics.push_back({"fixed_f_monotone", out.fixed_f_monotone ? 1.0 : 0.0});
    r.diagnostics.push_back({"estimates_monotone", out.estimates_monotone ? 1.0 : 0.0});
  }
  return out;
}

std::string plot_tsv(const SweepResult& result) {
  std::string out = "# " + result.axis.name() + "\testimate\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i)
    out += format_double(result.axis.values[i]) + "\t" + format_double(result.rows[i].estimate) + "\n";
  out += "\n# " + result.axis.name() + "\tfixed_f_ratio\n";
  for (std::size_t i = 0; i < result.fixed_f_curve.size(); ++i)
    out += format_double(result.axis.values[i]) + "\t" + format_double(result.fixed_f_curve[i]) + "\n";
  return out;
}

namespace {

struct Triple {
  StepFunction f;
  double eps;
  double x;
};

std::vector<Triple> identity_triples(std::uint64_t seed, std::size_t count, const Space& space) {
  CorpusSpec spec;
  spec.count = count;
  spec.max_intervals = 4;
  spec.seed = seed;
  const auto corpus = build_corpus(spec, space);
  Rng rng(seed ^ 0xD1B54A32D192ED03ULL);
  std::vector<Triple> out;
  for (const auto& f : corpus) {
    const double eps = std::exp(std::log(0.05) + rng.uniform() * std::log(100.0));
    double x = rng.uniform(f.support_min() - 2.0, f.support_max() + 2.0);
    for (double b : f.breakpoints())
      if (std::abs(x - b) < 1e-6) x = b + 1e-3;
    out.push_back({f, eps, x});
  }
  return out;
}

ReportRow check_row(const std::string& name, double worst, double tol, std::size_t count, std::size_t failures,
                    std::uint64_t seed, bool pass) {
  ReportRow row;
  row.experiment_id = "identities/" + name;
  row.kind = to_string(ExperimentKind::identities);
  row.space = "l2";
  row.dim = 2;
  row.family = name;
  row.estimate = worst;
  row.status = pass ? "PASS" : "FAIL";
  row.diagnostics = {{"tolerance", tol}, {"cases", static_cast<double>(count)}, {"failures", static_cast<double>(failures)}};
  row.seed = seed;
  return row;
}

}  // namespace

std::vector<ReportRow> identity_suite(std::uint64_t seed, const IdentityOptions& options) {
  const Space space(2, NormKind::l2());
  const auto triples = identity_triples(seed, options.triples, space);
  std::vector<ReportRow> rows;
  const auto conj = KernelFamily::conjugate_poisson();

  const auto run = [&](const std::string& name, double tol, auto&& residual) {
    std::vector<double> r(triples.size());
    parallel_for(triples.size(), [&](std::size_t i) { r[i] = residual(triples[i]); });
    double worst = 0.0;
    std::size_t failures = 0;
    for (double v : r) {
      worst = std::max(worst, v);
      if (!(v <= tol)) ++failures;
    }
    rows.push_back(check_row(name, worst, tol, triples.size(), failures, seed, failures == 0));
    return r;
  };

  run("conjugate_poisson", 1e-6, [&](const Triple& t) {
    return norm(eval(conj, t.f, t.eps, t.x) - poisson_of_hilbert(t.f, t.eps, t.x, options.corrupt_kernel));
  });
  run("decomposition", 1e-10, [](const Triple& t) { return decomposition_residual(t.f, t.eps, t.x); });
  run("hilbert_average", 1e-6, [&](const Triple& t) {
    return norm(eval(conj, t.f, t.eps, t.x) - hilbert_weighted_average(t.f, t.eps, t.x));
  });
  {
    const double mass = hilbert_average_weight_mass();
    const double gap = std::abs(mass - 1.0);
    rows.push_back(check_row("weight_mass", gap, 1e-10, 1, gap <= 1e-10 ? 0 : 1, seed, gap <= 1e-10));
  }
  {
    const ScaleGrid grid = ScaleGrid::geometric(0.25, 4.0, 9);
    const std::size_t n = std::min<std::size_t>(triples.size(), 20);
    std::vector<double> excess(n);
    parallel_for(n, [&](std::size_t i) {
      const auto b = conjugate_variation_bound(triples[i].f, grid, 2.0, triples[i].x);
      excess[i] = b.conjugate_variation - b.averaged_hilbert_variation;
    });
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t failures = 0;
    for (double e : excess) {
      worst = std::max(worst, e);
      if (!(e <= 1e-8)) ++failures;
    }
    rows.push_back(check_row("pointwise_variation", worst, 1e-8, n, failures, seed, failures == 0));
  }
  for (auto tag : {KernelTag::phi_plus, KernelTag::phi_minus, KernelTag::rho_plus, KernelTag::rho_minus}) {
    const auto h = kernel_hypothesis_check(tag);
    rows.push_back(check_row("hypothesis_" + KernelFamily{tag}.name(), h.integral, 0.0, 1, h.passes ? 0 : 1, seed,
                             h.passes));
  }
  {
    KernelProfile inverse{"inverse_x", KernelSupport::unit, [](double x) { return 1.0 / x; },
                          [](double x) { return -1.0 / (x * x); }};
    const auto h = kernel_hypothesis_check(inverse);
    rows.push_back(check_row("hypothesis_inverse_x_rejected", h.integral, 0.0, 1, h.passes ? 1 : 0, seed, !h.passes));
  }
  {
    const StepFunction zero = StepFunction::indicator(0.0, 1.0, Point::zero(space));
    double worst = 0.0;
    for (double x : {-0.5, 0.25, 3.0}) {
      worst = std::max(worst, norm(eval(conj, zero, 0.5, x) - poisson_of_hilbert(zero, 0.5, x)));
      worst = std::max(worst, decomposition_residual(zero, 0.5, x));
      worst = std::max(worst, norm(eval(conj, zero, 0.5, x) - hilbert_weighted_average(zero, 0.5, x)));
    }
    rows.push_back(check_row("zero_function", worst, 0.0, 3, worst == 0.0 ? 0 : 1, seed, worst == 0.0));
  }
  {
    // The tampered Poisson kernel must be caught on most triples.
    std::vector<double> r(triples.size());
    parallel_for(triples.size(), [&](std::size_t i) {
      const auto& t = triples[i];
      r[i] = norm(eval(conj, t.f, t.eps, t.x) - poisson_of_hilbert(t.f, t.eps, t.x, true));
    });
    std::size_t detected = 0;
    double worst = 0.0;
    for (double v : r) {
      worst = std::max(worst, v);
      if (v > 1e-6) ++detected;
    }
    const bool pass = 2 * detected > triples.size();
    rows.push_back(check_row("negative_control", worst, 1e-6, triples.size(), triples.size() - detected, seed, pass));
  }
  return rows;
}

bool all_pass(const std::vector<ReportRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.status != "FAIL"; });
}

WalshMartingale demo_martingale(const Space& space, std::size_t m, std::uint64_t seed) {
  if (space.norm().is_infinite() && m <= space.dim()) return witness_linfty(space.dim(), m);
  return random_martingale(seed, space, m, 1.0);
}

ReportRow cotype_row(const Space& space, std::size_t m, double q, std::uint64_t seed) {
  const bool witness = space.norm().is_infinite() && m <= space.dim();
  const WalshMartingale M = demo_martingale(space, m, seed);
  const CotypeRatio c = cotype_ratio(M, q);
  ReportRow row;
  row.experiment_id = "cotype/" + space.norm().label() + "/" + std::to_string(space.dim()) + "/m=" + std::to_string(m);
  row.kind = to_string(ExperimentKind::cotype);
  row.space = space.norm().label();
  row.dim = space.dim();
  row.q = q;
  row.family = witness ? "witness" : "random";
  row.estimate = c.ratio;
  row.diagnostics = {{"numerator", c.numerator}, {"denominator", c.denominator}, {"m", static_cast<double>(m)}};
  row.seed = seed;
  return row;
}

std::vector<ReportRow> transfer_rows(const ChainReport& report, std::size_t m, std::uint64_t seed) {
  std::vector<ReportRow> rows;
  const auto base = [&](const std::string& family) {
    ReportRow r;
    r.experiment_id = "transfer/m=" + std::to_string(m) + "/" + family;
    r.kind = to_string(ExperimentKind::transfer);
    r.space = report.certificate.n.empty() ? "" : report.norm_surrogate;
    r.dim = m;
    r.q = report.q;
    r.family = family;
    r.seed = seed;
    return r;
  };
  ReportRow cert = base("certificate");
  double worst = 0.0;
  for (double t : report.telescoping_sup) worst = std::max(worst, t);
  cert.estimate = worst;
  cert.status = worst <= 3.0 * report.eps + 1e-9 ? "PASS" : "FAIL";
  cert.diagnostics.push_back({"eps", report.eps});
  cert.diagnostics.push_back({"fejer_degree", static_cast<double>(report.fejer_degree)});
  const auto& c = report.certificate;
  for (std::size_t k = 0; k < c.n.size(); ++k) {
    const std::string s = std::to_string(k + 1);
    cert.diagnostics.push_back({"n_" + s, static_cast<double>(c.n[k])});
    cert.diagnostics.push_back({"l_" + s, c.l[k + 1]});
    cert.diagnostics.push_back({"decay_bound_" + s, c.decay_bound[k]});
    cert.diagnostics.push_back({"settle_bound_" + s, c.settle_bound[k]});
    cert.diagnostics.push_back({"lift_error_" + s, report.lift_error[k]});
  }
  rows.push_back(std::move(cert));
  for (const auto& link : report.links) {
    ReportRow r = base(link.name);
    r.estimate = link.ratio;
    r.status = link.finite ? "PASS" : "FAIL";
    r.diagnostics = {{"lhs", link.lhs}, {"rhs", link.rhs}, {"richardson_gap", link.richardson_gap},
                     {"resolution", static_cast<double>(report.resolution)}};
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string to_csv(const std::vector<ReportRow>& rows) {
  const auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"') out += '"';
      out += ch;
    }
    return out + "\"";
  };
  std::string out = "experiment_id,kind,space,dim,p,q,family,estimate,diagnostic,seed\n";
  for (const auto& r : rows) {
    std::string diag;
    if (!r.status.empty()) diag = "status=" + r.status;
    for (const auto& [k, v] : r.diagnostics) {
      if (!diag.empty()) diag += ';';
      diag += k + "=" + format_double(v);
    }
    out += field(r.experiment_id) + "," + field(r.kind) + "," + field(r.space) + "," + std::to_string(r.dim) + "," +
           format_double(r.p) + "," + format_double(r.q) + "," + field(r.family) + "," + format_double(r.estimate) +
           "," + field(diag) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

}  // namespace varq
