#include "varq/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "varq/error.hpp"

namespace varq::io {

namespace {

const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::io, std::string("missing field '") + key + "'");
  return j.at(key);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, std::string("bad field '") + key + "': " + e.what());
  }
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return need(j, key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, std::string("bad field '") + key + "': " + e.what());
  }
}

std::vector<double> doubles(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::io, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(to_double(x));
  return out;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double to_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw Error(ErrorKind::io, "expected a number, got " + j.dump());
}

json to_json(const Space& space) {
  json norm;
  if (space.norm().is_infinite() || space.norm().r() == 1.0 || space.norm().r() == 2.0)
    norm = space.norm().label();
  else
    norm = {{"lr", space.norm().r()}};
  return {{"dim", space.dim()}, {"norm", norm}};
}

Space space_from_json(const json& j) {
  const auto dim = get<std::size_t>(j, "dim");
  const json& n = need(j, "norm");
  NormKind kind = NormKind::l2();
  if (n.is_string()) {
    const auto s = n.get<std::string>();
    if (s == "l1") kind = NormKind::l1();
    else if (s == "l2") kind = NormKind::l2();
    else if (s == "linf") kind = NormKind::linf();
    else if (s.size() > 1 && s[0] == 'l') kind = NormKind::lr(std::stod(s.substr(1)));
    else throw Error(ErrorKind::io, "unknown norm '" + s + "'");
  } else if (n.is_object()) {
    kind = NormKind::lr(to_double(need(n, "lr")));
  } else if (n.is_number()) {
    kind = NormKind::lr(n.get<double>());
  } else {
    throw Error(ErrorKind::io, "bad norm descriptor");
  }
  return Space(dim, kind);
}

json to_json(const StepFunction& f) {
  json values = json::array();
  for (const auto& v : f.values()) values.push_back(std::vector<double>(v.coords().begin(), v.coords().end()));
  return {{"breakpoints", f.breakpoints()}, {"values", values}};
}

StepFunction step_function_from_json(const json& j, const Space& space) {
  const auto bps = doubles(need(j, "breakpoints"));
  std::vector<Point> values;
  for (const auto& v : need(j, "values")) {
    if (v.is_number()) values.push_back(Point::scalar(space, v.get<double>()));
    else values.emplace_back(space, doubles(v));
  }
  return StepFunction(bps, std::move(values));
}

json to_json(const KernelFamily& family) {
  if (family.tag == KernelTag::doubly_truncated_hilbert) return {{"name", family.name()}, {"R", family.outer_radius}};
  return family.name();
}

KernelFamily family_from_json(const json& j) {
  if (j.is_string()) return KernelFamily::from_name(j.get<std::string>());
  if (j.is_object() && j.contains("name"))
    return KernelFamily::from_name(get<std::string>(j, "name"), get_or<double>(j, "R", 0.0));
  if (j.is_object() && j.size() == 1) {
    const auto& [name, body] = *j.items().begin();
    return KernelFamily::from_name(name, get_or<double>(body, "R", 0.0));
  }
  throw Error(ErrorKind::io, "bad family descriptor");
}

json to_json(const ScaleGrid& grid) { return grid.scales(); }

ScaleGrid scale_grid_from_json(const json& j) {
  if (j.is_array()) return ScaleGrid(doubles(j));
  const json& g = need(j, "geometric");
  return ScaleGrid::geometric(to_double(need(g, "min")), to_double(need(g, "max")), get<std::size_t>(g, "count"));
}

json to_json(const ExperimentConfig& c) {
  json functions = json::array();
  for (const auto& f : c.corpus.functions) functions.push_back(to_json(f));
  return {
      {"id", c.id},
      {"kind", to_string(c.kind)},
      {"space", to_json(c.space)},
      {"p", c.p},
      {"q", c.q},
      {"family", to_json(c.family)},
      {"scales", to_json(c.scales)},
      {"corpus",
       {{"count", c.corpus.count},
        {"max_intervals", c.corpus.max_intervals},
        {"amplitude", c.corpus.amplitude},
        {"seed", c.corpus.seed},
        {"scalar_embedded", c.corpus.scalar_embedded},
        {"functions", functions}}},
      {"optimizer",
       {{"restarts", c.optimizer.restarts},
        {"iterations", c.optimizer.iterations},
        {"step_scale", c.optimizer.step_scale},
        {"seed", c.optimizer.seed}}},
      {"spatial",
       {{"points_per_unit", c.spatial.points_per_unit},
        {"tail_multiplier", c.spatial.tail_multiplier},
        {"richardson_gate", c.spatial.richardson_gate}}},
  };
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::io, "config must be an object");
  ExperimentConfig c;
  c.id = get_or<std::string>(j, "id", c.id);
  if (j.contains("kind")) c.kind = experiment_kind_from_string(get<std::string>(j, "kind"));
  if (j.contains("space")) c.space = space_from_json(j.at("space"));
  if (j.contains("p")) c.p = to_double(j.at("p"));
  if (j.contains("q")) c.q = to_double(j.at("q"));
  if (j.contains("family")) c.family = family_from_json(j.at("family"));
  if (j.contains("scales")) c.scales = scale_grid_from_json(j.at("scales"));

  const json& corpus = need(j, "corpus");
  c.corpus.count = get_or<std::size_t>(corpus, "count", c.corpus.count);
  c.corpus.max_intervals = get_or<std::size_t>(corpus, "max_intervals", c.corpus.max_intervals);
  c.corpus.amplitude = get_or<double>(corpus, "amplitude", c.corpus.amplitude);
  c.corpus.seed = get<std::uint64_t>(corpus, "seed");
  c.corpus.scalar_embedded = get_or<bool>(corpus, "scalar_embedded", false);
  if (corpus.contains("functions"))
    for (const auto& f : corpus.at("functions")) c.corpus.functions.push_back(step_function_from_json(f, c.space));

  const json& opt = need(j, "optimizer");
  c.optimizer.restarts = get_or<std::size_t>(opt, "restarts", c.optimizer.restarts);
  c.optimizer.iterations = get_or<std::size_t>(opt, "iterations", c.optimizer.iterations);
  c.optimizer.step_scale = get_or<double>(opt, "step_scale", c.optimizer.step_scale);
  c.optimizer.seed = get<std::uint64_t>(opt, "seed");

  if (j.contains("spatial")) {
    const json& s = j.at("spatial");
    c.spatial.points_per_unit = get_or<double>(s, "points_per_unit", c.spatial.points_per_unit);
    c.spatial.tail_multiplier = get_or<double>(s, "tail_multiplier", c.spatial.tail_multiplier);
    c.spatial.richardson_gate = get_or<double>(s, "richardson_gate", c.spatial.richardson_gate);
  }
  c.validate();
  return c;
}

json to_json(const ReportRow& r) {
  json diag = json::array();
  for (const auto& [k, v] : r.diagnostics) diag.push_back({k, number(v)});
  json trace = json::array();
  for (double v : r.trace) trace.push_back(number(v));
  json out = {
      {"experiment_id", r.experiment_id},
      {"kind", r.kind},
      {"space", r.space},
      {"dim", r.dim},
      {"p", number(r.p)},
      {"q", number(r.q)},
      {"family", r.family},
      {"estimate", number(r.estimate)},
      {"status", r.status},
      {"diagnostics", diag},
      {"seed", r.seed},
      {"trace", trace},
      {"witness", nullptr},
  };
  if (r.witness) out["witness"] = {{"space", to_json(r.witness->space())}, {"function", to_json(*r.witness)}};
  return out;
}

ReportRow row_from_json(const json& j) {
  ReportRow r;
  r.experiment_id = get<std::string>(j, "experiment_id");
  r.kind = get<std::string>(j, "kind");
  r.space = get<std::string>(j, "space");
  r.dim = get<std::size_t>(j, "dim");
  r.p = to_double(need(j, "p"));
  r.q = to_double(need(j, "q"));
  r.family = get<std::string>(j, "family");
  r.estimate = to_double(need(j, "estimate"));
  r.status = get_or<std::string>(j, "status", "");
  for (const auto& d : need(j, "diagnostics")) r.diagnostics.emplace_back(d.at(0).get<std::string>(), to_double(d.at(1)));
  r.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("trace"))
    for (const auto& v : j.at("trace")) r.trace.push_back(to_double(v));
  if (j.contains("witness") && !j.at("witness").is_null()) {
    const auto& w = j.at("witness");
    r.witness = step_function_from_json(need(w, "function"), space_from_json(need(w, "space")));
  }
  return r;
}

json to_json(const WalshMartingale& M) {
  json phi = json::array();
  for (const auto& table : M.tables()) {
    json t = json::array();
    for (const auto& p : table) t.push_back(std::vector<double>(p.coords().begin(), p.coords().end()));
    phi.push_back(t);
  }
  return {{"m", M.generations()}, {"space", to_json(M.space())}, {"phi", phi}};
}

WalshMartingale martingale_from_json(const json& j) {
  const Space space = space_from_json(need(j, "space"));
  std::vector<std::vector<Point>> tables;
  for (const auto& t : need(j, "phi")) {
    std::vector<Point> table;
    for (const auto& p : t) table.emplace_back(space, doubles(p));
    tables.push_back(std::move(table));
  }
  if (j.contains("m") && get<std::size_t>(j, "m") != tables.size())
    throw Error(ErrorKind::io, "field 'm' disagrees with the number of tables");
  return WalshMartingale(space, std::move(tables));
}

SamplePath path_from_json(const json& j) {
  const Space space = space_from_json(need(j, "space"));
  std::vector<Point> values;
  for (const auto& v : need(j, "values")) {
    if (v.is_number()) values.push_back(Point::scalar(space, v.get<double>()));
    else values.emplace_back(space, doubles(v));
  }
  if (j.contains("labels")) return SamplePath(doubles(j.at("labels")), std::move(values));
  return SamplePath::indexed(std::move(values));
}

json to_json(const SelectionCertificate& c) {
  json l = json::array();
  for (double x : c.l) l.push_back(number(x));
  return {{"eps", c.eps},           {"n", c.n},
          {"l", l},                 {"decay_bound", c.decay_bound},
          {"settle_bound", c.settle_bound}, {"radius", c.radius},
          {"halvings", c.halvings}, {"doublings", c.doublings}};
}

json to_json(const ChainReport& r) {
  json links = json::array();
  for (const auto& l : r.links)
    links.push_back({{"name", l.name},
                     {"lhs", number(l.lhs)},
                     {"rhs", number(l.rhs)},
                     {"ratio", number(l.ratio)},
                     {"richardson_gap", number(l.richardson_gap)},
                     {"lhs_gap", number(l.lhs_gap)},
                     {"finite", l.finite}});
  return {
      {"q", r.q},
      {"eps", r.eps},
      {"fejer_degree", r.fejer_degree},
      {"resolution", r.resolution},
      {"twisted_resolution", r.twisted_resolution},
      {"twisted_theta_points", r.twisted_theta_points},
      {"norm_surrogate", r.norm_surrogate},
      {"certificate", to_json(r.certificate)},
      {"lift_error", r.lift_error},
      {"telescoping_sup", r.telescoping_sup},
      {"block_energy", r.block_energy},
      {"telescoped_energy", r.telescoped_energy},
      {"telescoping_residual", r.telescoping_residual},
      {"total_energy", r.total_energy},
      {"block_energy_twisted", r.block_energy_twisted},
      {"total_energy_twisted", r.total_energy_twisted},
      {"martingale_increments", r.martingale_increments},
      {"martingale_terminal", r.martingale_terminal},
      {"links", links},
      {"max_richardson_gap", r.max_richardson_gap},
  };
}

std::string structured_report(const std::vector<ReportRow>& rows, const std::optional<ExperimentConfig>& config,
                              const json& extra) {
  json rs = json::array();
  for (const auto& r : rows) rs.push_back(to_json(r));
  json out = {{"config", config ? to_json(*config) : json(nullptr)}, {"rows", rs}, {"extra", extra}};
  return out.dump(2) + "\n";
}

std::vector<ReportRow> rows_from_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, std::string("malformed report: ") + e.what());
  }
  std::vector<ReportRow> rows;
  for (const auto& r : need(j, "rows")) rows.push_back(row_from_json(r));
  return rows;
}

Format format_for_path(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0 ? Format::csv : Format::structured;
}

void emit(const std::vector<ReportRow>& rows, Format format, const std::string& path,
          const std::optional<ExperimentConfig>& config, const json& extra) {
  if (rows.empty()) throw Error(ErrorKind::domain, "nothing to emit");
  write_file(path, format == Format::csv ? to_csv(rows) : structured_report(rows, config, extra));
}

}  // namespace varq::io
