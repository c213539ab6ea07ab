#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "varq/error.hpp"
#include "varq/harness.hpp"
#include "varq/io.hpp"
#include "varq/transference.hpp"
#include "varq/variation.hpp"

using namespace varq;

namespace {

constexpr int kValidation = 1;
constexpr int kCheckFailed = 2;

void print_rows(const std::vector<ReportRow>& rows, const std::string& out,
                const std::optional<ExperimentConfig>& config = {}, const io::json& extra = nullptr) {
  if (out.empty())
    std::cout << to_csv(rows);
  else
    io::emit(rows, io::format_for_path(out), out, config, extra);
}

std::string plot_path(const std::string& out) {
  const auto dot = out.find_last_of('.');
  const auto slash = out.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + ".tsv";
  return out.substr(0, dot) + ".tsv";
}

Space parse_space(const std::string& norm, std::size_t dim) {
  return io::space_from_json({{"dim", dim}, {"norm", norm}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"q-variation experiments for operator families and dyadic martingales"};
  app.require_subcommand(1);

  std::string path, config_path, out, axis_text, plot, space_name = "linf";
  double q = 3.0, eps = 0.1;
  std::uint64_t seed = 0;
  std::size_t dim = 4, m = 2, triples = 100, resolution = 0, twisted = 0;
  int fejer = 31;
  bool corrupt = false;

  auto* variation = app.add_subcommand("variation", "q-variation of a sample path file");
  variation->add_option("--path", path, "JSON file {space, labels?, values}")->required();
  variation->add_option("--q", q, "exponent q >= 1")->required();

  auto* estimate = app.add_subcommand("estimate", "best-constant estimate by adversarial search");
  estimate->add_option("--config", config_path)->required();
  estimate->add_option("--out", out, "report file (.csv or .json)");

  auto* sweep_cmd = app.add_subcommand("sweep", "repeat the estimate along one axis");
  sweep_cmd->add_option("--config", config_path)->required();
  sweep_cmd->add_option("--axis", axis_text, "q=..., dim=... or refinement=...")->required();
  sweep_cmd->add_option("--out", out)->required();
  sweep_cmd->add_option("--plot", plot, "TSV plot data (default: --out with .tsv)");

  auto* identities = app.add_subcommand("identities", "analytic identity suite");
  identities->add_option("--seed", seed);
  identities->add_option("--triples", triples);
  identities->add_flag("--corrupt", corrupt, "use the tampered Poisson kernel");
  identities->add_option("--out", out);

  auto* cotype = app.add_subcommand("cotype", "martingale cotype ratio");
  cotype->add_option("--space", space_name, "l1, l2, linf or l<r>");
  cotype->add_option("--dim", dim);
  cotype->add_option("--m", m)->required();
  cotype->add_option("--q", q)->required();
  cotype->add_option("--seed", seed);
  cotype->add_option("--out", out);

  auto* transfer = app.add_subcommand("transfer", "martingale to trigonometric transference chain");
  transfer->add_option("--m", m)->required();
  transfer->add_option("--eps", eps)->required();
  transfer->add_option("--fejer", fejer)->required();
  transfer->add_option("--q", q);
  transfer->add_option("--space", space_name);
  transfer->add_option("--dim", dim);
  transfer->add_option("--seed", seed);
  transfer->add_option("--resolution", resolution, "torus grid per axis (0: automatic)");
  transfer->add_option("--twisted-resolution", twisted);
  transfer->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }

  try {
    if (*variation) {
      const SamplePath sp = io::path_from_json(io::json::parse(io::read_file(path)));
      const VariationResult r = vq_dp(sp, q);
      io::json j = {{"q", q}, {"value", r.value}, {"chain", r.chain}};
      std::cout << j.dump(2) << "\n";
    } else if (*estimate) {
      const ExperimentConfig config = io::config_from_json(io::json::parse(io::read_file(config_path)));
      const ReportRow row = estimate_constant(config);
      print_rows({row}, out, config);
      std::fprintf(stderr, "estimate %.12g (lower bound)\n", row.estimate);
    } else if (*sweep_cmd) {
      const ExperimentConfig config = io::config_from_json(io::json::parse(io::read_file(config_path)));
      const SweepResult r = sweep(config, SweepAxis::parse(axis_text));
      print_rows(r.rows, out, config);
      io::write_file(plot.empty() ? plot_path(out) : plot, plot_tsv(r));
    } else if (*identities) {
      const auto rows = identity_suite(seed, {triples, corrupt});
      print_rows(rows, out);
      for (const auto& r : rows) std::fprintf(stderr, "%-30s %s\n", r.experiment_id.c_str(), r.status.c_str());
      if (!all_pass(rows)) return kCheckFailed;
    } else if (*cotype) {
      print_rows({cotype_row(parse_space(space_name, dim), m, q, seed)}, out);
    } else if (*transfer) {
      const WalshMartingale M = demo_martingale(parse_space(space_name, dim), m, seed);
      const ChainReport report = cotype_chain_report(M, q, eps, fejer, resolution, twisted, seed);
      const auto rows = transfer_rows(report, m, seed);
      print_rows(rows, out, std::nullopt, io::to_json(report));
      for (const auto& l : report.links)
        std::fprintf(stderr, "%-20s lhs %.6g rhs %.6g ratio %.6g gap %.3g\n", l.name.c_str(), l.lhs, l.rhs, l.ratio,
                     l.richardson_gap);
    }
  } catch (const ResolutionError& e) {
    std::fprintf(stderr, "%s (coarse %.12g, fine %.12g)\n", e.what(), e.coarse(), e.fine());
    return e.exit_code();
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kValidation;
  }
  return 0;
}
