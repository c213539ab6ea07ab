#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "varq/harness.hpp"
#include "varq/martingale.hpp"
#include "varq/operators.hpp"
#include "varq/spaces.hpp"
#include "varq/transference.hpp"
#include "varq/variation.hpp"

namespace varq::io {

using json = nlohmann::json;

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Non-finite doubles are written as the strings "inf", "-inf", "nan".
json number(double x);
double to_double(const json& j);

json to_json(const Space& space);
Space space_from_json(const json& j);  // {"dim": n, "norm": "l2" | "linf" | {"lr": r}}

json to_json(const StepFunction& f);   // {"breakpoints": [...], "values": [[...], ...]}
StepFunction step_function_from_json(const json& j, const Space& space);

json to_json(const KernelFamily& family);
KernelFamily family_from_json(const json& j);  // "poisson" or {"name": "doubly_truncated_hilbert", "R": 3}

json to_json(const ScaleGrid& grid);  // explicit list
ScaleGrid scale_grid_from_json(const json& j);  // list or {"geometric": {"min", "max", "count"}}

json to_json(const ExperimentConfig& config);
/// Seeds of the corpus and optimizer sections are mandatory.
ExperimentConfig config_from_json(const json& j);

json to_json(const ReportRow& row);
ReportRow row_from_json(const json& j);

json to_json(const WalshMartingale& M);
WalshMartingale martingale_from_json(const json& j);  // {"space": ..., "phi": [[[...], ...], ...]}

/// {"space": ..., "labels": [...] (optional), "values": [[...], ...]}
SamplePath path_from_json(const json& j);

json to_json(const SelectionCertificate& cert);
json to_json(const ChainReport& report);

/// {"config": ..., "rows": [...], "extra": ...}; byte-deterministic.
std::string structured_report(const std::vector<ReportRow>& rows, const std::optional<ExperimentConfig>& config = {},
                              const json& extra = nullptr);
std::vector<ReportRow> rows_from_report(const std::string& text);

enum class Format { csv, structured };

/// Format from the file extension: ".csv" gives CSV, anything else structured.
Format format_for_path(const std::string& path);

void emit(const std::vector<ReportRow>& rows, Format format, const std::string& path,
          const std::optional<ExperimentConfig>& config = {}, const json& extra = nullptr);

}  // namespace varq::io
