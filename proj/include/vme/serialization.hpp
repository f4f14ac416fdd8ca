#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vme/estimator.hpp"
#include "vme/experiments.hpp"
#include "vme/pauli.hpp"

namespace vme {

using json = nlohmann::json;

/// {"dim": n, "re": [[...]], "im": [[...]]}
json dense_to_json(const CMatrix& m);
/// Throws ConfigError on a malformed document; no Hermiticity check.
CMatrix dense_from_json(const json& j);

/// [{"coeff_re", "coeff_im", "axes"}, ...]
json pauli_sum_to_json(const PauliSum& p);
PauliSum pauli_sum_from_json(const json& j);

json angles_to_json(const HypersphericalAngles& a);
HypersphericalAngles angles_from_json(const json& j);

json estimator_config_to_json(const EstimatorConfig& c);
EstimatorConfig estimator_config_from_json(const json& j);

/// {"h": [[...]], "w": [[...]], "config": {...}}
json cache_to_json(const OverlapCache& c);

struct ReportOptions {
    double tolerance = 0.5;
    double bin_width = 0.2;
    bool heatmap = false;
    double range_lo = -40.1;
    double range_hi = 40.1;
    /// Overrides the model's targets when set.
    std::optional<std::vector<double>> targets;
};

/// Seed used when a config does not name one.
inline constexpr std::uint64_t kDefaultSeed = 20240607;

struct CliConfig {
    RunConfig run;
    ReportOptions report;
    std::optional<std::string> out_dir;
};

/// Strict parse: unknown keys and wrong types raise ConfigError.
CliConfig cli_config_from_json(const json& j);
json cli_config_to_json(const CliConfig& c);

json run_record_to_json(const RunRecord& r);
RunRecord run_record_from_json(const json& j);

/// Whole runs.json document.
json runs_document(const CliConfig& cfg, const std::vector<double>& targets, const std::vector<RunRecord>& runs);

struct RunsDocument {
    CliConfig config;
    std::vector<double> targets;
    std::vector<RunRecord> runs;
};
RunsDocument runs_from_json(const json& j);

void write_summary_csv(std::ostream& os, const EnsembleSummary& s);
void write_angles_csv(std::ostream& os, const EnsembleSummary& s);
void write_errors_csv(std::ostream& os, const std::vector<ErrorTrace>& e);
void write_heatmap_csv(std::ostream& os, const Heatmap& h);

}  // namespace vme
