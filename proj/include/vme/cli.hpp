#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vme/serialization.hpp"

namespace vme::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

inline constexpr const char* kToolVersion = "1.0.0";

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance;
    std::optional<double> bin_width;
};

/// Loads a config file; a manifest.json written by a previous run is accepted too.
CliConfig load_config(const std::string& path);

/// Writes summary.csv, angles.csv, errors.csv, report.json and, when enabled, heatmap.csv.
void write_reports(const CliConfig& cfg, const std::vector<double>& targets, const std::vector<RunRecord>& runs,
                   const std::string& out_dir);

json report_json(const CliConfig& cfg, const std::vector<double>& targets, const std::vector<RunRecord>& runs);

int cmd_run(const std::string& config_path, const std::optional<std::string>& out_dir, const RunOverrides& ov,
            std::ostream& err);
int cmd_decompose(const std::string& matrix_path, std::ostream& out, std::ostream& err);
int cmd_report(const std::string& runs_path, const std::optional<std::string>& out_dir, const RunOverrides& ov,
               std::ostream& err);

/// Parallel run cap from VME_THREADS; 0 means hardware concurrency.
int threads_from_env();

int run_main(int argc, char** argv);

}  // namespace vme::cli
