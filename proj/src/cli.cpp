#include "vme/cli.hpp"

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vme/errors.hpp"

namespace vme::cli {

namespace fs = std::filesystem;

namespace {

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << body;
    if (!out) throw IoError("write failed for " + path.string());
}

template <class Writer>
void write_csv(const fs::path& path, Writer w) {
    std::ostringstream os;
    w(os);
    write_file(path, os.str());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void apply(CliConfig& cfg, const RunOverrides& ov) {
    if (ov.seed) cfg.run.seed = *ov.seed;
    if (ov.tolerance) {
        if (*ov.tolerance < 0.0) throw ConfigError("--tolerance must be >= 0");
        cfg.report.tolerance = *ov.tolerance;
    }
    if (ov.bin_width) {
        if (!(*ov.bin_width > 0.0)) throw ConfigError("--bin-width must be > 0");
        cfg.report.bin_width = *ov.bin_width;
    }
}

/// Runs exit code mapping around a command body.
template <class Body>
int guarded(std::ostream& err, Body body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NonHermitianInput& e) {
        err << "non-Hermitian input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DimensionMismatch& e) {
        err << "dimension error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const UnsupportedDimension& e) {
        err << "unsupported dimension: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace

CliConfig load_config(const std::string& path) {
    json doc = read_json(path);
    if (doc.is_object() && doc.contains("tool") && doc.contains("config")) return cli_config_from_json(doc.at("config"));
    return cli_config_from_json(doc);
}

json report_json(const CliConfig& cfg, const std::vector<double>& targets, const std::vector<RunRecord>& runs) {
    const EnsembleSummary s = median_band(runs);
    json groups = json::array();
    for (const auto& g : s.groups) groups.push_back(json{{"target", g.target}, {"count", g.count}});
    json j{{"n_runs", runs.size()},
           {"tolerance", cfg.report.tolerance},
           {"targets", targets},
           {"groups", groups},
           {"unassigned", s.unassigned_count},
           {"failed", s.failed_count}};
    if (cfg.report.heatmap) {
        const Heatmap h = heatmap(runs, cfg.report.bin_width, cfg.report.range_lo, cfg.report.range_hi,
                                  cfg.run.iterations + 1);
        const auto& last = h.counts.back();
        json off = json::array();
        int off_mass = 0;
        for (int b = 0; b < h.n_bins; ++b) {
            if (last[b] == 0) continue;
            const double lo = h.bin_lo(b), hi = h.bin_lo(b + 1);
            bool matches = false;
            for (double t : targets) matches = matches || (t >= lo && t < hi);
            if (!matches) {
                off.push_back(json{{"bin_lo", lo}, {"bin_hi", hi}, {"count", last[b]}});
                off_mass += last[b];
            }
        }
        j["heatmap"] = json{{"bin_width", h.bin_width},
                            {"dropped_final", h.dropped.back()},
                            {"off_target_count", off_mass},
                            {"off_target_bins", off}};
    }
    return j;
}

void write_reports(const CliConfig& cfg, const std::vector<double>& targets, const std::vector<RunRecord>& runs,
                   const std::string& out_dir) {
    const fs::path dir(out_dir);
    ensure_dir(dir);
    const EnsembleSummary s = median_band(runs);
    write_csv(dir / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, s); });
    write_csv(dir / "angles.csv", [&](std::ostream& os) { write_angles_csv(os, s); });
    write_csv(dir / "errors.csv", [&](std::ostream& os) { write_errors_csv(os, error_traces(runs, targets)); });
    if (cfg.report.heatmap) {
        const Heatmap h = heatmap(runs, cfg.report.bin_width, cfg.report.range_lo, cfg.report.range_hi,
                                  cfg.run.iterations + 1);
        write_csv(dir / "heatmap.csv", [&](std::ostream& os) { write_heatmap_csv(os, h); });
    }
    write_file(dir / "report.json", report_json(cfg, targets, runs).dump(2) + "\n");
}

int threads_from_env() {
    const char* v = std::getenv("VME_THREADS");
    if (v == nullptr || *v == '\0') return 0;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 0) throw ConfigError(std::string("VME_THREADS must be a non-negative integer, got '") + v + "'");
    return static_cast<int>(n);
}

int cmd_run(const std::string& config_path, const std::optional<std::string>& out_dir, const RunOverrides& ov,
            std::ostream& err) {
    return guarded(err, [&] {
        CliConfig cfg = load_config(config_path);
        apply(cfg, ov);
        const std::string dir = out_dir ? *out_dir : cfg.out_dir.value_or("out");
        cfg.out_dir.reset();
        const int threads = threads_from_env();

        const Model model = make_model(cfg.run.model, cfg.run.custom_h, cfg.run.custom_w);
        make_problem(model, cfg.run.part);
        if (cfg.run.init.kind == InitSpec::Kind::Fixed && cfg.run.init.angles_i.values.size() != model.h.rows() - 1)
            throw ConfigError("fixed init needs " + std::to_string(model.h.rows() - 1) + " angles per state");
        const std::vector<double> targets = cfg.report.targets ? *cfg.report.targets : targets_of(model, cfg.run.part);
        std::vector<RunRecord> runs = run_ensemble(cfg.run, threads);
        classify_runs(runs, targets, cfg.report.tolerance);

        ensure_dir(dir);
        write_file(fs::path(dir) / "runs.json", runs_document(cfg, targets, runs).dump(1) + "\n");
        write_reports(cfg, targets, runs, dir);
        std::vector<std::string> files{"runs.json", "summary.csv", "angles.csv", "errors.csv", "report.json"};
        if (cfg.report.heatmap) files.push_back("heatmap.csv");
        const json manifest{{"tool", "vme"},
                            {"version", kToolVersion},
                            {"created_utc", utc_timestamp()},
                            {"seed", cfg.run.seed},
                            {"config", cli_config_to_json(cfg)},
                            {"files", files}};
        write_file(fs::path(dir) / "manifest.json", manifest.dump(2) + "\n");

        int failed = 0;
        for (const auto& r : runs) failed += r.status == RunStatus::Failed;
        err << "vme run: " << runs.size() << " runs, " << failed << " failed, outputs in " << dir << '\n';
        return kExitOk;
    });
}

int cmd_decompose(const std::string& matrix_path, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const CMatrix m = dense_from_json(read_json(matrix_path));
        require_hermitian(m);
        const auto split = hermitian_split(m);
        const json j{{"dim", m.rows()},
                     {"pauli", pauli_sum_to_json(decompose_hermitian(m))},
                     {"w_real", dense_to_json(split.w_real)},
                     {"w_imag", dense_to_json(split.w_imag)}};
        out << j.dump(2) << '\n';
        return kExitOk;
    });
}

int cmd_report(const std::string& runs_path, const std::optional<std::string>& out_dir, const RunOverrides& ov,
               std::ostream& err) {
    return guarded(err, [&] {
        RunsDocument doc = runs_from_json(read_json(runs_path));
        if (ov.seed) throw ConfigError("--seed does not apply to report");
        apply(doc.config, ov);
        classify_runs(doc.runs, doc.targets, doc.config.report.tolerance);
        const std::string dir = out_dir ? *out_dir : fs::path(runs_path).parent_path().string();
        write_reports(doc.config, doc.targets, doc.runs, dir.empty() ? "." : dir);
        return kExitOk;
    });
}

int run_main(int argc, char** argv) {
    CLI::App app{"Variational matrix-element estimation"};
    app.require_subcommand(1);

    std::string config_path, matrix_path, runs_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance, bin_width;

    auto* run = app.add_subcommand("run", "Run an optimization ensemble from a JSON config");
    run->add_option("--config", config_path, "Config or manifest JSON")->required();
    run->add_option("--out", out, "Output directory");
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--tolerance", tolerance, "Override report.tolerance");
    run->add_option("--bin-width", bin_width, "Override report.bin_width");

    auto* dec = app.add_subcommand("decompose", "Pauli decomposition and Hermitian split of a dense matrix");
    dec->add_option("--config,matrix", matrix_path, "Dense matrix JSON")->required();

    auto* rep = app.add_subcommand("report", "Recompute summaries from runs.json");
    rep->add_option("--config,runs", runs_path, "runs.json path")->required();
    rep->add_option("--out", out, "Output directory (defaults to the runs.json directory)");
    rep->add_option("--tolerance", tolerance, "Classification tolerance");
    rep->add_option("--bin-width", bin_width, "Heatmap bin width");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    const RunOverrides ov{seed, tolerance, bin_width};
    if (*run) return cmd_run(config_path, out, ov, std::cerr);
    if (*dec) return cmd_decompose(matrix_path, std::cout, std::cerr);
    return cmd_report(runs_path, out, ov, std::cerr);
}

}  // namespace vme::cli
