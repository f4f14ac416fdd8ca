#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vme/ansatz.hpp"
#include "vme/estimator.hpp"
#include "vme/pauli.hpp"
#include "vme/variational.hpp"

namespace vme {

enum class ModelKind { OneQubit, TwoQubit, Custom };

std::string to_string(ModelKind m);
ModelKind parse_model(const std::string& s);

/// W of the one-qubit model in the eigenbasis of H_1.
CMatrix one_qubit_w_diag();
/// W of the two-qubit model in the eigenbasis of H_2.
CMatrix two_qubit_w_diag();
PauliSum one_qubit_hamiltonian();
PauliSum two_qubit_hamiltonian();

/// A Hamiltonian and observable in the computational basis, plus the eigensystem of H.
struct Model {
    ModelKind kind = ModelKind::Custom;
    CMatrix h;
    CMatrix w;
    EigenSystem eig;
    /// W in the eigenbasis of H, rows/columns ordered by ascending energy.
    CMatrix w_diag;
};

Model one_qubit_model();
Model two_qubit_model();
Model custom_model(const CMatrix& h, const CMatrix& w);
Model make_model(ModelKind kind, const CMatrix& custom_h = {}, const CMatrix& custom_w = {});

using AnglePair = std::pair<HypersphericalAngles, HypersphericalAngles>;

/// Angles of every ordered pair (i, j) of eigenvectors of H, row-major in (i, j).
std::vector<AnglePair> eigen_angle_pairs(const Model& m);

/// Unique values of the real (or imaginary) parts of W in the eigenbasis, ascending.
std::vector<double> targets_of(const Model& m, Part part);
std::vector<double> default_targets(ModelKind model, Part part);

enum class MultiplierMethod { Exact, Iterative };

struct InitSpec {
    enum class Kind { Uniform, Ball, Fixed };
    Kind kind = Kind::Uniform;
    double lo = 0.0;
    double hi = 6.283185307179586;
    double radius = 0.15;
    /// Ball centres; empty means every ordered pair of eigenstates, cycled by run index.
    std::vector<AnglePair> centers;
    HypersphericalAngles angles_i;
    HypersphericalAngles angles_j;
};

struct RunConfig {
    ModelKind model = ModelKind::OneQubit;
    CMatrix custom_h;
    CMatrix custom_w;
    Part part = Part::Real;
    MultiplierMethod multiplier_method = MultiplierMethod::Exact;
    IterativeMethod iterative;
    int iterations = 20;
    int n_runs = 1;
    InitSpec init;
    double step_size = 0.1;
    EstimatorConfig estimator;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TracePoint {
    double f_value = 0.0;
    HypersphericalAngles angles_i;
    HypersphericalAngles angles_j;
};

enum class RunStatus { Converged, MaxIterations, Failed };
std::string to_string(RunStatus s);
RunStatus parse_run_status(const std::string& s);

struct RunRecord {
    int run_index = 0;
    std::vector<TracePoint> trace;
    double final_value = 0.0;
    std::optional<double> assigned_target;
    RunStatus status = RunStatus::MaxIterations;
    std::string failure_reason;
};

/// Problem for the configured model and part.
ProblemInstance make_problem(const RunConfig& cfg);
ProblemInstance make_problem(const Model& model, Part part);

/**
 * @brief One gradient-descent optimization.
 *
 * The reported value and angles use the sign-fixed one-qubit state; descent
 * itself runs on the raw angles.
 */
RunRecord run_single(const RunConfig& cfg, int run_index);
RunRecord run_single(const RunConfig& cfg, const Model& model, const ProblemInstance& problem, int run_index);

/// Runs cfg.n_runs independent optimizations; threads <= 0 uses the hardware concurrency.
std::vector<RunRecord> run_ensemble(const RunConfig& cfg, int threads = 0);

/// Nearest target within tolerance; a zero tolerance assigns nothing.
std::optional<double> classify_run(double final_value, const std::vector<double>& targets, double tolerance);
/// Sets assigned_target on every non-failed record.
void classify_runs(std::vector<RunRecord>& records, const std::vector<double>& targets, double tolerance);

/// Linear-interpolation percentile, pct in [0, 100].
double percentile(std::vector<double> values, double pct);

struct Band {
    std::vector<double> median;
    std::vector<double> low;
    std::vector<double> high;
};

struct GroupSummary {
    double target = 0.0;
    int count = 0;
    Band f;
    std::vector<Band> angles_i;
    std::vector<Band> angles_j;
};

struct EnsembleSummary {
    std::vector<GroupSummary> groups;
    int unassigned_count = 0;
    int failed_count = 0;
};

/// Median and [low_pct, high_pct] percentile traces of one group; throws EmptyGroup when empty.
GroupSummary group_band(const std::vector<const RunRecord*>& group, double target, double low_pct = 4.0,
                        double high_pct = 96.0);
EnsembleSummary median_band(const std::vector<RunRecord>& records, double low_pct = 4.0, double high_pct = 96.0);

struct ErrorTrace {
    double target = 0.0;
    int count = 0;
    std::vector<double> median;
    std::vector<double> p25;
    std::vector<double> p75;
};

ErrorTrace error_trace(const std::vector<RunRecord>& records, double target);
/// Error traces for every target that has at least one assigned record.
std::vector<ErrorTrace> error_traces(const std::vector<RunRecord>& records, const std::vector<double>& targets);

struct Heatmap {
    double lo = 0.0;
    double bin_width = 0.2;
    int n_bins = 0;
    std::vector<std::vector<int>> counts;  ///< [iteration][bin]
    std::vector<int> dropped;              ///< per iteration, outside range or missing
    double bin_lo(int b) const { return lo + b * bin_width; }
};

/// n_points <= 0 infers the trace length from the records.
Heatmap heatmap(const std::vector<RunRecord>& records, double bin_width, double lo, double hi, int n_points = 0);

}  // namespace vme
