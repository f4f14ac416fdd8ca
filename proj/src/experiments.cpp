#include "vme/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <random>
#include <thread>

#include "vme/errors.hpp"

namespace vme {

std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::OneQubit: return "one_qubit";
        case ModelKind::TwoQubit: return "two_qubit";
        case ModelKind::Custom: return "custom";
    }
    return "?";
}

ModelKind parse_model(const std::string& s) {
    if (s == "one_qubit") return ModelKind::OneQubit;
    if (s == "two_qubit") return ModelKind::TwoQubit;
    if (s == "custom") return ModelKind::Custom;
    throw InvalidArgument("unknown model '" + s + "'");
}

std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Converged: return "converged";
        case RunStatus::MaxIterations: return "max_iterations";
        case RunStatus::Failed: return "failed";
    }
    return "?";
}

RunStatus parse_run_status(const std::string& s) {
    if (s == "converged") return RunStatus::Converged;
    if (s == "max_iterations") return RunStatus::MaxIterations;
    if (s == "failed") return RunStatus::Failed;
    throw InvalidArgument("unknown run status '" + s + "'");
}

CMatrix one_qubit_w_diag() {
    CMatrix w(2, 2);
    w << cplx(5, 0), cplx(2, -2), cplx(2, 2), cplx(3, 0);
    return w;
}

CMatrix two_qubit_w_diag() {
    CMatrix w(4, 4);
    w << cplx(1, 0), cplx(3, 1), cplx(5, -3), cplx(13, 8),  //
        cplx(3, -1), cplx(4, 0), cplx(20, 5), cplx(25, 10),  //
        cplx(5, 3), cplx(20, -5), cplx(7, 0), cplx(6, -15),  //
        cplx(13, -8), cplx(25, -10), cplx(6, 15), cplx(10, 0);
    return w;
}

PauliSum one_qubit_hamiltonian() {
    PauliSum h(1);
    h.add(1.0, "X");
    return h;
}

PauliSum two_qubit_hamiltonian() {
    PauliSum h(2);
    h.add(2.0, "XI");
    h.add(1.0, "IX");
    h.add(2.0, "ZX");
    return h;
}

Model custom_model(const CMatrix& h, const CMatrix& w) {
    require_hermitian(h);
    require_hermitian(w);
    if (h.rows() != w.rows()) throw DimensionMismatch("H and W dimensions differ");
    Model m;
    m.kind = ModelKind::Custom;
    m.h = h;
    m.w = w;
    m.eig = eig_hermitian(h);
    m.w_diag = m.eig.vectors.adjoint() * w * m.eig.vectors;
    return m;
}

Model one_qubit_model() {
    const CMatrix hd = hadamard();
    Model m = custom_model(to_dense(one_qubit_hamiltonian()), conjugate_to_computational(one_qubit_w_diag(), hd));
    m.kind = ModelKind::OneQubit;
    return m;
}

Model two_qubit_model() {
    const CMatrix h = to_dense(two_qubit_hamiltonian());
    const EigenSystem es = eig_hermitian(h);
    Model m = custom_model(h, conjugate_to_computational(two_qubit_w_diag(), es.vectors));
    m.kind = ModelKind::TwoQubit;
    return m;
}

Model make_model(ModelKind kind, const CMatrix& custom_h, const CMatrix& custom_w) {
    switch (kind) {
        case ModelKind::OneQubit: return one_qubit_model();
        case ModelKind::TwoQubit: return two_qubit_model();
        case ModelKind::Custom: return custom_model(custom_h, custom_w);
    }
    throw InvalidArgument("unknown model");
}

std::vector<AnglePair> eigen_angle_pairs(const Model& m) {
    const Eigen::MatrixXd u = m.eig.vectors.real();
    std::vector<AnglePair> out;
    for (Eigen::Index i = 0; i < u.cols(); ++i)
        for (Eigen::Index j = 0; j < u.cols(); ++j)
            out.emplace_back(angles_from_amplitudes(u.col(i)), angles_from_amplitudes(u.col(j)));
    return out;
}

std::vector<double> targets_of(const Model& m, Part part) {
    std::vector<double> vals;
    for (Eigen::Index r = 0; r < m.w_diag.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.w_diag.cols(); ++c) {
            const double v = part == Part::Real ? m.w_diag(r, c).real() : m.w_diag(r, c).imag();
            const double rounded = std::round(v * 1e9) / 1e9;
            vals.push_back(rounded == 0.0 ? 0.0 : rounded);
        }
    }
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    return vals;
}

std::vector<double> default_targets(ModelKind model, Part part) {
    if (model == ModelKind::Custom) throw InvalidArgument("custom models have no default targets");
    return targets_of(make_model(model), part);
}

void RunConfig::validate() const {
    if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
    if (n_runs < 1) throw InvalidArgument("n_runs must be >= 1");
    if (!(step_size >= 0.0) || !std::isfinite(step_size)) throw InvalidArgument("step_size must be finite and >= 0");
    if (init.kind == InitSpec::Kind::Ball && !(init.radius > 0.0)) throw InvalidArgument("ball radius must be > 0");
    if (init.kind == InitSpec::Kind::Uniform && !(init.hi > init.lo)) throw InvalidArgument("uniform init needs hi > lo");
    estimator.validate();
    if (model == ModelKind::Custom) {
        const auto d = custom_h.rows();
        if (d != 2 && d != 4) throw UnsupportedDimension("custom models need dimension 2 or 4, got " + std::to_string(d));
        if (custom_h.cols() != d || custom_w.rows() != d || custom_w.cols() != d)
            throw DimensionMismatch("custom hamiltonian and observable must be square and of equal size");
    }
    if (init.kind == InitSpec::Kind::Fixed && init.angles_i.values.size() != init.angles_j.values.size())
        throw DimensionMismatch("fixed init angle vectors differ in length");
}

ProblemInstance make_problem(const Model& model, Part part) {
    const HermitianSplit s = hermitian_split(model.w);
    return ProblemInstance(model.h, part == Part::Real ? s.w_real : s.w_imag, part);
}

ProblemInstance make_problem(const RunConfig& cfg) {
    return make_problem(make_model(cfg.model, cfg.custom_h, cfg.custom_w), cfg.part);
}

namespace {

constexpr std::uint64_t kCacheStream = 0xCAC4E;
constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kKickStream = 0x6B1C6;
constexpr int kMaxKicks = 5;
constexpr double kKick = 1e-3;
constexpr double kConvergedDelta = 1e-6;

AnglePair initial_angles(const RunConfig& cfg, const Model& model, int run_index) {
    const int n_angles = static_cast<int>(model.h.rows()) - 1;
    SplitMix64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(run_index), kInitStream));
    const InitSpec& init = cfg.init;
    switch (init.kind) {
        case InitSpec::Kind::Fixed: {
            if (init.angles_i.values.size() != n_angles || init.angles_j.values.size() != n_angles)
                throw DimensionMismatch("fixed initial angles have the wrong length");
            return {init.angles_i, init.angles_j};
        }
        case InitSpec::Kind::Uniform: {
            std::uniform_real_distribution<double> u(init.lo, init.hi);
            AnglePair p{HypersphericalAngles(Eigen::VectorXd(n_angles)), HypersphericalAngles(Eigen::VectorXd(n_angles))};
            for (int k = 0; k < n_angles; ++k) p.first.values[k] = u(rng);
            for (int k = 0; k < n_angles; ++k) p.second.values[k] = u(rng);
            return p;
        }
        case InitSpec::Kind::Ball: {
            const std::vector<AnglePair> centers = init.centers.empty() ? eigen_angle_pairs(model) : init.centers;
            AnglePair p = centers[static_cast<std::size_t>(run_index) % centers.size()];
            if (p.first.values.size() != n_angles || p.second.values.size() != n_angles)
                throw DimensionMismatch("ball centre has the wrong length");
            std::uniform_real_distribution<double> u(-init.radius, init.radius);
            for (int k = 0; k < n_angles; ++k) p.first.values[k] += u(rng);
            for (int k = 0; k < n_angles; ++k) p.second.values[k] += u(rng);
            return p;
        }
    }
    throw InvalidArgument("unknown init kind");
}

MultiplierSet multipliers_for(const RunConfig& cfg, const ProblemInstance& problem, const OverlapCache& cache,
                              const Eigen::VectorXd& phi_i, const Eigen::VectorXd& phi_j) {
    if (cfg.multiplier_method == MultiplierMethod::Exact) return exact_multipliers(problem, phi_i, phi_j);
    return iterative_multipliers(cache, phi_i, phi_j, cfg.iterative);
}

double evaluate(const RunConfig& cfg, const ProblemInstance& problem, const OverlapCache& cache,
                const HypersphericalAngles& ai, const HypersphericalAngles& aj) {
    const Eigen::VectorXd phi_i = amplitudes(ai), phi_j = amplitudes(aj);
    const MultiplierSet ls = multipliers_for(cfg, problem, cache, phi_i, phi_j);
    const double e_i = expectation_from_cache(cache, phi_i, phi_i, Operator::H);
    const double e_j = expectation_from_cache(cache, phi_j, phi_j, Operator::H);
    return functional_value(cache, problem.lambda(), phi_i, phi_j, ls, e_i, e_j);
}

}  // namespace

RunRecord run_single(const RunConfig& cfg, const Model& model, const ProblemInstance& problem, int run_index) {
    RunRecord rec;
    rec.run_index = run_index;
    try {
        EstimatorConfig est = cfg.estimator;
        est.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(run_index), kCacheStream);
        const OverlapCache cache = build_cache(problem.h_dense(), problem.w_part(), problem.part(), est);

        auto [raw_i, raw_j] = initial_angles(cfg, model, run_index);
        raw_i = wrap(raw_i);
        raw_j = wrap(raw_j);
        const RemapMode remap = problem.dim() == 2 ? RemapMode::RealPart : RemapMode::None;
        SplitMix64 kick_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(run_index), kKickStream));
        std::uniform_real_distribution<double> kick(-kKick, kKick);

        for (int it = 0; it <= cfg.iterations; ++it) {
            for (int attempt = 0;; ++attempt) {
                try {
                    const HypersphericalAngles rep_i = remap_principal(raw_i, remap);
                    const HypersphericalAngles rep_j = remap_principal(raw_j, remap);
                    const double f = evaluate(cfg, problem, cache, rep_i, rep_j);
                    if (it < cfg.iterations) {
                        const Eigen::VectorXd phi_i = amplitudes(raw_i), phi_j = amplitudes(raw_j);
                        const MultiplierSet ls = multipliers_for(cfg, problem, cache, phi_i, phi_j);
                        const Eigen::VectorXd g = functional_gradient(problem, raw_i, raw_j, ls, cache);
                        const Eigen::Index m = raw_i.values.size();
                        raw_i = wrap(HypersphericalAngles(raw_i.values - cfg.step_size * g.head(m)));
                        raw_j = wrap(HypersphericalAngles(raw_j.values - cfg.step_size * g.tail(m)));
                    }
                    rec.trace.push_back(TracePoint{f, rep_i, rep_j});
                    break;
                } catch (const NearZeroEnergy&) {
                    if (attempt >= kMaxKicks) throw;
                } catch (const SingularSystem&) {
                    if (attempt >= kMaxKicks) throw;
                }
                for (auto& x : raw_i.values) x += kick(kick_rng);
                for (auto& x : raw_j.values) x += kick(kick_rng);
            }
        }
        rec.final_value = rec.trace.back().f_value;
        const double delta = std::abs(rec.trace.back().f_value - rec.trace[rec.trace.size() - 2].f_value);
        rec.status = delta <= kConvergedDelta ? RunStatus::Converged : RunStatus::MaxIterations;
    } catch (const Error& e) {
        rec.status = RunStatus::Failed;
        rec.failure_reason = e.what();
        rec.final_value = rec.trace.empty() ? std::nan("") : rec.trace.back().f_value;
    }
    return rec;
}

RunRecord run_single(const RunConfig& cfg, int run_index) {
    cfg.validate();
    const Model model = make_model(cfg.model, cfg.custom_h, cfg.custom_w);
    return run_single(cfg, model, make_problem(model, cfg.part), run_index);
}

std::vector<RunRecord> run_ensemble(const RunConfig& cfg, int threads) {
    cfg.validate();
    const Model model = make_model(cfg.model, cfg.custom_h, cfg.custom_w);
    const ProblemInstance problem = make_problem(model, cfg.part);
    std::vector<RunRecord> out(static_cast<std::size_t>(cfg.n_runs));
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, cfg.n_runs);

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int k = next++; k < cfg.n_runs; k = next++) out[static_cast<std::size_t>(k)] = run_single(cfg, model, problem, k);
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

std::optional<double> classify_run(double final_value, const std::vector<double>& targets, double tolerance) {
    if (targets.empty()) throw InvalidArgument("classify_run needs at least one target");
    if (tolerance < 0.0) throw InvalidArgument("tolerance must be >= 0");
    if (tolerance == 0.0 || !std::isfinite(final_value)) return std::nullopt;
    auto best = std::min_element(targets.begin(), targets.end(), [&](double a, double b) {
        return std::abs(a - final_value) < std::abs(b - final_value);
    });
    if (std::abs(*best - final_value) <= tolerance) return *best;
    return std::nullopt;
}

void classify_runs(std::vector<RunRecord>& records, const std::vector<double>& targets, double tolerance) {
    for (auto& r : records)
        r.assigned_target = r.status == RunStatus::Failed ? std::nullopt : classify_run(r.final_value, targets, tolerance);
}

double percentile(std::vector<double> values, double pct) {
    if (values.empty()) throw EmptyGroup("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

template <class Getter>
Band band_of(const std::vector<const RunRecord*>& group, std::size_t n_points, Getter get, double lo_pct, double hi_pct) {
    Band b;
    std::vector<double> col(group.size());
    for (std::size_t t = 0; t < n_points; ++t) {
        for (std::size_t k = 0; k < group.size(); ++k) col[k] = get(group[k]->trace[t]);
        b.median.push_back(percentile(col, 50.0));
        b.low.push_back(percentile(col, lo_pct));
        b.high.push_back(percentile(col, hi_pct));
    }
    return b;
}

std::size_t common_length(const std::vector<const RunRecord*>& group) {
    std::size_t n = group.front()->trace.size();
    for (const auto* r : group) n = std::min(n, r->trace.size());
    return n;
}

}  // namespace

GroupSummary group_band(const std::vector<const RunRecord*>& group, double target, double low_pct, double high_pct) {
    if (group.empty()) throw EmptyGroup("no runs in group " + std::to_string(target));
    GroupSummary g;
    g.target = target;
    g.count = static_cast<int>(group.size());
    const std::size_t n = common_length(group);
    g.f = band_of(group, n, [](const TracePoint& p) { return p.f_value; }, low_pct, high_pct);
    const Eigen::Index m = group.front()->trace.front().angles_i.values.size();
    for (Eigen::Index a = 0; a < m; ++a) {
        g.angles_i.push_back(band_of(group, n, [a](const TracePoint& p) { return p.angles_i.values[a]; }, low_pct, high_pct));
        g.angles_j.push_back(band_of(group, n, [a](const TracePoint& p) { return p.angles_j.values[a]; }, low_pct, high_pct));
    }
    return g;
}

EnsembleSummary median_band(const std::vector<RunRecord>& records, double low_pct, double high_pct) {
    EnsembleSummary s;
    std::map<double, std::vector<const RunRecord*>> groups;
    for (const auto& r : records) {
        if (r.status == RunStatus::Failed) ++s.failed_count;
        if (r.assigned_target)
            groups[*r.assigned_target].push_back(&r);
        else
            ++s.unassigned_count;
    }
    for (const auto& [target, members] : groups) s.groups.push_back(group_band(members, target, low_pct, high_pct));
    return s;
}

ErrorTrace error_trace(const std::vector<RunRecord>& records, double target) {
    std::vector<const RunRecord*> group;
    for (const auto& r : records)
        if (r.assigned_target && *r.assigned_target == target) group.push_back(&r);
    if (group.empty()) throw EmptyGroup("no runs assigned to " + std::to_string(target));
    ErrorTrace e;
    e.target = target;
    e.count = static_cast<int>(group.size());
    const std::size_t n = common_length(group);
    std::vector<double> col(group.size());
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t k = 0; k < group.size(); ++k)
            col[k] = std::max(std::abs(group[k]->trace[t].f_value - target), 1e-16);
        e.median.push_back(percentile(col, 50.0));
        e.p25.push_back(percentile(col, 25.0));
        e.p75.push_back(percentile(col, 75.0));
    }
    return e;
}

std::vector<ErrorTrace> error_traces(const std::vector<RunRecord>& records, const std::vector<double>& targets) {
    std::vector<ErrorTrace> out;
    for (double t : targets) {
        const bool any = std::any_of(records.begin(), records.end(),
                                     [t](const RunRecord& r) { return r.assigned_target && *r.assigned_target == t; });
        if (any) out.push_back(error_trace(records, t));
    }
    return out;
}

Heatmap heatmap(const std::vector<RunRecord>& records, double bin_width, double lo, double hi, int n_points) {
    if (!(bin_width > 0.0)) throw InvalidArgument("bin_width must be > 0");
    if (!(hi > lo)) throw InvalidArgument("heatmap range needs hi > lo");
    if (n_points <= 0) {
        n_points = 0;
        for (const auto& r : records) n_points = std::max(n_points, static_cast<int>(r.trace.size()));
    }
    Heatmap h;
    h.lo = lo;
    h.bin_width = bin_width;
    h.n_bins = static_cast<int>(std::ceil((hi - lo) / bin_width - 1e-9));
    h.counts.assign(static_cast<std::size_t>(n_points), std::vector<int>(static_cast<std::size_t>(h.n_bins), 0));
    h.dropped.assign(static_cast<std::size_t>(n_points), 0);
    for (const auto& r : records) {
        for (int t = 0; t < n_points; ++t) {
            if (static_cast<std::size_t>(t) >= r.trace.size()) {
                ++h.dropped[t];
                continue;
            }
            const double v = r.trace[t].f_value;
            const double pos = std::floor((v - lo) / bin_width);
            if (!std::isfinite(v) || pos < 0 || pos >= h.n_bins) {
                ++h.dropped[t];
                continue;
            }
            ++h.counts[t][static_cast<std::size_t>(pos)];
        }
    }
    return h;
}

}  // namespace vme
