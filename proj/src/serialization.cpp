#include "vme/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "vme/errors.hpp"

namespace vme {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    require(j.is_object(), where + " must be an object");
    for (const auto& [k, v] : j.items()) require(allowed.count(k) > 0, "unknown key '" + k + "' in " + where);
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
    require(j.contains(key), "missing key '" + key + "' in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + key + "' in " + where + " has the wrong type");
    }
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
    return j.contains(key) ? get<T>(j, key, where) : fallback;
}

double number(const json& j, const std::string& key, double fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    require(j.at(key).is_number(), "key '" + key + "' in " + where + " must be a number");
    return j.at(key).get<double>();
}

int integer(const json& j, const std::string& key, int fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    require(j.at(key).is_number_integer(), "key '" + key + "' in " + where + " must be an integer");
    return j.at(key).get<int>();
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string init_kind_name(InitSpec::Kind k) {
    switch (k) {
        case InitSpec::Kind::Uniform: return "uniform";
        case InitSpec::Kind::Ball: return "ball";
        case InitSpec::Kind::Fixed: return "fixed";
    }
    return "?";
}

}  // namespace

json dense_to_json(const CMatrix& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json rr = json::array(), ii = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            rr.push_back(m(r, c).real());
            ii.push_back(m(r, c).imag());
        }
        re.push_back(rr);
        im.push_back(ii);
    }
    return json{{"dim", m.rows()}, {"re", re}, {"im", im}};
}

CMatrix dense_from_json(const json& j) {
    check_keys(j, {"dim", "re", "im"}, "matrix");
    const int dim = get<int>(j, "dim", "matrix");
    require(dim >= 1, "matrix dim must be positive");
    const json& re = j.at("re");
    require(re.is_array() && static_cast<int>(re.size()) == dim, "matrix 're' must have dim rows");
    const bool has_im = j.contains("im");
    if (has_im) require(j.at("im").is_array() && static_cast<int>(j.at("im").size()) == dim, "matrix 'im' must have dim rows");
    CMatrix m(dim, dim);
    for (int r = 0; r < dim; ++r) {
        require(re[r].is_array() && static_cast<int>(re[r].size()) == dim, "matrix rows must have dim entries");
        if (has_im) require(j["im"][r].is_array() && static_cast<int>(j["im"][r].size()) == dim, "matrix rows must have dim entries");
        for (int c = 0; c < dim; ++c) {
            require(re[r][c].is_number(), "matrix entries must be numbers");
            double imv = 0.0;
            if (has_im) {
                require(j["im"][r][c].is_number(), "matrix entries must be numbers");
                imv = j["im"][r][c].get<double>();
            }
            m(r, c) = cplx(re[r][c].get<double>(), imv);
        }
    }
    return m;
}

json pauli_sum_to_json(const PauliSum& p) {
    json out = json::array();
    for (const auto& t : p.terms())
        out.push_back(json{{"coeff_re", t.coeff.real()}, {"coeff_im", t.coeff.imag()}, {"axes", t.string.str()}});
    return out;
}

PauliSum pauli_sum_from_json(const json& j) {
    require(j.is_array() && !j.empty(), "Pauli sum must be a non-empty array");
    const std::string first = get<std::string>(j[0], "axes", "Pauli term");
    PauliSum p(static_cast<int>(first.size()));
    for (const auto& t : j) {
        check_keys(t, {"coeff_re", "coeff_im", "axes"}, "Pauli term");
        try {
            p.add(cplx(number(t, "coeff_re", 0.0, "Pauli term"), number(t, "coeff_im", 0.0, "Pauli term")),
                  get<std::string>(t, "axes", "Pauli term"));
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        } catch (const DimensionMismatch& e) {
            throw ConfigError(e.what());
        }
    }
    return p;
}

json angles_to_json(const HypersphericalAngles& a) {
    json out = json::array();
    for (double x : a.values) out.push_back(x);
    return out;
}

HypersphericalAngles angles_from_json(const json& j) {
    require(j.is_array(), "angles must be an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) {
        require(j[k].is_number(), "angles must be numbers");
        v[static_cast<Eigen::Index>(k)] = j[k].get<double>();
    }
    return HypersphericalAngles(v);
}

json estimator_config_to_json(const EstimatorConfig& c) {
    return json{{"mode", to_string(c.mode)},
                {"shots", c.shots},
                {"repeats", c.repeats},
                {"readout_flip_prob", c.readout_flip_prob},
                {"mitigation", c.mitigation}};
}

EstimatorConfig estimator_config_from_json(const json& j) {
    const std::string w = "estimator";
    check_keys(j, {"mode", "shots", "repeats", "readout_flip_prob", "mitigation"}, w);
    EstimatorConfig c;
    try {
        c.mode = parse_estimator_mode(get_or<std::string>(j, "mode", "exact", w));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    c.shots = integer(j, "shots", c.shots, w);
    c.repeats = integer(j, "repeats", c.repeats, w);
    c.readout_flip_prob = number(j, "readout_flip_prob", c.readout_flip_prob, w);
    c.mitigation = get_or<bool>(j, "mitigation", c.mitigation, w);
    return c;
}

json cache_to_json(const OverlapCache& c) {
    auto rows = [](const Eigen::MatrixXd& m) {
        json out = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(r, k));
            out.push_back(row);
        }
        return out;
    };
    json cfg = estimator_config_to_json(c.provenance);
    cfg["seed"] = c.provenance.seed;
    cfg["part"] = to_string(c.part);
    return json{{"h", rows(c.h_elements)}, {"w", rows(c.w_elements)}, {"config", cfg}};
}

CliConfig cli_config_from_json(const json& j) {
    const std::string w = "config";
    check_keys(j, {"model", "part", "hamiltonian", "observable", "multiplier_method", "iterative", "iterations", "n_runs",
                   "step_size", "init", "estimator", "seed", "report", "out_dir"},
               w);
    CliConfig c;
    RunConfig& r = c.run;
    try {
        r.model = parse_model(get<std::string>(j, "model", w));
        r.part = parse_part(get<std::string>(j, "part", w));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (r.model == ModelKind::Custom) {
        require(j.contains("hamiltonian") && j.contains("observable"), "custom model needs 'hamiltonian' and 'observable'");
        r.custom_h = dense_from_json(j.at("hamiltonian"));
        r.custom_w = dense_from_json(j.at("observable"));
    } else {
        require(!j.contains("hamiltonian") && !j.contains("observable"), "'hamiltonian'/'observable' only apply to custom models");
    }
    const std::string method = get_or<std::string>(j, "multiplier_method", "exact", w);
    require(method == "exact" || method == "iterative", "multiplier_method must be 'exact' or 'iterative'");
    r.multiplier_method = method == "exact" ? MultiplierMethod::Exact : MultiplierMethod::Iterative;
    if (j.contains("iterative")) {
        const json& it = j.at("iterative");
        check_keys(it, {"method", "steps", "rate", "tolerance"}, "iterative");
        const std::string m = get_or<std::string>(it, "method", "stationary_solve", "iterative");
        require(m == "stationary_solve" || m == "descent", "iterative.method must be 'stationary_solve' or 'descent'");
        r.iterative.kind = m == "descent" ? IterativeMethod::Kind::Descent : IterativeMethod::Kind::StationarySolve;
        r.iterative.steps = integer(it, "steps", r.iterative.steps, "iterative");
        r.iterative.rate = number(it, "rate", r.iterative.rate, "iterative");
        if (it.contains("tolerance")) r.iterative.tolerance = number(it, "tolerance", 0.0, "iterative");
    }
    r.iterations = integer(j, "iterations", r.iterations, w);
    r.n_runs = integer(j, "n_runs", r.n_runs, w);
    r.step_size = number(j, "step_size", r.step_size, w);
    if (j.contains("seed")) {
        require(j.at("seed").is_number_unsigned(), "seed must be a non-negative integer");
        r.seed = j.at("seed").get<std::uint64_t>();
    } else {
        r.seed = kDefaultSeed;
    }
    if (j.contains("estimator")) r.estimator = estimator_config_from_json(j.at("estimator"));

    if (j.contains("init")) {
        const json& in = j.at("init");
        check_keys(in, {"kind", "lo", "hi", "radius", "centers", "angles_i", "angles_j"}, "init");
        const std::string kind = get<std::string>(in, "kind", "init");
        if (kind == "uniform") {
            r.init.kind = InitSpec::Kind::Uniform;
            r.init.lo = number(in, "lo", r.init.lo, "init");
            r.init.hi = number(in, "hi", r.init.hi, "init");
        } else if (kind == "ball") {
            r.init.kind = InitSpec::Kind::Ball;
            r.init.radius = number(in, "radius", r.init.radius, "init");
            if (in.contains("centers")) {
                require(in.at("centers").is_array(), "init.centers must be an array");
                for (const auto& ce : in.at("centers")) {
                    check_keys(ce, {"angles_i", "angles_j"}, "init.centers entry");
                    r.init.centers.emplace_back(angles_from_json(ce.at("angles_i")), angles_from_json(ce.at("angles_j")));
                }
            }
        } else if (kind == "fixed") {
            r.init.kind = InitSpec::Kind::Fixed;
            require(in.contains("angles_i") && in.contains("angles_j"), "fixed init needs angles_i and angles_j");
            r.init.angles_i = angles_from_json(in.at("angles_i"));
            r.init.angles_j = angles_from_json(in.at("angles_j"));
        } else {
            throw ConfigError("init.kind must be 'uniform', 'ball' or 'fixed'");
        }
    }

    if (j.contains("report")) {
        const json& rep = j.at("report");
        check_keys(rep, {"tolerance", "bin_width", "heatmap", "range", "targets"}, "report");
        c.report.tolerance = number(rep, "tolerance", c.report.tolerance, "report");
        c.report.bin_width = number(rep, "bin_width", c.report.bin_width, "report");
        c.report.heatmap = get_or<bool>(rep, "heatmap", c.report.heatmap, "report");
        if (rep.contains("range")) {
            const auto range = get<std::vector<double>>(rep, "range", "report");
            require(range.size() == 2 && range[1] > range[0], "report.range must be [lo, hi] with hi > lo");
            c.report.range_lo = range[0];
            c.report.range_hi = range[1];
        }
        if (rep.contains("targets")) c.report.targets = get<std::vector<double>>(rep, "targets", "report");
    }
    require(c.report.tolerance >= 0.0, "report.tolerance must be >= 0");
    require(c.report.bin_width > 0.0, "report.bin_width must be > 0");
    if (j.contains("out_dir")) c.out_dir = get<std::string>(j, "out_dir", w);

    try {
        r.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    } catch (const UnsupportedDimension& e) {
        throw ConfigError(e.what());
    } catch (const DimensionMismatch& e) {
        throw ConfigError(e.what());
    }
    if (r.model == ModelKind::Custom && !c.report.targets) {
        require_hermitian(r.custom_h);
        require_hermitian(r.custom_w);
    }
    return c;
}

json cli_config_to_json(const CliConfig& c) {
    const RunConfig& r = c.run;
    json j{{"model", to_string(r.model)},
           {"part", to_string(r.part)},
           {"multiplier_method", r.multiplier_method == MultiplierMethod::Exact ? "exact" : "iterative"},
           {"iterations", r.iterations},
           {"n_runs", r.n_runs},
           {"step_size", r.step_size},
           {"seed", r.seed},
           {"estimator", estimator_config_to_json(r.estimator)}};
    if (r.model == ModelKind::Custom) {
        j["hamiltonian"] = dense_to_json(r.custom_h);
        j["observable"] = dense_to_json(r.custom_w);
    }
    json it{{"method", r.iterative.kind == IterativeMethod::Kind::Descent ? "descent" : "stationary_solve"},
            {"steps", r.iterative.steps},
            {"rate", r.iterative.rate}};
    if (r.iterative.tolerance) it["tolerance"] = *r.iterative.tolerance;
    j["iterative"] = it;
    json in{{"kind", init_kind_name(r.init.kind)}};
    switch (r.init.kind) {
        case InitSpec::Kind::Uniform:
            in["lo"] = r.init.lo;
            in["hi"] = r.init.hi;
            break;
        case InitSpec::Kind::Ball:
            in["radius"] = r.init.radius;
            if (!r.init.centers.empty()) {
                json cs = json::array();
                for (const auto& [a, b] : r.init.centers)
                    cs.push_back(json{{"angles_i", angles_to_json(a)}, {"angles_j", angles_to_json(b)}});
                in["centers"] = cs;
            }
            break;
        case InitSpec::Kind::Fixed:
            in["angles_i"] = angles_to_json(r.init.angles_i);
            in["angles_j"] = angles_to_json(r.init.angles_j);
            break;
    }
    j["init"] = in;
    json rep{{"tolerance", c.report.tolerance},
             {"bin_width", c.report.bin_width},
             {"heatmap", c.report.heatmap},
             {"range", {c.report.range_lo, c.report.range_hi}}};
    if (c.report.targets) rep["targets"] = *c.report.targets;
    j["report"] = rep;
    if (c.out_dir) j["out_dir"] = *c.out_dir;
    return j;
}

json run_record_to_json(const RunRecord& r) {
    json trace = json::array();
    for (const auto& p : r.trace)
        trace.push_back(json{{"f", p.f_value}, {"angles_i", angles_to_json(p.angles_i)}, {"angles_j", angles_to_json(p.angles_j)}});
    json j{{"run_index", r.run_index},
           {"status", to_string(r.status)},
           {"final_value", std::isfinite(r.final_value) ? json(r.final_value) : json(nullptr)},
           {"assigned_target", r.assigned_target ? json(*r.assigned_target) : json(nullptr)},
           {"trace", trace}};
    if (!r.failure_reason.empty()) j["failure_reason"] = r.failure_reason;
    return j;
}

RunRecord run_record_from_json(const json& j) {
    const std::string w = "run record";
    check_keys(j, {"run_index", "status", "final_value", "assigned_target", "trace", "failure_reason"}, w);
    RunRecord r;
    r.run_index = get<int>(j, "run_index", w);
    try {
        r.status = parse_run_status(get<std::string>(j, "status", w));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    require(j.contains("final_value"), "missing final_value in run record");
    r.final_value = j.at("final_value").is_null() ? std::nan("") : get<double>(j, "final_value", w);
    if (j.contains("assigned_target") && !j.at("assigned_target").is_null())
        r.assigned_target = get<double>(j, "assigned_target", w);
    r.failure_reason = get_or<std::string>(j, "failure_reason", "", w);
    require(j.contains("trace") && j.at("trace").is_array(), "run record needs a trace array");
    for (const auto& p : j.at("trace")) {
        check_keys(p, {"f", "angles_i", "angles_j"}, "trace point");
        r.trace.push_back(TracePoint{get<double>(p, "f", "trace point"), angles_from_json(p.at("angles_i")),
                                     angles_from_json(p.at("angles_j"))});
    }
    return r;
}

json runs_document(const CliConfig& cfg, const std::vector<double>& targets, const std::vector<RunRecord>& runs) {
    json rs = json::array();
    for (const auto& r : runs) rs.push_back(run_record_to_json(r));
    return json{{"schema", "vme.runs/1"}, {"config", cli_config_to_json(cfg)}, {"targets", targets}, {"runs", rs}};
}

RunsDocument runs_from_json(const json& j) {
    check_keys(j, {"schema", "config", "targets", "runs"}, "runs document");
    require(get<std::string>(j, "schema", "runs document") == "vme.runs/1", "unsupported runs schema");
    RunsDocument d;
    d.config = cli_config_from_json(j.at("config"));
    d.targets = get<std::vector<double>>(j, "targets", "runs document");
    require(j.contains("runs") && j.at("runs").is_array(), "runs document needs a runs array");
    for (const auto& r : j.at("runs")) d.runs.push_back(run_record_from_json(r));
    return d;
}

void write_summary_csv(std::ostream& os, const EnsembleSummary& s) {
    os << "iteration,group,median,p04,p96,count\n";
    for (const auto& g : s.groups)
        for (std::size_t t = 0; t < g.f.median.size(); ++t)
            os << t << ',' << fmt(g.target) << ',' << fmt(g.f.median[t]) << ',' << fmt(g.f.low[t]) << ','
               << fmt(g.f.high[t]) << ',' << g.count << '\n';
}

void write_angles_csv(std::ostream& os, const EnsembleSummary& s) {
    os << "iteration,group,state,angle,median,p04,p96,count\n";
    for (const auto& g : s.groups) {
        for (int side = 0; side < 2; ++side) {
            const auto& bands = side == 0 ? g.angles_i : g.angles_j;
            for (std::size_t a = 0; a < bands.size(); ++a)
                for (std::size_t t = 0; t < bands[a].median.size(); ++t)
                    os << t << ',' << fmt(g.target) << ',' << (side == 0 ? 'i' : 'j') << ',' << a << ','
                       << fmt(bands[a].median[t]) << ',' << fmt(bands[a].low[t]) << ',' << fmt(bands[a].high[t]) << ','
                       << g.count << '\n';
        }
    }
}

void write_errors_csv(std::ostream& os, const std::vector<ErrorTrace>& e) {
    os << "iteration,group,median,p25,p75,count\n";
    for (const auto& g : e)
        for (std::size_t t = 0; t < g.median.size(); ++t)
            os << t << ',' << fmt(g.target) << ',' << fmt(g.median[t]) << ',' << fmt(g.p25[t]) << ',' << fmt(g.p75[t])
               << ',' << g.count << '\n';
}

void write_heatmap_csv(std::ostream& os, const Heatmap& h) {
    os << "iteration,bin_lo,bin_hi,count\n";
    for (std::size_t t = 0; t < h.counts.size(); ++t)
        for (int b = 0; b < h.n_bins; ++b)
            os << t << ',' << fmt(h.bin_lo(b)) << ',' << fmt(h.bin_lo(b + 1)) << ',' << h.counts[t][b] << '\n';
}

}  // namespace vme
