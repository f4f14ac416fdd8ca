#include "vme/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "vme/errors.hpp"

namespace vme {

std::string to_string(Part p) { return p == Part::Real ? "real" : "imaginary"; }

Part parse_part(const std::string& s) {
    if (s == "real") return Part::Real;
    if (s == "imaginary") return Part::Imaginary;
    throw InvalidArgument("unknown part '" + s + "'");
}

std::string to_string(EstimatorMode m) {
    switch (m) {
        case EstimatorMode::Exact: return "exact";
        case EstimatorMode::Shot: return "shot";
        case EstimatorMode::ShotReadout: return "shot_readout";
    }
    return "?";
}

EstimatorMode parse_estimator_mode(const std::string& s) {
    if (s == "exact") return EstimatorMode::Exact;
    if (s == "shot") return EstimatorMode::Shot;
    if (s == "shot_readout") return EstimatorMode::ShotReadout;
    throw InvalidArgument("unknown estimator mode '" + s + "'");
}

void EstimatorConfig::validate() const {
    if (mode == EstimatorMode::Exact) return;
    if (shots < 1 || repeats < 1) throw InvalidArgument("shot modes need shots >= 1 and repeats >= 1");
    if (!(readout_flip_prob >= 0.0 && readout_flip_prob < 0.5))
        throw InvalidArgument("readout_flip_prob must lie in [0, 0.5)");
}

SplitMix64::result_type SplitMix64::operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = seed;
    for (std::uint64_t x : {a, b, c}) {
        SplitMix64 g(h ^ (x + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2)));
        h = g();
    }
    return h;
}

double estimate_scalar(double true_value, double bound, const EstimatorConfig& cfg, const RngStream& stream) {
    if (!(bound > 0.0)) throw BoundViolation("bound must be positive");
    if (std::abs(true_value) > bound * (1.0 + 1e-12)) throw BoundViolation("|value| exceeds bound");
    if (cfg.mode == EstimatorMode::Exact) return true_value;
    cfg.validate();

    double p = std::clamp(0.5 * (1.0 + true_value / bound), 0.0, 1.0);
    const bool readout = cfg.mode == EstimatorMode::ShotReadout;
    const double f = cfg.readout_flip_prob;
    if (readout) p = (1.0 - f) * p + f * (1.0 - p);

    double sum = 0.0;
    for (int r = 0; r < cfg.repeats; ++r) {
        SplitMix64 eng = stream.engine(static_cast<std::uint64_t>(r));
        std::binomial_distribution<int> dist(cfg.shots, p);
        double freq = static_cast<double>(dist(eng)) / cfg.shots;
        if (readout && cfg.mitigation) freq = (freq - f) / (1.0 - 2.0 * f);
        sum += (2.0 * freq - 1.0) * bound;
    }
    return sum / cfg.repeats;
}

namespace {

Eigen::MatrixXd real_component(const CMatrix& m, bool imag_part, const char* what) {
    const Eigen::MatrixXd re = m.real(), im = m.imag();
    const Eigen::MatrixXd& keep = imag_part ? im : re;
    const Eigen::MatrixXd& drop = imag_part ? re : im;
    if (drop.size() > 0 && drop.cwiseAbs().maxCoeff() > 1e-12)
        throw InvalidArgument(std::string(what) + " has entries of the wrong purity");
    return keep;
}

}  // namespace

OverlapCache build_cache(const CMatrix& h, const CMatrix& w_part, Part part, const EstimatorConfig& cfg) {
    require_hermitian(h);
    require_hermitian(w_part);
    if (h.rows() != w_part.rows()) throw DimensionMismatch("H and W dimensions differ");
    cfg.validate();

    const Eigen::MatrixXd hr = real_component(h, false, "H");
    const Eigen::MatrixXd wr = real_component(w_part, part == Part::Imaginary, "W part");
    const double h_bound = decompose_hermitian(h).coefficient_norm();
    const double w_bound = decompose_hermitian(w_part).coefficient_norm();

    const Eigen::Index n = h.rows();
    OverlapCache cache;
    cache.part = part;
    cache.provenance = cfg;
    cache.h_elements = Eigen::MatrixXd::Zero(n, n);
    cache.w_elements = Eigen::MatrixXd::Zero(n, n);

    auto est = [&](double v, double bound, std::uint64_t op, Eigen::Index a, Eigen::Index b) {
        if (bound == 0.0) return 0.0;
        return estimate_scalar(v, bound, cfg, RngStream(mix_seed(cfg.seed, op, a, b)));
    };
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a; b < n; ++b) {
            cache.h_elements(a, b) = cache.h_elements(b, a) = est(hr(a, b), h_bound, 0, a, b);
            if (part == Part::Real) {
                cache.w_elements(a, b) = cache.w_elements(b, a) = est(wr(a, b), w_bound, 1, a, b);
            } else if (a != b) {
                cache.w_elements(a, b) = est(wr(a, b), w_bound, 1, a, b);
                cache.w_elements(b, a) = -cache.w_elements(a, b);
            }
        }
    }
    return cache;
}

double expectation_from_cache(const OverlapCache& cache, const Eigen::VectorXd& bra, const Eigen::VectorXd& ket,
                              Operator which) {
    if (bra.size() != cache.dim() || ket.size() != cache.dim())
        throw DimensionMismatch("vector length does not match cache dimension");
    return bra.dot(cache.matrix(which) * ket);
}

}  // namespace vme
