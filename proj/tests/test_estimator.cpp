#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "vme/errors.hpp"
#include "vme/estimator.hpp"
#include "vme/experiments.hpp"

using namespace vme;

namespace {

EstimatorConfig shot_cfg(int shots = 1000, int repeats = 50) {
    EstimatorConfig c;
    c.mode = EstimatorMode::Shot;
    c.shots = shots;
    c.repeats = repeats;
    return c;
}

struct Moments {
    double mean;
    double sd;
};

Moments sample(double value, double bound, const EstimatorConfig& cfg, int trials, std::uint64_t salt = 0) {
    std::vector<double> xs(trials);
    for (int t = 0; t < trials; ++t) xs[t] = estimate_scalar(value, bound, cfg, RngStream(mix_seed(salt, t)));
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / trials;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (trials - 1))};
}

}  // namespace

TEST(EstimatorConfig, Validation) {
    EstimatorConfig c = shot_cfg();
    EXPECT_NO_THROW(c.validate());
    c.shots = 0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = shot_cfg();
    c.readout_flip_prob = 0.5;
    EXPECT_THROW(c.validate(), InvalidArgument);
    EXPECT_EQ(parse_estimator_mode("shot_readout"), EstimatorMode::ShotReadout);
    EXPECT_THROW(parse_estimator_mode("qpu"), InvalidArgument);
}

TEST(EstimateScalar, ExactModeIsIdentity) {
    EstimatorConfig c;
    EXPECT_EQ(estimate_scalar(0.123456789, 1.0, c, RngStream(1)), 0.123456789);
    EXPECT_EQ(estimate_scalar(-3.0, 3.0, c, RngStream(1)), -3.0);
}

TEST(EstimateScalar, DegenerateBinomial) {
    EXPECT_EQ(estimate_scalar(2.5, 2.5, shot_cfg(), RngStream(9)), 2.5);
    EXPECT_EQ(estimate_scalar(-2.5, 2.5, shot_cfg(), RngStream(9)), -2.5);
}

TEST(EstimateScalar, BoundViolation) {
    EXPECT_THROW(estimate_scalar(1.5, 1.0, shot_cfg(), RngStream(1)), BoundViolation);
    EXPECT_THROW(estimate_scalar(0.0, 0.0, shot_cfg(), RngStream(1)), BoundViolation);
}

TEST(EstimateScalar, DeterministicPerStream) {
    EXPECT_EQ(estimate_scalar(0.3, 1.0, shot_cfg(), RngStream(42)), estimate_scalar(0.3, 1.0, shot_cfg(), RngStream(42)));
    EXPECT_NE(estimate_scalar(0.3, 1.0, shot_cfg(), RngStream(42)), estimate_scalar(0.3, 1.0, shot_cfg(), RngStream(43)));
}

TEST(EstimateScalar, StandardDeviationMatchesBinomial) {
    const Moments m = sample(0.0, 1.0, shot_cfg(), 10000);
    const double sigma = 1.0 / std::sqrt(1000.0 * 50.0);
    EXPECT_NEAR(m.sd, sigma, 0.2 * sigma);
}

TEST(EstimateScalar, Unbiased) {
    for (double v : {-0.7, 0.0, 0.35, 0.9}) {
        const Moments m = sample(v, 1.0, shot_cfg(), 10000, 17);
        EXPECT_LT(std::abs(m.mean - v), 3.0 * m.sd / std::sqrt(10000.0)) << v;
    }
}

TEST(EstimateScalar, QuadrupledShotsHalveSpread) {
    const Moments a = sample(0.2, 1.0, shot_cfg(250, 50), 10000, 3);
    const Moments b = sample(0.2, 1.0, shot_cfg(1000, 50), 10000, 4);
    EXPECT_NEAR(a.sd / b.sd, 2.0, 0.15 * 2.0);
}

TEST(EstimateScalar, MitigationRemovesReadoutBias) {
    EstimatorConfig c = shot_cfg();
    c.mode = EstimatorMode::ShotReadout;
    c.readout_flip_prob = 0.05;
    const double v = 0.6;
    c.mitigation = true;
    const Moments on = sample(v, 1.0, c, 10000, 5);
    EXPECT_LT(std::abs(on.mean - v), 3.0 * on.sd / std::sqrt(10000.0));
    c.mitigation = false;
    const Moments off = sample(v, 1.0, c, 10000, 6);
    EXPECT_LT(std::abs(off.mean - 0.9 * v), 3.0 * off.sd / std::sqrt(10000.0));
}

TEST(BuildCache, ExactModeEqualsDenseEntries) {
    for (ModelKind k : {ModelKind::OneQubit, ModelKind::TwoQubit}) {
        const Model m = make_model(k);
        const HermitianSplit s = hermitian_split(m.w);
        const OverlapCache re = build_cache(m.h, s.w_real, Part::Real, EstimatorConfig{});
        const OverlapCache im = build_cache(m.h, s.w_imag, Part::Imaginary, EstimatorConfig{});
        EXPECT_LT((re.h_elements - m.h.real()).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT((re.w_elements - m.w.real()).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT((im.w_elements - m.w.imag()).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT((im.w_elements + im.w_elements.transpose()).cwiseAbs().maxCoeff(), 1e-300);
    }
}

TEST(BuildCache, ShotModeDeterministicAndSymmetric) {
    const Model m = two_qubit_model();
    const HermitianSplit s = hermitian_split(m.w);
    EstimatorConfig c = shot_cfg();
    c.seed = 77;
    for (Part part : {Part::Real, Part::Imaginary}) {
        const CMatrix& w = part == Part::Real ? s.w_real : s.w_imag;
        const OverlapCache a = build_cache(m.h, w, part, c), b = build_cache(m.h, w, part, c);
        EXPECT_EQ(a.h_elements, b.h_elements);
        EXPECT_EQ(a.w_elements, b.w_elements);
        EXPECT_EQ(a.h_elements, a.h_elements.transpose());
        if (part == Part::Real)
            EXPECT_EQ(a.w_elements, a.w_elements.transpose());
        else
            EXPECT_EQ(a.w_elements, Eigen::MatrixXd(-a.w_elements.transpose()));
    }
    c.seed = 78;
    EXPECT_NE(build_cache(m.h, s.w_real, Part::Real, c).h_elements,
              build_cache(m.h, s.w_real, Part::Real, shot_cfg()).h_elements);
}

TEST(BuildCache, PauliXOffDiagonalWithinFiveSigma) {
    CMatrix x(2, 2);
    x << 0, 1, 1, 0;
    const double sigma = 1.0 / std::sqrt(1000.0 * 50.0);
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        EstimatorConfig c = shot_cfg();
        c.seed = seed;
        const OverlapCache cache = build_cache(x, CMatrix::Identity(2, 2), Part::Real, c);
        if (std::abs(cache.h_elements(0, 1) - 1.0) < 5.0 * sigma) ++inside;
    }
    EXPECT_GE(inside, 198);
}

TEST(BuildCache, RejectsMismatchedInputs) {
    const Model m = one_qubit_model();
    EXPECT_THROW(build_cache(m.h, CMatrix::Identity(4, 4), Part::Real, EstimatorConfig{}), DimensionMismatch);
    EXPECT_THROW(build_cache(m.h, m.w, Part::Real, EstimatorConfig{}), InvalidArgument);
}

TEST(ExpectationFromCache, Examples) {
    const Model m = two_qubit_model();
    const HermitianSplit s = hermitian_split(m.w);
    const OverlapCache re = build_cache(m.h, s.w_real, Part::Real, EstimatorConfig{});
    const OverlapCache im = build_cache(m.h, s.w_imag, Part::Imaginary, EstimatorConfig{});
    const Eigen::Vector4d a(0.1, -0.5, 0.7, 0.2), b(0.4, 0.4, -0.3, 0.6);
    const cplx dense = a.cast<cplx>().dot(s.w_imag * b.cast<cplx>());
    EXPECT_NEAR(expectation_from_cache(im, a, b, Operator::W), dense.imag(), 1e-12);
    EXPECT_NEAR(expectation_from_cache(re, a, b, Operator::H), a.dot(m.h.real() * b), 1e-12);
    EXPECT_NEAR(expectation_from_cache(im, a, a, Operator::W), 0.0, 1e-15);
    EXPECT_EQ(expectation_from_cache(re, Eigen::Vector4d::Unit(1), Eigen::Vector4d::Unit(3), Operator::W),
              re.w_elements(1, 3));
    EXPECT_THROW(expectation_from_cache(re, Eigen::Vector2d(1, 0), b, Operator::H), DimensionMismatch);
}
