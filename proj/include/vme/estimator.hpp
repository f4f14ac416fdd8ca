#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "vme/pauli.hpp"
#include "vme/types.hpp"

namespace vme {

enum class EstimatorMode { Exact, Shot, ShotReadout };

std::string to_string(EstimatorMode m);
EstimatorMode parse_estimator_mode(const std::string& s);

struct EstimatorConfig {
    EstimatorMode mode = EstimatorMode::Exact;
    int shots = 1000;
    int repeats = 50;
    double readout_flip_prob = 0.02;
    bool mitigation = false;
    std::uint64_t seed = 0;

    /// Throws InvalidArgument when the fields are inconsistent.
    void validate() const;
};

/// splitmix64 generator; satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    explicit SplitMix64(std::uint64_t state) : state_(state) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

private:
    std::uint64_t state_;
};

/// Mixes a sequence of integers into one 64-bit key.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

/**
 * @brief Counter-based random source: repeat r of a scalar draws from its own
 * generator keyed by (key, r), independent of evaluation order.
 */
class RngStream {
public:
    explicit RngStream(std::uint64_t key) : key_(key) {}
    SplitMix64 engine(std::uint64_t counter) const { return SplitMix64(mix_seed(key_, counter)); }
    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
};

double estimate_scalar(double true_value, double bound, const EstimatorConfig& cfg, const RngStream& stream);

enum class Operator { H, W };

/**
 * @brief Computational-basis elements of H and of the selected W part.
 *
 * For Part::Imaginary, w_elements holds Im(W_I), which is antisymmetric.
 */
struct OverlapCache {
    Eigen::MatrixXd h_elements;
    Eigen::MatrixXd w_elements;
    Part part = Part::Real;
    EstimatorConfig provenance;

    int dim() const { return static_cast<int>(h_elements.rows()); }
    const Eigen::MatrixXd& matrix(Operator which) const { return which == Operator::H ? h_elements : w_elements; }
};

OverlapCache build_cache(const CMatrix& h, const CMatrix& w_part, Part part, const EstimatorConfig& cfg);

/// bra^T M ket with M taken from the cache.
double expectation_from_cache(const OverlapCache& cache, const Eigen::VectorXd& bra, const Eigen::VectorXd& ket,
                              Operator which);

}  // namespace vme
