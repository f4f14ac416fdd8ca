#pragma once

#include <vector>

#include <Eigen/Dense>

#include "vme/pauli.hpp"

namespace vme {

/// Hyperspherical parameters of a normalized real state of dimension D (D-1 angles).
struct HypersphericalAngles {
    Eigen::VectorXd values;

    HypersphericalAngles() = default;
    explicit HypersphericalAngles(Eigen::VectorXd v) : values(std::move(v)) {}
    HypersphericalAngles(std::initializer_list<double> v);

    int state_dim() const { return static_cast<int>(values.size()) + 1; }
};

enum class Purity { Real, Imaginary };

/// Unnormalized multiplier |L>; for Purity::Imaginary the vector is i * coeffs.
struct MultiplierVector {
    Eigen::VectorXd coeffs;
    Purity purity = Purity::Real;
};

enum class RemapMode { RealPart, None };

/// Wraps an angle into [-pi, pi).
double wrap_angle(double x);
HypersphericalAngles wrap(const HypersphericalAngles& a);

Eigen::VectorXd amplitudes(const HypersphericalAngles& a);
/// D x (D-1) matrix of d amplitude_k / d angle_m.
Eigen::MatrixXd amplitude_jacobian(const HypersphericalAngles& a);

/**
 * @brief Fixes the global sign of a one-qubit state.
 *
 * RealPart returns theta' in (-pi/2, pi/2] with the same state up to sign and
 * cos(theta') >= 0. None returns the input.
 */
HypersphericalAngles remap_principal(const HypersphericalAngles& a, RemapMode mode);

/// Inverse of amplitudes for a unit vector of dimension 2 or 4.
HypersphericalAngles angles_from_amplitudes(const Eigen::VectorXd& v);

CVector multiplier_as_complex(const MultiplierVector& l);

}  // namespace vme
