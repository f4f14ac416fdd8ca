#include "vme/ansatz.hpp"

#include <cmath>
#include <numbers>

#include "vme/errors.hpp"

namespace vme {

namespace {

void require_dim(int d) {
    if (d != 2 && d != 4) throw UnsupportedDimension("state dimension " + std::to_string(d) + " not in {2, 4}");
}

}  // namespace

HypersphericalAngles::HypersphericalAngles(std::initializer_list<double> v) : values(static_cast<Eigen::Index>(v.size())) {
    Eigen::Index k = 0;
    for (double x : v) values[k++] = x;
}

double wrap_angle(double x) {
    const double two_pi = 2.0 * std::numbers::pi;
    double y = std::fmod(x + std::numbers::pi, two_pi);
    if (y < 0) y += two_pi;
    y -= std::numbers::pi;
    return y >= std::numbers::pi ? -std::numbers::pi : y;
}

HypersphericalAngles wrap(const HypersphericalAngles& a) {
    HypersphericalAngles out = a;
    for (auto& x : out.values) x = wrap_angle(x);
    return out;
}

Eigen::VectorXd amplitudes(const HypersphericalAngles& a) {
    const int d = a.state_dim();
    require_dim(d);
    Eigen::VectorXd v(d);
    if (d == 2) {
        v << std::cos(a.values[0]), std::sin(a.values[0]);
        return v;
    }
    const double al = a.values[0], be = a.values[1], ga = a.values[2];
    v << std::cos(al), std::sin(al) * std::cos(be), std::sin(al) * std::sin(be) * std::cos(ga),
        std::sin(al) * std::sin(be) * std::sin(ga);
    return v;
}

Eigen::MatrixXd amplitude_jacobian(const HypersphericalAngles& a) {
    const int d = a.state_dim();
    require_dim(d);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(d, d - 1);
    if (d == 2) {
        j(0, 0) = -std::sin(a.values[0]);
        j(1, 0) = std::cos(a.values[0]);
        return j;
    }
    const double ca = std::cos(a.values[0]), sa = std::sin(a.values[0]);
    const double cb = std::cos(a.values[1]), sb = std::sin(a.values[1]);
    const double cg = std::cos(a.values[2]), sg = std::sin(a.values[2]);
    j(0, 0) = -sa;
    j(1, 0) = ca * cb;
    j(2, 0) = ca * sb * cg;
    j(3, 0) = ca * sb * sg;
    j(1, 1) = -sa * sb;
    j(2, 1) = sa * cb * cg;
    j(3, 1) = sa * cb * sg;
    j(2, 2) = -sa * sb * sg;
    j(3, 2) = sa * sb * cg;
    return j;
}

HypersphericalAngles remap_principal(const HypersphericalAngles& a, RemapMode mode) {
    if (mode == RemapMode::None) return a;
    if (a.state_dim() != 2) throw UnsupportedDimension("real-part remap needs a one-qubit state");
    const double pi = std::numbers::pi;
    double t = std::fmod(a.values[0] + pi / 2, pi);
    if (t <= 0) t += pi;
    return HypersphericalAngles{t - pi / 2};
}

HypersphericalAngles angles_from_amplitudes(const Eigen::VectorXd& v) {
    require_dim(static_cast<int>(v.size()));
    if (v.size() == 2) return HypersphericalAngles{std::atan2(v[1], v[0])};
    const double alpha = std::atan2(v.tail(3).norm(), v[0]);
    const double beta = std::atan2(v.tail(2).norm(), v[1]);
    const double gamma = std::atan2(v[3], v[2]);
    return HypersphericalAngles{alpha, beta, gamma};
}

CVector multiplier_as_complex(const MultiplierVector& l) {
    CVector out = l.coeffs.cast<cplx>();
    if (l.purity == Purity::Imaginary) out *= cplx(0, 1);
    return out;
}

}  // namespace vme
