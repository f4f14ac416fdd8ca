#include "vme/variational.hpp"

#include <cmath>

#include "vme/errors.hpp"

namespace vme {

namespace {

constexpr double kEnergyGuard = 1e-9;
constexpr double kMinRcond = 1e-9;

Purity purity_of(Part part) { return part == Part::Real ? Purity::Real : Purity::Imaginary; }

void require_same_dim(const Eigen::VectorXd& a, const Eigen::VectorXd& b, Eigen::Index dim) {
    if (a.size() != dim || b.size() != dim) throw DimensionMismatch("state length does not match operator dimension");
}

/// Effective vector t with <L_a|(H-E)|phi> + <phi|(H-E)|L_b> = t^T (H-E) phi (times i for imaginary purity).
Eigen::VectorXd combined(const MultiplierVector& a, const MultiplierVector& b, Part part) {
    return part == Part::Real ? Eigen::VectorXd(a.coeffs + b.coeffs) : Eigen::VectorXd(b.coeffs - a.coeffs);
}

Eigen::VectorXd solve_checked(const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    if (!(lu.rcond() > kMinRcond)) throw SingularSystem("shifted operator is numerically singular");
    return lu.solve(rhs);
}

double rayleigh(const Eigen::VectorXd& state, const Eigen::MatrixXd& h) { return state.dot(h * state) / state.squaredNorm(); }

void check_purity(const MultiplierSet& ls, Part part) {
    const Purity want = purity_of(part);
    for (const auto* l : {&ls.l_ia, &ls.l_ib, &ls.l_ja, &ls.l_jb})
        if (l->purity != want) throw InvalidArgument("multiplier purity does not match problem part");
}

}  // namespace

ProblemInstance::ProblemInstance(const PauliSum& hamiltonian, const CMatrix& w_part, Part part, double lambda)
    : ProblemInstance(to_dense(hamiltonian), w_part, part, lambda) {
    hamiltonian_ = hamiltonian;
}

ProblemInstance::ProblemInstance(const CMatrix& h, const CMatrix& w_part, Part part, double lambda)
    : hamiltonian_(decompose_hermitian(h)), h_dense_(h), w_part_(w_part), part_(part), lambda_(lambda) {
    if (lambda != -0.5) throw InvalidArgument("lambda must be -1/2");
    require_hermitian(w_part_);
    if (w_part_.rows() != h_dense_.rows()) throw DimensionMismatch("H and W dimensions differ");
    if (h_dense_.imag().cwiseAbs().maxCoeff() > 1e-12) throw InvalidArgument("H must be real symmetric");
    exact_ = build_cache(h_dense_, w_part_, part_, EstimatorConfig{});
}

double energy(const Eigen::VectorXd& state, const Eigen::MatrixXd& h) {
    if (std::abs(state.norm() - 1.0) > 1e-10) throw NormViolation("state is not normalized");
    if (state.size() != h.rows()) throw DimensionMismatch("state length does not match H");
    return state.dot(h * state);
}

double energy(const Eigen::VectorXd& state, const CMatrix& h) {
    if (std::abs(state.norm() - 1.0) > 1e-10) throw NormViolation("state is not normalized");
    if (state.size() != h.rows()) throw DimensionMismatch("state length does not match H");
    const CVector s = state.cast<cplx>();
    return s.dot(h * s).real();
}

Eigen::MatrixXd h_mod(const Eigen::MatrixXd& h, const Eigen::VectorXd& state) {
    const Eigen::VectorXd hs = h * state;
    const double e = state.dot(hs);
    if (std::abs(e) <= kEnergyGuard) throw NearZeroEnergy("<phi|H|phi> is too close to zero");
    return h - hs * hs.transpose() / e;
}

CMatrix h_mod(const CMatrix& h, const Eigen::VectorXd& state) {
    const CVector s = state.cast<cplx>();
    const CVector hs = h * s;
    const cplx e = s.dot(hs);
    if (std::abs(e) <= kEnergyGuard) throw NearZeroEnergy("<phi|H|phi> is too close to zero");
    return h - hs * hs.adjoint() / e;
}

MQuadratic m_quadratic(const OverlapCache& ops, const Eigen::VectorXd& phi_side, const Eigen::VectorXd& phi_other,
                       Side which, Nu nu, double lam) {
    require_same_dim(phi_side, phi_other, ops.dim());
    const Eigen::MatrixXd& h = ops.h_elements;
    const Eigen::MatrixXd& w = ops.w_elements;
    const bool imag = ops.part == Part::Imaginary;
    const double xi = (imag && nu == Nu::B) ? -1.0 : 1.0;
    const double kappa = imag ? -1.0 : 1.0;
    const Eigen::Index n = ops.dim();

    MQuadratic m;
    m.b = h_mod(h, phi_side) - rayleigh(phi_side, h) * Eigen::MatrixXd::Identity(n, n);
    // The i-side constraint couples through W^T, the j side through W.
    const Eigen::VectorXd w_other = which == Side::I ? Eigen::VectorXd(w.transpose() * phi_other)
                                                     : Eigen::VectorXd(w * phi_other);
    m.q = xi * (w_other + 2.0 * kappa * lam * phi_side);
    return m;
}

MultiplierVector exact_multiplier(const ProblemInstance& p, const Eigen::VectorXd& phi_i,
                                  const Eigen::VectorXd& phi_j, Side which, Nu nu) {
    const auto& side = which == Side::I ? phi_i : phi_j;
    const auto& other = which == Side::I ? phi_j : phi_i;
    const MQuadratic m = m_quadratic(p.exact(), side, other, which, nu);
    return MultiplierVector{solve_checked(m.b, -0.5 * m.q), purity_of(p.part())};
}

MultiplierSet exact_multipliers(const ProblemInstance& p, const Eigen::VectorXd& phi_i, const Eigen::VectorXd& phi_j) {
    return MultiplierSet{exact_multiplier(p, phi_i, phi_j, Side::I, Nu::A), exact_multiplier(p, phi_i, phi_j, Side::I, Nu::B),
                         exact_multiplier(p, phi_i, phi_j, Side::J, Nu::A), exact_multiplier(p, phi_i, phi_j, Side::J, Nu::B)};
}

MultiplierSet exact_multipliers_unnormalized(const ProblemInstance& p, const Eigen::VectorXd& phi_i,
                                             const Eigen::VectorXd& phi_j, double lam_i, double lam_j) {
    const Purity pur = purity_of(p.part());
    auto one = [&](Side s, Nu nu) {
        const bool is_i = s == Side::I;
        const MQuadratic m = m_quadratic(p.exact(), is_i ? phi_i : phi_j, is_i ? phi_j : phi_i, s, nu, is_i ? lam_i : lam_j);
        return MultiplierVector{solve_checked(m.b, -0.5 * m.q), pur};
    };
    return MultiplierSet{one(Side::I, Nu::A), one(Side::I, Nu::B), one(Side::J, Nu::A), one(Side::J, Nu::B)};
}

static double m_value(const MultiplierVector& l, const MQuadratic& m, Part part) {
    if (l.purity != purity_of(part)) throw InvalidArgument("multiplier purity does not match problem part");
    if (l.coeffs.size() != m.q.size()) throw DimensionMismatch("multiplier length does not match dimension");
    return l.coeffs.dot(m.b * l.coeffs) + l.coeffs.dot(m.q);
}

double m_functional(const MultiplierVector& l, const OverlapCache& ops, const Eigen::VectorXd& phi_side,
                    const Eigen::VectorXd& phi_other, Side which, Nu nu) {
    return m_value(l, m_quadratic(ops, phi_side, phi_other, which, nu), ops.part);
}

double m_functional(const MultiplierVector& l, const ProblemInstance& p, const Eigen::VectorXd& phi_side,
                    const Eigen::VectorXd& phi_other, Side which, Nu nu) {
    return m_functional(l, p.exact(), phi_side, phi_other, which, nu);
}

double m_functional_unnormalized(const MultiplierVector& l, const ProblemInstance& p,
                                 const Eigen::VectorXd& phi_side, const Eigen::VectorXd& phi_other, Side which, Nu nu,
                                 double lam) {
    return m_value(l, m_quadratic(p.exact(), phi_side, phi_other, which, nu, lam), p.part());
}

MultiplierVector iterative_multiplier(const OverlapCache& ops, const Eigen::VectorXd& phi_i,
                                      const Eigen::VectorXd& phi_j, Side which, Nu nu, const IterativeMethod& method,
                                      double lam) {
    const auto& side = which == Side::I ? phi_i : phi_j;
    const auto& other = which == Side::I ? phi_j : phi_i;
    const MQuadratic m = m_quadratic(ops, side, other, which, nu, lam);
    const Purity pur = purity_of(ops.part);

    if (method.kind == IterativeMethod::Kind::StationarySolve) {
        // dM/dv = 2 B v + q = 0
        return MultiplierVector{solve_checked(2.0 * m.b, -m.q), pur};
    }

    const bool has_minimum = Eigen::LLT<Eigen::MatrixXd>(m.b).info() == Eigen::Success;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m.q.size());
    Eigen::VectorXd residual = m.q;
    for (int step = 0; step < method.steps; ++step) {
        residual = 2.0 * m.b * v + m.q;
        const Eigen::VectorXd grad = has_minimum ? residual : Eigen::VectorXd(m.b * residual);
        v -= method.rate * grad;
    }
    residual = 2.0 * m.b * v + m.q;
    if (!v.allFinite()) throw MaxIterations("multiplier descent diverged");
    if (method.tolerance && residual.norm() > *method.tolerance)
        throw MaxIterations("multiplier descent did not reach tolerance");
    return MultiplierVector{v, pur};
}

MultiplierVector iterative_multiplier(const ProblemInstance& p, const Eigen::VectorXd& phi_i,
                                      const Eigen::VectorXd& phi_j, Side which, Nu nu, const IterativeMethod& method) {
    return iterative_multiplier(p.exact(), phi_i, phi_j, which, nu, method);
}

MultiplierSet iterative_multipliers(const OverlapCache& ops, const Eigen::VectorXd& phi_i, const Eigen::VectorXd& phi_j,
                                    const IterativeMethod& method) {
    return MultiplierSet{iterative_multiplier(ops, phi_i, phi_j, Side::I, Nu::A, method),
                         iterative_multiplier(ops, phi_i, phi_j, Side::I, Nu::B, method),
                         iterative_multiplier(ops, phi_i, phi_j, Side::J, Nu::A, method),
                         iterative_multiplier(ops, phi_i, phi_j, Side::J, Nu::B, method)};
}

void check_multiplier_set(const MultiplierSet& ls, Part part, double tol) {
    check_purity(ls, part);
    const double s = part == Part::Real ? 1.0 : -1.0;
    if ((ls.l_ia.coeffs - s * ls.l_ib.coeffs).cwiseAbs().maxCoeff() > tol ||
        (ls.l_ja.coeffs - s * ls.l_jb.coeffs).cwiseAbs().maxCoeff() > tol)
        throw InvalidArgument("multiplier a/b relation violated");
}

static double complex_functional(const ProblemInstance& p, const Eigen::VectorXd& phi_i, const Eigen::VectorXd& phi_j,
                                 const MultiplierSet& ls, double e_i, double e_j, double lam_i, double lam_j) {
    check_purity(ls, p.part());
    require_same_dim(phi_i, phi_j, p.dim());
    const CMatrix& h = p.h_dense();
    const CMatrix& w = p.w_part();
    const CMatrix id = CMatrix::Identity(p.dim(), p.dim());
    const CVector pi = phi_i.cast<cplx>(), pj = phi_j.cast<cplx>();
    const CVector lia = multiplier_as_complex(ls.l_ia), lib = multiplier_as_complex(ls.l_ib);
    const CVector lja = multiplier_as_complex(ls.l_ja), ljb = multiplier_as_complex(ls.l_jb);
    const CMatrix si = h - e_i * id, sj = h - e_j * id;
    const bool imag = p.part() == Part::Imaginary;
    const cplx unit = imag ? cplx(0, 1) : cplx(1, 0);

    const cplx wij = pi.dot(w * pj);
    const cplx wji = pj.dot(w * pi);
    cplx f = wij + lia.dot(si * pi) + pi.dot(si * lib) + lja.dot(sj * pj) + pj.dot(sj * ljb);
    f += p.lambda() * (imag ? wij + wji : wij - wji);
    f += unit * (lam_i * (pi.squaredNorm() - 1.0) + lam_j * (pj.squaredNorm() - 1.0));
    f /= unit;
    if (std::abs(f.imag()) > 1e-8) throw ComplexResidue("F_v has an imaginary residue of " + std::to_string(f.imag()));
    return f.real();
}

double functional_value(const ProblemInstance& p, const Eigen::VectorXd& phi_i, const Eigen::VectorXd& phi_j,
                        const MultiplierSet& ls, double e_i, double e_j) {
    return complex_functional(p, phi_i, phi_j, ls, e_i, e_j, 0.0, 0.0);
}

double functional_value(const OverlapCache& ops, double lambda, const Eigen::VectorXd& phi_i,
                        const Eigen::VectorXd& phi_j, const MultiplierSet& ls, double e_i, double e_j) {
    check_purity(ls, ops.part);
    require_same_dim(phi_i, phi_j, ops.dim());
    const Eigen::MatrixXd& h = ops.h_elements;
    const Eigen::MatrixXd& w = ops.w_elements;
    const double sigma = ops.part == Part::Real ? -1.0 : 1.0;
    const Eigen::VectorXd ti = combined(ls.l_ia, ls.l_ib, ops.part);
    const Eigen::VectorXd tj = combined(ls.l_ja, ls.l_jb, ops.part);
    return (1.0 + lambda) * phi_i.dot(w * phi_j) + sigma * lambda * phi_j.dot(w * phi_i) +
           ti.dot(h * phi_i - e_i * phi_i) + tj.dot(h * phi_j - e_j * phi_j);
}

Eigen::VectorXd functional_state_gradient(const OverlapCache& ops, double lambda, const Eigen::VectorXd& phi_i,
                                          const Eigen::VectorXd& phi_j, const MultiplierSet& ls, double e_i,
                                          double e_j, double lam_i, double lam_j) {
    check_purity(ls, ops.part);
    require_same_dim(phi_i, phi_j, ops.dim());
    const Eigen::MatrixXd& h = ops.h_elements;
    const Eigen::MatrixXd& w = ops.w_elements;
    const double sigma = ops.part == Part::Real ? -1.0 : 1.0;
    const Eigen::VectorXd ti = combined(ls.l_ia, ls.l_ib, ops.part);
    const Eigen::VectorXd tj = combined(ls.l_ja, ls.l_jb, ops.part);
    const Eigen::Index n = ops.dim();
    Eigen::VectorXd g(2 * n);
    g.head(n) = (1.0 + lambda) * w * phi_j + sigma * lambda * w.transpose() * phi_j + h * ti - e_i * ti + 2.0 * lam_i * phi_i;
    g.tail(n) = (1.0 + lambda) * w.transpose() * phi_i + sigma * lambda * w * phi_i + h * tj - e_j * tj + 2.0 * lam_j * phi_j;
    return g;
}

Eigen::VectorXd functional_gradient(const ProblemInstance& p, const HypersphericalAngles& angles_i,
                                    const HypersphericalAngles& angles_j, const MultiplierSet& ls,
                                    const OverlapCache& cache) {
    if (cache.dim() != p.dim() || cache.part != p.part()) throw CacheMiss("cache does not cover this problem");
    const Eigen::VectorXd phi_i = amplitudes(angles_i), phi_j = amplitudes(angles_j);
    const double e_i = phi_i.dot(cache.h_elements * phi_i);
    const double e_j = phi_j.dot(cache.h_elements * phi_j);
    const Eigen::VectorXd gs = functional_state_gradient(cache, p.lambda(), phi_i, phi_j, ls, e_i, e_j);
    const Eigen::Index n = p.dim(), m = n - 1;
    Eigen::VectorXd g(2 * m);
    g.head(m) = amplitude_jacobian(angles_i).transpose() * gs.head(n);
    g.tail(m) = amplitude_jacobian(angles_j).transpose() * gs.tail(n);
    return g;
}

double functional_value_unnormalized(const ProblemInstance& p, const Eigen::VectorXd& phi_i,
                                     const Eigen::VectorXd& phi_j, const MultiplierSet& ls, double lam_i,
                                     double lam_j) {
    const Eigen::MatrixXd h = p.h_dense().real();
    return complex_functional(p, phi_i, phi_j, ls, rayleigh(phi_i, h), rayleigh(phi_j, h), lam_i, lam_j);
}

double lambda_ij(const Eigen::VectorXd& phi_i, const Eigen::VectorXd& phi_j, const CMatrix& w_part) {
    if (phi_i.size() != w_part.rows() || phi_j.size() != w_part.rows())
        throw DimensionMismatch("state length does not match W");
    const cplx v = -0.5 * phi_i.cast<cplx>().dot(w_part * phi_j.cast<cplx>());
    const bool imaginary_part = w_part.real().cwiseAbs().maxCoeff() <= 1e-12 && w_part.imag().cwiseAbs().maxCoeff() > 0.0;
    return imaginary_part ? v.imag() : v.real();
}

}  // namespace vme
