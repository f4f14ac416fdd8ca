#pragma once

#include <optional>

#include <Eigen/Dense>

#include "vme/ansatz.hpp"
#include "vme/estimator.hpp"
#include "vme/pauli.hpp"
#include "vme/types.hpp"

namespace vme {

/**
 * @brief One Hermitian component of W together with the Hamiltonian.
 *
 * H must be real symmetric. For Part::Real the W part is real symmetric, for
 * Part::Imaginary it is purely imaginary. lambda is fixed at -1/2.
 */
class ProblemInstance {
public:
    ProblemInstance(const PauliSum& hamiltonian, const CMatrix& w_part, Part part, double lambda = -0.5);
    ProblemInstance(const CMatrix& h, const CMatrix& w_part, Part part, double lambda = -0.5);

    const PauliSum& hamiltonian() const { return hamiltonian_; }
    const CMatrix& h_dense() const { return h_dense_; }
    const CMatrix& w_part() const { return w_part_; }
    Part part() const { return part_; }
    double lambda() const { return lambda_; }
    int dim() const { return static_cast<int>(h_dense_.rows()); }
    /// xi^a = +1; xi^b = +1 (real) or -1 (imaginary).
    int xi(Nu nu) const { return (nu == Nu::B && part_ == Part::Imaginary) ? -1 : 1; }
    /// Noise-free overlaps, used for exact multipliers and exact evaluation.
    const OverlapCache& exact() const { return exact_; }

private:
    PauliSum hamiltonian_;
    CMatrix h_dense_;
    CMatrix w_part_;
    Part part_;
    double lambda_;
    OverlapCache exact_;
};

struct MultiplierSet {
    MultiplierVector l_ia, l_ib, l_ja, l_jb;
};

double energy(const Eigen::VectorXd& state, const Eigen::MatrixXd& h);
double energy(const Eigen::VectorXd& state, const CMatrix& h);

/// H - H|phi><phi|H / <phi|H|phi>; scale invariant in phi.
Eigen::MatrixXd h_mod(const Eigen::MatrixXd& h, const Eigen::VectorXd& state);
CMatrix h_mod(const CMatrix& h, const Eigen::VectorXd& state);

MultiplierVector exact_multiplier(const ProblemInstance& p, const Eigen::VectorXd& phi_i,
                                  const Eigen::VectorXd& phi_j, Side which, Nu nu);
MultiplierSet exact_multipliers(const ProblemInstance& p, const Eigen::VectorXd& phi_i, const Eigen::VectorXd& phi_j);

/// Quadratic form of M in the real coefficients v: M(v) = v^T B v + v^T q.
struct MQuadratic {
    Eigen::MatrixXd b;
    Eigen::VectorXd q;
};

/**
 * @brief Builds B = H_mod - E and the linear term of M for one multiplier.
 *
 * lam is the normalization multiplier of the non-normalized formulation;
 * pass 0 for normalized states.
 */
MQuadratic m_quadratic(const OverlapCache& ops, const Eigen::VectorXd& phi_side, const Eigen::VectorXd& phi_other,
                       Side which, Nu nu, double lam = 0.0);

double m_functional(const MultiplierVector& l, const ProblemInstance& p, const Eigen::VectorXd& phi_side,
                    const Eigen::VectorXd& phi_other, Side which, Nu nu);
double m_functional(const MultiplierVector& l, const OverlapCache& ops, const Eigen::VectorXd& phi_side,
                    const Eigen::VectorXd& phi_other, Side which, Nu nu);
double m_functional_unnormalized(const MultiplierVector& l, const ProblemInstance& p,
                                 const Eigen::VectorXd& phi_side, const Eigen::VectorXd& phi_other, Side which, Nu nu,
                                 double lam);

struct IterativeMethod {
    enum class Kind { StationarySolve, Descent };
    Kind kind = Kind::StationarySolve;
    int steps = 500;
    double rate = 0.1;
    /// When set, descent throws MaxIterations if the final gradient norm exceeds it.
    std::optional<double> tolerance;

    static IterativeMethod stationary() { return {}; }
    static IterativeMethod descent(int steps, double rate, std::optional<double> tol = std::nullopt) {
        return {Kind::Descent, steps, rate, tol};
    }
};

/**
 * @brief Multiplier obtained from M built on the given overlaps.
 *
 * Descent minimizes M when B is positive definite; otherwise M has no minimum
 * and the descent runs on |grad M|^2 / 4 instead.
 */
MultiplierVector iterative_multiplier(const OverlapCache& ops, const Eigen::VectorXd& phi_i,
                                      const Eigen::VectorXd& phi_j, Side which, Nu nu, const IterativeMethod& method,
                                      double lam = 0.0);
MultiplierVector iterative_multiplier(const ProblemInstance& p, const Eigen::VectorXd& phi_i,
                                      const Eigen::VectorXd& phi_j, Side which, Nu nu, const IterativeMethod& method);
MultiplierSet iterative_multipliers(const OverlapCache& ops, const Eigen::VectorXd& phi_i, const Eigen::VectorXd& phi_j,
                                    const IterativeMethod& method = {});

/// Checks the a/b relations of a multiplier set; throws InvalidArgument if violated.
void check_multiplier_set(const MultiplierSet& ls, Part part, double tol = 1e-10);

/**
 * @brief F_v evaluated with dense complex arithmetic.
 *
 * For Part::Imaginary the returned value is F_v / i.
 */
double functional_value(const ProblemInstance& p, const Eigen::VectorXd& phi_i, const Eigen::VectorXd& phi_j,
                        const MultiplierSet& ls, double e_i, double e_j);

/// Same quantity assembled from cached computational-basis elements.
double functional_value(const OverlapCache& ops, double lambda, const Eigen::VectorXd& phi_i,
                        const Eigen::VectorXd& phi_j, const MultiplierSet& ls, double e_i, double e_j);

/// Gradient over (angles_i, angles_j) with multipliers and energies frozen; energies taken from the cache.
Eigen::VectorXd functional_gradient(const ProblemInstance& p, const HypersphericalAngles& angles_i,
                                    const HypersphericalAngles& angles_j, const MultiplierSet& ls,
                                    const OverlapCache& cache);

/// Gradient over the raw amplitudes (phi_i, phi_j) with everything else frozen.
Eigen::VectorXd functional_state_gradient(const OverlapCache& ops, double lambda, const Eigen::VectorXd& phi_i,
                                          const Eigen::VectorXd& phi_j, const MultiplierSet& ls, double e_i,
                                          double e_j, double lam_i = 0.0, double lam_j = 0.0);

double functional_value_unnormalized(const ProblemInstance& p, const Eigen::VectorXd& phi_i,
                                     const Eigen::VectorXd& phi_j, const MultiplierSet& ls, double lam_i,
                                     double lam_j);

/**
 * @brief -<phi_i|W_part|phi_j>/2 as a real number.
 *
 * For an imaginary W part the quantity is i*mu and mu is returned.
 */
double lambda_ij(const Eigen::VectorXd& phi_i, const Eigen::VectorXd& phi_j, const CMatrix& w_part);

/// Exact multipliers of the non-normalized formulation (normalization multipliers lam_i, lam_j).
MultiplierSet exact_multipliers_unnormalized(const ProblemInstance& p, const Eigen::VectorXd& phi_i,
                                             const Eigen::VectorXd& phi_j, double lam_i, double lam_j);

}  // namespace vme
