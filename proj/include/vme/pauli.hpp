#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vme {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class Axis { I, X, Y, Z };

/** @brief Tensor product of single-qubit Pauli matrices, qubit 0 leftmost. */
class PauliString {
public:
    PauliString() = default;
    explicit PauliString(std::vector<Axis> axes);
    /// Parses e.g. "XZIY"; throws InvalidArgument on other characters.
    static PauliString parse(const std::string& text);

    int n_qubits() const { return static_cast<int>(axes_.size()); }
    const std::vector<Axis>& axes() const { return axes_; }
    std::string str() const;
    CMatrix dense() const;

    bool operator==(const PauliString& o) const { return axes_ == o.axes_; }
    bool operator<(const PauliString& o) const { return axes_ < o.axes_; }

private:
    std::vector<Axis> axes_;
};

struct PauliTerm {
    cplx coeff;
    PauliString string;
};

/**
 * @brief Weighted sum of Pauli strings on a fixed number of qubits.
 *
 * Terms are kept sorted by string; adding an existing string merges the
 * coefficients.
 */
class PauliSum {
public:
    explicit PauliSum(int n_qubits);

    void add(cplx coeff, const PauliString& s);
    void add(cplx coeff, const std::string& axes) { add(coeff, PauliString::parse(axes)); }

    int n_qubits() const { return n_qubits_; }
    const std::vector<PauliTerm>& terms() const { return terms_; }
    bool is_hermitian() const;
    /// Sum of coefficient moduli; bounds the spectral norm.
    double coefficient_norm() const;

private:
    int n_qubits_;
    std::vector<PauliTerm> terms_;
};

CMatrix single_qubit(Axis a);
/// Hadamard matrix H_d.
CMatrix hadamard();

bool is_hermitian(const CMatrix& m, double tol = 1e-12);
/// Throws NonHermitianInput unless m is square, power-of-two sized and Hermitian.
void require_hermitian(const CMatrix& m, double tol = 1e-12);
int qubits_for_dim(Eigen::Index dim);

CMatrix to_dense(const PauliSum& p);
PauliSum decompose_hermitian(const CMatrix& m, double prune = 1e-12);

struct HermitianSplit {
    CMatrix w_real;
    CMatrix w_imag;
};
HermitianSplit hermitian_split(const CMatrix& m);

struct EigenSystem {
    Eigen::VectorXd values;  ///< ascending
    CMatrix vectors;         ///< column k belongs to values[k]
};

/**
 * @brief Cyclic Jacobi diagonalization of a small Hermitian matrix.
 *
 * The first component of each eigenvector with modulus above 1e-9 is made
 * real and positive. Degenerate subspaces are returned as found.
 */
EigenSystem eig_hermitian(const CMatrix& m, int max_sweeps = 100);

/// Returns U * w_diag * U^dagger.
CMatrix conjugate_to_computational(const CMatrix& w_diag, const CMatrix& eigvecs);

}  // namespace vme
