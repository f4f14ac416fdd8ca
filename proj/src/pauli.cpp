#include "vme/pauli.hpp"

#include <algorithm>
#include <cmath>

#include "vme/errors.hpp"

namespace vme {

PauliString::PauliString(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty()) throw InvalidArgument("Pauli string needs at least one qubit");
}

PauliString PauliString::parse(const std::string& text) {
    std::vector<Axis> axes;
    for (char c : text) {
        switch (c) {
            case 'I': axes.push_back(Axis::I); break;
            case 'X': axes.push_back(Axis::X); break;
            case 'Y': axes.push_back(Axis::Y); break;
            case 'Z': axes.push_back(Axis::Z); break;
            default: throw InvalidArgument("bad Pauli axis '" + std::string(1, c) + "' in " + text);
        }
    }
    return PauliString(std::move(axes));
}

std::string PauliString::str() const {
    static const char names[] = {'I', 'X', 'Y', 'Z'};
    std::string s;
    for (Axis a : axes_) s.push_back(names[static_cast<int>(a)]);
    return s;
}

CMatrix single_qubit(Axis a) {
    CMatrix m(2, 2);
    const cplx i(0, 1);
    switch (a) {
        case Axis::I: m << 1, 0, 0, 1; break;
        case Axis::X: m << 0, 1, 1, 0; break;
        case Axis::Y: m << 0, -i, i, 0; break;
        case Axis::Z: m << 1, 0, 0, -1; break;
    }
    return m;
}

CMatrix hadamard() {
    CMatrix m(2, 2);
    m << 1, 1, 1, -1;
    return m / std::sqrt(2.0);
}

static CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    return out;
}

CMatrix PauliString::dense() const {
    CMatrix m = single_qubit(axes_.front());
    for (std::size_t k = 1; k < axes_.size(); ++k) m = kron(m, single_qubit(axes_[k]));
    return m;
}

PauliSum::PauliSum(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1) throw InvalidArgument("PauliSum needs n_qubits >= 1");
}

void PauliSum::add(cplx coeff, const PauliString& s) {
    if (s.n_qubits() != n_qubits_)
        throw DimensionMismatch("Pauli string " + s.str() + " does not act on " +
                                std::to_string(n_qubits_) + " qubits");
    auto it = std::lower_bound(terms_.begin(), terms_.end(), s,
                               [](const PauliTerm& t, const PauliString& k) { return t.string < k; });
    if (it != terms_.end() && it->string == s)
        it->coeff += coeff;
    else
        terms_.insert(it, PauliTerm{coeff, s});
}

bool PauliSum::is_hermitian() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const PauliTerm& t) { return t.coeff.imag() == 0.0; });
}

double PauliSum::coefficient_norm() const {
    double s = 0.0;
    for (const auto& t : terms_) s += std::abs(t.coeff);
    return s;
}

int qubits_for_dim(Eigen::Index dim) {
    int n = 0;
    Eigen::Index d = 1;
    while (d < dim) {
        d *= 2;
        ++n;
    }
    if (d != dim || n == 0) throw DimensionMismatch("dimension " + std::to_string(dim) + " is not a power of two >= 2");
    return n;
}

bool is_hermitian(const CMatrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = r; c < m.cols(); ++c)
            if (std::abs(m(r, c) - std::conj(m(c, r))) > tol) return false;
    return true;
}

void require_hermitian(const CMatrix& m, double tol) {
    if (m.rows() != m.cols()) throw NonHermitianInput("matrix is not square");
    qubits_for_dim(m.rows());
    if (!is_hermitian(m, tol)) throw NonHermitianInput("matrix is not Hermitian");
}

CMatrix to_dense(const PauliSum& p) {
    const Eigen::Index dim = Eigen::Index(1) << p.n_qubits();
    CMatrix m = CMatrix::Zero(dim, dim);
    for (const auto& t : p.terms()) m += t.coeff * t.string.dense();
    return m;
}

PauliSum decompose_hermitian(const CMatrix& m, double prune) {
    require_hermitian(m);
    const int n = qubits_for_dim(m.rows());
    const double dim = static_cast<double>(m.rows());
    PauliSum out(n);
    const int total = 1 << (2 * n);
    for (int code = 0; code < total; ++code) {
        std::vector<Axis> axes(n);
        for (int q = 0; q < n; ++q) axes[q] = static_cast<Axis>((code >> (2 * (n - 1 - q))) & 3);
        PauliString s(axes);
        // Pauli strings are Hermitian, so trace(P m) is real for Hermitian m.
        const double c = (s.dense() * m).trace().real() / dim;
        if (std::abs(c) > prune) out.add(c, s);
    }
    return out;
}

HermitianSplit hermitian_split(const CMatrix& m) {
    require_hermitian(m);
    HermitianSplit s;
    s.w_real = m.real().cast<cplx>();
    s.w_imag = cplx(0, 1) * m.imag().cast<cplx>();
    return s;
}

EigenSystem eig_hermitian(const CMatrix& m, int max_sweeps) {
    require_hermitian(m, 1e-10);
    const Eigen::Index n = m.rows();
    CMatrix a = m;
    CMatrix v = CMatrix::Identity(n, n);
    const double scale = std::max(m.norm(), 1e-300);

    auto off_norm = [&] {
        double s = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) s += std::norm(a(p, q));
        return std::sqrt(s);
    };

    int sweep = 0;
    while (off_norm() > 1e-15 * scale) {
        if (++sweep > max_sweeps) throw ConvergenceFailure("Jacobi sweeps exhausted");
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double mod = std::abs(a(p, q));
                if (mod < 1e-300) continue;
                const cplx phase = a(p, q) / mod;
                const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * mod);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // G = diag-phase followed by a real rotation; a <- G^H a G.
                const cplx gpp = c, gpq = s, gqp = -s * std::conj(phase), gqq = c * std::conj(phase);
                for (Eigen::Index k = 0; k < n; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * gpp + akq * gqp;
                    a(k, q) = akp * gpq + akq * gqq;
                    const cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp * gpp + vkq * gqp;
                    v(k, q) = vkp * gpq + vkq * gqq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
                    a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
            }
        }
    }

    std::vector<Eigen::Index> order(n);
    for (Eigen::Index k = 0; k < n; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return a(x, x).real() < a(y, y).real(); });

    EigenSystem out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]).real();
        CVector col = v.col(order[k]);
        for (Eigen::Index r = 0; r < n; ++r) {
            if (std::abs(col[r]) > 1e-9) {
                col *= std::conj(col[r]) / std::abs(col[r]);
                col[r] = std::abs(col[r]);
                break;
            }
        }
        out.vectors.col(k) = col;
    }
    return out;
}

CMatrix conjugate_to_computational(const CMatrix& w_diag, const CMatrix& eigvecs) {
    if (w_diag.rows() != w_diag.cols() || eigvecs.rows() != eigvecs.cols() || w_diag.rows() != eigvecs.rows())
        throw DimensionMismatch("conjugate_to_computational: shapes differ");
    const CMatrix id = CMatrix::Identity(eigvecs.rows(), eigvecs.cols());
    if ((eigvecs.adjoint() * eigvecs - id).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidArgument("eigenvector matrix is not unitary");
    return eigvecs * w_diag * eigvecs.adjoint();
}

}  // namespace vme
