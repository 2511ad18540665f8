#include "qdiff/linalg.hpp"

#include <stdexcept>

namespace qdiff {

int qubits_of(Eigen::Index dim) {
    if (dim <= 0 || (dim & (dim - 1)) != 0) {
        throw std::invalid_argument("dimension is not a power of two");
    }
    int n = 0;
    while ((Eigen::Index{1} << n) < dim) ++n;
    return n;
}

Mat2 pauli_2x2(int axis) {
    Mat2 m;
    switch (axis) {
        case 0: m << 1, 0, 0, 1; break;
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, -kI, kI, 0; break;
        case 3: m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("pauli axis must be in 0..3");
    }
    return m;
}

CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMat embed_1q(const Mat2& u, int qubit, int n) {
    if (qubit < 0 || qubit >= n) throw std::out_of_range("qubit index");
    CMat out = CMat::Identity(1, 1);
    for (int q = 0; q < n; ++q) {
        CMat f = (q == qubit) ? CMat(u) : CMat::Identity(2, 2);
        out = kron(out, f);
    }
    return out;
}

void apply_1q(CVec& psi, const Mat2& u, int qubit, int n) {
    const std::size_t stride = std::size_t{1} << bit_of(qubit, n);
    const std::size_t dim = dim_of(n);
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const cplx a = psi[i], b = psi[i + stride];
            psi[i] = u(0, 0) * a + u(0, 1) * b;
            psi[i + stride] = u(1, 0) * a + u(1, 1) * b;
        }
    }
}

void conjugate_1q(CMat& rho, const Mat2& u, int qubit, int n) {
    const std::size_t stride = std::size_t{1} << bit_of(qubit, n);
    const std::size_t dim = dim_of(n);
    const Mat2 ud = u.adjoint();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            auto r0 = rho.row(i).eval();
            auto r1 = rho.row(i + stride).eval();
            rho.row(i) = u(0, 0) * r0 + u(0, 1) * r1;
            rho.row(i + stride) = u(1, 0) * r0 + u(1, 1) * r1;
        }
    }
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t j = base; j < base + stride; ++j) {
            auto c0 = rho.col(j).eval();
            auto c1 = rho.col(j + stride).eval();
            rho.col(j) = c0 * ud(0, 0) + c1 * ud(1, 0);
            rho.col(j + stride) = c0 * ud(0, 1) + c1 * ud(1, 1);
        }
    }
}

bool is_hermitian(const CMat& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

CMat hermitian_part(const CMat& m) { return 0.5 * (m + m.adjoint()); }

CMat expi_hermitian(const CMat& h, double dt) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(h));
    const RVec& lam = es.eigenvalues();
    CVec ph(lam.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) ph[k] = std::exp(kI * (lam[k] * dt));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

CMat sqrt_psd(const CMat& m) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(m));
    RVec s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

double trace_norm_hermitian(const CMat& m) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

CMat partial_trace(const CMat& rho, const std::vector<int>& keep) {
    const int n = qubits_of(rho.rows());
    const int k = static_cast<int>(keep.size());
    std::size_t keep_mask = 0;
    for (int q : keep) {
        if (q < 0 || q >= n) throw std::out_of_range("partial_trace: qubit index");
        const std::size_t bit = std::size_t{1} << bit_of(q, n);
        if (keep_mask & bit) throw std::invalid_argument("partial_trace: repeated qubit");
        keep_mask |= bit;
    }
    const std::size_t dim = dim_of(n);
    const std::size_t sub = dim_of(k);
    // sub index -> full index with the traced bits zero
    std::vector<std::size_t> lift(sub, 0);
    for (std::size_t s = 0; s < sub; ++s) {
        std::size_t full = 0;
        for (int a = 0; a < k; ++a)
            if (s & (std::size_t{1} << (k - 1 - a))) full |= std::size_t{1} << bit_of(keep[a], n);
        lift[s] = full;
    }
    std::vector<std::size_t> rest;
    for (std::size_t r = 0; r < dim; ++r)
        if ((r & keep_mask) == 0) rest.push_back(r);

    CMat out = CMat::Zero(sub, sub);
    for (std::size_t a = 0; a < sub; ++a)
        for (std::size_t b = 0; b < sub; ++b) {
            cplx acc = 0;
            for (std::size_t r : rest) acc += rho(lift[a] | r, lift[b] | r);
            out(a, b) = acc;
        }
    return out;
}

}  // namespace qdiff
