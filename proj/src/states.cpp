#include "qdiff/states.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qdiff {

PureState basis_state(int n, std::size_t index) {
    PureState psi = PureState::Zero(dim_of(n));
    psi[index] = 1.0;
    return psi;
}

PureState normalized(const CVec& v) {
    const double nrm = v.norm();
    if (!(nrm > 0.0)) throw std::invalid_argument("cannot normalize a zero vector");
    return v / nrm;
}

DensityMatrix projector(const PureState& psi) { return psi * psi.adjoint(); }

double purity(const DensityMatrix& rho) { return (rho * rho).trace().real(); }

double trace_distance_pure(const PureState& a, const PureState& b) {
    if (a.size() != b.size()) throw std::invalid_argument("trace_distance_pure: size mismatch");
    const double ov = std::norm(a.dot(b));
    return std::sqrt(std::max(0.0, 2.0 * (1.0 - ov)));
}

namespace {

void check_state(const DensityMatrix& rho, const char* who) {
    if (!is_hermitian(rho, 1e-8)) throw std::invalid_argument(std::string(who) + ": input not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(rho), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw std::invalid_argument(std::string(who) + ": negative eigenvalue beyond tolerance");
}

}  // namespace

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("fidelity: size mismatch");
    check_state(a, "fidelity");
    check_state(b, "fidelity");
    // Nuclear norm of sqrt(a) sqrt(b); clipping round-off eigenvalues keeps
    // rank-deficient inputs accurate.
    auto root = [](const CMat& m) {
        Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(m));
        RVec s = es.eigenvalues();
        for (Eigen::Index k = 0; k < s.size(); ++k) s[k] = s[k] > 1e-14 ? std::sqrt(s[k]) : 0.0;
        return CMat(es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint());
    };
    Eigen::JacobiSVD<CMat> svd(root(a) * root(b));
    const double s = svd.singularValues().sum();
    return std::min(1.0, s * s);
}

double fidelity_pure(const PureState& psi, const DensityMatrix& rho) {
    return psi.dot(rho * psi).real();
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    return 0.5 * trace_norm_hermitian(a - b);
}

double entropy(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(rho), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double p = std::max(es.eigenvalues()[k], 1e-12);
        s -= p * std::log(p);
    }
    return s;
}

double cmi(const DensityMatrix& rho, const std::vector<int>& a, const std::vector<int>& b,
           const std::vector<int>& c) {
    std::vector<int> all;
    for (const auto* part : {&a, &b, &c}) all.insert(all.end(), part->begin(), part->end());
    std::vector<int> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("cmi: partitions overlap");

    auto s_of = [&](std::vector<int> qs) {
        if (qs.empty()) return 0.0;
        std::sort(qs.begin(), qs.end());
        return entropy(partial_trace(rho, qs));
    };
    std::vector<int> ab = a, bc = b;
    ab.insert(ab.end(), b.begin(), b.end());
    bc.insert(bc.end(), c.begin(), c.end());
    return s_of(ab) + s_of(bc) - s_of(b) - s_of(all);
}

BlochProduct bloch_product_from(const std::vector<Eigen::Vector3d>& vectors) {
    for (const auto& v : vectors)
        if (std::abs(v.norm() - 1.0) > 1e-10) throw std::invalid_argument("Bloch vector is not a unit vector");
    return vectors;
}

DensityMatrix coherent_projector(const BlochProduct& v) {
    CMat out = CMat::Identity(1, 1);
    for (const auto& nv : v) {
        if (std::abs(nv.norm() - 1.0) > 1e-10) throw std::invalid_argument("Bloch vector is not a unit vector");
        Mat2 f = 0.5 * (pauli_2x2(0) + nv[0] * pauli_2x2(1) + nv[1] * pauli_2x2(2) + nv[2] * pauli_2x2(3));
        out = kron(out, f);
    }
    return out;
}

Eigen::Vector3d bloch_vector(const Mat2& rho) {
    const cplx tr = rho.trace();
    return Eigen::Vector3d((rho * pauli_2x2(1)).trace().real(), (rho * pauli_2x2(2)).trace().real(),
                           (rho * pauli_2x2(3)).trace().real()) /
           tr.real();
}

PureState random_pure_state(int n, Rng& rng) {
    PureState psi(dim_of(n));
    for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] = cplx(rng.normal(), rng.normal());
    return normalized(psi);
}

DensityMatrix random_density_matrix(int n, int rank, Rng& rng) {
    const std::size_t dim = dim_of(n);
    CMat g(dim, rank);
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = cplx(rng.normal(), rng.normal());
    CMat rho = g * g.adjoint();
    return hermitian_part(rho / rho.trace().real());
}

CMat random_unitary(int n, Rng& rng) {
    const std::size_t dim = dim_of(n);
    CMat g(dim, dim);
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = cplx(rng.normal(), rng.normal());
    Eigen::HouseholderQR<CMat> qr(g);
    CMat q = qr.householderQ();
    CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        const cplx d = r(j, j);
        q.col(j) *= d / std::abs(d);
    }
    return q;
}

CMat random_hermitian(int dim, Rng& rng) {
    CMat g(dim, dim);
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = cplx(rng.normal(), rng.normal());
    return hermitian_part(g);
}

}  // namespace qdiff
