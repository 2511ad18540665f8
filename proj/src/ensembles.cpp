#include "qdiff/ensembles.hpp"

#include <cmath>
#include <Eigen/Eigenvalues>
#include <stdexcept>

#include "qdiff/pauli.hpp"

namespace qdiff {

namespace {

cplx gaussian(Rng& rng, double sigma) {
    const double s = sigma / std::sqrt(2.0);
    const double re = s * rng.normal();
    return {re, s * rng.normal()};
}

}  // namespace

PureState near_zero_state(Rng& rng, double sigma) {
    PureState psi = basis_state(1, 0);
    psi[0] += gaussian(rng, sigma);
    psi[1] += gaussian(rng, sigma);
    return normalized(psi);
}

PureState bell_perturbed_state(Rng& rng, double sigma) {
    PureState psi = PureState::Zero(4);
    psi[0] = psi[3] = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < 4; ++i) psi[i] += gaussian(rng, sigma);
    return normalized(psi);
}

CMat heisenberg_pair_hamiltonian(double J, double Bx, double Bz) {
    CMat h = J * (PauliString::parse("XX").matrix() + PauliString::parse("YY").matrix() +
                  PauliString::parse("ZZ").matrix());
    h += Bx * PauliString::parse("XI").matrix() + Bz * PauliString::parse("IX").matrix();
    return h;
}

PureState heisenberg_thermal_state(Rng& rng, double J, double Bx, double Bz, double t_max) {
    Eigen::SelfAdjointEigenSolver<CMat> es(heisenberg_pair_hamiltonian(J, Bx, Bz));
    const double temp = t_max * rng.uniform();
    const RVec& e = es.eigenvalues();
    RVec w(e.size());
    if (temp <= 0.0) {
        w.setZero();
        w[0] = 1.0;
    } else {
        for (Eigen::Index k = 0; k < e.size(); ++k) w[k] = std::exp(-(e[k] - e[0]) / temp);
    }
    double u = rng.uniform() * w.sum();
    Eigen::Index pick = 0;
    while (pick + 1 < w.size() && u >= w[pick]) u -= w[pick++];
    return es.eigenvectors().col(pick);
}

namespace {

PureState bell_state() {
    PureState psi = PureState::Zero(4);
    psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
    return psi;
}

// Fixed full-rank two-qubit state, independent of the run seed.
const DensityMatrix& random_mixed_mean() {
    static const DensityMatrix rho = [] {
        Rng rng(0x51de5eedULL, 0);
        return random_density_matrix(2, 4, rng);
    }();
    return rho;
}

PureState random_mixed_member(Rng& rng) {
    Eigen::SelfAdjointEigenSolver<CMat> es(random_mixed_mean());
    double u = rng.uniform(), acc = 0.0;
    for (int k = 0; k < 4; ++k) {
        acc += es.eigenvalues()(k);
        if (u < acc || k == 3) return es.eigenvectors().col(k);
    }
    return es.eigenvectors().col(3);
}

}  // namespace

std::optional<DensityMatrix> ensemble_mean(const std::string& name, int n) {
    const int fixed = ensemble_qubits(name);
    if (fixed > 0 && fixed != n)
        throw std::invalid_argument("ensemble '" + name + "' needs n = " + std::to_string(fixed));
    if (name == "zero") return projector(basis_state(n, 0));
    if (name == "bell") return projector(bell_state());
    if (name == "random-mixed") return random_mixed_mean();
    if (name == "haar") return DensityMatrix(CMat::Identity(dim_of(n), dim_of(n)) / static_cast<double>(dim_of(n)));
    return std::nullopt;
}

int ensemble_qubits(const std::string& name) {
    if (name == "near-zero") return 1;
    if (name == "bell-perturbed" || name == "heisenberg-thermal" || name == "bell" || name == "random-mixed") return 2;
    if (name == "haar" || name == "zero") return -1;
    throw std::invalid_argument("unknown ensemble '" + name + "'");
}

std::vector<PureState> sample_ensemble(const std::string& name, int n, std::size_t count, std::uint64_t seed,
                                       std::uint64_t stream_base) {
    const int fixed = ensemble_qubits(name);
    if (fixed > 0 && fixed != n)
        throw std::invalid_argument("ensemble '" + name + "' needs n = " + std::to_string(fixed));
    std::vector<PureState> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(seed, stream_base + i);
        if (name == "near-zero") out.push_back(near_zero_state(rng));
        else if (name == "bell-perturbed") out.push_back(bell_perturbed_state(rng));
        else if (name == "heisenberg-thermal") out.push_back(heisenberg_thermal_state(rng));
        else if (name == "haar") out.push_back(random_pure_state(n, rng));
        else if (name == "bell") out.push_back(bell_state());
        else if (name == "random-mixed") out.push_back(random_mixed_member(rng));
        else out.push_back(basis_state(n, 0));
    }
    return out;
}

}  // namespace qdiff
