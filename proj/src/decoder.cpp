#include "qdiff/decoder.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace qdiff {

namespace {

// Deterministic phase: largest-magnitude component real and positive.
Eigen::Vector2cd fix_phase(Eigen::Vector2cd v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    return v * (std::abs(v[k]) / v[k]);
}

}  // namespace

MleResult mle_initial_state(const MeasurementRecord& record) {
    if (record.steps.empty()) throw std::invalid_argument("mle_initial_state: empty record");
    const auto f = accumulated_kraus_scaled(record, record.steps.size());
    MleResult res;
    res.psi0 = CVec::Ones(1);
    for (int q = 0; q < record.n; ++q) {
        const Mat2 sigma = f.factor[q].adjoint() * f.factor[q];
        Eigen::SelfAdjointEigenSolver<Mat2> es(sigma);
        const double lo = es.eigenvalues()[0], hi = es.eigenvalues()[1];
        Eigen::Vector2cd top;
        if (hi - lo <= 1e-9 * hi) {
            res.degenerate = true;
            top << 1.0, 0.0;  // lowest-index basis state spans the tie
        } else {
            top = fix_phase(es.eigenvectors().col(1));
        }
        res.log_likelihood += std::log(hi) + 2.0 * f.log_scale[q];
        CVec next(res.psi0.size() * 2);
        for (Eigen::Index i = 0; i < res.psi0.size(); ++i) {
            next[2 * i] = res.psi0[i] * top[0];
            next[2 * i + 1] = res.psi0[i] * top[1];
        }
        res.psi0 = std::move(next);
    }
    return res;
}

int default_weight_cutoff(int n) { return n <= 2 ? n : 2; }

DecodedTrajectory reconstruct_series(const MeasurementRecord& record, const PureState& psi0, int weight_cutoff) {
    if (qubits_of(psi0.size()) != record.n) throw std::invalid_argument("reconstruct_series: qubit count mismatch");
    if (std::abs(psi0.norm() - 1.0) > 1e-10) throw std::invalid_argument("reconstruct_series: psi0 not normalized");
    const int cutoff = weight_cutoff < 0 ? default_weight_cutoff(record.n) : weight_cutoff;
    DecodedTrajectory d;
    d.psi0_hat = psi0;
    d.basis = paulis_up_to_weight(record.n, cutoff);
    d.basis.insert(d.basis.begin(), PauliString(record.n));
    PureState psi = psi0;
    d.states.reserve(record.steps.size() + 1);
    d.z_series.reserve(record.steps.size() + 1);
    d.states.push_back(psi);
    d.z_series.push_back(expand_pure(psi, d.basis));
    for (const auto& s : record.steps) {
        apply_kraus_step(psi, s, record.n, record.gamma, record.dt);
        d.states.push_back(psi);
        d.z_series.push_back(expand_pure(psi, d.basis));
    }
    return d;
}

DecodedTrajectory decode(const MeasurementRecord& record, int weight_cutoff) {
    return reconstruct_series(record, mle_initial_state(record).psi0, weight_cutoff);
}

void write_decoded_csv(std::ostream& os, const DecodedTrajectory& d, double dt) {
    os << "step,t";
    for (const auto& p : d.basis) os << ',' << p.str();
    os << '\n';
    os.precision(17);
    for (std::size_t k = 0; k < d.z_series.size(); ++k) {
        os << k << ',' << k * dt;
        for (const auto& p : d.basis) os << ',' << d.z_series[k].get(p);
        os << '\n';
    }
}

}  // namespace qdiff
