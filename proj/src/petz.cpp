#include "qdiff/petz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "qdiff/states.hpp"

namespace qdiff {

Superop superop_of(const LinearMap& f, int dim) {
    Superop s(dim * dim, dim * dim);
    CMat e = CMat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            e(i, j) = 1.0;
            const CMat y = f(e);
            e(i, j) = 0.0;
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b) s(a * dim + b, i * dim + j) = y(a, b);
        }
    return s;
}

CMat apply_superop(const Superop& s, const CMat& x) {
    const Eigen::Index d = x.rows();
    CVec v(d * d);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b) v[a * d + b] = x(a, b);
    const CVec w = s * v;
    CMat y(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b) y(a, b) = w[a * d + b];
    return y;
}

CMat choi_matrix(const Superop& s) {
    const auto d = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(s.rows()))));
    CMat c(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index a = 0; a < d; ++a)
                for (Eigen::Index b = 0; b < d; ++b) c(i * d + a, j * d + b) = s(a * d + b, i * d + j);
    return c;
}

CMat depolarize(const CMat& x, int pos, double lambda) {
    const int m = qubits_of(x.rows());
    const Eigen::Index mask = Eigen::Index{1} << bit_of(pos, m);
    CMat y = lambda * x;
    const double mix = 0.5 * (1.0 - lambda);
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            if ((i & mask) != (j & mask)) continue;
            y(i, j) += mix * (x(i & ~mask, j & ~mask) + x(i | mask, j | mask));
        }
    return y;
}

double twirl_weight(double tau) { return std::numbers::pi / (2.0 * (std::cosh(std::numbers::pi * tau) + 1.0)); }

double twirl_transform(double omega) {
    if (std::abs(omega) < 1e-6) return 1.0 - omega * omega / 6.0;
    return omega / std::sinh(omega);
}

TauQuadrature TauQuadrature::gauss_legendre(int nodes, double cutoff) {
    if (nodes < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
    TauQuadrature q;
    for (int i = 0; i < nodes; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (nodes + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= nodes; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (nodes == 1) p0 = 1.0;
            dp = nodes * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const double tau = cutoff * x;
        q.nodes.push_back(tau);
        q.weights.push_back(cutoff * w * twirl_weight(tau));
    }
    return q;
}

CMat spd_deform(const CMat& rdm, double floor) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(rdm));
    RVec p = es.eigenvalues().cwiseMax(floor);
    p /= p.sum();
    return es.eigenvectors() * p.asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

struct Spectrum {
    CMat vectors;
    RVec values;
};

Spectrum floored_spectrum(const CMat& m, double floor) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(m));
    if (es.eigenvalues().minCoeff() < -1e-8) throw std::invalid_argument("petz: prior is not positive semidefinite");
    return {es.eigenvectors(), es.eigenvalues().cwiseMax(floor)};
}

CMat complex_power(const Spectrum& s, cplx a) {
    CVec d(s.values.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) d[k] = std::exp(a * std::log(s.values[k]));
    return s.vectors * d.asDiagonal() * s.vectors.adjoint();
}

// vec_row(A X B) = (A (x) B^T) vec_row(X)
Superop sandwich(const CMat& a, const CMat& b) { return kron(a, b.transpose()); }

Superop spectral_petz(const CMat& prior, const CMat& prior_next, const LinearMap& adj, double floor, bool twirl) {
    const Spectrum sp = floored_spectrum(prior, floor);
    const Spectrum sq = floored_spectrum(prior_next, floor);
    const auto d = prior.rows();
    const CMat& u = sp.vectors;
    const CMat& v = sq.vectors;
    Superop core(d * d, d * d);
    for (Eigen::Index b = 0; b < d; ++b)
        for (Eigen::Index b2 = 0; b2 < d; ++b2) {
            const CMat g = u.adjoint() * adj(v.col(b) * v.col(b2).adjoint()) * u;
            const double lq = 0.5 * (std::log(sq.values[b]) - std::log(sq.values[b2]));
            const double norm_in = 1.0 / std::sqrt(sq.values[b] * sq.values[b2]);
            for (Eigen::Index a = 0; a < d; ++a)
                for (Eigen::Index a2 = 0; a2 < d; ++a2) {
                    const double omega = lq - 0.5 * (std::log(sp.values[a]) - std::log(sp.values[a2]));
                    const double f = twirl ? twirl_transform(omega) : 1.0;
                    core(a * d + a2, b * d + b2) = std::sqrt(sp.values[a] * sp.values[a2]) * norm_in * f * g(a, a2);
                }
        }
    return sandwich(u, u.adjoint()) * core * sandwich(v.adjoint(), v);
}

Superop rotated_petz(const Spectrum& sp, const Spectrum& sq, const LinearMap& adj, double tau) {
    const cplx a(0.5, -0.5 * tau);
    const CMat left = complex_power(sp, a);
    const CMat right = complex_power(sp, std::conj(a));
    const CMat in_l = complex_power(sq, -a);
    const CMat in_r = complex_power(sq, -std::conj(a));
    const auto d = static_cast<int>(sp.values.size());
    return superop_of([&](const CMat& x) -> CMat { return left * adj(in_l * x * in_r) * right; }, d);
}

Superop quadrature_petz(const Spectrum& sp, const Spectrum& sq, const LinearMap& adj, int nodes, double cutoff) {
    const auto quad = TauQuadrature::gauss_legendre(nodes, cutoff);
    const auto d = sp.values.size();
    Superop s = Superop::Zero(d * d, d * d);
    for (std::size_t i = 0; i < quad.nodes.size(); ++i) s += quad.weights[i] * rotated_petz(sp, sq, adj, quad.nodes[i]);
    return s;
}

}  // namespace

Superop twirled_petz_superop(const CMat& prior, const CMat& prior_next, const LinearMap& forward_adjoint,
                             double floor) {
    return spectral_petz(prior, prior_next, forward_adjoint, floor, true);
}

Superop untwirled_petz_superop(const CMat& prior, const CMat& prior_next, const LinearMap& forward_adjoint,
                               double floor) {
    return spectral_petz(prior, prior_next, forward_adjoint, floor, false);
}

Superop twirled_petz_superop_quadrature(const CMat& prior, const CMat& prior_next, const LinearMap& forward_adjoint,
                                        int nodes, double cutoff, double floor, double tol) {
    const Spectrum sp = floored_spectrum(prior, floor);
    const Spectrum sq = floored_spectrum(prior_next, floor);
    Superop s = quadrature_petz(sp, sq, forward_adjoint, nodes, cutoff);
    const Superop s2 = quadrature_petz(sp, sq, forward_adjoint, 2 * nodes, cutoff);
    const double change = (s - s2).cwiseAbs().maxCoeff();
    if (change > tol)
        throw std::runtime_error("petz quadrature not converged: node doubling changed the map by " +
                                 std::to_string(change));
    return s2;
}

std::vector<CMat> depolarizing_jumps(int pos, int m, double gamma) {
    std::vector<CMat> jumps;
    for (int ax = 1; ax <= 3; ++ax) jumps.push_back(std::sqrt(gamma / 3.0) * embed_1q(pauli_2x2(ax), pos, m));
    return jumps;
}

CMat lindblad_apply(const std::vector<CMat>& jumps, const CMat& x) {
    CMat y = CMat::Zero(x.rows(), x.cols());
    for (const auto& l : jumps) {
        const CMat ll = l.adjoint() * l;
        y += l * x * l.adjoint() - 0.5 * (ll * x + x * ll);
    }
    return y;
}

Superop petz_lindbladian_tau(const CMat& prior, const std::vector<CMat>& jumps, const LinearMap& forward, double tau) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(prior));
    if (es.eigenvalues().minCoeff() <= 0.0) throw std::invalid_argument("petz_lindbladian: prior is rank deficient");
    const Spectrum s{es.eigenvectors(), es.eigenvalues()};
    const cplx a(0.5, -0.5 * tau);
    const CMat pa = complex_power(s, a);
    const CMat pma = complex_power(s, -a);
    // Daleckii-Krein derivative of rho^a along forward(rho).
    const CMat dir = s.vectors.adjoint() * forward(prior) * s.vectors;
    const auto d = prior.rows();
    CMat dpa(d, d);
    for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l) {
            const double pk = s.values[k], pl = s.values[l];
            cplx ratio;
            if (std::abs(pk - pl) < 1e-12 * std::max(pk, pl))
                ratio = a * std::exp((a - 1.0) * std::log(pk));
            else
                ratio = (std::exp(a * std::log(pk)) - std::exp(a * std::log(pl))) / (pk - pl);
            dpa(k, l) = dir(k, l) * ratio;
        }
    dpa = s.vectors * dpa * s.vectors.adjoint();
    CMat inner = dpa * pma;
    std::vector<CMat> lb;
    for (const auto& l : jumps) {
        inner += 0.5 * pa * l.adjoint() * l * pma;
        lb.push_back(pa * l.adjoint() * pma);
    }
    const CMat h = -0.5 * kI * inner + (-0.5 * kI * inner).adjoint();
    return superop_of([&](const CMat& x) -> CMat { return -kI * (h * x - x * h) + lindblad_apply(lb, x); },
                      static_cast<int>(d));
}

Superop petz_lindbladian(const CMat& prior, const std::vector<CMat>& jumps, const LinearMap& forward,
                         const TauQuadrature& quad) {
    const auto d = prior.rows();
    Superop g = Superop::Zero(d * d, d * d);
    for (std::size_t i = 0; i < quad.nodes.size(); ++i)
        g += quad.weights[i] * petz_lindbladian_tau(prior, jumps, forward, quad.nodes[i]);
    return g;
}

RecoverySchedule build_schedule(const std::vector<int>& forward_qubits, int n, int halfwidth, const CMat& rho0,
                                double lambda) {
    if (halfwidth < 0 || 2 * halfwidth + 1 > 5) throw std::invalid_argument("build_schedule: region width out of range");
    if (rho0.rows() != static_cast<Eigen::Index>(dim_of(n))) throw std::invalid_argument("build_schedule: rho0 size");
    RecoverySchedule sched;
    sched.n = n;
    sched.lambda = lambda;
    std::vector<std::vector<int>> regions(n);
    std::vector<CMat> reduced(n);
    for (int j = 0; j < n; ++j) {
        for (int q = std::max(0, j - halfwidth); q <= std::min(n - 1, j + halfwidth); ++q) regions[j].push_back(q);
        reduced[j] = partial_trace(rho0, regions[j]);
    }
    std::vector<int> counts(n, 0);
    std::vector<PetzStep> steps;
    steps.reserve(forward_qubits.size());
    for (int j : forward_qubits) {
        if (j < 0 || j >= n) throw std::invalid_argument("build_schedule: qubit out of range");
        PetzStep st;
        st.region = regions[j];
        st.position = static_cast<int>(std::find(st.region.begin(), st.region.end(), j) - st.region.begin());
        st.prior = reduced[j];
        for (std::size_t r = 0; r < st.region.size(); ++r)
            st.prior = depolarize(st.prior, static_cast<int>(r), std::pow(lambda, counts[st.region[r]]));
        steps.push_back(std::move(st));
        ++counts[j];
    }
    sched.steps.assign(steps.rbegin(), steps.rend());
    return sched;
}

CMat apply_local(const CMat& rho, const Superop& s, const std::vector<int>& region) {
    const int n = qubits_of(rho.rows());
    const int m = static_cast<int>(region.size());
    const Eigen::Index d = Eigen::Index{1} << m;
    if (s.rows() != d * d) throw std::invalid_argument("apply_local: superoperator size does not match region");
    std::vector<int> rest;
    for (int q = 0; q < n; ++q)
        if (std::find(region.begin(), region.end(), q) == region.end()) rest.push_back(q);
    const Eigen::Index r = Eigen::Index{1} << rest.size();
    auto offsets = [n](const std::vector<int>& qs) {
        const int k = static_cast<int>(qs.size());
        std::vector<Eigen::Index> off(std::size_t{1} << k, 0);
        for (std::size_t a = 0; a < off.size(); ++a)
            for (int i = 0; i < k; ++i)
                if ((a >> (k - 1 - i)) & 1U) off[a] |= Eigen::Index{1} << bit_of(qs[i], n);
        return off;
    };
    const auto ro = offsets(region);
    const auto so = offsets(rest);
    CMat blocks(d * d, r * r);
    for (Eigen::Index s2 = 0; s2 < r; ++s2)
        for (Eigen::Index s1 = 0; s1 < r; ++s1)
            for (Eigen::Index a2 = 0; a2 < d; ++a2)
                for (Eigen::Index a1 = 0; a1 < d; ++a1)
                    blocks(a1 * d + a2, s1 * r + s2) = rho(ro[a1] | so[s1], ro[a2] | so[s2]);
    const CMat out = s * blocks;
    CMat y(rho.rows(), rho.cols());
    for (Eigen::Index s2 = 0; s2 < r; ++s2)
        for (Eigen::Index s1 = 0; s1 < r; ++s1)
            for (Eigen::Index a2 = 0; a2 < d; ++a2)
                for (Eigen::Index a1 = 0; a1 < d; ++a1)
                    y(ro[a1] | so[s1], ro[a2] | so[s2]) = out(a1 * d + a2, s1 * r + s2);
    return y;
}

CMat forward_global(const CMat& rho0, const std::vector<int>& counts, double lambda) {
    CMat rho = rho0;
    for (std::size_t q = 0; q < counts.size(); ++q)
        if (counts[q] > 0) rho = depolarize(rho, static_cast<int>(q), std::pow(lambda, counts[q]));
    return rho;
}

RecoveryResult run_recovery(const RecoverySchedule& schedule, const CMat& start, const CMat& rho0,
                            const RecoveryOptions& options) {
    const int n = schedule.n;
    if (start.rows() != static_cast<Eigen::Index>(dim_of(n))) throw std::invalid_argument("run_recovery: start size");
    const bool pure_ref = purity(rho0) > 1.0 - 1e-10;
    CVec ref;
    if (pure_ref) {
        Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(rho0));
        ref = es.eigenvectors().col(es.eigenvectors().cols() - 1);
    }
    auto fid0 = [&](const CMat& rho) { return pure_ref ? (ref.adjoint() * rho * ref)(0, 0).real() : fidelity(rho, rho0); };

    const int total = static_cast<int>(schedule.steps.size());
    std::vector<int> counts(n, 0);
    for (const auto& st : schedule.steps) ++counts[st.region[st.position]];

    RecoveryResult res;
    res.state = start;
    auto record = [&](int step, double min_eig) {
        RecoveryPoint pt;
        pt.step = step;
        pt.fidelity_initial = fid0(res.state);
        pt.min_prior_eig = min_eig;
        const int done = total - step;
        if (options.prior_fidelity_every > 0 && (done % options.prior_fidelity_every == 0 || step == 0))
            pt.fidelity_forward = fidelity(hermitian_part(res.state), forward_global(rho0, counts, schedule.lambda));
        res.trace.push_back(pt);
    };
    record(total, std::nan(""));

    for (int i = 0; i < total; ++i) {
        const PetzStep& st = schedule.steps[i];
        const double min_eig = Eigen::SelfAdjointEigenSolver<CMat>(hermitian_part(st.prior), Eigen::EigenvaluesOnly)
                                   .eigenvalues()
                                   .minCoeff();
        const CMat prior = spd_deform(st.prior, options.floor);
        const CMat next = depolarize(prior, st.position, schedule.lambda);
        const LinearMap adj = [&](const CMat& x) { return depolarize(x, st.position, schedule.lambda); };
        Superop s;
        if (options.variant == PetzVariant::Untwirled) s = untwirled_petz_superop(prior, next, adj, options.floor);
        else if (options.tau_nodes > 0)
            s = twirled_petz_superop_quadrature(prior, next, adj, options.tau_nodes, options.tau_cutoff, options.floor);
        else s = twirled_petz_superop(prior, next, adj, options.floor);
        res.state = apply_local(res.state, s, st.region);
        const double tr = res.state.trace().real();
        if (std::abs(tr - 1.0) > options.trace_tolerance)
            throw std::runtime_error("run_recovery: trace drifted to " + std::to_string(tr));
        --counts[st.region[st.position]];
        record(total - 1 - i, min_eig);
    }
    return res;
}

void write_recovery_csv(std::ostream& os, const RecoveryResult& r, double dt) {
    os.precision(17);
    os << "step,t,fidelity,fidelity_forward,min_prior_eig\n";
    for (auto it = r.trace.rbegin(); it != r.trace.rend(); ++it) {
        os << it->step << ',' << it->step * dt << ',' << it->fidelity_initial << ',';
        if (it->fidelity_forward >= 0.0) os << it->fidelity_forward;
        os << ',';
        if (!std::isnan(it->min_prior_eig)) os << it->min_prior_eig;
        os << '\n';
    }
}

RMat tfim_hamiltonian(int n, double J, double Bx) {
    if (n < 1 || n > 12) throw std::invalid_argument("tfim_hamiltonian: need 1 <= n <= 12");
    const auto dim = static_cast<Eigen::Index>(dim_of(n));
    RMat h = RMat::Zero(dim, dim);
    for (Eigen::Index s = 0; s < dim; ++s) {
        double diag = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            const int zi = ((s >> bit_of(i, n)) & 1) ? -1 : 1;
            const int zj = ((s >> bit_of(i + 1, n)) & 1) ? -1 : 1;
            diag -= J * zi * zj;
        }
        h(s, s) = diag;
        for (int i = 0; i < n; ++i) h(s ^ (Eigen::Index{1} << bit_of(i, n)), s) -= Bx;
    }
    return h;
}

GroundState tfim_ground_state(int n, double J, double Bx) {
    Eigen::SelfAdjointEigenSolver<RMat> es(tfim_hamiltonian(n, J, Bx));
    GroundState g;
    RVec v = es.eigenvectors().col(0);
    Eigen::Index imax;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) v = -v;
    g.psi = v.cast<cplx>();
    g.energy = es.eigenvalues()[0];
    g.gap = es.eigenvalues().size() > 1 ? es.eigenvalues()[1] - es.eigenvalues()[0] : 0.0;
    g.degenerate = es.eigenvalues().size() > 1 && g.gap < 1e-8;
    return g;
}

}  // namespace qdiff
