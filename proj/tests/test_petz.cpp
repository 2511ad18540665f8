#include <cmath>
#include <numbers>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "qdiff/pauli.hpp"
#include "qdiff/petz.hpp"
#include "qdiff/rng.hpp"
#include "qdiff/states.hpp"

using namespace qdiff;

namespace {

CMat full_rank_state(int n, Rng& rng) { return random_density_matrix(n, static_cast<int>(dim_of(n)), rng); }

LinearMap depol_map(int pos, double lambda) {
    return [pos, lambda](const CMat& x) { return depolarize(x, pos, lambda); };
}

double max_abs(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Petz, SuperopRoundTripAndChoi) {
    Rng rng(1, 0);
    CMat u = random_unitary(1, rng);
    Superop s = superop_of([&](const CMat& x) -> CMat { return u * x * u.adjoint(); }, 2);
    CMat x = random_hermitian(2, rng);
    EXPECT_LT(max_abs(apply_superop(s, x) - u * x * u.adjoint()), 1e-14);
    Eigen::SelfAdjointEigenSolver<CMat> es(choi_matrix(s));
    EXPECT_NEAR(es.eigenvalues()[3], 2.0, 1e-12);
    EXPECT_NEAR(es.eigenvalues()[0], 0.0, 1e-12);
}

TEST(Petz, DepolarizeScalesPauliComponents) {
    Rng rng(2, 0);
    CMat rho = full_rank_state(3, rng);
    CMat out = depolarize(rho, 1, 0.7);
    for (const auto& p : all_paulis(3)) {
        const double scale = p.at(1) == Pauli::I ? 1.0 : 0.7;
        EXPECT_NEAR(p.trace_with(out).real(), scale * p.trace_with(rho).real(), 1e-13) << p.str();
    }
}

TEST(Petz, TwirlWeightAndTransform) {
    auto q = TauQuadrature::gauss_legendre(201, 12.0);
    double mass = 0.0;
    for (double w : q.weights) mass += w;
    EXPECT_NEAR(mass, 1.0, 1e-10);
    for (double omega : {0.0, 0.3, 2.0, 7.0}) {
        double ft = 0.0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i) ft += q.weights[i] * std::cos(omega * q.nodes[i]);
        EXPECT_NEAR(ft, twirl_transform(omega), 1e-8) << omega;
    }
    auto g = TauQuadrature::gauss_legendre(5, 1.0);
    double x8 = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) x8 += g.weights[i] / twirl_weight(g.nodes[i]) * std::pow(g.nodes[i], 8);
    EXPECT_NEAR(x8, 2.0 / 9.0, 1e-13);
}

TEST(Petz, SpdDeform) {
    CMat a = CVec(RVec((Eigen::Vector4d() << 0.6, 0.5, -0.1, 0.0).finished()).cast<cplx>()).asDiagonal();
    CMat out = spd_deform(a, 1e-8);
    const double norm = 1.1 + 2e-8;
    EXPECT_NEAR(out(0, 0).real(), 0.6 / norm, 1e-15);
    EXPECT_NEAR(out(2, 2).real(), 1e-8 / norm, 1e-15);
    EXPECT_NEAR(out(3, 3).real(), 1e-8 / norm, 1e-15);
    CMat mixed = CMat::Identity(4, 4) / 4.0;
    EXPECT_LT(max_abs(spd_deform(mixed) - mixed), 1e-15);
    Rng rng(3, 0);
    CMat rho = full_rank_state(2, rng);
    EXPECT_LT(max_abs(spd_deform(rho, 1e-12) - rho), 1e-12);
}

TEST(Petz, IdentityForwardGivesIdentity) {
    Rng rng(4, 0);
    CMat rho = full_rank_state(2, rng);
    Superop s = twirled_petz_superop(rho, rho, [](const CMat& x) { return x; });
    EXPECT_LT(max_abs(s - Superop::Identity(16, 16)), 1e-12);
}

TEST(Petz, MaximallyMixedPriorGivesAdjointChannel) {
    // With rho = 1/2 both priors are scalars and the map reduces to F^dag,
    // which for depolarization is F itself.
    const double lambda = step_lambda(1.0, 0.01);
    CMat mixed = Mat2::Identity() / 2.0;
    Superop s = twirled_petz_superop(mixed, depolarize(mixed, 0, lambda), depol_map(0, lambda));
    Superop f = superop_of(depol_map(0, lambda), 2);
    EXPECT_LT(max_abs(s - f), 1e-14);
}

TEST(Petz, FixedPointCompletePositiveTracePreserving) {
    Rng rng(5, 0);
    for (int n : {1, 2, 3}) {
        for (int trial = 0; trial < 3; ++trial) {
            CMat prior = full_rank_state(n, rng);
            const int pos = trial % n;
            const double lambda = step_lambda(1.0, 0.05);
            CMat next = depolarize(prior, pos, lambda);
            for (bool twirl : {true, false}) {
                Superop s = twirl ? twirled_petz_superop(prior, next, depol_map(pos, lambda))
                                  : untwirled_petz_superop(prior, next, depol_map(pos, lambda));
                EXPECT_LT(max_abs(apply_superop(s, next) - prior), 1e-8);
                Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(choi_matrix(s)));
                EXPECT_GT(es.eigenvalues().minCoeff(), -1e-8);
                CMat x = random_hermitian(static_cast<int>(dim_of(n)), rng);
                EXPECT_NEAR(std::abs(apply_superop(s, x).trace() - x.trace()), 0.0, 1e-10);
            }
        }
    }
}

TEST(Petz, QuadratureMatchesSpectralOnWellConditionedPriors) {
    Rng rng(6, 0);
    for (int n : {1, 2}) {
        // Mix with the identity to keep the spectrum away from zero.
        CMat prior = 0.5 * full_rank_state(n, rng) + 0.5 * CMat::Identity(dim_of(n), dim_of(n)) / double(dim_of(n));
        const double lambda = step_lambda(1.0, 0.1);
        CMat next = depolarize(prior, 0, lambda);
        Superop a = twirled_petz_superop(prior, next, depol_map(0, lambda));
        Superop b = twirled_petz_superop_quadrature(prior, next, depol_map(0, lambda));
        EXPECT_LT(max_abs(a - b), 1e-6);
    }
}

TEST(Petz, QuadratureRejectsNearSingularPriors) {
    CMat prior = CMat::Zero(2, 2);
    prior(0, 0) = 1.0 - 1e-7;
    prior(1, 1) = 1e-7;
    Rng rng(7, 0);
    CMat u = random_unitary(1, rng);
    prior = u * prior * u.adjoint();
    const double lambda = step_lambda(1.0, 0.01);
    CMat next = depolarize(prior, 0, lambda);
    EXPECT_THROW(twirled_petz_superop_quadrature(prior, next, depol_map(0, lambda), 9), std::runtime_error);
}

TEST(Petz, UntwirledMatchesTwirledOnCommutingData) {
    // Diagonal prior, diagonal input: every operator commutes and the
    // twirl phases cancel.
    CMat prior = CMat::Zero(4, 4);
    prior.diagonal() << 0.4, 0.3, 0.2, 0.1;
    const double lambda = step_lambda(1.0, 0.1);
    CMat next = depolarize(prior, 1, lambda);
    Superop a = twirled_petz_superop(prior, next, depol_map(1, lambda));
    Superop b = untwirled_petz_superop(prior, next, depol_map(1, lambda));
    CMat x = CMat::Zero(4, 4);
    x.diagonal() << 0.1, 0.5, 0.15, 0.25;
    EXPECT_LT(max_abs(apply_superop(a, x) - apply_superop(b, x)), 1e-14);
    // Classical Bayes reweighting of the diagonal.
    CMat y = apply_superop(b, x);
    CMat expect = prior * depolarize(CMat(next.diagonal().cwiseInverse().asDiagonal() * x), 1, lambda);
    EXPECT_LT(max_abs(y - expect), 1e-14);
}

TEST(Petz, LindbladianMatchesMapToSecondOrder) {
    Rng rng(8, 0);
    const double gamma = 1.0;
    for (int n : {1, 2}) {
        CMat prior = 0.5 * full_rank_state(n, rng) + 0.5 * CMat::Identity(dim_of(n), dim_of(n)) / double(dim_of(n));
        auto jumps = depolarizing_jumps(0, n, gamma);
        LinearMap fwd = [&](const CMat& x) { return lindblad_apply(jumps, x); };
        Superop g = petz_lindbladian(prior, jumps, fwd, TauQuadrature::gauss_legendre(65, 8.0));
        Superop g0 = petz_lindbladian_tau(prior, jumps, fwd, 0.0);
        std::vector<double> err, err0;
        for (double dt : {0.02, 0.01}) {
            const double lambda = step_lambda(gamma, dt);
            CMat next = depolarize(prior, 0, lambda);
            Superop r = twirled_petz_superop(prior, next, depol_map(0, lambda), 1e-14);
            Superop r0 = untwirled_petz_superop(prior, next, depol_map(0, lambda), 1e-14);
            err.push_back(max_abs(CMat((g * dt).exp()) - r));
            err0.push_back(max_abs(CMat((g0 * dt).exp()) - r0));
        }
        EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.2) << n;
        EXPECT_NEAR(std::log2(err0[0] / err0[1]), 2.0, 0.2) << n;
    }
}

TEST(Petz, LindbladianMaximallyMixedIsSelfAdjoint) {
    auto jumps = depolarizing_jumps(1, 2, 1.0);
    CMat mixed = CMat::Identity(4, 4) / 4.0;
    Superop g = petz_lindbladian(mixed, jumps, [&](const CMat& x) { return lindblad_apply(jumps, x); },
                                 TauQuadrature::gauss_legendre(129, 8.0));
    EXPECT_LT(max_abs(g - g.adjoint()), 1e-12);
    Superop fwd = superop_of([&](const CMat& x) { return lindblad_apply(jumps, x); }, 4);
    EXPECT_LT(max_abs(g - fwd), 1e-10);
}

TEST(Petz, ApplyLocalMatchesPauliEmbedding) {
    Rng rng(9, 0);
    CMat u = random_unitary(2, rng);
    const std::vector<int> region{1, 3};
    // Embed u on qubits {1,3} of 4 through its Pauli expansion.
    CMat full = CMat::Zero(16, 16);
    for (const auto& p : all_paulis(2)) {
        const cplx c = (p.matrix().adjoint() * u).trace() / 4.0;
        PauliString e(4);
        e.set(1, p.at(0));
        e.set(3, p.at(1));
        full += c * e.matrix();
    }
    CMat rho = full_rank_state(4, rng);
    Superop s = superop_of([&](const CMat& x) -> CMat { return u * x * u.adjoint(); }, 4);
    EXPECT_LT(max_abs(apply_local(rho, s, region) - full * rho * full.adjoint()), 1e-13);
}

TEST(Petz, ScheduleRegionsAndPriors) {
    Rng rng(10, 0);
    CMat rho3 = projector(random_pure_state(3, rng));
    std::vector<int> rr3{0, 1, 2, 0, 1, 2};
    auto s3 = build_schedule(rr3, 3, 1, rho3, 0.9);
    EXPECT_EQ(s3.steps.size(), 6u);
    EXPECT_EQ(s3.steps[0].region, (std::vector<int>{1, 2}));
    EXPECT_EQ(s3.steps[1].region, (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(s3.steps[2].region, (std::vector<int>{0, 1}));
    EXPECT_EQ(s3.steps[1].position, 1);
    // Prior before the last forward step equals the reduced forward state.
    CMat expect = partial_trace(forward_global(rho3, {2, 2, 1}, 0.9), {1, 2});
    EXPECT_LT(max_abs(s3.steps[0].prior - expect), 1e-14);

    CMat rho10 = CMat::Zero(1024, 1024);
    rho10(0, 0) = 1.0;
    std::vector<int> rr;
    for (int k = 0; k < 20; ++k) rr.push_back(k % 10);
    auto s10 = build_schedule(rr, 10, 1, rho10, 0.99);
    EXPECT_EQ(s10.steps.size(), 20u);
    EXPECT_EQ(s10.steps.back().region, (std::vector<int>{0, 1}));
    EXPECT_EQ(s10.steps.front().region, (std::vector<int>{8, 9}));
    EXPECT_EQ(s10.steps[5].region, (std::vector<int>{3, 4, 5}));
    EXPECT_THROW(build_schedule(rr, 10, 3, rho10, 0.99), std::invalid_argument);
}

TEST(Petz, RecoveryZeroStepsAndExactFullRegion) {
    Rng rng(11, 0);
    CMat rho0 = projector(random_pure_state(3, rng));
    RecoverySchedule empty = build_schedule({}, 3, 1, rho0, 0.9);
    auto r0 = run_recovery(empty, rho0, rho0);
    EXPECT_EQ((r0.state - rho0).norm(), 0.0);
    ASSERT_EQ(r0.trace.size(), 1u);

    // Regions cover the whole chain, so each step inverts its forward step
    // exactly on the prior and the protocol returns rho0 up to the floor.
    const double lambda = step_lambda(1.0, 0.05);
    std::vector<int> rr;
    for (int k = 0; k < 30; ++k) rr.push_back(k % 3);
    std::vector<int> counts{10, 10, 10};
    auto sched = build_schedule(rr, 3, 2, rho0, lambda);
    CMat start = forward_global(rho0, counts, lambda);
    RecoveryOptions opt;
    opt.prior_fidelity_every = 10;
    auto res = run_recovery(sched, start, rho0, opt);
    EXPECT_GT(res.trace.back().fidelity_initial, 1.0 - 1e-5);
    EXPECT_LT(res.trace.front().fidelity_initial, 0.95);
    for (const auto& pt : res.trace)
        if (pt.fidelity_forward >= 0.0) EXPECT_GT(pt.fidelity_forward, 1.0 - 1e-5) << pt.step;
}

TEST(Petz, SmallTfimRecoveryImprovesFidelity) {
    const int n = 5;
    auto g = tfim_ground_state(n, 1.0, 2.0);
    CMat rho0 = projector(g.psi);
    const double dt = 0.05, lambda = step_lambda(1.0, dt);
    std::vector<int> rr;
    for (int k = 0; k < 60; ++k) rr.push_back(k % n);
    auto sched = build_schedule(rr, n, 1, rho0, lambda);
    CMat start = forward_global(rho0, std::vector<int>(n, 12), lambda);
    auto res = run_recovery(sched, start, rho0);
    EXPECT_GT(res.trace.back().fidelity_initial, res.trace.front().fidelity_initial + 0.2);
    EXPECT_NEAR(res.state.trace().real(), 1.0, 1e-10);
}

TEST(Petz, CmiMonotoneAndSingleStepBound) {
    Rng rng(12, 0);
    int checked = 0;
    for (int n : {3, 4, 5}) {
        for (int trial = 0; trial < 4; ++trial) {
            CMat rho = trial % 2 == 0 ? full_rank_state(n, rng) : projector(tfim_ground_state(n, 1.0, 1.0 + trial).psi);
            const std::vector<int> a{0}, b{1};
            std::vector<int> c;
            for (int q = 2; q < n; ++q) c.push_back(q);
            const double lambda = step_lambda(1.0, 0.02);
            CMat next = depolarize(rho, 0, lambda);
            const double drop = cmi(rho, a, b, c) - cmi(next, a, b, c);
            EXPECT_GE(drop, -1e-9);
            CMat prior = partial_trace(rho, {0, 1});
            Superop s = twirled_petz_superop(prior, depolarize(prior, 0, lambda), depol_map(0, lambda));
            CMat rec = apply_local(next, s, {0, 1});
            const double dist = trace_norm_hermitian(hermitian_part(rec - rho));
            EXPECT_LE(dist * dist, 2.0 * std::numbers::ln2 * drop + 1e-8);
            ++checked;
        }
    }
    EXPECT_EQ(checked, 12);
}

TEST(Petz, TfimGroundStates) {
    auto para = tfim_ground_state(4, 0.0, 1.0);
    EXPECT_NEAR(std::abs(para.psi.sum()), 4.0, 1e-10);  // |+>^4 has all amplitudes 1/4
    EXPECT_NEAR(para.energy, -4.0, 1e-12);
    EXPECT_TRUE(tfim_ground_state(4, 1.0, 0.0).degenerate);
    // Dense Pauli-sum oracle.
    CMat h = -PauliString::parse("ZZ").matrix() - PauliString::parse("XI").matrix() - PauliString::parse("IX").matrix();
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    auto g = tfim_ground_state(2, 1.0, 1.0);
    EXPECT_NEAR(g.energy, es.eigenvalues()[0], 1e-12);
    EXPECT_NEAR(g.energy, -std::sqrt(5.0), 1e-12);
    EXPECT_NEAR(std::norm(es.eigenvectors().col(0).dot(g.psi)), 1.0, 1e-12);
    EXPECT_FALSE(g.degenerate);
}
