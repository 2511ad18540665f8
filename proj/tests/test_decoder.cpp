#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "qdiff/decoder.hpp"

using namespace qdiff;

TEST(Decoder, AllPlusZRecordGivesZeroState) {
    MeasurementRecord r{0, 0, 1.0, 0.01, 1, std::vector<MeasurementStep>(300, {0, Pauli::Z, 1})};
    auto res = mle_initial_state(r);
    EXPECT_FALSE(res.degenerate);
    EXPECT_NEAR(std::norm(res.psi0[0]), 1.0, 1e-12);
}

TEST(Decoder, ZeroGammaRecordIsDegenerate) {
    auto tr = simulate_trajectory(basis_state(2, 0), {ScheduleMode::UniformRandom, 1}, 0.0, 0.01, 1.0, 0);
    auto res = mle_initial_state(tr.record);
    EXPECT_TRUE(res.degenerate);
    EXPECT_NEAR(std::norm(res.psi0[0]), 1.0, 1e-12);
}

TEST(Decoder, EmptyRecordRejected) {
    MeasurementRecord r{0, 0, 1.0, 0.01, 1, {}};
    EXPECT_THROW(mle_initial_state(r), std::invalid_argument);
}

TEST(Decoder, MleMatchesDenseTopEigenvector) {
    Rng rng(1, 0);
    for (int trial = 0; trial < 5; ++trial) {
        auto psi0 = random_pure_state(3, rng);
        auto tr = simulate_trajectory(psi0, {ScheduleMode::UniformRandom, 2}, 1.0, 0.02, 1.0, trial);
        CMat k = accumulated_kraus(tr.record, tr.record.steps.size());
        Eigen::SelfAdjointEigenSolver<CMat> es(k.adjoint() * k);
        CVec top = es.eigenvectors().col(7);
        auto res = mle_initial_state(tr.record);
        EXPECT_NEAR(std::norm(top.dot(res.psi0)), 1.0, 1e-9);
        EXPECT_NEAR(res.log_likelihood, std::log(es.eigenvalues()[7]), 1e-9);
        EXPECT_NEAR(res.psi0.norm(), 1.0, 1e-12);
    }
}

TEST(Decoder, OverlapGrowsTowardTwoThirdsForRandomAxes) {
    // For a Haar-random qubit and a single copy, the best average overlap
    // achievable by any estimate is 2/3.
    const int m = 1500;
    std::vector<double> means;
    for (double T : {0.05, 0.5, 3.0}) {
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < m; ++i) {
            Rng rng(77, i);
            auto psi0 = random_pure_state(1, rng);
            auto tr = simulate_trajectory(psi0, {ScheduleMode::UniformRandom, 5}, 1.0, 0.01, T, i);
            const double ov = std::norm(mle_initial_state(tr.record).psi0.dot(psi0));
            sum += ov;
            sumsq += ov * ov;
        }
        const double mean = sum / m;
        means.push_back(mean);
        if (T == 3.0) {
            const double se = std::sqrt((sumsq / m - mean * mean) / m);
            EXPECT_NEAR(mean, 2.0 / 3.0, 4.0 * se);
        }
    }
    EXPECT_LT(means[0], means[1]);
    EXPECT_LT(means[1], means[2] + 0.01);
}

TEST(Decoder, ZOnlyRecordsRecoverZeroStateWithHighOverlap) {
    const double gamma = 1.0, dt = 0.01;
    double total = 0.0;
    const int m = 200;
    for (int i = 0; i < m; ++i) {
        Rng rng(3, i);
        PureState psi = basis_state(1, 0);
        MeasurementRecord r{3, static_cast<std::uint64_t>(i), gamma, dt, 1, {}};
        for (int k = 0; k < 300; ++k) {
            MeasurementStep s{0, Pauli::Z, 1};
            s.outcome = rng.uniform() < outcome_probability(psi, s, 1, gamma, dt) ? 1 : -1;
            apply_kraus_step(psi, s, 1, gamma, dt);
            r.steps.push_back(s);
        }
        total += std::norm(mle_initial_state(r).psi0[0]);
    }
    EXPECT_GT(total / m, 0.9);
}

TEST(Decoder, ReconstructionReproducesSimulator) {
    Rng rng(4, 0);
    auto psi0 = random_pure_state(2, rng);
    auto tr = simulate_trajectory(psi0, {ScheduleMode::UniformRandom, 4}, 1.0, 0.01, 1.0, 9, true);
    auto d = reconstruct_series(tr.record, psi0);
    ASSERT_EQ(d.states.size(), tr.states.size());
    EXPECT_EQ((d.states[0] - psi0).norm(), 0.0);
    for (std::size_t k = 0; k < d.states.size(); ++k) {
        EXPECT_LT((d.states[k] - tr.states[k]).norm(), 1e-9);
        EXPECT_DOUBLE_EQ(d.z_series[k].get(PauliString(2)), 1.0);
        for (const auto& p : d.basis) EXPECT_NEAR(d.z_series[k].get(p), p.expectation(d.states[k]), 1e-10);
    }
    EXPECT_EQ(d.basis.size(), 16u);
}

TEST(Decoder, WeightCutoffDefaults) {
    EXPECT_EQ(default_weight_cutoff(1), 1);
    EXPECT_EQ(default_weight_cutoff(2), 2);
    EXPECT_EQ(default_weight_cutoff(5), 2);
    auto tr = simulate_trajectory(basis_state(4, 0), {ScheduleMode::UniformRandom, 4}, 1.0, 0.01, 0.1, 0);
    auto d = decode(tr.record);
    EXPECT_EQ(d.basis.size(), 1u + 12u + 6u * 9u);
    std::ostringstream os;
    write_decoded_csv(os, d, 0.01);
    EXPECT_EQ(os.str().substr(0, 11), "step,t,IIII");
}
