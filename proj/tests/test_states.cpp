#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "qdiff/states.hpp"

using namespace qdiff;

TEST(States, TraceDistancePureExamples) {
    auto z0 = basis_state(1, 0), z1 = basis_state(1, 1);
    EXPECT_NEAR(trace_distance_pure(z0, z0), 0.0, 1e-15);
    EXPECT_NEAR(trace_distance_pure(z0, z1), std::sqrt(2.0), 1e-15);
    CVec plus(2);
    plus << 1, 1;
    EXPECT_NEAR(trace_distance_pure(z0, normalized(plus)), 1.0, 1e-15);
}

TEST(States, TraceDistanceTriangleInequality) {
    Rng rng(1, 0);
    for (int t = 0; t < 200; ++t) {
        auto a = random_pure_state(2, rng), b = random_pure_state(2, rng), c = random_pure_state(2, rng);
        EXPECT_LE(trace_distance_pure(a, c), trace_distance_pure(a, b) + trace_distance_pure(b, c) + 1e-12);
    }
}

TEST(States, FidelityExamples) {
    Rng rng(2, 0);
    auto rho = random_density_matrix(2, 3, rng);
    EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-10);
    EXPECT_NEAR(fidelity(projector(basis_state(1, 0)), projector(basis_state(1, 1))), 0.0, 1e-12);
    EXPECT_NEAR(fidelity(CMat::Identity(2, 2) / 2.0, projector(basis_state(1, 0))), 0.5, 1e-12);
}

TEST(States, FidelityPureMatchesOverlap) {
    Rng rng(3, 0);
    auto a = random_pure_state(3, rng), b = random_pure_state(3, rng);
    EXPECT_NEAR(fidelity(projector(a), projector(b)), std::norm(a.dot(b)), 1e-8);
    EXPECT_NEAR(fidelity_pure(a, projector(b)), std::norm(a.dot(b)), 1e-14);
}

TEST(States, FidelitySymmetricAndMonotoneUnderPartialTrace) {
    Rng rng(4, 0);
    for (int t = 0; t < 30; ++t) {
        auto a = random_density_matrix(2, 2, rng), b = random_density_matrix(2, 4, rng);
        const double f = fidelity(a, b);
        EXPECT_NEAR(f, fidelity(b, a), 1e-9);
        EXPECT_GE(fidelity(partial_trace(a, {0}), partial_trace(b, {0})) + 1e-9, f);
    }
}

TEST(States, FidelityRejectsNonPhysical) {
    CMat bad = CMat::Zero(2, 2);
    bad(0, 0) = 1.5;
    bad(1, 1) = -0.5;
    EXPECT_THROW(fidelity(bad, bad), std::invalid_argument);
}

TEST(States, QubitFidelityClosedForm) {
    // For qubits F = Tr(ab) + 2 sqrt(det a det b).
    Rng rng(5, 0);
    for (int t = 0; t < 20; ++t) {
        auto a = random_density_matrix(1, 2, rng), b = random_density_matrix(1, 2, rng);
        const double closed = (a * b).trace().real() + 2.0 * std::sqrt(a.determinant().real() * b.determinant().real());
        EXPECT_NEAR(fidelity(a, b), closed, 1e-10);
    }
}

TEST(States, PartialTraceOfProduct) {
    Rng rng(6, 0);
    auto a = random_density_matrix(1, 2, rng), b = random_density_matrix(1, 2, rng), c = random_density_matrix(1, 2, rng);
    CMat abc = kron(kron(a, b), c);
    EXPECT_LT((partial_trace(abc, {1}) - b).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((partial_trace(abc, {0, 2}) - kron(a, c)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((partial_trace(abc, {2, 0}) - kron(c, a)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(States, CmiExamples) {
    Rng rng(7, 0);
    auto a = random_density_matrix(1, 2, rng), b = random_density_matrix(1, 2, rng), c = random_density_matrix(1, 2, rng);
    EXPECT_NEAR(cmi(kron(kron(a, b), c), {0}, {1}, {2}), 0.0, 1e-10);

    CVec ghz = CVec::Zero(8);
    ghz[0] = ghz[7] = 1.0 / std::sqrt(2.0);
    // S(AB)=S(BC)=S(B)=S(ABC)+ln2 with S(ABC)=0.
    EXPECT_NEAR(cmi(projector(ghz), {0}, {1}, {2}), std::log(2.0), 1e-10);

    EXPECT_NEAR(cmi(CMat::Identity(8, 8) / 8.0, {0}, {1}, {2}), 0.0, 1e-10);
    EXPECT_THROW(cmi(CMat::Identity(8, 8) / 8.0, {0}, {0}, {2}), std::invalid_argument);
}

TEST(States, CmiNonNegativeAndReducesToMutualInformation) {
    Rng rng(8, 0);
    for (int t = 0; t < 20; ++t) {
        auto rho = random_density_matrix(3, 2, rng);
        EXPECT_GE(cmi(rho, {0}, {1}, {2}), -1e-8);
        auto ac = partial_trace(rho, {0, 2});
        const double mi = entropy(partial_trace(rho, {0})) + entropy(partial_trace(rho, {2})) - entropy(ac);
        EXPECT_NEAR(cmi(ac, {0}, {}, {1}), mi, 1e-10);
    }
}

TEST(States, CoherentProjectorExamples) {
    auto up = coherent_projector({Eigen::Vector3d(0, 0, 1)});
    EXPECT_LT((up - projector(basis_state(1, 0))).cwiseAbs().maxCoeff(), 1e-15);

    CVec plus(2);
    plus << 1, 1;
    auto px = coherent_projector({Eigen::Vector3d(1, 0, 0)});
    EXPECT_LT((px - projector(normalized(plus))).cwiseAbs().maxCoeff(), 1e-15);

    auto zz = coherent_projector({Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(0, 0, 1)});
    EXPECT_LT((zz - projector(basis_state(2, 0))).cwiseAbs().maxCoeff(), 1e-15);

    Eigen::Vector3d v(1, 2, 2);
    v /= 3.0;
    auto pv = coherent_projector({v, Eigen::Vector3d(0, 1, 0)});
    EXPECT_NEAR(purity(pv), 1.0, 1e-12);
    EXPECT_THROW(coherent_projector({Eigen::Vector3d(1, 1, 0)}), std::invalid_argument);
}

TEST(States, RandomUnitaryIsUnitary) {
    Rng rng(9, 0);
    CMat u = random_unitary(3, rng);
    EXPECT_LT((u.adjoint() * u - CMat::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-12);
}
