#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "qdiff/blochfp.hpp"
#include "qdiff/forward.hpp"

using namespace qdiff;

namespace {

SphereField test_density() {
    SphereField f = SphereField::uniform(4);
    f.set(1, 0, 0.02);
    f.set(1, 1, {0.01, -0.005});
    f.set(2, 1, {0.008, 0.004});
    f.set(3, 2, {-0.006, 0.003});
    f.set(4, 0, 0.005);
    return f;
}

double integrate(const SphereField& f) {
    // Gauss product quadrature would be tighter; a fine midpoint grid is enough here.
    LatLonGrid g{200, 400};
    return mass(sample(f, g), g);
}

}  // namespace

TEST(BlochFp, UniformIsNormalized) {
    EXPECT_NEAR(integrate(SphereField::uniform(2)), 1.0, 1e-4);
}

TEST(BlochFp, ConjugateSymmetryGivesRealField) {
    SphereField f = test_density();
    for (int l = 0; l <= 4; ++l)
        for (int m = -l; m <= l; ++m) {
            const cplx a = f.coefficient(l, m), b = f.coefficient(l, -m);
            const double sign = (std::abs(m) % 2) ? -1.0 : 1.0;
            EXPECT_NEAR(std::abs(b - sign * std::conj(a)), 0.0, 1e-15);
        }
}

TEST(BlochFp, ForwardPreservesMassAndTendsToUniform) {
    const SphereField p0 = test_density();
    EXPECT_NEAR(std::abs(forward_fp(p0, 1.0, 1, 0.7).coefficient(0, 0) - p0.coefficient(0, 0)), 0.0, 1e-15);
    EXPECT_NEAR(integrate(p0), 1.0, 1e-5);
    const SphereField late = forward_fp(p0, 1.0, 1, 40.0);
    EXPECT_NEAR(late.evaluate(0.3, 1.1), 1.0 / (4.0 * std::numbers::pi), 1e-12);
    EXPECT_NEAR(std::abs(forward_fp(p0, 1.0, 1, 0.0).coefficient(3, 2) - p0.coefficient(3, 2)), 0.0, 1e-15);
}

TEST(BlochFp, DipoleDecayMatchesChannelWeight) {
    for (int n : {1, 2, 5})
        for (double t : {0.1, 0.8, 2.5})
            EXPECT_NEAR(fp_decay(1, 0.7, n, t), channel_weight_F(0.7, n, t, 1), 1e-14);
}

TEST(BlochFp, GridForwardMatchesSpectral) {
    const SphereField p0 = test_density();
    const LatLonGrid g{64, 128};
    const double T = 0.5;
    const RMat q = grid_forward(sample(p0, g), 1.0, 1, T, g, 0.5 * stable_dt(1.0, 1, g));
    const RMat ref = sample(forward_fp(p0, 1.0, 1, T), g);
    EXPECT_LT(l2_distance(q, ref, g), 1e-3);
    EXPECT_NEAR(mass(q, g), mass(sample(p0, g), g), 1e-12);
}

TEST(BlochFp, BackwardRoundTripAndSelfConvergence) {
    const SphereField p0 = test_density();
    const double gamma = 1.0, T = 1.0;
    double prev = 0.0;
    for (int k : {1, 2}) {
        const LatLonGrid g{32 * k, 64 * k};
        const RMat qT = sample(forward_fp(p0, gamma, 1, T), g);
        const double dt = 0.5 * stable_dt(gamma, 1, g);
        const RMat q0 = backward_fp(qT, p0, gamma, 1, T, g, dt);
        const double err = l2_distance(q0, sample(p0, g), g);
        EXPECT_NEAR(mass(q0, g), mass(qT, g), 1e-11);
        if (k == 2) EXPECT_LT(err, 1e-3);
        if (k > 1) EXPECT_LT(err, prev);
        prev = err;
    }
}

TEST(BlochFp, ExactDensityIsStationaryUnderCombinedFlow) {
    const SphereField p0 = test_density();
    double prev = 1e9;
    for (int k : {1, 2, 4}) {
        const double r = combined_residual(p0, 1.0, 1, 0.3, LatLonGrid{32 * k, 64 * k});
        EXPECT_LT(r, prev);
        prev = r;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(BlochFp, RejectsUnstableStepAndNegativeDensity) {
    const SphereField p0 = test_density();
    const LatLonGrid g{32, 64};
    const RMat qT = sample(forward_fp(p0, 1.0, 1, 0.5), g);
    EXPECT_THROW(backward_fp(qT, p0, 1.0, 1, 0.5, g, 10.0 * stable_dt(1.0, 1, g)), std::runtime_error);
    SphereField bad = SphereField::uniform(1);
    bad.set(1, 0, 1.0);
    EXPECT_THROW(backward_fp(qT, bad, 1.0, 1, 0.1, g, 0.5 * stable_dt(1.0, 1, g)), std::runtime_error);
}

TEST(BlochFp, CsvLayout) {
    const LatLonGrid g{2, 3};
    std::ostringstream os;
    write_field_csv(os, sample(SphereField::uniform(0), g), g);
    std::istringstream is(os.str());
    std::string line;
    int rows = 0;
    std::getline(is, line);
    EXPECT_EQ(line, "theta,phi,value");
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 6);
}
