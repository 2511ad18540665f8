#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qdiff/forward.hpp"
#include "qdiff/pauli.hpp"

namespace qdiff {

// Classical snapshot sigma = K^dag K of one record, kept per qubit.
struct Snapshot {
    std::vector<Mat2> factors;      // sigma_j / Tr sigma_j
    std::vector<double> log_trace;  // log Tr sigma_j
    std::vector<int> counts;        // measurements on each qubit
};

Snapshot snapshot(const MeasurementRecord& record);
// Dense K^dag K including the tracked scale (test oracle, small n).
CMat snapshot_dense(const Snapshot& s);

// Pauli weights of the measure-and-prepare channel, normalized so that
// w_m(0) = delta_{m,0}.
double shadow_weight(double gamma, int n, double t, int m);
// w_1 / w_0 = (1 - e^{-16 gamma t/3n}) / (3 + e^{-16 gamma t/3n}).
double shadow_weight_ratio(double gamma, int n, double t);
// Generator D of dw/dt = D w, (n+1)x(n+1).
RMat shadow_generator(double gamma, int n);
// RK4 integration of dw/dt = D w from w(0) = e_0.
RVec shadow_weights_ode(double gamma, int n, double t, int rk_steps);
// Eigenvalues of D from a dense eigensolver, descending.
RVec shadow_generator_eigenvalues(double gamma, int n);
// Spectrum implied by the closed form: 4 gamma/3 - 16 gamma p/(3n).
double shadow_eigenvalue(double gamma, int n, int p);
// w_0 / w_P = shadow_weight_ratio^{-|P|}. Throws at t = 0.
double shadow_norm(double gamma, int n, double t, const PauliString& p);

// Unbiased per-qubit weight for the trace-normalized estimator: E|b_k|^2 / 3
// for the Bloch vector b_k after k measurements of a qubit that starts
// maximally mixed. Monte-Carlo calibrated, cached per argument tuple.
std::vector<double> calibrated_weights(double gamma, double dt, int k_max, int samples = 200000,
                                       std::uint64_t seed = 0x5eed);

// Single-record estimate prod_{q in supp P} b_q[P_q] / w[k_q].
double shadow_value(const Snapshot& s, const PauliString& p, const std::vector<double>& w);

enum class ShadowWeightMode { Calibrated, ClosedForm };

struct ShadowOptions {
    ShadowWeightMode mode = ShadowWeightMode::Calibrated;
    double weight_floor = 1e-3;
    int calibration_samples = 200000;
    std::uint64_t calibration_seed = 0x5eed;
};

struct ShadowEstimate {
    PauliString pauli;
    double estimate = 0.0;
    double standard_error = 0.0;
    double variance = 0.0;     // per-record sample variance
    double shadow_norm = 0.0;  // closed-form w_0/w_P at the record duration
    std::size_t m = 0;
};

// Estimates Tr(rho_0 P) for each target from records of a common source.
std::vector<ShadowEstimate> reconstruct(const std::vector<MeasurementRecord>& records,
                                        const std::vector<PauliString>& targets,
                                        const ShadowOptions& options = {});

// Jackknife mean and standard error of a sample.
void jackknife(const std::vector<double>& x, double& mean, double& se);

void write_estimates_csv(std::ostream& os, const std::vector<ShadowEstimate>& est);

}  // namespace qdiff
