#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "qdiff/linalg.hpp"

namespace qdiff {

// Superoperators act on row-major vectorization: vec(X)[i*d + j] = X(i, j).
using Superop = CMat;
using LinearMap = std::function<CMat(const CMat&)>;

Superop superop_of(const LinearMap& f, int dim);
CMat apply_superop(const Superop& s, const CMat& x);
// Choi matrix sum_ij |i><j| (x) S(|i><j|), input factor first.
CMat choi_matrix(const Superop& s);

// Depolarizes qubit `pos` of an m-qubit operator:
// x -> lambda x + (1 - lambda) Tr_pos(x) (x) 1/2.
CMat depolarize(const CMat& x, int pos, double lambda);
// Pauli weight of one measurement step on the measured qubit.
inline double step_lambda(double gamma, double dt) { return std::exp(-4.0 * gamma * dt / 3.0); }

// Twirl weight pi / (2 (cosh(pi tau) + 1)), unit mass.
double twirl_weight(double tau);
// Its Fourier transform, w / sinh w.
double twirl_transform(double omega);

struct TauQuadrature {
    std::vector<double> nodes;
    std::vector<double> weights;  // include twirl_weight
    static TauQuadrature gauss_legendre(int nodes, double cutoff);
};

// Eigenvalues clipped to `floor`, then renormalized to unit trace.
CMat spd_deform(const CMat& rdm, double floor = 1e-8);

// Twirled Petz map for prior rho_t, rho_{t+dt} = forward(rho_t) and the
// adjoint of the forward channel. Exact: the tau integral is done in the
// prior eigenbases with twirl_transform.
Superop twirled_petz_superop(const CMat& prior, const CMat& prior_next, const LinearMap& forward_adjoint,
                             double floor = 1e-8);
// Same map from tau quadrature. Throws std::runtime_error when doubling the
// node count changes the result by more than `tol`.
Superop twirled_petz_superop_quadrature(const CMat& prior, const CMat& prior_next, const LinearMap& forward_adjoint,
                                        int nodes = 129, double cutoff = 8.0, double floor = 1e-8, double tol = 1e-6);
// tau = 0 member of the family.
Superop untwirled_petz_superop(const CMat& prior, const CMat& prior_next, const LinearMap& forward_adjoint,
                               double floor = 1e-8);

// Generator of the twirled Petz map for a Lindbladian with Hermitian jump
// operators whose L^dag L sum to a multiple of the identity. `forward` is the
// forward generator, needed for d(rho^a)/dt.
Superop petz_lindbladian(const CMat& prior, const std::vector<CMat>& jumps, const LinearMap& forward,
                         const TauQuadrature& quad);
// Rotated (single tau) generator.
Superop petz_lindbladian_tau(const CMat& prior, const std::vector<CMat>& jumps, const LinearMap& forward, double tau);
// Depolarizing generator on qubit `pos` of m qubits with jumps sqrt(gamma/3) sigma_mu.
std::vector<CMat> depolarizing_jumps(int pos, int m, double gamma);
CMat lindblad_apply(const std::vector<CMat>& jumps, const CMat& x);

struct PetzStep {
    std::vector<int> region;  // sorted global qubits
    int position = 0;         // index of the measured qubit inside region
    CMat prior;               // rho_t on region, before the forward step
};

struct RecoverySchedule {
    int n = 0;
    double lambda = 1.0;
    std::vector<PetzStep> steps;  // steps[0] reverses the last forward step
};

enum class PetzVariant { Twirled, Untwirled };

// Windows [j - w, j + w] clipped to the chain. Priors are the reductions of
// rho0 pushed through the forward steps taken before each step.
RecoverySchedule build_schedule(const std::vector<int>& forward_qubits, int n, int halfwidth, const CMat& rho0,
                                double lambda);

// rho -> (S (x) id)(rho) with S on `region`.
CMat apply_local(const CMat& rho, const Superop& s, const std::vector<int>& region);

// Forward channel after `counts[q]` steps on each qubit.
CMat forward_global(const CMat& rho0, const std::vector<int>& counts, double lambda);

struct RecoveryOptions {
    PetzVariant variant = PetzVariant::Twirled;
    double floor = 1e-8;
    double trace_tolerance = 1e-6;
    // Uhlmann fidelity against the forward state rho_t every this many steps
    // (0 = never; it costs a dense eigensolve of the full state).
    int prior_fidelity_every = 0;
    int tau_nodes = 0;  // 0: spectral twirl, otherwise Gauss-Legendre quadrature in tau
    double tau_cutoff = 8.0;
};

struct RecoveryPoint {
    int step = 0;                    // forward time index of the state
    double fidelity_initial = 0.0;   // F(rho'_t, rho0)
    double fidelity_forward = -1.0;  // F(rho'_t, rho_t), -1 when not computed
    double min_prior_eig = 0.0;
};

struct RecoveryResult {
    CMat state;
    std::vector<RecoveryPoint> trace;
};

// Runs the schedule from `start`. `rho0` is the reference for fidelities.
// Throws std::runtime_error when the trace drifts beyond the tolerance.
RecoveryResult run_recovery(const RecoverySchedule& schedule, const CMat& start, const CMat& rho0,
                            const RecoveryOptions& options = {});
void write_recovery_csv(std::ostream& os, const RecoveryResult& r, double dt);

struct GroundState {
    CVec psi;
    double energy = 0.0;
    double gap = 0.0;
    bool degenerate = false;  // gap < 1e-8
};

// H = -J sum Z_i Z_{i+1} - Bx sum X_i, open chain.
RMat tfim_hamiltonian(int n, double J, double Bx);
GroundState tfim_ground_state(int n, double J, double Bx);

}  // namespace qdiff
