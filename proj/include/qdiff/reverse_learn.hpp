#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "qdiff/forward.hpp"
#include "qdiff/pauli.hpp"
#include "qdiff/rng.hpp"
#include "qdiff/states.hpp"

namespace qdiff {

// Two tanh hidden layers and a linear output.
struct Mlp {
    RMat w1, w2, w3;
    RVec b1, b2, b3;

    static Mlp zeros(int in, int hidden, int out);
    static Mlp random(int in, int hidden, int out, Rng& rng, double output_gain = 0.01);
    int inputs() const { return static_cast<int>(w1.cols()); }
    int outputs() const { return static_cast<int>(w3.rows()); }
    std::size_t parameter_count() const;
    RVec flatten() const;
    void assign(const RVec& theta);
    // Columns are samples.
    RMat forward(const RMat& x) const;
};

// H(z, t) = sum_j eta_j(z, t) P_j, V = exp(i H dt).
struct ControlModel {
    int n = 1;
    double dt = 0.01;
    double horizon = 1.0;              // T, used to scale time features
    std::vector<PauliString> inputs;   // z features
    std::vector<PauliString> outputs;  // Hamiltonian basis
    Mlp net;

    // Inputs: z over `inputs`, then t/T, sin(pi t/T), cos(pi t/T).
    static ControlModel create(int n, double dt, double horizon, int weight_cutoff, int hidden, Rng& rng);
    RVec features(const PureState& psi, double t) const;
    RVec eta(const RVec& features) const;
    CMat hamiltonian(const RVec& eta) const;
};

CMat unitary_score(const ControlModel& model, const RVec& features);

struct TrainingPair {
    RVec features;  // of psi_next at time t
    PureState psi_t, psi_next;
    double t = 0.0;
};

// Pairs (psi_k, psi_{k+1}) at t = k dt from stored trajectory states.
std::vector<TrainingPair> make_pairs(const ControlModel& model, const std::vector<std::vector<PureState>>& trajectories,
                                     double dt);

// 1 - |<psi_t| V |psi_next>|^2.
double pair_infidelity(const CMat& v, const PureState& psi_t, const PureState& psi_next);
double infidelity_loss(const ControlModel& model, const std::vector<TrainingPair>& batch);
// (1/2) || V rho_next V^dag - rho_t ||_F^2, equal to pair_infidelity for pure states.
double frobenius_loss(const CMat& v, const PureState& psi_t, const PureState& psi_next);

// d(pair_infidelity)/d eta_j for V = exp(i dt sum_j eta_j P_j), exact
// through the eigendecomposition of H.
RVec infidelity_gradient_eta(const std::vector<PauliString>& basis, const RVec& eta, double dt,
                             const PureState& psi_t, const PureState& psi_next, double* loss = nullptr);
// Full parameter gradient of infidelity_loss over `batch`.
RVec loss_gradient(const ControlModel& model, const std::vector<TrainingPair>& batch, double* loss = nullptr);

struct TrainOptions {
    int epochs = 20;
    int batch_size = 512;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 1;
    int patience = 10;  // epochs above the initial loss before aborting
};

struct TrainResult {
    std::vector<double> loss_curve;  // mean training loss per epoch, entry 0 before training
    double final_loss = 0.0;
};

// Adam on mini-batches. Throws std::runtime_error on divergence.
TrainResult train(ControlModel& model, const std::vector<TrainingPair>& data, const TrainOptions& options);

// Supplies the conditioning features for ensemble member i at step k
// (state psi at time (k+1) dt); defaults to the generated state itself.
using FeatureProvider = std::function<RVec(std::size_t member, int step, const PureState& psi)>;

struct ReverseRun {
    std::vector<int> steps;                       // time indices recorded, descending
    std::vector<std::vector<PureState>> states;   // ensemble at each recorded step
};

// Applies V(z_{k+1}, t_k) for k = N-1 .. 0 to every member of `ensemble_T`,
// recording every `record_every` steps (plus t = T and t = 0).
// `drift_scale` multiplies H before exponentiation; 1 applies V as trained,
// 0.5 follows the probability-flow velocity instead of the conditional mean.
ReverseRun reverse_generate(const ControlModel& model, const std::vector<PureState>& ensemble_T, int steps,
                            int record_every, const FeatureProvider& provider = {}, double drift_scale = 1.0);

void save_model(std::ostream& os, const ControlModel& model);
ControlModel load_model(std::istream& is);

// Score-matching side of the equivalence: c_i = Tr(P_i (-i [H, rho])) over
// all_paulis(n), so that sum_i c_i P_i / 2^n = -i [H, rho].
RVec commutator_coefficients(const CMat& h, const CMat& rho);
CMat pauli_sum(const RVec& coefficients, int n);
// (1/2) || (z_next - z_t)/dt - c ||^2 with c taken at rho_next, the state V acts on.
double diffusion_loss(const CMat& h, const PureState& psi_t, const PureState& psi_next, double dt);

}  // namespace qdiff
