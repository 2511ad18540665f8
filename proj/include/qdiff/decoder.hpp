#pragma once

#include <iosfwd>
#include <vector>

#include "qdiff/forward.hpp"
#include "qdiff/pauli.hpp"

namespace qdiff {

struct MleResult {
    PureState psi0;
    double log_likelihood = 0.0;  // log ||K_T psi0||^2, including the 2^{-N} normalization
    bool degenerate = false;      // top eigenspace of K_T^dag K_T not unique
};

// argmax_psi ||K_T psi||^2 over pure states. K_T is a product of per-qubit
// factors, so the maximizer is the product of per-qubit top eigenvectors.
MleResult mle_initial_state(const MeasurementRecord& record);

struct DecodedTrajectory {
    PureState psi0_hat;
    std::vector<PureState> states;         // states[k] after k steps
    std::vector<PauliString> basis;        // z_series key order
    std::vector<PauliVector> z_series;     // per step, over `basis`
};

// Default Pauli weight cutoff: n for n <= 2, else 2.
int default_weight_cutoff(int n);

DecodedTrajectory reconstruct_series(const MeasurementRecord& record, const PureState& psi0, int weight_cutoff = -1);
DecodedTrajectory decode(const MeasurementRecord& record, int weight_cutoff = -1);

// CSV rows: step,t,<pauli>...
void write_decoded_csv(std::ostream& os, const DecodedTrajectory& d, double dt);

}  // namespace qdiff
