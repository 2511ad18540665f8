#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qdiff/rng.hpp"
#include "qdiff/states.hpp"

namespace qdiff {

// (|0> + a0|0> + a1|1>)/norm, Re and Im of a_j ~ N(0, sigma^2/2).
PureState near_zero_state(Rng& rng, double sigma = 0.2);
// (|00> + |11>)/sqrt2 plus the same kind of perturbation on all four amplitudes.
PureState bell_perturbed_state(Rng& rng, double sigma = 0.2);
// H = J s1.s2 + Bx X_1 + Bz X_2.
CMat heisenberg_pair_hamiltonian(double J, double Bx, double Bz);
// Temperature uniform in [0, t_max], then an eigenstate drawn with Gibbs weights.
PureState heisenberg_thermal_state(Rng& rng, double J = 1.0, double Bx = 0.5, double Bz = 0.5, double t_max = 0.5);

// Names: near-zero (n=1), bell-perturbed (n=2), heisenberg-thermal (n=2),
// haar (any n), zero (any n), bell (n=2), random-mixed (n=2, eigenvectors of a
// fixed full-rank state drawn with its eigenvalues). Member i uses Rng(seed, stream_base + i).
std::vector<PureState> sample_ensemble(const std::string& name, int n, std::size_t count, std::uint64_t seed,
                                       std::uint64_t stream_base = 0);
// Exact ensemble average for ensembles where it is known in closed form.
std::optional<DensityMatrix> ensemble_mean(const std::string& name, int n);
// Qubit count fixed by the ensemble, or -1 when any n works.
int ensemble_qubits(const std::string& name);

}  // namespace qdiff
