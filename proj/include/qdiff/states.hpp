#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qdiff/linalg.hpp"
#include "qdiff/rng.hpp"

namespace qdiff {

// State vectors and density matrices are plain Eigen objects; the qubit count
// is implied by the dimension.
using PureState = CVec;
using DensityMatrix = CMat;
using BlochProduct = std::vector<Eigen::Vector3d>;

PureState basis_state(int n, std::size_t index);
PureState normalized(const CVec& v);
DensityMatrix projector(const PureState& psi);
double purity(const DensityMatrix& rho);

// sqrt(2 (1 - |<a|b>|^2)).
double trace_distance_pure(const PureState& a, const PureState& b);
// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
double fidelity(const DensityMatrix& a, const DensityMatrix& b);
// <psi|rho|psi>, the Uhlmann fidelity against a pure state.
double fidelity_pure(const PureState& psi, const DensityMatrix& rho);
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);  // (1/2)||a-b||_1

// Von Neumann entropy in nats, eigenvalues floored at 1e-12.
double entropy(const DensityMatrix& rho);
// I(A:C|B) = S(AB) + S(BC) - S(B) - S(ABC), in nats.
double cmi(const DensityMatrix& rho, const std::vector<int>& a, const std::vector<int>& b,
           const std::vector<int>& c);

BlochProduct bloch_product_from(const std::vector<Eigen::Vector3d>& vectors);
DensityMatrix coherent_projector(const BlochProduct& v);
// Bloch vector of a single-qubit density matrix.
Eigen::Vector3d bloch_vector(const Mat2& rho);

PureState random_pure_state(int n, Rng& rng);
// Ginibre ensemble of the given rank.
DensityMatrix random_density_matrix(int n, int rank, Rng& rng);
CMat random_unitary(int n, Rng& rng);
CMat random_hermitian(int dim, Rng& rng);

}  // namespace qdiff
