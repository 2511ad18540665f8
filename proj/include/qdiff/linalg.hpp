#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace qdiff {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2cd;

inline constexpr cplx kI{0.0, 1.0};

// Basis index convention: qubit 0 is the most significant bit, i.e. the
// leftmost factor of a Kronecker product.
inline std::size_t dim_of(int n) { return std::size_t{1} << n; }
int qubits_of(Eigen::Index dim);
inline int bit_of(int qubit, int n) { return n - 1 - qubit; }

Mat2 pauli_2x2(int axis);  // 0=I, 1=X, 2=Y, 3=Z

CMat kron(const CMat& a, const CMat& b);
CMat embed_1q(const Mat2& u, int qubit, int n);
void apply_1q(CVec& psi, const Mat2& u, int qubit, int n);
// rho -> u rho u^dagger for a single-qubit u.
void conjugate_1q(CMat& rho, const Mat2& u, int qubit, int n);

bool is_hermitian(const CMat& m, double tol);
CMat hermitian_part(const CMat& m);

// exp(i h dt) for Hermitian h.
CMat expi_hermitian(const CMat& h, double dt);
CMat sqrt_psd(const CMat& m);
double trace_norm_hermitian(const CMat& m);

// Reduced density matrix on `keep` (order of `keep` defines the output
// qubit order).
CMat partial_trace(const CMat& rho, const std::vector<int>& keep);

}  // namespace qdiff
