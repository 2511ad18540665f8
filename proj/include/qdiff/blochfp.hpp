#pragma once

#include <iosfwd>
#include <vector>

#include "qdiff/linalg.hpp"

namespace qdiff {

// Real field on the sphere from complex spherical-harmonic coefficients,
// c_{l,-m} = (-1)^m conj(c_{lm}).
class SphereField {
public:
    explicit SphereField(int L);
    // Uniform density 1/(4 pi): c_00 = 1/sqrt(4 pi).
    static SphereField uniform(int L);

    int L() const { return L_; }
    cplx coefficient(int l, int m) const;
    // Sets c_{lm} and its conjugate partner.
    void set(int l, int m, cplx value);
    double evaluate(double theta, double phi) const;
    // Contribution of degree l alone.
    double evaluate_degree(int l, double theta, double phi) const;

private:
    int L_;
    std::vector<cplx> c_;  // index l*l + l + m
};

// Each degree-l coefficient scaled by exp(-(2 gamma/3n) l (l+1) t).
SphereField forward_fp(const SphereField& field, double gamma, int n, double t);
double fp_decay(int l, double gamma, int n, double t);

// Cell-centered latitude-longitude grid; theta cells [i, i+1] pi/ntheta.
struct LatLonGrid {
    int ntheta = 64;
    int nphi = 128;
    double dtheta() const;
    double dphi() const;
    double theta(int i) const;  // cell center
    double phi(int j) const;
    double area(int i) const;
};

RMat sample(const SphereField& field, const LatLonGrid& grid);
double mass(const RMat& q, const LatLonGrid& grid);
double l2_distance(const RMat& a, const RMat& b, const LatLonGrid& grid);

// Reverse-time integration of dq/dtau = D lap q - 2D div(q grad log p_{T - tau})
// with D = 2 gamma/3n, from tau = 0 to tau = T. p is the spectral forward
// solution from p0. Throws std::runtime_error when p < 0 on the grid or when
// dt violates the explicit stability bound.
RMat backward_fp(const RMat& q_T, const SphereField& p0, double gamma, int n, double T, const LatLonGrid& grid,
                 double dt, double p_floor = 1e-10);
// Same scheme with the drift switched off: forward diffusion on the grid.
RMat grid_forward(const RMat& q0, double gamma, int n, double T, const LatLonGrid& grid, double dt);
// Largest stable dt of the explicit theta sweep for pure diffusion.
double stable_dt(double gamma, int n, const LatLonGrid& grid);

// L2 norm of the discrete forward-plus-backward right-hand side at q = p_t.
double combined_residual(const SphereField& p0, double gamma, int n, double t, const LatLonGrid& grid);

void write_field_csv(std::ostream& os, const RMat& q, const LatLonGrid& grid);

}  // namespace qdiff
