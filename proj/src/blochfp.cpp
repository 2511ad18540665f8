#include "qdiff/blochfp.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace qdiff {

namespace {

constexpr double kPi = std::numbers::pi;

// Y_l^m(theta, phi) for any m.
cplx ylm(int l, int m, double theta, double phi) {
    const int am = std::abs(m);
    const double p = std::sph_legendre(static_cast<unsigned>(l), static_cast<unsigned>(am), theta);
    const cplx y = p * std::exp(kI * static_cast<double>(am) * phi);
    if (m >= 0) return y;
    return ((am % 2) ? -1.0 : 1.0) * std::conj(y);
}

}  // namespace

SphereField::SphereField(int L) : L_(L), c_(static_cast<std::size_t>((L + 1) * (L + 1)), 0.0) {
    if (L < 0) throw std::invalid_argument("SphereField: negative cutoff");
}

SphereField SphereField::uniform(int L) {
    SphereField f(L);
    f.set(0, 0, 1.0 / std::sqrt(4.0 * kPi));
    return f;
}

cplx SphereField::coefficient(int l, int m) const {
    if (l < 0 || l > L_ || std::abs(m) > l) throw std::out_of_range("SphereField: (l, m) out of range");
    return c_[static_cast<std::size_t>(l * l + l + m)];
}

void SphereField::set(int l, int m, cplx value) {
    if (l < 0 || l > L_ || std::abs(m) > l) throw std::out_of_range("SphereField: (l, m) out of range");
    if (m == 0) value = value.real();
    c_[static_cast<std::size_t>(l * l + l + m)] = value;
    c_[static_cast<std::size_t>(l * l + l - m)] = ((m % 2) ? -1.0 : 1.0) * std::conj(value);
}

double SphereField::evaluate_degree(int l, double theta, double phi) const {
    cplx s = 0.0;
    for (int m = -l; m <= l; ++m) s += coefficient(l, m) * ylm(l, m, theta, phi);
    return s.real();
}

double SphereField::evaluate(double theta, double phi) const {
    double s = 0.0;
    for (int l = 0; l <= L_; ++l) s += evaluate_degree(l, theta, phi);
    return s;
}

double fp_decay(int l, double gamma, int n, double t) {
    return std::exp(-(2.0 * gamma / (3.0 * n)) * l * (l + 1.0) * t);
}

SphereField forward_fp(const SphereField& field, double gamma, int n, double t) {
    SphereField out(field.L());
    for (int l = 0; l <= field.L(); ++l)
        for (int m = 0; m <= l; ++m) out.set(l, m, field.coefficient(l, m) * fp_decay(l, gamma, n, t));
    return out;
}

double LatLonGrid::dtheta() const { return kPi / ntheta; }
double LatLonGrid::dphi() const { return 2.0 * kPi / nphi; }
double LatLonGrid::theta(int i) const { return (i + 0.5) * dtheta(); }
double LatLonGrid::phi(int j) const { return (j + 0.5) * dphi(); }
double LatLonGrid::area(int i) const { return (std::cos(i * dtheta()) - std::cos((i + 1) * dtheta())) * dphi(); }

RMat sample(const SphereField& field, const LatLonGrid& grid) {
    RMat q(grid.ntheta, grid.nphi);
    for (int i = 0; i < grid.ntheta; ++i)
        for (int j = 0; j < grid.nphi; ++j) q(i, j) = field.evaluate(grid.theta(i), grid.phi(j));
    return q;
}

double mass(const RMat& q, const LatLonGrid& grid) {
    double s = 0.0;
    for (int i = 0; i < grid.ntheta; ++i) s += grid.area(i) * q.row(i).sum();
    return s;
}

double l2_distance(const RMat& a, const RMat& b, const LatLonGrid& grid) {
    double s = 0.0;
    for (int i = 0; i < grid.ntheta; ++i) s += grid.area(i) * (a.row(i) - b.row(i)).squaredNorm();
    return std::sqrt(s);
}

namespace {

// Per-degree values of p and its derivatives at the faces, so that p at any
// time is a short sum over l with the spectral decay factors.
struct DriftTables {
    int L = 0;
    // theta faces i = 1..ntheta-1 at phi centers: value and d/dtheta.
    std::vector<RMat> th_val, th_dth;
    // phi faces (theta centers, phi = j dphi): value and d/dphi.
    std::vector<RMat> ph_val, ph_dph;
};

DriftTables build_tables(const SphereField& p0, const LatLonGrid& g) {
    DriftTables t;
    t.L = p0.L();
    const double h = 1e-6;
    for (int l = 0; l <= t.L; ++l) {
        RMat tv = RMat::Zero(g.ntheta + 1, g.nphi), td = RMat::Zero(g.ntheta + 1, g.nphi);
        RMat pv(g.ntheta, g.nphi), pd(g.ntheta, g.nphi);
        for (int i = 1; i < g.ntheta; ++i)
            for (int j = 0; j < g.nphi; ++j) {
                const double th = i * g.dtheta(), ph = g.phi(j);
                tv(i, j) = p0.evaluate_degree(l, th, ph);
                td(i, j) = (p0.evaluate_degree(l, th + h, ph) - p0.evaluate_degree(l, th - h, ph)) / (2.0 * h);
            }
        for (int i = 0; i < g.ntheta; ++i)
            for (int j = 0; j < g.nphi; ++j) {
                const double th = g.theta(i), ph = j * g.dphi();
                pv(i, j) = p0.evaluate_degree(l, th, ph);
                pd(i, j) = (p0.evaluate_degree(l, th, ph + h) - p0.evaluate_degree(l, th, ph - h)) / (2.0 * h);
            }
        t.th_val.push_back(tv);
        t.th_dth.push_back(td);
        t.ph_val.push_back(pv);
        t.ph_dph.push_back(pd);
    }
    return t;
}

// Drift velocity 2D grad log p at the faces for forward time t.
struct Drift {
    RMat u_theta;  // (ntheta+1) x nphi, rows 0 and ntheta unused
    RMat u_phi;    // ntheta x nphi, face j between cells j-1 and j
};

Drift drift_at(const DriftTables& tab, const LatLonGrid& g, double gamma, int n, double t, double floor) {
    const double D = 2.0 * gamma / (3.0 * n);
    RMat v = RMat::Zero(g.ntheta + 1, g.nphi), dv = v;
    RMat w = RMat::Zero(g.ntheta, g.nphi), dw = w;
    for (int l = 0; l <= tab.L; ++l) {
        const double f = fp_decay(l, gamma, n, t);
        v += f * tab.th_val[l];
        dv += f * tab.th_dth[l];
        w += f * tab.ph_val[l];
        dw += f * tab.ph_dph[l];
    }
    if (v.block(1, 0, g.ntheta - 1, g.nphi).minCoeff() < 0.0 || w.minCoeff() < 0.0)
        throw std::runtime_error("backward_fp: negative p encountered");
    Drift d;
    d.u_theta = RMat::Zero(g.ntheta + 1, g.nphi);
    for (int i = 1; i < g.ntheta; ++i)
        for (int j = 0; j < g.nphi; ++j) d.u_theta(i, j) = 2.0 * D * dv(i, j) / std::max(v(i, j), floor);
    d.u_phi.resize(g.ntheta, g.nphi);
    for (int i = 0; i < g.ntheta; ++i) {
        const double s = std::sin(g.theta(i));
        for (int j = 0; j < g.nphi; ++j) d.u_phi(i, j) = 2.0 * D * dw(i, j) / (s * std::max(w(i, j), floor));
    }
    return d;
}

// Theta-direction flux divergence (diffusion plus drift).
RMat theta_rhs(const RMat& q, const LatLonGrid& g, double D, const RMat* u_theta) {
    RMat r = RMat::Zero(g.ntheta, g.nphi);
    const double dth = g.dtheta(), dph = g.dphi();
    for (int i = 1; i < g.ntheta; ++i) {
        const double len = std::sin(i * dth) * dph;
        const double a_lo = g.area(i - 1), a_hi = g.area(i);
        for (int j = 0; j < g.nphi; ++j) {
            double flux = -D * (q(i, j) - q(i - 1, j)) / dth;
            if (u_theta) flux += (*u_theta)(i, j) * 0.5 * (q(i, j) + q(i - 1, j));
            flux *= len;
            r(i - 1, j) -= flux / a_lo;
            r(i, j) += flux / a_hi;
        }
    }
    return r;
}

// Solves a cyclic tridiagonal system: lo[j] x[j-1] + di[j] x[j] + up[j] x[j+1] = b[j].
void cyclic_solve(std::vector<double> lo, std::vector<double> di, std::vector<double> up, std::vector<double>& x) {
    const int n = static_cast<int>(di.size());
    const double alpha = up[n - 1];  // corner (n-1, 0)
    const double beta = lo[0];       // corner (0, n-1)
    const double gam = -di[0];
    di[0] -= gam;
    di[n - 1] -= alpha * beta / gam;
    auto thomas = [&](std::vector<double> rhs) {
        std::vector<double> c(n), d(n);
        c[0] = up[0] / di[0];
        d[0] = rhs[0] / di[0];
        for (int i = 1; i < n; ++i) {
            const double m = di[i] - lo[i] * c[i - 1];
            c[i] = up[i] / m;
            d[i] = (rhs[i] - lo[i] * d[i - 1]) / m;
        }
        for (int i = n - 2; i >= 0; --i) d[i] -= c[i] * d[i + 1];
        return d;
    };
    std::vector<double> uvec(n, 0.0);
    uvec[0] = gam;
    uvec[n - 1] = alpha;
    const auto y = thomas(x);
    const auto z = thomas(uvec);
    const double fact = (y[0] + beta * y[n - 1] / gam) / (1.0 + z[0] + beta * z[n - 1] / gam);
    for (int i = 0; i < n; ++i) x[i] = y[i] - fact * z[i];
}

// Crank-Nicolson step of length h for the phi fluxes on every ring.
void phi_cn(RMat& q, const LatLonGrid& g, double D, const RMat* u_phi, double h) {
    const int np = g.nphi;
    const double dth = g.dtheta(), dph = g.dphi();
    std::vector<double> lo(np), di(np), up(np), b(np);
    for (int i = 0; i < g.ntheta; ++i) {
        const double area = g.area(i);
        const double a = D * dth / (std::sin(g.theta(i)) * dph * area);
        auto bcoef = [&](int j) { return u_phi ? dth * (*u_phi)(i, (j + np) % np) / (2.0 * area) : 0.0; };
        for (int j = 0; j < np; ++j) {
            const double bj = bcoef(j), bj1 = bcoef(j + 1);
            const double ml = a + bj, md = -2.0 * a + bj - bj1, mu = a - bj1;
            const double qm = q(i, (j - 1 + np) % np), q0 = q(i, j), qp = q(i, (j + 1) % np);
            b[j] = q0 + 0.5 * h * (ml * qm + md * q0 + mu * qp);
            lo[j] = -0.5 * h * ml;
            di[j] = 1.0 - 0.5 * h * md;
            up[j] = -0.5 * h * mu;
        }
        cyclic_solve(lo, di, up, b);
        for (int j = 0; j < np; ++j) q(i, j) = b[j];
    }
}

double theta_rate_bound(const LatLonGrid& g, double D, const RMat* u_theta) {
    double worst = 0.0;
    const double dth = g.dtheta(), dph = g.dphi();
    for (int i = 0; i < g.ntheta; ++i) {
        double umax = 0.0;
        if (u_theta)
            for (int k : {i, i + 1})
                if (k > 0 && k < g.ntheta) umax = std::max(umax, u_theta->row(k).cwiseAbs().maxCoeff());
        const double len_lo = std::sin(i * dth) * dph, len_hi = std::sin((i + 1) * dth) * dph;
        const double rate = (len_lo + len_hi) * (D / dth + 0.5 * umax) / g.area(i);
        worst = std::max(worst, rate);
    }
    return worst;
}

RMat integrate(const RMat& q_start, const SphereField* p0, double gamma, int n, double T, const LatLonGrid& g, double dt,
               double floor) {
    if (dt <= 0.0 || T < 0.0) throw std::invalid_argument("blochfp: need dt > 0 and T >= 0");
    if (q_start.rows() != g.ntheta || q_start.cols() != g.nphi) throw std::invalid_argument("blochfp: grid mismatch");
    const double D = 2.0 * gamma / (3.0 * n);
    const int steps = static_cast<int>(std::ceil(T / dt - 1e-9));
    const double h = steps > 0 ? T / steps : 0.0;
    DriftTables tab;
    if (p0) tab = build_tables(*p0, g);
    RMat q = q_start;
    for (int s = 0; s < steps; ++s) {
        // Reverse time tau runs forward; the drift uses p at t = T - tau.
        const double tau = s * h;
        Drift d0, dm, d1;
        if (p0) {
            d0 = drift_at(tab, g, gamma, n, T - tau, floor);
            dm = drift_at(tab, g, gamma, n, T - tau - 0.5 * h, floor);
            d1 = drift_at(tab, g, gamma, n, T - tau - h, floor);
        }
        const RMat* ut0 = p0 ? &d0.u_theta : nullptr;
        const RMat* ut1 = p0 ? &d1.u_theta : nullptr;
        const RMat* up = p0 ? &dm.u_phi : nullptr;
        const double rate = std::max(theta_rate_bound(g, D, ut0), theta_rate_bound(g, D, ut1));
        if (h * rate > 1.0)
            throw std::runtime_error("blochfp: dt = " + std::to_string(h) + " exceeds the stability bound " +
                                     std::to_string(1.0 / rate));
        phi_cn(q, g, D, up, 0.5 * h);
        const RMat k1 = theta_rhs(q, g, D, ut0);
        const RMat qs = q + h * k1;
        const RMat k2 = theta_rhs(qs, g, D, ut1);
        q += 0.5 * h * (k1 + k2);
        phi_cn(q, g, D, up, 0.5 * h);
    }
    return q;
}

}  // namespace

double stable_dt(double gamma, int n, const LatLonGrid& grid) {
    return 1.0 / theta_rate_bound(grid, 2.0 * gamma / (3.0 * n), nullptr);
}

RMat backward_fp(const RMat& q_T, const SphereField& p0, double gamma, int n, double T, const LatLonGrid& grid,
                 double dt, double p_floor) {
    return integrate(q_T, &p0, gamma, n, T, grid, dt, p_floor);
}

RMat grid_forward(const RMat& q0, double gamma, int n, double T, const LatLonGrid& grid, double dt) {
    return integrate(q0, nullptr, gamma, n, T, grid, dt, 0.0);
}

double combined_residual(const SphereField& p0, double gamma, int n, double t, const LatLonGrid& grid) {
    const double D = 2.0 * gamma / (3.0 * n);
    const DriftTables tab = build_tables(p0, grid);
    const Drift d = drift_at(tab, grid, gamma, n, t, 1e-10);
    const RMat p = sample(forward_fp(p0, gamma, n, t), grid);
    // Forward: D lap p. Backward: D lap p - div(p u). Sum of the two.
    RMat r = 2.0 * theta_rhs(p, grid, D, nullptr);
    r += theta_rhs(p, grid, 0.0, &d.u_theta);
    // Phi parts through one explicit application of the CN operator's matrix.
    const int np = grid.nphi;
    const double dth = grid.dtheta(), dph = grid.dphi();
    for (int i = 0; i < grid.ntheta; ++i) {
        const double area = grid.area(i);
        const double a = D * dth / (std::sin(grid.theta(i)) * dph * area);
        for (int j = 0; j < np; ++j) {
            const double bj = dth * d.u_phi(i, j) / (2.0 * area);
            const double bj1 = dth * d.u_phi(i, (j + 1) % np) / (2.0 * area);
            const double qm = p(i, (j - 1 + np) % np), q0 = p(i, j), qp = p(i, (j + 1) % np);
            r(i, j) += 2.0 * a * (qm - 2.0 * q0 + qp) + bj * (qm + q0) - bj1 * (q0 + qp);
        }
    }
    RMat zero = RMat::Zero(grid.ntheta, grid.nphi);
    return l2_distance(r, zero, grid);
}

void write_field_csv(std::ostream& os, const RMat& q, const LatLonGrid& grid) {
    os.precision(17);
    os << "theta,phi,value\n";
    for (int i = 0; i < grid.ntheta; ++i)
        for (int j = 0; j < grid.nphi; ++j) os << grid.theta(i) << ',' << grid.phi(j) << ',' << q(i, j) << '\n';
}

}  // namespace qdiff
