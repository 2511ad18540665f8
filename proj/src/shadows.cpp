#include "qdiff/shadows.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "qdiff/states.hpp"

namespace qdiff {

Snapshot snapshot(const MeasurementRecord& record) {
    const auto f = accumulated_kraus_scaled(record, record.steps.size());
    Snapshot s;
    s.counts = measurement_counts(record, record.steps.size());
    for (int q = 0; q < record.n; ++q) {
        Mat2 sigma = f.factor[q].adjoint() * f.factor[q];
        const double tr = sigma.trace().real();
        s.factors.push_back(sigma / tr);
        s.log_trace.push_back(std::log(tr) + 2.0 * f.log_scale[q]);
    }
    return s;
}

CMat snapshot_dense(const Snapshot& s) {
    CMat out = CMat::Identity(1, 1);
    double log_scale = 0.0;
    for (std::size_t q = 0; q < s.factors.size(); ++q) {
        out = kron(out, s.factors[q]);
        log_scale += s.log_trace[q];
    }
    return std::exp(log_scale) * out;
}

double shadow_weight_ratio(double gamma, int n, double t) {
    const double e = std::exp(-16.0 * gamma * t / (3.0 * n));
    return (1.0 - e) / (3.0 + e);
}

double shadow_weight(double gamma, int n, double t, int m) {
    if (t < 0.0) throw std::invalid_argument("shadow_weight: t must be non-negative");
    if (m < 0 || m > n) throw std::invalid_argument("shadow_weight: m out of range");
    const double w0 = std::pow((3.0 * std::exp(4.0 * gamma * t / (3.0 * n)) + std::exp(-4.0 * gamma * t / n)) / 4.0, n);
    return w0 * std::pow(shadow_weight_ratio(gamma, n, t), m);
}

RMat shadow_generator(double gamma, int n) {
    RMat d = RMat::Zero(n + 1, n + 1);
    for (int m = 0; m <= n; ++m) {
        d(m, m) = -8.0 * m * gamma / (3.0 * n);
        if (m >= 1) d(m, m - 1) = 4.0 * m * gamma / (3.0 * n);
        if (m + 1 <= n) d(m, m + 1) = 4.0 * (n - m) * gamma / n;
    }
    return d;
}

RVec shadow_weights_ode(double gamma, int n, double t, int rk_steps) {
    const RMat d = shadow_generator(gamma, n);
    RVec w = RVec::Zero(n + 1);
    w[0] = 1.0;
    if (rk_steps <= 0 || t == 0.0) return w;
    const double h = t / rk_steps;
    for (int s = 0; s < rk_steps; ++s) {
        const RVec k1 = d * w;
        const RVec k2 = d * (w + 0.5 * h * k1);
        const RVec k3 = d * (w + 0.5 * h * k2);
        const RVec k4 = d * (w + h * k3);
        w += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return w;
}

RVec shadow_generator_eigenvalues(double gamma, int n) {
    Eigen::EigenSolver<RMat> es(shadow_generator(gamma, n), false);
    RVec ev = es.eigenvalues().real();
    std::sort(ev.data(), ev.data() + ev.size(), std::greater<double>());
    return ev;
}

double shadow_eigenvalue(double gamma, int n, int p) { return 4.0 * gamma / 3.0 - 16.0 * gamma * p / (3.0 * n); }

double shadow_norm(double gamma, int n, double t, const PauliString& p) {
    if (!(t > 0.0)) throw std::domain_error("shadow_norm diverges at t = 0");
    return std::pow(shadow_weight_ratio(gamma, n, t), -p.weight());
}

std::vector<double> calibrated_weights(double gamma, double dt, int k_max, int samples, std::uint64_t seed) {
    static std::mutex mu;
    static std::map<std::tuple<double, double, int, std::uint64_t>, std::vector<double>> cache;
    const auto key = std::make_tuple(gamma, dt, samples, seed);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end() && static_cast<int>(it->second.size()) > k_max)
            return std::vector<double>(it->second.begin(), it->second.begin() + k_max + 1);
    }
    check_step_size(gamma, dt);
    // Mixed single-qubit trajectory from 1/2; its Bloch length equals that of
    // the normalized snapshot of the same record.
    std::vector<double> sum(k_max + 1, 0.0);
    const double a = std::sqrt(gamma * dt);
    const double shrink = std::sqrt(1.0 - 4.0 * a * a);
    for (int s = 0; s < samples; ++s) {
        Rng rng(seed, static_cast<std::uint64_t>(s));
        Eigen::Vector3d b = Eigen::Vector3d::Zero();
        for (int k = 1; k <= k_max; ++k) {
            const int ax = rng.below(3);
            const double o = rng.uniform() < 0.5 + a * b[ax] ? 1.0 : -1.0;
            // Bloch form of K rho K^dag / Tr for K = (c0 + o c1 sigma_ax)/sqrt2.
            const double norm = 1.0 + 2.0 * o * a * b[ax];
            const double along = (b[ax] + 2.0 * o * a) / norm;
            b *= shrink / norm;
            b[ax] = along;
            sum[k] += b.squaredNorm();
        }
    }
    std::vector<double> w(k_max + 1);
    w[0] = 0.0;
    for (int k = 1; k <= k_max; ++k) w[k] = sum[k] / samples / 3.0;
    std::lock_guard<std::mutex> lock(mu);
    cache[key] = w;
    return w;
}

double shadow_value(const Snapshot& s, const PauliString& p, const std::vector<double>& w) {
    double v = 1.0;
    for (int q : p.support()) {
        const Eigen::Vector3d b = bloch_vector(s.factors[q]);
        v *= b[static_cast<int>(p.at(q)) - 1] / w.at(s.counts[q]);
    }
    return v;
}

void jackknife(const std::vector<double>& x, double& mean, double& se) {
    const std::size_t m = x.size();
    if (m == 0) throw std::invalid_argument("jackknife: empty sample");
    double total = 0.0;
    for (double v : x) total += v;
    mean = total / m;
    if (m < 2) {
        se = 0.0;
        return;
    }
    double acc = 0.0;
    for (double v : x) {
        const double loo = (total - v) / (m - 1);
        acc += (loo - mean) * (loo - mean);
    }
    se = std::sqrt(acc * (m - 1) / m);
}

std::vector<ShadowEstimate> reconstruct(const std::vector<MeasurementRecord>& records,
                                        const std::vector<PauliString>& targets, const ShadowOptions& options) {
    if (records.empty()) throw std::invalid_argument("reconstruct: no records");
    const auto& r0 = records.front();
    for (const auto& r : records)
        if (r.n != r0.n || r.gamma != r0.gamma || r.dt != r0.dt)
            throw std::invalid_argument("reconstruct: records disagree on n, gamma or dt");
    for (const auto& p : targets)
        if (p.n() != r0.n) throw std::invalid_argument("reconstruct: target qubit count mismatch");

    int k_max = 0;
    std::vector<Snapshot> snaps;
    snaps.reserve(records.size());
    for (const auto& r : records) {
        snaps.push_back(snapshot(r));
        for (int c : snaps.back().counts) k_max = std::max(k_max, c);
    }
    std::vector<double> w;
    if (options.mode == ShadowWeightMode::Calibrated) {
        w = calibrated_weights(r0.gamma, r0.dt, k_max, options.calibration_samples, options.calibration_seed);
    } else {
        w.resize(k_max + 1);
        for (int k = 0; k <= k_max; ++k) w[k] = shadow_weight_ratio(r0.gamma, 1, k * r0.dt);
    }

    const double duration = r0.steps.size() * r0.dt;
    std::vector<ShadowEstimate> out;
    for (const auto& p : targets) {
        const auto sup = p.support();
        std::vector<double> values(snaps.size());
        for (std::size_t i = 0; i < snaps.size(); ++i) {
            double weight = 1.0;
            for (int q : sup) weight *= w[snaps[i].counts[q]];
            if (weight < options.weight_floor) {
                std::ostringstream msg;
                const double norm = 1.0 / std::max(weight, 1e-300);
                msg << "shadow weight " << weight << " for " << p.str() << " is below the floor "
                    << options.weight_floor << "; about " << norm / 1e-4 << " records are needed for 0.01 precision";
                throw std::domain_error(msg.str());
            }
            values[i] = shadow_value(snaps[i], p, w);
        }
        ShadowEstimate e;
        e.pauli = p;
        e.m = values.size();
        jackknife(values, e.estimate, e.standard_error);
        double var = 0.0;
        for (double v : values) var += (v - e.estimate) * (v - e.estimate);
        e.variance = values.size() > 1 ? var / (values.size() - 1) : 0.0;
        e.shadow_norm = duration > 0.0 ? shadow_norm(r0.gamma, r0.n, duration, p) : INFINITY;
        out.push_back(e);
    }
    return out;
}

void write_estimates_csv(std::ostream& os, const std::vector<ShadowEstimate>& est) {
    os << "pauli,estimate,se,shadow_norm,M\n";
    os.precision(17);
    for (const auto& e : est)
        os << e.pauli.str() << ',' << e.estimate << ',' << e.standard_error << ',' << e.shadow_norm << ',' << e.m
           << '\n';
}

}  // namespace qdiff
