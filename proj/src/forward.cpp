#include "qdiff/forward.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

namespace qdiff {

namespace {

double pauli_expectation_1q(const PureState& psi, Pauli axis, int qubit, int n) {
    const std::size_t stride = std::size_t{1} << bit_of(qubit, n);
    const std::size_t dim = dim_of(n);
    double acc = 0.0;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const cplx a = psi[i], b = psi[i + stride];
            switch (axis) {
                case Pauli::X: acc += 2.0 * (std::conj(a) * b).real(); break;
                case Pauli::Y: acc += 2.0 * (std::conj(a) * b).imag(); break;
                case Pauli::Z: acc += std::norm(a) - std::norm(b); break;
                case Pauli::I: acc += std::norm(a) + std::norm(b); break;
            }
        }
    }
    return acc;
}

}  // namespace

std::string to_string(ScheduleMode m) {
    return m == ScheduleMode::RoundRobin ? "round-robin" : "uniform-random";
}

ScheduleMode schedule_mode_from_string(const std::string& s) {
    if (s == "round-robin") return ScheduleMode::RoundRobin;
    if (s == "uniform-random") return ScheduleMode::UniformRandom;
    throw std::invalid_argument("unknown schedule mode '" + s + "'");
}

int step_count(double T, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (T < 0.0) throw std::invalid_argument("T must be non-negative");
    const double r = T / dt;
    const double k = std::round(r);
    if (std::abs(r - k) > 1e-9 * std::max(1.0, r)) throw std::invalid_argument("T is not a multiple of dt");
    return static_cast<int>(k);
}

void check_step_size(double gamma, double dt) {
    static std::atomic<bool> warned{false};
    if (gamma * dt > 0.25) throw std::invalid_argument("gamma*dt > 1/4: Kraus factor is not defined");
    if (gamma * dt > 0.1 && !warned.exchange(true))
        std::cerr << "warning: gamma*dt = " << gamma * dt << " is not small\n";
}

Mat2 kraus_1q(Pauli axis, int outcome, double gamma, double dt) {
    if (axis == Pauli::I) throw std::invalid_argument("measurement axis must be X, Y or Z");
    if (outcome != 1 && outcome != -1) throw std::invalid_argument("outcome must be +1 or -1");
    if (gamma < 0.0 || dt <= 0.0) throw std::invalid_argument("gamma >= 0 and dt > 0 required");
    const double a = std::sqrt(gamma * dt);
    if (2.0 * a > 1.0) throw std::invalid_argument("gamma*dt > 1/4: Kraus factor is not defined");
    const double sp = std::sqrt(1.0 + 2.0 * a), sm = std::sqrt(1.0 - 2.0 * a);
    const double c0 = 0.5 * (sp + sm), c1 = 0.5 * (sp - sm);
    return (c0 * pauli_2x2(0) + (outcome * c1) * pauli_2x2(static_cast<int>(axis))) / std::sqrt(2.0);
}

CMat step_kraus(Pauli axis, int qubit, int outcome, int n, double gamma, double dt) {
    if (qubit < 0 || qubit >= n) throw std::out_of_range("step_kraus: qubit index");
    return embed_1q(kraus_1q(axis, outcome, gamma, dt), qubit, n);
}

double outcome_probability(const PureState& psi, const MeasurementStep& step, int n, double gamma, double dt) {
    const double ev = pauli_expectation_1q(psi, step.axis, step.qubit, n);
    return 0.5 + step.outcome * std::sqrt(gamma * dt) * ev;
}

double apply_kraus_step(PureState& psi, const MeasurementStep& step, int n, double gamma, double dt) {
    apply_1q(psi, kraus_1q(step.axis, step.outcome, gamma, dt), step.qubit, n);
    const double nrm2 = psi.squaredNorm();
    if (!(nrm2 > 1e-300)) throw std::runtime_error("norm underflow in Kraus step");
    psi /= std::sqrt(nrm2);
    return nrm2;
}

Trajectory simulate_trajectory(const PureState& psi0, const SchedulePolicy& policy, double gamma, double dt,
                               double T, std::uint64_t stream, bool keep_states) {
    const int n = qubits_of(psi0.size());
    if (std::abs(psi0.norm() - 1.0) > 1e-10) throw std::invalid_argument("initial state is not normalized");
    check_step_size(gamma, dt);
    const int steps = step_count(T, dt);
    Rng rng(policy.seed, stream);

    Trajectory tr;
    tr.record = MeasurementRecord{policy.seed, stream, gamma, dt, n, {}};
    tr.record.steps.reserve(steps);
    PureState psi = psi0;
    if (keep_states) {
        tr.states.reserve(steps + 1);
        tr.states.push_back(psi);
    }
    const double a = std::sqrt(gamma * dt);
    for (int k = 0; k < steps; ++k) {
        MeasurementStep s;
        s.qubit = policy.mode == ScheduleMode::RoundRobin ? k % n : rng.below(n);
        s.axis = static_cast<Pauli>(1 + rng.below(3));
        const double ev = pauli_expectation_1q(psi, s.axis, s.qubit, n);
        const double p_plus = 0.5 + a * ev;
        s.outcome = rng.uniform() < p_plus ? 1 : -1;
        apply_kraus_step(psi, s, n, gamma, dt);
        tr.record.steps.push_back(s);
        if (keep_states) tr.states.push_back(psi);
    }
    tr.final_state = std::move(psi);
    return tr;
}

CMat accumulated_kraus(const MeasurementRecord& record, std::size_t up_to) {
    if (up_to > record.steps.size()) throw std::out_of_range("accumulated_kraus: index out of range");
    const int n = record.n;
    CMat k = CMat::Identity(dim_of(n), dim_of(n));
    for (std::size_t i = 0; i < up_to; ++i) {
        const auto& s = record.steps[i];
        k = step_kraus(s.axis, s.qubit, s.outcome, n, record.gamma, record.dt) * k;
    }
    return k;
}

std::vector<Mat2> accumulated_kraus_per_qubit(const MeasurementRecord& record, std::size_t up_to) {
    if (up_to > record.steps.size()) throw std::out_of_range("accumulated_kraus_per_qubit: index out of range");
    std::vector<Mat2> f(record.n, Mat2::Identity());
    for (std::size_t i = 0; i < up_to; ++i) {
        const auto& s = record.steps[i];
        f[s.qubit] = kraus_1q(s.axis, s.outcome, record.gamma, record.dt) * f[s.qubit];
    }
    return f;
}

ScaledFactors accumulated_kraus_scaled(const MeasurementRecord& record, std::size_t up_to) {
    if (up_to > record.steps.size()) throw std::out_of_range("accumulated_kraus_scaled: index out of range");
    ScaledFactors out{std::vector<Mat2>(record.n, Mat2::Identity()), std::vector<double>(record.n, 0.0)};
    for (std::size_t i = 0; i < up_to; ++i) {
        const auto& s = record.steps[i];
        Mat2& f = out.factor[s.qubit];
        f = kraus_1q(s.axis, s.outcome, record.gamma, record.dt) * f;
        const double nrm = f.norm();
        f /= nrm;
        out.log_scale[s.qubit] += std::log(nrm);
    }
    return out;
}

std::vector<int> measurement_counts(const MeasurementRecord& record, std::size_t up_to) {
    std::vector<int> c(record.n, 0);
    for (std::size_t i = 0; i < std::min(up_to, record.steps.size()); ++i) ++c[record.steps[i].qubit];
    return c;
}

double channel_weight_F(double gamma, int n, double t, int m) {
    if (t < 0.0) throw std::invalid_argument("t must be non-negative");
    return std::exp(-4.0 * gamma * m * t / (3.0 * n));
}

PauliVector apply_channel_F(const PauliVector& z, double gamma, double t) {
    PauliVector out(z.n());
    for (const auto& [p, v] : z.entries()) out.set(p, v * channel_weight_F(gamma, z.n(), t, p.weight()));
    return out;
}

double step_weight_exact(double gamma, double dt) {
    return 1.0 - (2.0 / 3.0) * (1.0 - std::sqrt(1.0 - 4.0 * gamma * dt));
}

RVec drift_ope(const PauliVector& z, const PauliVector& x, double gamma) {
    const int n = z.n();
    const auto basis = all_paulis(n);
    RVec f = RVec::Zero(basis.size());
    for (std::size_t l = 0; l < basis.size(); ++l) {
        cplx acc = 0;
        for (const auto& [pi, xi] : x.entries())
            for (const auto& [pj, xj] : x.entries())
                for (const auto& [pk, zk] : z.entries())
                    for (const auto& pm : basis) {
                        const cplx t1 = ope_coefficient(pi, pj, pm) * ope_coefficient(pk, basis[l], pm);
                        const cplx t2 = ope_coefficient(pi, pk, pm) * ope_coefficient(pj, basis[l], pm);
                        acc += (t1 - t2) * xi * xj * zk;
                    }
        f[l] = -gamma * acc.real();
    }
    return f;
}

RVec noise_ope(const PauliVector& z, const PauliVector& x, double gamma) {
    const int n = z.n();
    const auto basis = all_paulis(n);
    double ev = 0.0;
    for (const auto& [pi, xi] : x.entries()) ev += xi * z.get(pi);
    RVec g = RVec::Zero(basis.size());
    for (std::size_t l = 0; l < basis.size(); ++l) {
        cplx acc = 0;
        for (const auto& [pi, xi] : x.entries())
            for (const auto& [pj, zj] : z.entries())
                acc += (ope_coefficient(pi, pj, basis[l]) + ope_coefficient(pj, pi, basis[l])) * xi * zj;
        g[l] = std::sqrt(gamma) * (acc.real() - 2.0 * ev * z.get(basis[l]));
    }
    return g;
}

std::string record_to_json(const MeasurementRecord& r) {
    nlohmann::json j;
    j["seed"] = r.seed;
    j["stream"] = r.stream;
    j["gamma"] = r.gamma;
    j["dt"] = r.dt;
    j["n"] = r.n;
    auto steps = nlohmann::json::array();
    for (const auto& s : r.steps)
        steps.push_back({{"q", s.qubit}, {"axis", std::string(1, pauli_char(s.axis))}, {"o", s.outcome}});
    j["steps"] = std::move(steps);
    return j.dump();
}

MeasurementRecord record_from_json(const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    MeasurementRecord r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.stream = j.value("stream", std::uint64_t{0});
    r.gamma = j.at("gamma").get<double>();
    r.dt = j.at("dt").get<double>();
    r.n = j.at("n").get<int>();
    for (const auto& s : j.at("steps")) {
        MeasurementStep st;
        st.qubit = s.at("q").get<int>();
        const auto ax = s.at("axis").get<std::string>();
        if (ax.size() != 1 || PauliString::parse(ax).at(0) == Pauli::I)
            throw std::invalid_argument("record: invalid axis '" + ax + "'");
        st.axis = PauliString::parse(ax).at(0);
        st.outcome = s.at("o").get<int>();
        if (st.qubit < 0 || st.qubit >= r.n) throw std::invalid_argument("record: qubit out of range");
        if (st.outcome != 1 && st.outcome != -1) throw std::invalid_argument("record: outcome must be +-1");
        r.steps.push_back(st);
    }
    return r;
}

void write_records(std::ostream& os, const std::vector<MeasurementRecord>& records) {
    for (const auto& r : records) os << record_to_json(r) << '\n';
}

std::vector<MeasurementRecord> read_records(std::istream& is) {
    std::vector<MeasurementRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        out.push_back(record_from_json(line));
    }
    return out;
}

}  // namespace qdiff
