#include "qdiff/reverse_learn.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace qdiff {

Mlp Mlp::zeros(int in, int hidden, int out) {
    Mlp m;
    m.w1 = RMat::Zero(hidden, in);
    m.w2 = RMat::Zero(hidden, hidden);
    m.w3 = RMat::Zero(out, hidden);
    m.b1 = RVec::Zero(hidden);
    m.b2 = RVec::Zero(hidden);
    m.b3 = RVec::Zero(out);
    return m;
}

Mlp Mlp::random(int in, int hidden, int out, Rng& rng, double output_gain) {
    Mlp m = zeros(in, hidden, out);
    auto fill = [&rng](RMat& w, double scale) {
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = scale * rng.normal();
    };
    fill(m.w1, 1.0 / std::sqrt(static_cast<double>(in)));
    fill(m.w2, 1.0 / std::sqrt(static_cast<double>(hidden)));
    fill(m.w3, output_gain / std::sqrt(static_cast<double>(hidden)));
    return m;
}

std::size_t Mlp::parameter_count() const {
    return static_cast<std::size_t>(w1.size() + w2.size() + w3.size() + b1.size() + b2.size() + b3.size());
}

RVec Mlp::flatten() const {
    RVec t(parameter_count());
    Eigen::Index o = 0;
    auto put = [&](const auto& m) {
        t.segment(o, m.size()) = Eigen::Map<const RVec>(m.data(), m.size());
        o += m.size();
    };
    put(w1);
    put(b1);
    put(w2);
    put(b2);
    put(w3);
    put(b3);
    return t;
}

void Mlp::assign(const RVec& theta) {
    if (static_cast<std::size_t>(theta.size()) != parameter_count())
        throw std::invalid_argument("Mlp::assign: parameter count mismatch");
    Eigen::Index o = 0;
    auto get = [&](auto& m) {
        Eigen::Map<RVec>(m.data(), m.size()) = theta.segment(o, m.size());
        o += m.size();
    };
    get(w1);
    get(b1);
    get(w2);
    get(b2);
    get(w3);
    get(b3);
}

RMat Mlp::forward(const RMat& x) const {
    RMat h1 = ((w1 * x).colwise() + b1).array().tanh().matrix();
    RMat h2 = ((w2 * h1).colwise() + b2).array().tanh().matrix();
    return (w3 * h2).colwise() + b3;
}

ControlModel ControlModel::create(int n, double dt, double horizon, int weight_cutoff, int hidden, Rng& rng) {
    if (dt <= 0.0 || horizon <= 0.0) throw std::invalid_argument("ControlModel: dt and horizon must be positive");
    ControlModel m;
    m.n = n;
    m.dt = dt;
    m.horizon = horizon;
    m.inputs = paulis_up_to_weight(n, std::min(weight_cutoff, n));
    m.outputs = paulis_up_to_weight(n, std::min(2, n));
    m.net = Mlp::random(static_cast<int>(m.inputs.size()) + 3, hidden, static_cast<int>(m.outputs.size()), rng);
    return m;
}

RVec ControlModel::features(const PureState& psi, double t) const {
    RVec f(inputs.size() + 3);
    for (std::size_t i = 0; i < inputs.size(); ++i) f[i] = inputs[i].expectation(psi);
    const double s = t / horizon;
    f[inputs.size()] = s;
    f[inputs.size() + 1] = std::sin(std::numbers::pi * s);
    f[inputs.size() + 2] = std::cos(std::numbers::pi * s);
    return f;
}

RVec ControlModel::eta(const RVec& features) const { return net.forward(features); }

CMat ControlModel::hamiltonian(const RVec& eta) const {
    const auto d = static_cast<Eigen::Index>(dim_of(n));
    CMat h = CMat::Zero(d, d);
    for (std::size_t j = 0; j < outputs.size(); ++j) h += eta[j] * outputs[j].matrix();
    return h;
}

CMat unitary_score(const ControlModel& model, const RVec& features) {
    return expi_hermitian(model.hamiltonian(model.eta(features)), model.dt);
}

std::vector<TrainingPair> make_pairs(const ControlModel& model, const std::vector<std::vector<PureState>>& trajectories,
                                     double dt) {
    std::vector<TrainingPair> pairs;
    for (const auto& states : trajectories)
        for (std::size_t k = 0; k + 1 < states.size(); ++k) {
            const double t = static_cast<double>(k) * dt;
            pairs.push_back({model.features(states[k + 1], t), states[k], states[k + 1], t});
        }
    return pairs;
}

double pair_infidelity(const CMat& v, const PureState& psi_t, const PureState& psi_next) {
    return 1.0 - std::norm(psi_t.dot(v * psi_next));
}

double frobenius_loss(const CMat& v, const PureState& psi_t, const PureState& psi_next) {
    const CVec moved = v * psi_next;
    return 0.5 * (moved * moved.adjoint() - psi_t * psi_t.adjoint()).squaredNorm();
}

double infidelity_loss(const ControlModel& model, const std::vector<TrainingPair>& batch) {
    if (batch.empty()) throw std::invalid_argument("infidelity_loss: empty batch");
    double s = 0.0;
    for (const auto& p : batch) s += pair_infidelity(unitary_score(model, p.features), p.psi_t, p.psi_next);
    return s / static_cast<double>(batch.size());
}

namespace {

RVec gradient_eta(const std::vector<CMat>& mats, const RVec& eta, double dt, const PureState& psi_t,
                  const PureState& psi_next, double* loss) {
    const auto d = psi_t.size();
    CMat h = CMat::Zero(d, d);
    for (std::size_t j = 0; j < mats.size(); ++j) h += eta[j] * mats[j];
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    const CMat& u = es.eigenvectors();
    const RVec& lam = es.eigenvalues();
    CVec ph(d);
    for (Eigen::Index k = 0; k < d; ++k) ph[k] = std::exp(kI * lam[k] * dt);
    const CVec a_vec = u.adjoint() * psi_t;
    const CVec b_vec = u.adjoint() * psi_next;
    cplx amp = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) amp += std::conj(a_vec[k]) * ph[k] * b_vec[k];
    if (loss) *loss = 1.0 - std::norm(amp);
    // Divided differences of exp(i lambda dt).
    CMat a(d, d);
    for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l) {
            const double gap = lam[k] - lam[l];
            const cplx g = std::abs(gap * dt) < 1e-9 ? kI * dt * ph[k] * (1.0 + 0.5 * kI * gap * dt)
                                                      : (ph[k] - ph[l]) / gap;
            a(k, l) = std::conj(a_vec[k]) * g * b_vec[l];
        }
    const CMat b = u.conjugate() * a * u.transpose();
    RVec grad(mats.size());
    for (std::size_t j = 0; j < mats.size(); ++j) {
        const cplx da = (mats[j].array() * b.array()).sum();
        grad[j] = -2.0 * (std::conj(amp) * da).real();
    }
    return grad;
}

std::vector<CMat> basis_matrices(const std::vector<PauliString>& basis) {
    std::vector<CMat> mats;
    for (const auto& p : basis) mats.push_back(p.matrix());
    return mats;
}

RVec batch_gradient(const ControlModel& model, const std::vector<CMat>& mats, const std::vector<TrainingPair>& data,
                    const std::vector<std::size_t>& idx, std::size_t begin, std::size_t end, double* loss) {
    const Mlp& m = model.net;
    const auto bsz = static_cast<Eigen::Index>(end - begin);
    RMat x(m.inputs(), bsz);
    for (Eigen::Index c = 0; c < bsz; ++c) x.col(c) = data[idx[begin + c]].features;
    const RMat h1 = ((m.w1 * x).colwise() + m.b1).array().tanh().matrix();
    const RMat h2 = ((m.w2 * h1).colwise() + m.b2).array().tanh().matrix();
    const RMat eta = (m.w3 * h2).colwise() + m.b3;
    RMat g(eta.rows(), bsz);
    double total = 0.0;
    for (Eigen::Index c = 0; c < bsz; ++c) {
        const auto& p = data[idx[begin + c]];
        double l = 0.0;
        g.col(c) = gradient_eta(mats, eta.col(c), model.dt, p.psi_t, p.psi_next, &l) / static_cast<double>(bsz);
        total += l;
    }
    if (loss) *loss = total / static_cast<double>(bsz);
    Mlp grad = Mlp::zeros(m.inputs(), static_cast<int>(m.b1.size()), m.outputs());
    grad.w3 = g * h2.transpose();
    grad.b3 = g.rowwise().sum();
    const RMat d2 = ((m.w3.transpose() * g).array() * (1.0 - h2.array().square())).matrix();
    grad.w2 = d2 * h1.transpose();
    grad.b2 = d2.rowwise().sum();
    const RMat d1 = ((m.w2.transpose() * d2).array() * (1.0 - h1.array().square())).matrix();
    grad.w1 = d1 * x.transpose();
    grad.b1 = d1.rowwise().sum();
    return grad.flatten();
}

std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

}  // namespace

RVec infidelity_gradient_eta(const std::vector<PauliString>& basis, const RVec& eta, double dt,
                             const PureState& psi_t, const PureState& psi_next, double* loss) {
    return gradient_eta(basis_matrices(basis), eta, dt, psi_t, psi_next, loss);
}

RVec loss_gradient(const ControlModel& model, const std::vector<TrainingPair>& batch, double* loss) {
    if (batch.empty()) throw std::invalid_argument("loss_gradient: empty batch");
    return batch_gradient(model, basis_matrices(model.outputs), batch, iota_indices(batch.size()), 0, batch.size(),
                          loss);
}

TrainResult train(ControlModel& model, const std::vector<TrainingPair>& data, const TrainOptions& options) {
    if (data.empty()) throw std::invalid_argument("train: empty dataset");
    const auto mats = basis_matrices(model.outputs);
    TrainResult res;
    const double initial = infidelity_loss(model, data);
    res.loss_curve.push_back(initial);
    RVec theta = model.net.flatten();
    RVec m1 = RVec::Zero(theta.size()), m2 = RVec::Zero(theta.size());
    auto idx = iota_indices(data.size());
    Rng rng(options.seed, 0);
    long step = 0;
    int above = 0;
    const auto bs = static_cast<std::size_t>(std::max(1, options.batch_size));
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.below(static_cast<int>(i)))]);
        double sum = 0.0;
        for (std::size_t b = 0; b < idx.size(); b += bs) {
            const std::size_t e = std::min(idx.size(), b + bs);
            double l = 0.0;
            const RVec g = batch_gradient(model, mats, data, idx, b, e, &l);
            sum += l * static_cast<double>(e - b);
            ++step;
            m1 = options.beta1 * m1 + (1.0 - options.beta1) * g;
            m2 = options.beta2 * m2 + (1.0 - options.beta2) * g.cwiseProduct(g);
            const double c1 = 1.0 - std::pow(options.beta1, step);
            const double c2 = 1.0 - std::pow(options.beta2, step);
            theta.array() -= options.lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + options.eps);
            model.net.assign(theta);
        }
        const double mean = sum / static_cast<double>(idx.size());
        if (!std::isfinite(mean)) throw std::runtime_error("train: loss is not finite at epoch " + std::to_string(epoch));
        res.loss_curve.push_back(mean);
        above = mean > initial ? above + 1 : 0;
        if (above >= options.patience)
            throw std::runtime_error("train: loss above its initial value " + std::to_string(initial) + " for " +
                                     std::to_string(above) + " epochs (last " + std::to_string(mean) + ")");
    }
    res.final_loss = res.loss_curve.back();
    return res;
}

ReverseRun reverse_generate(const ControlModel& model, const std::vector<PureState>& ensemble_T, int steps,
                            int record_every, const FeatureProvider& provider, double drift_scale) {
    ReverseRun run;
    std::vector<PureState> cur = ensemble_T;
    run.steps.push_back(steps);
    run.states.push_back(cur);
    for (int k = steps - 1; k >= 0; --k) {
        const double t = k * model.dt;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            const RVec f = provider ? provider(i, k, cur[i]) : model.features(cur[i], t);
            cur[i] = expi_hermitian(model.hamiltonian(model.eta(f)), drift_scale * model.dt) * cur[i];
        }
        if (k == 0 || (record_every > 0 && k % record_every == 0)) {
            run.steps.push_back(k);
            run.states.push_back(cur);
        }
    }
    return run;
}

void save_model(std::ostream& os, const ControlModel& model) {
    nlohmann::json j;
    j["n"] = model.n;
    j["dt"] = model.dt;
    j["horizon"] = model.horizon;
    j["hidden"] = model.net.b1.size();
    for (const auto& p : model.inputs) j["inputs"].push_back(p.str());
    for (const auto& p : model.outputs) j["outputs"].push_back(p.str());
    const RVec theta = model.net.flatten();
    j["theta"] = std::vector<double>(theta.data(), theta.data() + theta.size());
    os << j.dump() << '\n';
}

ControlModel load_model(std::istream& is) {
    nlohmann::json j;
    is >> j;
    ControlModel m;
    m.n = j.at("n").get<int>();
    m.dt = j.at("dt").get<double>();
    m.horizon = j.at("horizon").get<double>();
    for (const auto& s : j.at("inputs")) m.inputs.push_back(PauliString::parse(s.get<std::string>()));
    for (const auto& s : j.at("outputs")) m.outputs.push_back(PauliString::parse(s.get<std::string>()));
    m.net = Mlp::zeros(static_cast<int>(m.inputs.size()) + 3, j.at("hidden").get<int>(),
                       static_cast<int>(m.outputs.size()));
    const auto theta = j.at("theta").get<std::vector<double>>();
    m.net.assign(Eigen::Map<const RVec>(theta.data(), static_cast<Eigen::Index>(theta.size())));
    return m;
}

RVec commutator_coefficients(const CMat& h, const CMat& rho) {
    const int n = qubits_of(rho.rows());
    const CMat comm = -kI * (h * rho - rho * h);
    const auto basis = all_paulis(n);
    RVec c(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) c[i] = basis[i].trace_with(comm).real();
    return c;
}

CMat pauli_sum(const RVec& coefficients, int n) {
    const auto basis = all_paulis(n);
    if (static_cast<std::size_t>(coefficients.size()) != basis.size())
        throw std::invalid_argument("pauli_sum: coefficient count must be 4^n");
    const auto d = static_cast<Eigen::Index>(dim_of(n));
    CMat m = CMat::Zero(d, d);
    for (std::size_t i = 0; i < basis.size(); ++i) m += coefficients[i] * basis[i].matrix();
    return m / static_cast<double>(d);
}

double diffusion_loss(const CMat& h, const PureState& psi_t, const PureState& psi_next, double dt) {
    const int n = qubits_of(psi_t.size());
    const auto basis = all_paulis(n);
    const RVec c = commutator_coefficients(h, psi_next * psi_next.adjoint());
    double s = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const double dz = (basis[i].expectation(psi_next) - basis[i].expectation(psi_t)) / dt;
        s += (dz - c[i]) * (dz - c[i]);
    }
    return 0.5 * s;
}

}  // namespace qdiff
