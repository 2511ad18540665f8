#include "qdiff/experiments.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "qdiff/assignment.hpp"
#include "qdiff/decoder.hpp"
#include "qdiff/ensembles.hpp"
#include "qdiff/pauli.hpp"
#include "qdiff/states.hpp"

namespace qdiff {

namespace {

enum Role : std::uint64_t {
    kSources = 1,
    kSchedule,
    kModelInit,
    kShuffle,
    kEvalSources,
    kEvalSchedule,
    kEvalTruth,
    kBootstrap,
};

int steps_of(const ExperimentConfig& c) { return step_count(c.real("T"), c.real("dt")); }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t role) {
    return Rng::mix(seed ^ Rng::mix(role * 0x9e3779b97f4a7c15ULL));
}

SchedulePolicy schedule_policy(const ExperimentConfig& c, std::uint64_t role) {
    return {schedule_mode_from_string(c.text("schedule")), derive_seed(c.seed, role)};
}

Dataset generate_dataset(const ExperimentConfig& c, std::size_t count, bool keep_states) {
    Dataset d;
    d.n = static_cast<int>(c.integer("n"));
    d.gamma = c.real("gamma");
    d.dt = c.real("dt");
    d.T = c.real("T");
    d.ensemble = c.text("ensemble");
    d.sources = sample_ensemble(d.ensemble, d.n, count, derive_seed(c.seed, kSources));
    const SchedulePolicy policy = schedule_policy(c, kSchedule);
    d.records.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Trajectory tr = simulate_trajectory(d.sources[i], policy, d.gamma, d.dt, d.T, i, keep_states);
        d.records.push_back(std::move(tr.record));
        if (keep_states) d.states.push_back(std::move(tr.states));
    }
    return d;
}

void write_dataset(std::ostream& os, const Dataset& d) {
    nlohmann::json h = {{"format", "qdiff-records"}, {"version", 1},    {"n", d.n},
                        {"gamma", d.gamma},         {"dt", d.dt},       {"T", d.T},
                        {"ensemble", d.ensemble},   {"count", d.records.size()}};
    os << h.dump() << '\n';
    write_records(os, d.records);
}

std::vector<MeasurementRecord> read_dataset(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("dataset: missing header");
    const auto h = nlohmann::json::parse(line);
    if (!h.contains("format") || h["format"] != "qdiff-records") throw std::runtime_error("dataset: bad header");
    auto records = read_records(is);
    if (records.size() != h["count"].get<std::size_t>()) throw std::runtime_error("dataset: record count mismatch");
    return records;
}

std::vector<WeightCheck> forward_verify(const ExperimentConfig& c) {
    const int n = static_cast<int>(c.integer("n"));
    const double gamma = c.real("gamma"), dt = c.real("dt");
    const auto M = static_cast<std::size_t>(c.integer("trajectories"));
    if (M < 2) throw std::invalid_argument("forward-verify needs at least two trajectories");
    std::vector<int> record_steps;
    for (double t : c.list("record_times")) {
        if (t > c.real("T") + 1e-12) throw ConfigError(0, "record_times", "time beyond T");
        record_steps.push_back(step_count(t, dt));
    }
    std::vector<PauliString> strings;
    for (int m = 1; m <= n; ++m) {
        PauliString p(n);
        for (int q = 0; q < m; ++q) p.set(q, Pauli::Z);
        strings.push_back(p);
    }
    const SchedulePolicy policy = schedule_policy(c, kSchedule);
    const PureState psi0 = basis_state(n, 0);
    std::vector<std::vector<double>> sum(record_steps.size(), std::vector<double>(n, 0.0)), sum2 = sum;
    for (std::size_t i = 0; i < M; ++i) {
        const Trajectory tr = simulate_trajectory(psi0, policy, gamma, dt, c.real("T"), i, true);
        for (std::size_t r = 0; r < record_steps.size(); ++r)
            for (int m = 0; m < n; ++m) {
                const double v = strings[m].expectation(tr.states[record_steps[r]]);
                sum[r][m] += v;
                sum2[r][m] += v * v;
            }
    }
    std::vector<WeightCheck> out;
    for (std::size_t r = 0; r < record_steps.size(); ++r)
        for (int m = 0; m < n; ++m) {
            WeightCheck w;
            w.t = record_steps[r] * dt;
            w.pauli = strings[m].str();
            w.weight = m + 1;
            w.mean = sum[r][m] / M;
            const double var = (sum2[r][m] - M * w.mean * w.mean) / (M - 1.0);
            w.standard_error = std::sqrt(std::max(var, 0.0) / M);
            w.exact = channel_weight_F(gamma, n, w.t, m + 1);
            out.push_back(w);
        }
    return out;
}

PetzTfimResult petz_tfim(const ExperimentConfig& c, double bx) {
    const int n = static_cast<int>(c.integer("n"));
    const double gamma = c.real("gamma"), dt = c.real("dt");
    const int N = steps_of(c);
    PetzTfimResult r;
    r.bx = bx;
    r.ground = tfim_ground_state(n, c.real("J"), bx);
    const CMat rho0 = projector(r.ground.psi);
    std::vector<int> qubits(N);
    Rng rng(derive_seed(c.seed, kSchedule), 0);
    const bool round_robin = schedule_mode_from_string(c.text("schedule")) == ScheduleMode::RoundRobin;
    for (int k = 0; k < N; ++k) qubits[k] = round_robin ? k % n : rng.below(n);
    std::vector<int> counts(n, 0);
    for (int q : qubits) ++counts[q];
    const double lambda = step_lambda(gamma, dt);
    const RecoverySchedule schedule =
        build_schedule(qubits, n, static_cast<int>(c.integer("region_halfwidth")), rho0, lambda);
    RecoveryOptions options;
    options.floor = c.real("spd_floor");
    options.tau_nodes = static_cast<int>(c.integer("tau_nodes"));
    r.recovery = run_recovery(schedule, forward_global(rho0, counts, lambda), rho0, options);
    return r;
}

ReverseTraining train_reverse(const ExperimentConfig& c) {
    const int n = static_cast<int>(c.integer("n"));
    const double dt = c.real("dt");
    const bool decoded = c.text("pair_source") == "decoded";
    const Dataset data = generate_dataset(c, static_cast<std::size_t>(c.integer("trajectories")), !decoded);
    int cutoff = static_cast<int>(c.integer("weight_cutoff"));
    if (cutoff < 0) cutoff = default_weight_cutoff(n);
    Rng rng(derive_seed(c.seed, kModelInit), 0);
    ReverseTraining out{ControlModel::create(n, dt, c.real("T"), cutoff, static_cast<int>(c.integer("hidden")), rng),
                        {}};
    std::vector<std::vector<PureState>> trajectories;
    if (decoded) {
        for (const auto& rec : data.records) trajectories.push_back(decode(rec, 0).states);
    } else {
        trajectories = data.states;
    }
    const auto pairs = make_pairs(out.model, trajectories, dt);
    TrainOptions options;
    options.epochs = static_cast<int>(c.integer("epochs"));
    options.batch_size = static_cast<int>(c.integer("batch_size"));
    options.lr = c.real("lr");
    options.seed = derive_seed(c.seed, kShuffle);
    out.result = train(out.model, pairs, options);
    return out;
}

std::vector<W1Point> reverse_eval(const ExperimentConfig& c, const ControlModel& model) {
    const int n = static_cast<int>(c.integer("n"));
    const double gamma = c.real("gamma"), dt = c.real("dt"), T = c.real("T");
    if (model.n != n || std::abs(model.dt - dt) > 1e-15) throw std::invalid_argument("reverse-eval: model mismatch");
    const auto count = static_cast<std::size_t>(c.integer("test_count"));
    const std::string& ens = c.text("ensemble");
    const auto sources = sample_ensemble(ens, n, count, derive_seed(c.seed, kEvalSources));
    const auto truth = sample_ensemble(ens, n, count, derive_seed(c.seed, kEvalTruth));
    const SchedulePolicy policy = schedule_policy(c, kEvalSchedule);
    std::vector<PureState> final_states;
    for (std::size_t i = 0; i < count; ++i)
        final_states.push_back(simulate_trajectory(sources[i], policy, gamma, dt, T, i).final_state);
    const int N = step_count(T, dt);
    const ReverseRun run =
        reverse_generate(model, final_states, N, static_cast<int>(c.integer("record_every")), {}, c.real("drift_scale"));
    Rng rng(derive_seed(c.seed, kBootstrap), 0);
    std::vector<W1Point> out;
    for (std::size_t k = 0; k < run.steps.size(); ++k) {
        W1Point p;
        p.step = run.steps[k];
        p.t = p.step * dt;
        const int resamples = static_cast<int>(c.integer("bootstrap"));
        if (resamples > 1) {
            const W1Estimate e = wasserstein1_bootstrap(run.states[k], truth, resamples, rng);
            p.w1 = e.value;
            p.standard_error = e.standard_error;
        } else {
            p.w1 = wasserstein1(run.states[k], truth);
        }
        out.push_back(p);
    }
    return out;
}

std::vector<ShadowRow> shadow_experiment(const ExperimentConfig& c) {
    const int n = static_cast<int>(c.integer("n"));
    const Dataset data = generate_dataset(c, static_cast<std::size_t>(c.integer("M")));
    DensityMatrix mean;
    if (auto exact = ensemble_mean(data.ensemble, n)) {
        mean = *exact;
    } else {
        mean = CMat::Zero(dim_of(n), dim_of(n));
        for (const auto& s : data.sources) mean += projector(s);
        mean /= static_cast<double>(std::max<std::size_t>(data.sources.size(), 1));
    }
    std::vector<PauliString> targets;
    for (const auto& p : paulis_up_to_weight(n, static_cast<int>(c.integer("max_weight"))))
        if (p.weight() > 0) targets.push_back(p);
    ShadowOptions options;
    options.mode = c.text("weights") == "closed-form" ? ShadowWeightMode::ClosedForm : ShadowWeightMode::Calibrated;
    options.weight_floor = c.real("weight_floor");
    std::vector<ShadowRow> out;
    for (const auto& e : reconstruct(data.records, targets, options))
        out.push_back({e, e.pauli.trace_with(mean).real()});
    return out;
}

SphereField blochfp_test_field(double amplitude) {
    SphereField f = SphereField::uniform(4);
    f.set(1, 0, amplitude * 0.02);
    f.set(1, 1, amplitude * cplx(0.01, -0.005));
    f.set(2, 1, amplitude * cplx(0.008, 0.004));
    f.set(3, 2, amplitude * cplx(-0.006, 0.003));
    f.set(4, 0, amplitude * 0.005);
    return f;
}

BlochFpReport blochfp_experiment(const ExperimentConfig& c) {
    BlochFpReport r;
    r.grid = {static_cast<int>(c.integer("ntheta")), static_cast<int>(c.integer("nphi"))};
    const int n = static_cast<int>(c.integer("n"));
    const double gamma = c.real("gamma"), T = c.real("T");
    const SphereField p0 = blochfp_test_field(c.real("amplitude"));
    r.dt = c.real("cfl") * stable_dt(gamma, n, r.grid);
    r.p0 = sample(p0, r.grid);
    r.pT = sample(forward_fp(p0, gamma, n, T), r.grid);
    r.recovered = backward_fp(r.pT, p0, gamma, n, T, r.grid, r.dt);
    r.l2_error = l2_distance(r.recovered, r.p0, r.grid);
    r.mass_drift = mass(r.recovered, r.grid) - mass(r.pT, r.grid);
    return r;
}

std::string git_blob_sha1(const std::string& content) {
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, header.data(), header.size()) != 1 ||
        EVP_DigestUpdate(ctx, content.data(), content.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha1 failed");
    }
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

std::string git_blob_sha1_file(const std::filesystem::path& path) { return git_blob_sha1(read_text(path)); }

namespace {

using Files = std::vector<std::pair<std::string, std::string>>;  // name, content

Files run_forward_verify(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "t,pauli,weight,mc_mean,mc_se,closed_form,z_score\n";
    for (const auto& w : forward_verify(c))
        os << fmt(w.t) << ',' << w.pauli << ',' << w.weight << ',' << fmt(w.mean) << ',' << fmt(w.standard_error)
           << ',' << fmt(w.exact) << ',' << fmt(w.standard_error > 0 ? (w.mean - w.exact) / w.standard_error : 0.0)
           << '\n';
    return {{"weights.csv", os.str()}};
}

Files run_decode(const ExperimentConfig& c) {
    const Dataset data = generate_dataset(c, static_cast<std::size_t>(c.integer("M")));
    std::ostringstream rec, series, summary;
    write_dataset(rec, data);
    summary << "member,overlap_psi0,log_likelihood,degenerate\n";
    for (std::size_t i = 0; i < data.records.size(); ++i) {
        const DecodedTrajectory d = decode(data.records[i], static_cast<int>(c.integer("weight_cutoff")));
        std::ostringstream one;
        write_decoded_csv(one, d, data.dt);
        std::istringstream lines(one.str());
        std::string line;
        std::getline(lines, line);
        if (i == 0) series << "member," << line << '\n';
        while (std::getline(lines, line)) series << i << ',' << line << '\n';
        const MleResult mle = mle_initial_state(data.records[i]);
        summary << i << ',' << fmt(std::norm(mle.psi0.dot(data.sources[i]))) << ',' << fmt(mle.log_likelihood) << ','
                << (mle.degenerate ? 1 : 0) << '\n';
    }
    if (data.records.empty()) series << "member,step,t\n";
    return {{"records.jsonl", rec.str()}, {"decoded.csv", series.str()}, {"decode_summary.csv", summary.str()}};
}

Files run_train_reverse(const ExperimentConfig& c) {
    const ReverseTraining tr = train_reverse(c);
    std::ostringstream model, loss;
    save_model(model, tr.model);
    loss << "epoch,loss\n";
    for (std::size_t e = 0; e < tr.result.loss_curve.size(); ++e) loss << e << ',' << fmt(tr.result.loss_curve[e]) << '\n';
    return {{"model.json", model.str()}, {"loss.csv", loss.str()}};
}

Files run_reverse_eval(const ExperimentConfig& c) {
    std::ifstream in(c.text("model"));
    if (!in) throw std::runtime_error("reverse-eval: cannot open model '" + c.text("model") + "'");
    const ControlModel model = load_model(in);
    std::ostringstream os;
    os << "step,t,w1,w1_se\n";
    for (const auto& p : reverse_eval(c, model))
        os << p.step << ',' << fmt(p.t) << ',' << fmt(p.w1) << ',' << fmt(p.standard_error) << '\n';
    return {{"w1.csv", os.str()}};
}

Files run_shadow(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "pauli,weight,estimate,standard_error,truth,z_score,m_variance,shadow_norm\n";
    for (const auto& r : shadow_experiment(c)) {
        const auto& e = r.estimate;
        os << e.pauli.str() << ',' << e.pauli.weight() << ',' << fmt(e.estimate) << ',' << fmt(e.standard_error)
           << ',' << fmt(r.truth) << ',' << fmt(e.standard_error > 0 ? (e.estimate - r.truth) / e.standard_error : 0.0)
           << ',' << fmt(e.variance) << ',' << fmt(e.shadow_norm) << '\n';
    }
    return {{"estimates.csv", os.str()}};
}

Files run_petz_tfim(const ExperimentConfig& c) {
    Files files;
    std::ostringstream summary;
    summary << "Bx,fidelity,ground_energy,gap,degenerate\n";
    for (double bx : c.list("Bx")) {
        const PetzTfimResult r = petz_tfim(c, bx);
        std::ostringstream os;
        write_recovery_csv(os, r.recovery, c.real("dt"));
        files.push_back({"recovery_Bx" + fmt(bx) + ".csv", os.str()});
        summary << fmt(bx) << ',' << fmt(r.recovery.trace.back().fidelity_initial) << ',' << fmt(r.ground.energy)
                << ',' << fmt(r.ground.gap) << ',' << (r.ground.degenerate ? 1 : 0) << '\n';
    }
    files.push_back({"fidelity.csv", summary.str()});
    return files;
}

Files run_blochfp(const ExperimentConfig& c) {
    const BlochFpReport r = blochfp_experiment(c);
    std::ostringstream p0, pT, rec, summary;
    write_field_csv(p0, r.p0, r.grid);
    write_field_csv(pT, r.pT, r.grid);
    write_field_csv(rec, r.recovered, r.grid);
    summary << "ntheta,nphi,dt,l2_error,mass_drift\n"
            << r.grid.ntheta << ',' << r.grid.nphi << ',' << fmt(r.dt) << ',' << fmt(r.l2_error) << ','
            << fmt(r.mass_drift) << '\n';
    return {{"field_p0.csv", p0.str()},
            {"field_pT.csv", pT.str()},
            {"field_recovered.csv", rec.str()},
            {"blochfp_summary.csv", summary.str()}};
}

}  // namespace

std::vector<std::string> run_experiment(ExperimentConfig c, const std::filesystem::path& out_dir,
                                        const std::filesystem::path& base_dir) {
    validate(c);
    nlohmann::json inputs = nlohmann::json::array();
    if (c.kind == "reverse-eval") {
        std::filesystem::path model = c.text("model");
        if (model.is_relative()) model = base_dir / model;
        model = std::filesystem::weakly_canonical(model);
        c.values["model"] = model.string();
        inputs.push_back({{"file", model.string()}, {"blob", git_blob_sha1_file(model)}});
    }
    Files files;
    if (c.kind == "forward-verify") files = run_forward_verify(c);
    else if (c.kind == "decode") files = run_decode(c);
    else if (c.kind == "train-reverse") files = run_train_reverse(c);
    else if (c.kind == "reverse-eval") files = run_reverse_eval(c);
    else if (c.kind == "shadow") files = run_shadow(c);
    else if (c.kind == "petz-tfim") files = run_petz_tfim(c);
    else if (c.kind == "blochfp") files = run_blochfp(c);
    else throw ConfigError(0, "kind", "unknown experiment kind '" + c.kind + "'");

    std::filesystem::create_directories(out_dir);
    nlohmann::json outputs = nlohmann::json::array();
    std::vector<std::string> names;
    for (const auto& [name, content] : files) {
        write_text(out_dir / name, content);
        outputs.push_back({{"file", name}, {"blob", git_blob_sha1(content)}});
        names.push_back(name);
    }
    const nlohmann::json manifest = {{"kind", c.kind},
                                     {"seed", c.seed},
                                     {"config", serialize_config(c)},
                                     {"inputs", inputs},
                                     {"outputs", outputs}};
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
    names.push_back("manifest.json");
    return names;
}

ManifestCheck rerun_manifest(const std::filesystem::path& manifest_path, const std::filesystem::path& out_dir) {
    const auto m = nlohmann::json::parse(read_text(manifest_path));
    const ExperimentConfig c = parse_config(m.at("config").get<std::string>());
    ManifestCheck check;
    for (const auto& in : m.at("inputs")) {
        const std::string file = in.at("file");
        if (!std::filesystem::exists(file) || git_blob_sha1_file(file) != in.at("blob").get<std::string>()) {
            check.ok = false;
            check.mismatches.push_back(file + " (input changed or missing)");
        }
    }
    if (!check.ok) return check;
    run_experiment(c, out_dir);
    for (const auto& out : m.at("outputs")) {
        const std::string file = out.at("file");
        const auto path = out_dir / file;
        if (!std::filesystem::exists(path) || git_blob_sha1_file(path) != out.at("blob").get<std::string>()) {
            check.ok = false;
            check.mismatches.push_back(file);
        }
    }
    return check;
}

}  // namespace qdiff
