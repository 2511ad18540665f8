#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qdiff/ensembles.hpp"
#include "qdiff/experiments.hpp"
#include "qdiff/pauli.hpp"

using namespace qdiff;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qdiff_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Ensembles, NamesQubitsAndErrors) {
    EXPECT_EQ(ensemble_qubits("near-zero"), 1);
    EXPECT_EQ(ensemble_qubits("heisenberg-thermal"), 2);
    EXPECT_EQ(ensemble_qubits("haar"), -1);
    EXPECT_THROW(ensemble_qubits("tfim"), std::invalid_argument);
    EXPECT_THROW(sample_ensemble("bell", 3, 2, 1), std::invalid_argument);
    for (const char* name : {"near-zero", "bell-perturbed", "heisenberg-thermal", "bell", "random-mixed"}) {
        const int n = ensemble_qubits(name);
        for (const auto& psi : sample_ensemble(name, n, 20, 3)) EXPECT_NEAR(psi.norm(), 1.0, 1e-12) << name;
    }
}

TEST(Ensembles, DeterministicPerMember) {
    const auto a = sample_ensemble("near-zero", 1, 5, 9);
    const auto b = sample_ensemble("near-zero", 1, 3, 9, 2);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(a[i + 2], b[i]);
}

TEST(Ensembles, NearZeroConcentratesOnZero) {
    double overlap = 0.0;
    const auto s = sample_ensemble("near-zero", 1, 4000, 4);
    for (const auto& psi : s) overlap += std::norm(psi(0));
    // E|<0|psi>|^2 is about 1 - sigma^2 = 0.96 for sigma = 0.2.
    EXPECT_NEAR(overlap / s.size(), 0.96, 0.01);
}

TEST(Ensembles, ZeroTemperatureThermalIsGroundState) {
    const CMat h = heisenberg_pair_hamiltonian(1.0, 0.5, 0.5);
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    Rng rng(1, 0);
    const PureState psi = heisenberg_thermal_state(rng, 1.0, 0.5, 0.5, 0.0);
    EXPECT_NEAR(std::norm(es.eigenvectors().col(0).dot(psi)), 1.0, 1e-10);
    // XX + YY + ZZ acts as +1 on the triplet and -3 on the singlet.
    const CMat ss = PauliString::parse("XX").matrix() + PauliString::parse("YY").matrix() +
                    PauliString::parse("ZZ").matrix();
    EXPECT_NEAR((heisenberg_pair_hamiltonian(2.0, 0, 0) - 2.0 * ss).norm(), 0.0, 1e-14);
}

TEST(Ensembles, RandomMixedMembersAverageToTheMean) {
    const auto mean = *ensemble_mean("random-mixed", 2);
    CMat avg = CMat::Zero(4, 4);
    const auto s = sample_ensemble("random-mixed", 2, 20000, 5);
    for (const auto& psi : s) avg += projector(psi);
    avg /= static_cast<double>(s.size());
    EXPECT_LT((avg - mean).norm(), 0.02);
    EXPECT_FALSE(ensemble_mean("near-zero", 1).has_value());
}

TEST(Experiments, GitBlobHashMatchesGit) {
    EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
    EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Experiments, EmptyDatasetHasHeader) {
    ExperimentConfig c = ExperimentConfig::defaults("decode");
    const Dataset d = generate_dataset(c, 0);
    std::stringstream ss;
    write_dataset(ss, d);
    EXPECT_NE(ss.str().find("\"format\":\"qdiff-records\""), std::string::npos);
    EXPECT_TRUE(read_dataset(ss).empty());

    c.values["M"] = std::int64_t{0};
    const fs::path out = scratch("empty");
    run_experiment(c, out);
    std::ifstream records(out / "records.jsonl");
    EXPECT_EQ(read_dataset(records).size(), 0u);
    EXPECT_EQ(slurp(out / "decoded.csv"), "member,step,t\n");
    fs::remove_all(out);
}

TEST(Experiments, DatasetRoundTrip) {
    ExperimentConfig c = ExperimentConfig::defaults("decode");
    c.values["T"] = 0.2;
    const Dataset d = generate_dataset(c, 4);
    std::stringstream ss;
    write_dataset(ss, d);
    EXPECT_EQ(read_dataset(ss), d.records);
}

TEST(Experiments, SameSeedSameBytesAndManifestRerun) {
    ExperimentConfig c = ExperimentConfig::defaults("decode");
    c.values["M"] = std::int64_t{5};
    c.values["T"] = 0.5;
    c.seed = 17;
    const fs::path a = scratch("det_a"), b = scratch("det_b"), r = scratch("det_r");
    const auto files = run_experiment(c, a);
    run_experiment(c, b);
    for (const auto& f : files) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    const ManifestCheck check = rerun_manifest(a / "manifest.json", r);
    EXPECT_TRUE(check.ok);

    c.seed = 18;
    const fs::path d = scratch("det_d");
    run_experiment(c, d);
    EXPECT_NE(slurp(a / "records.jsonl"), slurp(d / "records.jsonl"));
    for (const auto& p : {a, b, r, d}) fs::remove_all(p);
}

TEST(Experiments, ForwardVerifySmall) {
    ExperimentConfig c = ExperimentConfig::defaults("forward-verify");
    c.values["n"] = std::int64_t{2};
    c.values["trajectories"] = std::int64_t{2000};
    c.values["dt"] = 0.01;
    const auto rows = forward_verify(c);
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& w : rows) EXPECT_LT(std::abs(w.mean - w.exact), 5.0 * w.standard_error + 1e-12) << w.pauli;
}

TEST(Experiments, PetzTfimSmall) {
    ExperimentConfig c = ExperimentConfig::defaults("petz-tfim");
    c.values["n"] = std::int64_t{4};
    c.values["T"] = 1.0;
    const auto r = petz_tfim(c, 2.0);
    EXPECT_EQ(r.recovery.trace.back().step, 0);
    EXPECT_GT(r.recovery.trace.back().fidelity_initial, r.recovery.trace.front().fidelity_initial);
}
