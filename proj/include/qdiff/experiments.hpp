#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qdiff/blochfp.hpp"
#include "qdiff/config.hpp"
#include "qdiff/forward.hpp"
#include "qdiff/petz.hpp"
#include "qdiff/reverse_learn.hpp"
#include "qdiff/shadows.hpp"

namespace qdiff {

// Independent seed for one role (sources, schedules, shuffles, ...) of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t role);

SchedulePolicy schedule_policy(const ExperimentConfig& config, std::uint64_t role);

struct Dataset {
    int n = 1;
    double gamma = 0.0, dt = 0.0, T = 0.0;
    std::string ensemble;
    std::vector<PureState> sources;
    std::vector<MeasurementRecord> records;
    std::vector<std::vector<PureState>> states;  // per member, when kept
};

// Uses keys n, gamma, dt, T, schedule, ensemble.
Dataset generate_dataset(const ExperimentConfig& config, std::size_t count, bool keep_states = false);
// JSON-lines: one header object, then one record per line.
void write_dataset(std::ostream& os, const Dataset& data);
std::vector<MeasurementRecord> read_dataset(std::istream& is);

struct WeightCheck {
    double t = 0.0;
    std::string pauli;
    int weight = 0;
    double mean = 0.0, standard_error = 0.0, exact = 0.0;
};
// Monte-Carlo Z-string expectations from |0...0> against the closed-form weight.
std::vector<WeightCheck> forward_verify(const ExperimentConfig& config);

struct PetzTfimResult {
    double bx = 0.0;
    GroundState ground;
    RecoveryResult recovery;
};
PetzTfimResult petz_tfim(const ExperimentConfig& config, double bx);

struct ReverseTraining {
    ControlModel model;
    TrainResult result;
};
ReverseTraining train_reverse(const ExperimentConfig& config);

struct W1Point {
    int step = 0;
    double t = 0.0, w1 = 0.0, standard_error = 0.0;
};
// Forward-evolves a fresh test ensemble to T, runs the reverse model back and
// compares each recorded slice with an independent sample of the source ensemble.
std::vector<W1Point> reverse_eval(const ExperimentConfig& config, const ControlModel& model);

struct ShadowRow {
    ShadowEstimate estimate;
    double truth = 0.0;
};
std::vector<ShadowRow> shadow_experiment(const ExperimentConfig& config);

// Positive band-limited (L = 4) density used by the blochfp runs.
SphereField blochfp_test_field(double amplitude = 1.0);

struct BlochFpReport {
    LatLonGrid grid;
    double dt = 0.0;
    RMat p0, pT, recovered;
    double l2_error = 0.0, mass_drift = 0.0;
};
BlochFpReport blochfp_experiment(const ExperimentConfig& config);

// Writes the experiment outputs and manifest.json into out_dir and returns the
// output file names. Relative model paths are resolved against base_dir.
std::vector<std::string> run_experiment(ExperimentConfig config, const std::filesystem::path& out_dir,
                                        const std::filesystem::path& base_dir = ".");

// Git blob hash: sha1("blob <size>\0" + content), lower-case hex.
std::string git_blob_sha1(const std::string& content);
std::string git_blob_sha1_file(const std::filesystem::path& path);

struct ManifestCheck {
    bool ok = true;
    std::vector<std::string> mismatches;
};
// Reruns the manifest's config into out_dir and compares every output hash.
ManifestCheck rerun_manifest(const std::filesystem::path& manifest, const std::filesystem::path& out_dir);

}  // namespace qdiff
