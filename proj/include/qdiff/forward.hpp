#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qdiff/linalg.hpp"
#include "qdiff/pauli.hpp"
#include "qdiff/rng.hpp"
#include "qdiff/states.hpp"

namespace qdiff {

struct MeasurementStep {
    int qubit = 0;
    Pauli axis = Pauli::Z;  // X, Y or Z
    int outcome = 1;        // +1 or -1

    bool operator==(const MeasurementStep&) const = default;
};

struct MeasurementRecord {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    double gamma = 0.0;
    double dt = 0.0;
    int n = 0;
    std::vector<MeasurementStep> steps;

    bool operator==(const MeasurementRecord&) const = default;
};

enum class ScheduleMode { UniformRandom, RoundRobin };

struct SchedulePolicy {
    ScheduleMode mode = ScheduleMode::UniformRandom;
    std::uint64_t seed = 0;
};

std::string to_string(ScheduleMode m);
ScheduleMode schedule_mode_from_string(const std::string& s);

// round(T/dt), rejecting T that is not a multiple of dt within 1e-9.
int step_count(double T, double dt);

// Single-qubit Kraus factor (1/sqrt2) sqrt(1 + 2 o sqrt(gamma dt) O). Complete
// for gamma*dt <= 1/4, with p(o) = 1/2 + o sqrt(gamma dt) <O>.
Mat2 kraus_1q(Pauli axis, int outcome, double gamma, double dt);
// Same factor embedded on `qubit` of an n-qubit register.
CMat step_kraus(Pauli axis, int qubit, int outcome, int n, double gamma, double dt);
// Prints a warning once per process when gamma*dt > 0.1.
void check_step_size(double gamma, double dt);

double outcome_probability(const PureState& psi, const MeasurementStep& step, int n, double gamma, double dt);
// psi <- K psi / ||K psi||. Returns ||K psi||^2.
double apply_kraus_step(PureState& psi, const MeasurementStep& step, int n, double gamma, double dt);

struct Trajectory {
    PureState final_state;
    MeasurementRecord record;
    std::vector<PureState> states;  // states[k] after k steps; filled when requested
};

// Trajectory `stream` of the policy's seed. All randomness comes from
// Rng(policy.seed, stream).
Trajectory simulate_trajectory(const PureState& psi0, const SchedulePolicy& policy, double gamma, double dt,
                               double T, std::uint64_t stream, bool keep_states = false);

// Time-ordered product of the first `up_to` step factors (dense, n <= 10).
CMat accumulated_kraus(const MeasurementRecord& record, std::size_t up_to);
// Same product split into per-qubit 2x2 factors.
std::vector<Mat2> accumulated_kraus_per_qubit(const MeasurementRecord& record, std::size_t up_to);
// Per-qubit factors rescaled to unit Frobenius norm; the true factor is
// exp(log_scale[j]) * factor[j].
struct ScaledFactors {
    std::vector<Mat2> factor;
    std::vector<double> log_scale;
};
ScaledFactors accumulated_kraus_scaled(const MeasurementRecord& record, std::size_t up_to);
// Number of steps acting on each qubit within the first `up_to` steps.
std::vector<int> measurement_counts(const MeasurementRecord& record, std::size_t up_to);

// exp(-4 gamma m t / 3n).
double channel_weight_F(double gamma, int n, double t, int m);
PauliVector apply_channel_F(const PauliVector& z, double gamma, double t);
// Exact axis-averaged weight of a single-qubit Pauli after one measurement of
// its qubit: 1 - (2/3)(1 - sqrt(1 - 4 gamma dt)).
double step_weight_exact(double gamma, double dt);

// Drift f_l and noise g_l of the Pauli-coordinate SDE for observable
// O = sum_i x_i P_i, from OPE coefficients. Indexed like all_paulis(n).
RVec drift_ope(const PauliVector& z, const PauliVector& x, double gamma);
RVec noise_ope(const PauliVector& z, const PauliVector& x, double gamma);

// JSON-lines serialization of records.
std::string record_to_json(const MeasurementRecord& r);
MeasurementRecord record_from_json(const std::string& line);
void write_records(std::ostream& os, const std::vector<MeasurementRecord>& records);
std::vector<MeasurementRecord> read_records(std::istream& is);

}  // namespace qdiff
