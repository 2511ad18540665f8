#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qdiff {

// Config text format:
//
//   kind = petz-tfim
//   seed = 7
//   [petz-tfim]
//   n = 10
//   bx = 1.5, 2, 5
//
// Top-level keys are kind and seed; the single section must be named after
// the kind. '#' starts a comment.
struct ConfigError : std::runtime_error {
    ConfigError(int line, const std::string& field, const std::string& message);
    int line;
    std::string field;
};

using ConfigValue = std::variant<std::int64_t, double, std::string, std::vector<double>>;

enum class ValueType { Int, Real, Text, RealList };

struct KeySpec {
    std::string name;
    ValueType type;
    ConfigValue fallback;
};

const std::vector<std::string>& experiment_kinds();
// Keys accepted in the section of `kind`, with defaults.
const std::vector<KeySpec>& experiment_keys(const std::string& kind);

struct ExperimentConfig {
    std::string kind;
    std::uint64_t seed = 1;
    std::map<std::string, ConfigValue> values;  // every schema key present

    static ExperimentConfig defaults(const std::string& kind);

    std::int64_t integer(const std::string& key) const;
    double real(const std::string& key) const;
    const std::string& text(const std::string& key) const;
    const std::vector<double>& list(const std::string& key) const;
    // Parses `key=value` against the schema; used for command-line overrides.
    void set(const std::string& key, const std::string& value);

    bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);
// Checks cross-key invariants (dt > 0, T a multiple of dt, counts >= 0, ...).
void validate(const ExperimentConfig& config);

}  // namespace qdiff
