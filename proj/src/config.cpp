#include "qdiff/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qdiff {

ConfigError::ConfigError(int line_, const std::string& field_, const std::string& message)
    : std::runtime_error((line_ > 0 ? "line " + std::to_string(line_) + ": " : std::string()) +
                         (field_.empty() ? std::string() : "'" + field_ + "': ") + message),
      line(line_),
      field(field_) {}

namespace {

using V = ConfigValue;
using L = std::vector<double>;

std::vector<KeySpec> common_forward() {
    return {{"n", ValueType::Int, V{std::int64_t{1}}},
            {"gamma", ValueType::Real, V{1.0}},
            {"dt", ValueType::Real, V{0.01}},
            {"T", ValueType::Real, V{3.0}},
            {"schedule", ValueType::Text, V{std::string("uniform-random")}}};
}

std::vector<KeySpec> with(std::vector<KeySpec> base, std::vector<KeySpec> extra) {
    base.insert(base.end(), extra.begin(), extra.end());
    return base;
}

const std::map<std::string, std::vector<KeySpec>>& schema() {
    static const std::map<std::string, std::vector<KeySpec>> s = {
        {"forward-verify", with(common_forward(), {{"trajectories", ValueType::Int, V{std::int64_t{10000}}},
                                                   {"record_times", ValueType::RealList, V{L{1.0, 3.0}}}})},
        {"decode", with(common_forward(), {{"M", ValueType::Int, V{std::int64_t{100}}},
                                           {"ensemble", ValueType::Text, V{std::string("near-zero")}},
                                           {"weight_cutoff", ValueType::Int, V{std::int64_t{-1}}}})},
        {"train-reverse",
         with(common_forward(), {{"ensemble", ValueType::Text, V{std::string("near-zero")}},
                                 {"trajectories", ValueType::Int, V{std::int64_t{2000}}},
                                 {"pair_source", ValueType::Text, V{std::string("simulator")}},
                                 {"weight_cutoff", ValueType::Int, V{std::int64_t{-1}}},
                                 {"hidden", ValueType::Int, V{std::int64_t{64}}},
                                 {"epochs", ValueType::Int, V{std::int64_t{20}}},
                                 {"batch_size", ValueType::Int, V{std::int64_t{512}}},
                                 {"lr", ValueType::Real, V{1e-3}}})},
        {"reverse-eval", with(common_forward(), {{"ensemble", ValueType::Text, V{std::string("near-zero")}},
                                                 {"model", ValueType::Text, V{std::string("model.json")}},
                                                 {"test_count", ValueType::Int, V{std::int64_t{400}}},
                                                 {"record_every", ValueType::Int, V{std::int64_t{30}}},
                                                 {"drift_scale", ValueType::Real, V{1.0}},
                                                 {"bootstrap", ValueType::Int, V{std::int64_t{50}}}})},
        {"shadow", with(common_forward(), {{"M", ValueType::Int, V{std::int64_t{100000}}},
                                           {"ensemble", ValueType::Text, V{std::string("zero")}},
                                           {"max_weight", ValueType::Int, V{std::int64_t{2}}},
                                           {"weights", ValueType::Text, V{std::string("calibrated")}},
                                           {"weight_floor", ValueType::Real, V{1e-3}}})},
        {"petz-tfim", {{"n", ValueType::Int, V{std::int64_t{10}}},
                       {"J", ValueType::Real, V{1.0}},
                       {"Bx", ValueType::RealList, V{L{1.5, 2.0, 5.0}}},
                       {"gamma", ValueType::Real, V{1.0}},
                       {"dt", ValueType::Real, V{0.01}},
                       {"T", ValueType::Real, V{10.0}},
                       {"schedule", ValueType::Text, V{std::string("round-robin")}},
                       {"region_halfwidth", ValueType::Int, V{std::int64_t{1}}},
                       {"tau_nodes", ValueType::Int, V{std::int64_t{0}}},
                       {"spd_floor", ValueType::Real, V{1e-8}},
                       {"prior_source", ValueType::Text, V{std::string("true")}}}},
        {"blochfp", {{"n", ValueType::Int, V{std::int64_t{1}}},
                     {"gamma", ValueType::Real, V{1.0}},
                     {"T", ValueType::Real, V{1.0}},
                     {"ntheta", ValueType::Int, V{std::int64_t{64}}},
                     {"nphi", ValueType::Int, V{std::int64_t{128}}},
                     {"cfl", ValueType::Real, V{0.5}},
                     {"amplitude", ValueType::Real, V{1.0}}}},
    };
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& s, int line, const std::string& key) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError(line, key, "expected a real number, got '" + s + "'");
    return v;
}

std::int64_t parse_int(const std::string& s, int line, const std::string& key) {
    std::int64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ConfigError(line, key, "expected an integer, got '" + s + "'");
    return v;
}

ConfigValue parse_value(ValueType type, const std::string& s, int line, const std::string& key) {
    switch (type) {
        case ValueType::Int: return parse_int(s, line, key);
        case ValueType::Real: return parse_real(s, line, key);
        case ValueType::Text:
            if (s.empty()) throw ConfigError(line, key, "empty value");
            return s;
        case ValueType::RealList: {
            L out;
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item), line, key));
            if (out.empty()) throw ConfigError(line, key, "empty list");
            return out;
        }
    }
    return {};
}

const KeySpec* find_key(const std::string& kind, const std::string& key) {
    for (const auto& k : experiment_keys(kind))
        if (k.name == key) return &k;
    return nullptr;
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_value(const ConfigValue& v) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (auto* d = std::get_if<double>(&v)) return format_real(*d);
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    std::string out;
    for (double x : std::get<L>(v)) out += (out.empty() ? "" : ", ") + format_real(x);
    return out;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = {"forward-verify", "decode",    "train-reverse", "reverse-eval",
                                                   "shadow",         "petz-tfim", "blochfp"};
    return kinds;
}

const std::vector<KeySpec>& experiment_keys(const std::string& kind) {
    const auto it = schema().find(kind);
    if (it == schema().end()) throw ConfigError(0, "kind", "unknown experiment kind '" + kind + "'");
    return it->second;
}

ExperimentConfig ExperimentConfig::defaults(const std::string& kind) {
    ExperimentConfig c;
    c.kind = kind;
    for (const auto& k : experiment_keys(kind)) c.values[k.name] = k.fallback;
    return c;
}

std::int64_t ExperimentConfig::integer(const std::string& key) const { return std::get<std::int64_t>(values.at(key)); }
double ExperimentConfig::real(const std::string& key) const { return std::get<double>(values.at(key)); }
const std::string& ExperimentConfig::text(const std::string& key) const {
    return std::get<std::string>(values.at(key));
}
const std::vector<double>& ExperimentConfig::list(const std::string& key) const {
    return std::get<L>(values.at(key));
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (key == "seed") {
        const auto v = parse_int(value, 0, key);
        if (v < 0) throw ConfigError(0, key, "seed must be non-negative");
        seed = static_cast<std::uint64_t>(v);
        return;
    }
    const KeySpec* spec = find_key(kind, key);
    if (!spec) throw ConfigError(0, key, "unknown key for experiment '" + kind + "'");
    values[key] = parse_value(spec->type, value, 0, key);
}

ExperimentConfig parse_config(const std::string& text) {
    std::istringstream is(text);
    std::string raw, section;
    int line = 0;
    std::string kind;
    bool have_seed = false;
    std::uint64_t seed = 0;
    struct Pending {
        int line;
        std::string key, value;
    };
    std::vector<Pending> entries;
    while (std::getline(is, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(line, "", "malformed section header");
            if (!section.empty()) throw ConfigError(line, "", "only one experiment section is allowed");
            section = trim(s.substr(1, s.size() - 2));
            if (kind.empty()) throw ConfigError(line, "kind", "kind must be set before the section");
            if (section != kind) throw ConfigError(line, section, "section does not match kind '" + kind + "'");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "", "expected key = value");
        const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(line, "", "empty key");
        if (section.empty()) {
            if (key == "kind") {
                kind = value;
                try {
                    experiment_keys(kind);
                } catch (const ConfigError&) {
                    throw ConfigError(line, "kind", "unknown experiment kind '" + value + "'");
                }
            } else if (key == "seed") {
                const auto v = parse_int(value, line, key);
                if (v < 0) throw ConfigError(line, key, "seed must be non-negative");
                seed = static_cast<std::uint64_t>(v);
                have_seed = true;
            } else {
                throw ConfigError(line, key, "unknown top-level key (expected kind or seed)");
            }
        } else {
            entries.push_back({line, key, value});
        }
    }
    if (kind.empty()) throw ConfigError(0, "kind", "missing experiment kind");
    if (!have_seed) throw ConfigError(0, "seed", "missing seed (seeds must be explicit)");
    ExperimentConfig c = ExperimentConfig::defaults(kind);
    c.seed = seed;
    std::map<std::string, int> seen;
    for (const auto& e : entries) {
        const KeySpec* spec = find_key(kind, e.key);
        if (!spec) throw ConfigError(e.line, e.key, "unknown key for experiment '" + kind + "'");
        if (seen.count(e.key)) throw ConfigError(e.line, e.key, "duplicate key");
        seen[e.key] = e.line;
        c.values[e.key] = parse_value(spec->type, e.value, e.line, e.key);
    }
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    std::string out = "kind = " + c.kind + "\nseed = " + std::to_string(c.seed) + "\n\n[" + c.kind + "]\n";
    for (const auto& k : experiment_keys(c.kind)) out += k.name + " = " + format_value(c.values.at(k.name)) + "\n";
    return out;
}

void validate(const ExperimentConfig& c) {
    auto has = [&](const char* k) { return c.values.count(k) > 0; };
    if (has("n") && c.integer("n") < 1) throw ConfigError(0, "n", "must be >= 1");
    if (has("gamma") && c.real("gamma") < 0.0) throw ConfigError(0, "gamma", "must be >= 0");
    if (has("T") && c.real("T") < 0.0) throw ConfigError(0, "T", "must be >= 0");
    if (has("dt")) {
        const double dt = c.real("dt");
        if (!(dt > 0.0)) throw ConfigError(0, "dt", "must be > 0");
        const double steps = c.real("T") / dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
            throw ConfigError(0, "T", "must be a multiple of dt");
    }
    for (const char* k : {"M", "trajectories", "test_count", "epochs", "bootstrap"})
        if (has(k) && c.integer(k) < 0) throw ConfigError(0, k, "must be >= 0");
    for (const char* k : {"batch_size", "hidden", "record_every", "ntheta", "nphi"})
        if (has(k) && c.integer(k) < 1) throw ConfigError(0, k, "must be >= 1");
    if (has("schedule")) {
        const auto& s = c.text("schedule");
        if (s != "uniform-random" && s != "round-robin")
            throw ConfigError(0, "schedule", "expected uniform-random or round-robin");
    }
    if (has("prior_source") && c.text("prior_source") != "true")
        throw ConfigError(0, "prior_source", "only 'true' priors are supported by the runner");
    if (has("pair_source") && c.text("pair_source") != "simulator" && c.text("pair_source") != "decoded")
        throw ConfigError(0, "pair_source", "expected simulator or decoded");
    if (has("weights") && c.text("weights") != "calibrated" && c.text("weights") != "closed-form")
        throw ConfigError(0, "weights", "expected calibrated or closed-form");
    if (has("cfl") && !(c.real("cfl") > 0.0 && c.real("cfl") <= 1.0)) throw ConfigError(0, "cfl", "must be in (0, 1]");
}

}  // namespace qdiff
