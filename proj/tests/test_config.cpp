#include <gtest/gtest.h>

#include "qdiff/config.hpp"

using namespace qdiff;

namespace {

int error_line(const std::string& text, std::string* field = nullptr) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        if (field) *field = e.field;
        return e.line;
    }
    return -1;
}

}  // namespace

TEST(Config, ParsesSectionsCommentsAndLists) {
    const auto c = parse_config(
        "# header\n"
        "kind = petz-tfim\n"
        "seed = 42\n"
        "\n"
        "[petz-tfim]\n"
        "n = 6   # scaled run\n"
        "Bx = 1.5, 2.0 ,5\n"
        "spd_floor = 1e-9\n");
    EXPECT_EQ(c.kind, "petz-tfim");
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.integer("n"), 6);
    EXPECT_EQ(c.list("Bx"), (std::vector<double>{1.5, 2.0, 5.0}));
    EXPECT_DOUBLE_EQ(c.real("spd_floor"), 1e-9);
    EXPECT_DOUBLE_EQ(c.real("T"), 10.0);
}

TEST(Config, RoundTripForEveryKind) {
    for (const auto& kind : experiment_kinds()) {
        ExperimentConfig c = ExperimentConfig::defaults(kind);
        c.seed = 987654321;
        if (c.values.count("gamma")) c.values["gamma"] = 0.1 + 1.0 / 3.0;
        EXPECT_EQ(parse_config(serialize_config(c)), c) << kind;
        EXPECT_EQ(serialize_config(parse_config(serialize_config(c))), serialize_config(c));
    }
}

TEST(Config, UnknownKeyReportsLineAndField) {
    std::string field;
    EXPECT_EQ(error_line("kind = shadow\nseed = 1\n[shadow]\nM = 10\nbogus = 3\n", &field), 5);
    EXPECT_EQ(field, "bogus");
    EXPECT_EQ(error_line("kind = shadow\nseed = 1\n[shadow]\nM = ten\n", &field), 4);
    EXPECT_EQ(field, "M");
    EXPECT_EQ(error_line("kind = shadow\nseed = 1\n[shadow]\nM = 1\nM = 2\n"), 5);
    EXPECT_EQ(error_line("kind = nope\nseed = 1\n", &field), 1);
    EXPECT_EQ(field, "kind");
    EXPECT_EQ(error_line("kind = shadow\nseed = 1\n[decode]\n"), 3);
    EXPECT_EQ(error_line("kind = shadow\nseed = 1\njunk\n"), 3);
}

TEST(Config, SeedsMustBeExplicit) {
    std::string field;
    EXPECT_EQ(error_line("kind = shadow\n[shadow]\n", &field), 0);
    EXPECT_EQ(field, "seed");
}

TEST(Config, ValidatesInvariants) {
    std::string field;
    error_line("kind = decode\nseed = 1\n[decode]\ndt = 0\n", &field);
    EXPECT_EQ(field, "dt");
    error_line("kind = decode\nseed = 1\n[decode]\ndt = 0.01\nT = 0.015\n", &field);
    EXPECT_EQ(field, "T");
    EXPECT_NO_THROW(parse_config("kind = decode\nseed = 1\n[decode]\ndt = 0.01\nT = 3\n"));
    EXPECT_NO_THROW(parse_config("kind = decode\nseed = 1\n[decode]\ndt = 0.001\nT = 0.3\n"));
    error_line("kind = decode\nseed = 1\n[decode]\nschedule = sometimes\n", &field);
    EXPECT_EQ(field, "schedule");
}

TEST(Config, SetOverridesTypedValues) {
    ExperimentConfig c = ExperimentConfig::defaults("shadow");
    c.set("M", "12");
    c.set("seed", "5");
    EXPECT_EQ(c.integer("M"), 12);
    EXPECT_EQ(c.seed, 5u);
    EXPECT_THROW(c.set("Bx", "1"), ConfigError);
    EXPECT_THROW(c.set("gamma", "fast"), ConfigError);
}
