#include <gtest/gtest.h>

#include "relaxometer/experiment.hpp"

using namespace relaxometer;

namespace {

int error_line(const std::string& text) {
    try {
        parse_config(text, "t.json");
    } catch (const ConfigFileError& e) {
        return e.line();
    }
    return -1;
}

} // namespace

TEST(Config, ParsesRmtExperiment) {
    const auto cfg = parse_config(R"({"kind": "rmt", "ensemble": "GUE", "sizes": [8, 16],
                                      "realizations": [4, 2], "f": "1/4", "seed": 3, "output": "x"})");
    EXPECT_EQ(cfg.kind, "rmt");
    EXPECT_EQ(cfg.seed, 3u);
    const auto& rmt = std::get<RmtExperiment>(cfg.body);
    EXPECT_EQ(rmt.ensemble, EnsembleKind::GUE);
    EXPECT_EQ(rmt.sizes, (std::vector<Index>{8, 16}));
    EXPECT_EQ(rmt.fractions, (std::vector<Fraction>{Fraction(1, 4)}));
    EXPECT_FALSE(cfg.echo.empty());
}

TEST(Config, UnknownKeyReportsItsLine) {
    EXPECT_EQ(error_line("{\n  \"kind\": \"rmt\",\n  \"sizez\": [8],\n  \"realizations\": [1]\n}"), 3);
}

TEST(Config, MalformedJsonReportsALine) {
    EXPECT_EQ(error_line("{\n  \"kind\": \"rmt\",\n  \"sizes\": [8,,]\n}"), 3);
}

TEST(Config, MessageCarriesSourceAndLine) {
    try {
        parse_config("{\"kind\": \"nope\"}", "bad.json");
        FAIL();
    } catch (const ConfigurationError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("bad.json:1:", 0), 0u) << e.what();
    }
}

TEST(Config, SemanticChecks) {
    // Mismatched list lengths.
    EXPECT_GT(error_line(R"({"kind": "rmt", "ensemble": "GOE", "sizes": [8, 16], "realizations": [4]})"), 0);
    // f*D not integral.
    EXPECT_GT(error_line(R"({"kind": "rmt", "ensemble": "GOE", "sizes": [9], "realizations": [4], "f": "1/2"})"), 0);
    // RP without gammas.
    EXPECT_GT(error_line(R"({"kind": "rp", "ensemble": "RP-GOE", "sizes": [8], "realizations": [1]})"), 0);
    // Baker size incompatible with its scheme.
    EXPECT_GT(error_line(R"({"kind": "baker", "schemes": ["1/3"], "sizes": [100]})"), 0);
    EXPECT_GT(error_line(R"({"kind": "ising", "models": ["xyz"], "sites": [6]})"), 0);
}

TEST(Config, OversizedRunsAreResourceErrors) {
    EXPECT_THROW(parse_config(R"({"kind": "rmt", "ensemble": "GOE", "sizes": [20000], "realizations": [1]})"), ResourceLimit);
    EXPECT_THROW(parse_config(R"({"kind": "ising", "models": ["bch"], "sites": [16]})"), ResourceLimit);
    EXPECT_NO_THROW(parse_config(R"({"kind": "rmt", "ensemble": "GOE", "sizes": [20000], "realizations": [1], "max_dimension": 30000})"));
}

TEST(Config, IsingModelsByPresetOrExplicitFields) {
    const auto cfg = parse_config(
        R"({"kind": "ising", "models": ["kim-huse", {"name": "mine", "hx": 0.5, "hz": 0.25}], "sites": [6],
            "partition_basis": "sector"})");
    const auto& e = std::get<IsingExperiment>(cfg.body);
    ASSERT_EQ(e.models.size(), 2u);
    EXPECT_EQ(e.models[1].name, "mine");
    EXPECT_EQ(e.partition_basis, PartitionBasis::Sector);
}

TEST(Config, AcceptancePresetsParse) {
    for (const char* name : {"rmt_goe", "rmt_gue", "rmt_gue_fractions", "oracle", "baker_spectrum", "baker_scaling",
                             "ising", "rp_goe", "rp_gue", "rp_timeseries", "moments"}) {
        EXPECT_NO_THROW(load_config(std::string(RELAXOMETER_SOURCE_DIR) + "/configs/acceptance/" + name + ".json"))
            << name;
    }
}

TEST(Config, MissingFile) {
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigurationError);
}
