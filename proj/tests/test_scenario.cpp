#include "scenario.hpp"

#include <gtest/gtest.h>

using namespace aiot;
using aiot::cli::ConfigError;
using aiot::cli::parse_scenario;

TEST(Scenario, DefaultsWhenEmpty) {
    auto c = parse_scenario(nlohmann::json::object());
    EXPECT_NO_THROW(c.validate());
    EXPECT_DOUBLE_EQ(c.rx.cbw, 180e3);
    EXPECT_DOUBLE_EQ(c.loop.f_ref, 1.035e6);
}

TEST(Scenario, ReadsNestedSections) {
    auto j = nlohmann::json::parse(R"({
        "seed": 99,
        "rx": {"bw_stepC": 200e3},
        "loop": {"i_cp": 1e-5},
        "vco": {"init_offset_ppm": -250},
        "rffe": {"nf_db": 9, "oob_profile": [[1.2e6, 0], [4e6, 10], [40e6, 27]]},
        "noise": {"enabled": true, "extra_nf_db": 3},
        "calibration": {"lock_hold_cycles": 3},
        "sweep": {"trials": 4, "preamble_symbols": 20}
    })");
    auto c = parse_scenario(j);
    EXPECT_EQ(c.seed, 99u);
    EXPECT_DOUBLE_EQ(c.rx.bw_stepC, 200e3);
    EXPECT_DOUBLE_EQ(c.loop.i_cp, 1e-5);
    EXPECT_DOUBLE_EQ(c.vco.init_offset_ppm, -250);
    EXPECT_DOUBLE_EQ(c.rffe.nf_db, 9);
    ASSERT_EQ(c.rffe.oob_profile.size(), 3u);
    EXPECT_TRUE(c.noise.enabled);
    EXPECT_EQ(c.calibration.options.lock_hold_cycles, 3);
    EXPECT_EQ(c.sweep.trials, 4u);
    EXPECT_EQ(c.sweep.layout.preamble_symbols, 20u);
    EXPECT_NO_THROW(c.validate());
}

TEST(Scenario, UnknownKeysRejected) {
    EXPECT_THROW(parse_scenario(nlohmann::json::parse(R"({"sed": 1})")), ConfigError);
    EXPECT_THROW(parse_scenario(nlohmann::json::parse(R"({"loop": {"icp": 1}})")), ConfigError);
    EXPECT_THROW(parse_scenario(nlohmann::json::parse(R"({"rx": 5})")), ConfigError);
}

TEST(Scenario, BadTypesRejected) {
    EXPECT_THROW(parse_scenario(nlohmann::json::parse(R"({"loop": {"i_cp": "big"}})")), ConfigError);
    EXPECT_THROW(parse_scenario(nlohmann::json::parse(R"({"rffe": {"oob_profile": [[1, 2, 3]]}})")), ConfigError);
}

TEST(Scenario, ChildInvariantsChecked) {
    auto c = parse_scenario(nlohmann::json::parse(R"({"loop": {"c_loop": -1}})"));
    EXPECT_THROW(c.validate(), std::invalid_argument);
    auto d = parse_scenario(nlohmann::json::parse(R"({"rx": {"f_if_target": 1e6}})"));
    EXPECT_THROW(d.validate(), std::invalid_argument);
    auto e = parse_scenario(nlohmann::json::parse(R"({"sweep": {"trials": 0}})"));
    EXPECT_THROW(e.validate(), std::invalid_argument);
}

TEST(Scenario, MissingFile) {
    EXPECT_THROW(cli::load_scenario("/nonexistent/scenario.json"), ConfigError);
}
