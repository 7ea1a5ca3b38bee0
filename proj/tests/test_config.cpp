#include <gtest/gtest.h>

#include "support.hpp"

using namespace ccfsense;
using nlohmann::json;
using testsupport::preset;
using testsupport::preset_json;

TEST(Config, PresetsParse) {
    for (const auto* name : {"short", "medium", "tall"}) {
        const auto d = preset(name);
        EXPECT_TRUE(d.sensing.has_value()) << name;
        EXPECT_TRUE(d.experiment.has_value()) << name;
        EXPECT_NO_THROW(config::to_plan(d, 1)) << name;
    }
}

TEST(Config, UnknownKeyIsRejectedWithPath) {
    auto j = preset_json("short");
    j["geometry"]["h_bean"] = {{"value", 1}, {"unit", "mm"}};
    try {
        config::parse_document(j);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("geometry.h_bean"), std::string::npos);
    }
}

TEST(Config, WrongUnitDimensionIsRejected) {
    auto j = preset_json("short");
    j["geometry"]["h_beam"]["unit"] = "MPa";
    EXPECT_THROW(config::parse_document(j), ConfigError);
    j = preset_json("short");
    j["geometry"]["h_beam"] = 6;
    EXPECT_THROW(config::parse_document(j), ConfigError);
}

TEST(Config, LaterDocumentsOverrideEarlier) {
    const json patch = {{"geometry", {{"h_beam", {{"value", 7}, {"unit", "mm"}}}}}};
    const auto d = config::parse_document(config::merge({preset_json("short"), patch}));
    EXPECT_DOUBLE_EQ(d.geometry.beam_height, 7e-3);
    EXPECT_DOUBLE_EQ(d.geometry.beam_width, 9e-3);
}

TEST(Config, PlanSurvivesCanonicalRoundTrip) {
    const auto plan = config::to_plan(preset("medium"), 5);
    const auto j = config::to_json(plan);
    const auto again = config::to_plan(config::parse_document(j), 5);
    EXPECT_EQ(config::to_json(again), j);
    EXPECT_EQ(config::plan_digest(again), config::plan_digest(plan));
}

TEST(Config, DigestTracksContent) {
    auto a = config::to_plan(preset("short"), 1);
    auto b = a;
    b.waveform.hold_duration += 1;
    EXPECT_NE(config::plan_digest(a), config::plan_digest(b));
    EXPECT_EQ(config::plan_digest(a).size(), 16u);
}

TEST(Config, ExplicitBreakinSetList) {
    auto j = preset_json("short");
    j["experiment"]["breakin_sets"] = json::array({{{"offset", {{"value", 38}, {"unit", "N"}}},
                                                    {"amplitude", {{"value", 10}, {"unit", "N"}}}}});
    const auto d = config::parse_document(j);
    ASSERT_EQ(d.experiment->waveform.breakin_sets.size(), 1u);
    EXPECT_EQ(d.experiment->waveform.breakin_sets[0].offset, 38.0);
}

TEST(Config, BreakinAboveCeilingIsRejected) {
    auto j = preset_json("short");
    j["experiment"]["breakin_sets"]["last_offset"]["value"] = 65;
    EXPECT_THROW(config::parse_document(j), PhysicsError);
}

TEST(Config, UnknownPresetName) {
    EXPECT_THROW(config::preset_path("huge", CCFSENSE_PRESET_DIR), ConfigError);
}

TEST(Config, AnalysisOptions) {
    auto j = preset_json("short");
    j["analysis"]["strain_mode"] = "relative";
    EXPECT_TRUE(config::parse_document(j).analysis.relative_strain);
    j["analysis"]["strain_mode"] = "sideways";
    EXPECT_THROW(config::parse_document(j), ConfigError);
}
