#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace ccfsense;
using testsupport::preset;

namespace {

ExperimentPlan default_plan(const std::string& name = "short", std::uint64_t seed = 1) {
    return config::to_plan(preset(name), seed);
}

int count_maxima(const std::vector<double>& f, std::size_t b, std::size_t e) {
    int n = 0;
    for (std::size_t i = b + 1; i + 1 < e; ++i)
        if (f[i] > f[i - 1] && f[i] >= f[i + 1]) ++n;
    return n;
}

std::vector<const nlohmann::json*> small_sets(const TimeSeriesRecord& rec) {
    std::vector<const nlohmann::json*> out;
    for (const auto& s : rec.metadata.at("sets"))
        if (s.at("kind") == "small") out.push_back(&s);
    return out;
}

}  // namespace

TEST(Waveform, SmallSetsLastFortySecondsWithTwentyCycles) {
    const auto plan = default_plan();
    const auto w = build_waveform(plan.waveform, plan.sample_rate);
    int small = 0;
    for (const auto& s : w.segments) {
        if (s.kind != SegmentKind::Small) continue;
        ++small;
        EXPECT_EQ(s.end - s.begin, 4000u);
        EXPECT_EQ(count_maxima(w.force, s.begin, s.end), 20);
        for (std::size_t i = s.begin; i < s.end; ++i) {
            EXPECT_GE(w.force[i], plan.waveform.force_floor);
            EXPECT_LE(w.force[i], plan.waveform.force_floor + plan.waveform.small_amplitude + 1e-12);
        }
    }
    EXPECT_EQ(small, 1 + static_cast<int>(plan.waveform.breakin_sets.size()));
}

TEST(Waveform, NoBreakinSetsMeansSmallsAndHoldsOnly) {
    auto spec = default_plan().waveform;
    spec.breakin_sets.clear();
    const auto w = build_waveform(spec, 100.0);
    EXPECT_DOUBLE_EQ(*std::max_element(w.force.begin(), w.force.end()), spec.force_floor + spec.small_amplitude);
    for (const auto& s : w.segments) EXPECT_TRUE(s.kind == SegmentKind::Small || s.kind == SegmentKind::Hold);
}

TEST(Waveform, BreakinPeakAppearsExactly) {
    auto spec = default_plan().waveform;
    spec.breakin_sets = {{38.0, 10.0}};
    const auto w = build_waveform(spec, 100.0);
    EXPECT_EQ(*std::max_element(w.force.begin(), w.force.end()), 48.0);
}

TEST(Waveform, RejectsPeakAboveCeiling) {
    auto spec = default_plan().waveform;
    spec.breakin_sets.push_back({65.0, 10.0});
    EXPECT_THROW(build_waveform(spec, 100.0), PhysicsError);
}

TEST(Waveform, RejectsLighterLaterSet) {
    auto spec = default_plan().waveform;
    spec.breakin_sets = {{40.0, 10.0}, {35.0, 10.0}};
    EXPECT_THROW(build_waveform(spec, 100.0), PhysicsError);
}

TEST(Plan, SampleRateMustResolveCycles) {
    auto plan = default_plan();
    plan.sample_rate = 5.0;
    EXPECT_THROW(run_experiment(plan), PhysicsError);
}

TEST(Simulation, SameSeedSameBytes) {
    const auto a = run_experiment(default_plan("short", 77));
    const auto b = run_experiment(default_plan("short", 77));
    EXPECT_EQ(to_csv(a), to_csv(b));
    EXPECT_EQ(a.metadata.dump(), b.metadata.dump());
}

TEST(Simulation, TimeIsStrictlyIncreasingAndForceBounded) {
    const auto plan = default_plan();
    const auto rec = run_experiment(plan);
    for (std::size_t i = 1; i < rec.size(); ++i) ASSERT_GT(rec.time[i], rec.time[i - 1]);
    for (double f : rec.force) {
        ASSERT_GE(f, plan.waveform.force_floor);
        ASSERT_LE(f, plan.waveform.force_ceiling);
    }
}

TEST(Simulation, NoBreakinGivesFlatTraces) {
    for (const auto* name : {"short", "medium", "tall"}) {
        auto plan = default_plan(name);
        plan.waveform.breakin_sets.clear();
        const auto rec = run_experiment(plan);
        for (int g = 0; g < 2; ++g) {
            const auto [lo, hi] = std::minmax_element(rec.resistance[g].begin(), rec.resistance[g].end());
            EXPECT_LT((*hi - *lo) / *lo, 2e-3) << name << " gauge " << g;
        }
    }
}

TEST(Simulation, BreakinRaisesCompressionGaugeResponse) {
    const auto rec = run_experiment(default_plan());
    const auto sets = small_sets(rec);
    ASSERT_GE(sets.size(), 3u);
    auto response = [&](const nlohmann::json& s) {
        const double t0 = s.at("t_start").get<double>(), t1 = s.at("t_end").get<double>();
        double lo = 1e300, hi = -1e300;
        for (std::size_t i = 0; i < rec.size(); ++i)
            if (rec.time[i] >= t0 && rec.time[i] <= t1) {
                lo = std::min(lo, rec.resistance[0][i]);
                hi = std::max(hi, rec.resistance[0][i]);
            }
        return hi - lo;
    };
    EXPECT_GT(response(*sets[1]), response(*sets[0]));
    EXPECT_GT(response(*sets[2]), response(*sets[1]));
}

TEST(Simulation, InitialOrientationDamagesOnlyTheCompressedGauge) {
    auto plan = default_plan();
    plan.orientations = {Orientation::Initial};
    const auto rec = run_experiment(plan);
    const auto& fin = rec.metadata.at("final_gauges");
    EXPECT_GT(fin[0].at("broken_fraction").get<double>(), 0.0);
    EXPECT_EQ(fin[1].at("broken_fraction").get<double>(), 0.0);
    EXPECT_EQ(fin[1].at("k_effective").get<double>(), plan.setup.gauge.intrinsic_gauge_factor);
}

TEST(Simulation, UnstrainedResistanceNeverDrops) {
    const auto rec = run_experiment(default_plan());
    for (int g = 0; g < 2; ++g) {
        double last = 0.0;
        for (const auto* s : small_sets(rec)) {
            const double a = s->at("gauges")[g].at("R_unstrained_start").get<double>();
            const double b = s->at("gauges")[g].at("R_unstrained_end").get<double>();
            EXPECT_GE(a, last);
            EXPECT_GE(b, a);
            last = b;
        }
    }
}

TEST(Simulation, HoldsDoNotChangeFinalDamage) {
    auto a = default_plan("short", 9);
    auto b = a;
    b.waveform.hold_duration = 0.0;
    const auto ra = run_experiment(a);
    const auto rb = run_experiment(b);
    EXPECT_EQ(ra.metadata.at("final_gauges"), rb.metadata.at("final_gauges"));
    EXPECT_LT(rb.size(), ra.size());
}

TEST(Simulation, InsulatingFullBreakMarksChannelOpen) {
    auto plan = default_plan();
    plan.setup.gauge.matrix = MatrixKind::Insulating;
    plan.setup.gauge.contact_resistance = 67500;
    plan.setup.gauge.weibull_modulus = 200;
    plan.setup.gauge.weibull_scale = 300e6;
    const auto rec = run_experiment(plan);
    EXPECT_TRUE(rec.metadata.at("final_gauges")[0].at("open_circuit").get<bool>());
    EXPECT_TRUE(std::isnan(rec.voltage[0].back()));
    EXPECT_TRUE(std::isnan(rec.resistance[0].back()));
    const auto open = open_circuit_fraction(rec);
    EXPECT_GT(open[0], 0.5);
}

TEST(Simulation, NetworkModelAgreesWithLinearBeforeHeavyDamage) {
    auto lin = default_plan();
    auto net = lin;
    net.setup.electrical = ElectricalModel::Network;
    const auto a = run_experiment(lin);
    const auto b = run_experiment(net);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(a.metadata.at("final_gauges"), b.metadata.at("final_gauges"));
    const double t_end = small_sets(a)[0]->at("t_end").get<double>();
    for (std::size_t i = 0; a.time[i] <= t_end; ++i)
        for (int g = 0; g < 2; ++g) EXPECT_NEAR(a.resistance[g][i], b.resistance[g][i], 0.05 * a.resistance[g][i]);
}

TEST(Record, CsvRoundTrip) {
    auto plan = default_plan();
    plan.waveform.breakin_sets.resize(1);
    const auto rec = run_experiment(plan);
    const auto path = testsupport::tmp_dir() / "roundtrip.csv";
    write_record(rec, path);
    const auto back = parse_record(path);
    ASSERT_EQ(back.size(), rec.size());
    EXPECT_EQ(to_csv(back), to_csv(rec));
    EXPECT_EQ(back.metadata, rec.metadata);
    for (std::size_t i = 0; i < rec.size(); i += 13) {
        EXPECT_NEAR(back.resistance[0][i], rec.resistance[0][i], 1e-8 * rec.resistance[0][i]);
        EXPECT_NEAR(back.deflection[i], rec.deflection[i], 1e-8 * std::abs(rec.deflection[i]));
    }
}

namespace {

ParseError parse_failure(const std::string& text) {
    try {
        parse_csv(text);
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "no parse error";
    return ParseError(ParseError::Kind::BadField, 0, "");
}

const std::string kHeader = "t_s,force_N,deflection_m,R1_ohm,R2_ohm,V1_V,V2_V\n";

}  // namespace

TEST(Record, TruncatedLastLine) {
    const auto e = parse_failure(kHeader + "0,20,-1e-3,45,45,2.4,2.4\n0.01,20,-1e-3,45");
    EXPECT_EQ(e.kind(), ParseError::Kind::Truncated);
    EXPECT_EQ(e.line(), 3u);
}

TEST(Record, NonMonotoneTime) {
    const auto e = parse_failure(kHeader + "0,20,0,45,45,2,2\n0.02,20,0,45,45,2,2\n0.01,20,0,45,45,2,2\n");
    EXPECT_EQ(e.kind(), ParseError::Kind::NonMonotoneTime);
    EXPECT_EQ(e.line(), 4u);
}

TEST(Record, UnitMismatchInHeader) {
    const auto e = parse_failure("t_s,force_N,deflection_mm,R1_ohm,R2_ohm,V1_V,V2_V\n");
    EXPECT_EQ(e.kind(), ParseError::Kind::UnitMismatch);
    EXPECT_EQ(e.line(), 1u);
}

TEST(Record, MalformedHeader) {
    EXPECT_EQ(parse_failure("time,force\n").kind(), ParseError::Kind::MalformedHeader);
    EXPECT_EQ(parse_failure("").kind(), ParseError::Kind::MalformedHeader);
}

TEST(Record, BadNumberReportsLine) {
    const auto e = parse_failure(kHeader + "0,20,0,45,45,2,2\n0.01,2x,0,45,45,2,2\n0.02,20,0,45,45,2,2\n");
    EXPECT_EQ(e.kind(), ParseError::Kind::BadField);
    EXPECT_EQ(e.line(), 3u);
}

TEST(Record, EmptyResistanceFieldsAreRebuiltFromVoltage) {
    auto rec = parse_csv(kHeader + "0,20,0,,,2.5,NaN\n0.01,21,0,,,2.4,2.4\n");
    EXPECT_TRUE(std::isnan(rec.resistance[0][0]));
    DividerConfig d{{46.1, 46.6}, 5.0};
    reconstruct_resistance(rec, d);
    EXPECT_DOUBLE_EQ(rec.resistance[0][0], 46.1);
    EXPECT_TRUE(std::isnan(rec.resistance[1][0]));
    EXPECT_NEAR(rec.resistance[1][1], 46.6 * 2.4 / 2.6, 1e-12);
    EXPECT_DOUBLE_EQ(open_circuit_fraction(rec)[1], 0.5);
}

TEST(Record, CrLfAndQuotedFieldsAccepted) {
    const auto rec = parse_csv("\"t_s\",force_N,deflection_m,R1_ohm,R2_ohm,V1_V,V2_V\r\n0,\"20\",0,45,45,2,2\r\n");
    ASSERT_EQ(rec.size(), 1u);
    EXPECT_EQ(rec.force[0], 20.0);
}
