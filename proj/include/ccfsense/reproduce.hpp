#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccfsense/mechanics.hpp"
#include "ccfsense/model_core.hpp"

// Reference stresses for the three printed beams and the comparison logic.
namespace ccfsense::reproduce {

struct ReferenceStress {
    const char* preset;
    double beam_height_mm;
    double force_N;
    double load_MPa;
    double thermal_MPa;
    double total_MPa;
};

inline constexpr std::array<ReferenceStress, 3> kReferenceStresses{{
    {"short", 6.0, 62.0, -488.0, -203.0, -691.0},
    {"medium", 8.0, 70.0, -351.0, -210.0, -561.0},
    {"tall", 10.0, 70.0, -251.0, -217.0, -468.0},
}};

inline constexpr double kLoadTolerance = 0.05;
inline constexpr double kThermalTolerance = 0.10;

struct Comparison {
    double reference = 0.0;
    double computed = 0.0;
    double tolerance = 0.0;  // absolute, MPa

    double deviation() const { return (computed - reference) / std::abs(reference); }
    bool pass() const { return std::abs(computed - reference) <= tolerance; }
};

struct StressComparison {
    ReferenceStress ref;
    StressRow row;
    Comparison load, thermal, total;
    FailureBand tension_band = FailureBand::Elastic;  // opposite face
};

/// The total is held to the sum of the load and thermal allowances.
inline StressComparison compare(const ReferenceStress& ref, const BeamGeometry& g, const MaterialSet& m) {
    StressComparison c;
    c.ref = ref;
    c.row = stress_row(g, m, ref.force_N);
    const double load = c.row.load_stress / 1e6;
    const double therm = c.row.thermal_stress / 1e6;
    c.load = {ref.load_MPa, load, kLoadTolerance * std::abs(ref.load_MPa)};
    c.thermal = {ref.thermal_MPa, therm, kThermalTolerance * std::abs(ref.thermal_MPa)};
    c.total = {ref.total_MPa, c.row.total_stress / 1e6, c.load.tolerance + c.thermal.tolerance};

    const auto b = bend(g, m, {ref.force_N, Orientation::Initial});
    const auto t = residual_thermal_stress(g, m);
    c.tension_band = total_fiber_stress(b, t, 1, m).band;
    return c;
}

inline bool pass(const StressComparison& c) {
    return c.load.pass() && c.thermal.pass() && c.total.pass() && c.row.band == FailureBand::CompressiveYield &&
           c.tension_band != FailureBand::TensileYield;
}

inline nlohmann::json to_json(const StressComparison& c) {
    auto cmp = [](const Comparison& x) {
        return nlohmann::json{{"reference_MPa", x.reference},
                              {"computed_MPa", x.computed},
                              {"relative_deviation", x.deviation()},
                              {"tolerance_MPa", x.tolerance},
                              {"pass", x.pass()}};
    };
    return {{"preset", c.ref.preset},
            {"height_mm", c.ref.beam_height_mm},
            {"force_N", c.ref.force_N},
            {"load", cmp(c.load)},
            {"thermal", cmp(c.thermal)},
            {"total", cmp(c.total)},
            {"band_compressed_face", std::string(to_string(c.row.band))},
            {"band_tensioned_face", std::string(to_string(c.tension_band))},
            {"pass", pass(c)}};
}

// Maximum compression-side sensitivities for the conductive-matrix beams.
struct ReferenceSensitivity {
    const char* preset;
    double beam_height_mm;
    double k_compression;
};

inline constexpr std::array<ReferenceSensitivity, 3> kReferenceSensitivities{{
    {"short", 6.0, 53.94},
    {"medium", 8.0, 34.83},
    {"tall", 10.0, 24.84},
}};

inline constexpr double kReferencePeakTension = 126.0;  // short beam, after flipping

}  // namespace ccfsense::reproduce
