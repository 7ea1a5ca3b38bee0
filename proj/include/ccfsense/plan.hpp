#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ccfsense/error.hpp"
#include "ccfsense/mechanics.hpp"
#include "ccfsense/model_core.hpp"
#include "ccfsense/sensing.hpp"

namespace ccfsense {

/// One load set: sine cycles between `offset` (trough) and offset + amplitude.
struct LoadSet {
    double offset = 0.0;     // N
    double amplitude = 0.0;  // N, peak-to-peak
};

/// Break-in force protocol: small measuring sets at the force floor, separated
/// by holds from progressively heavier break-in sets.
struct WaveformSpec {
    double small_amplitude = 0.0;  // N
    int small_cycles = 0;
    int breakin_cycles = 0;        // per set
    std::vector<LoadSet> breakin_sets;
    double hold_duration = 0.0;    // s
    double cycle_frequency = 0.0;  // Hz
    double force_floor = 0.0;      // N
    double force_ceiling = 0.0;    // N

    void validate() const {
        auto require = [](bool ok, const std::string& what) {
            if (!ok) throw PhysicsError("invalid waveform: " + what);
        };
        require(cycle_frequency > 0, "cycle frequency must be positive");
        require(small_cycles >= 1, "need at least one small cycle");
        require(breakin_cycles >= 1 || breakin_sets.empty(), "need at least one break-in cycle");
        require(hold_duration >= 0, "hold duration must be non-negative");
        require(force_floor >= 0 && force_floor < force_ceiling, "force floor must lie below ceiling");
        require(small_amplitude > 0, "small amplitude must be positive");
        require(force_floor + small_amplitude <= force_ceiling, "small sets exceed the force ceiling");
        for (std::size_t i = 0; i < breakin_sets.size(); ++i) {
            const auto& s = breakin_sets[i];
            const std::string tag = "break-in set " + std::to_string(i + 1);
            require(s.amplitude > 0, tag + " needs a positive amplitude");
            require(s.offset >= force_floor, tag + " dips below the force floor");
            require(s.offset + s.amplitude <= force_ceiling,
                    tag + " peaks at " + std::to_string(s.offset + s.amplitude) +
                        " N, above the force ceiling");
            if (i > 0) {
                const auto& p = breakin_sets[i - 1];
                require(s.offset >= p.offset && s.amplitude >= p.amplitude,
                        tag + " is lighter than the set before it");
            }
        }
    }
};

/// Linear ramp of break-in offsets with a fixed amplitude.
inline std::vector<LoadSet> linear_breakin_schedule(int count, double first_offset, double last_offset,
                                                    double amplitude) {
    std::vector<LoadSet> sets;
    if (count <= 0) return sets;
    sets.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 1.0 : static_cast<double>(i) / (count - 1);
        sets.push_back({first_offset + t * (last_offset - first_offset), amplitude});
    }
    return sets;
}

enum class ElectricalModel {
    Linear,   // R = R_u (1 + k eps), k and R_u from the damage state
    Network,  // full crack-network resistance
};

inline std::string_view to_string(ElectricalModel m) {
    return m == ElectricalModel::Linear ? "linear" : "network";
}

/// Everything physical about one specimen and its readout chain.
struct SampleSetup {
    std::string name;
    BeamGeometry geometry;
    MaterialSet materials;
    GaugeConfig gauge;
    DividerConfig divider;
    DriftNoise drift;
    ElectricalModel electrical = ElectricalModel::Linear;

    void validate() const {
        geometry.validate();
        materials.validate();
        gauge.validate();
        divider.validate();
    }
};

struct ExperimentPlan {
    SampleSetup setup;
    WaveformSpec waveform;
    std::vector<Orientation> orientations{Orientation::Initial, Orientation::Flipped};
    double sample_rate = 0.0;  // Hz
    std::uint64_t seed = 0;

    void validate() const {
        setup.validate();
        waveform.validate();
        if (orientations.empty()) throw PhysicsError("plan needs at least one orientation");
        if (!(sample_rate >= 20.0 * waveform.cycle_frequency))
            throw PhysicsError("sample rate must be at least 20x the cycle frequency");
    }
};

/// Knobs for the inverse pipeline.
struct AnalysisOptions {
    double small_set_tolerance = 0.1;  // relative, on amplitude and ceiling
    int min_cycles = 2;
    bool relative_strain = false;      // mean-removed strain per window
};

}  // namespace ccfsense
