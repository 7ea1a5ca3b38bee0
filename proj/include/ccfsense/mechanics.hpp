#pragma once

#include <array>
#include <cmath>
#include <string_view>
#include <vector>

#include "ccfsense/error.hpp"
#include "ccfsense/model_core.hpp"

// Three-point bending of the sandwich beam and the residual thermal stress
// locked into the composite lines.
//
// Sign convention, used everywhere: compression is negative, the load P is
// positive downward, the sagging moment M = -P*L/4 and the centre deflection
// y = -P*L^3/(48*E*J) are negative. The composite line on the loaded (top)
// face is in compression; a fibre line at signed height z above the neutral
// axis carries strain z * M / (E * J) after flipping the sign of z for the
// top face, i.e. eps_top = d_NA * M / (E * J) < 0.
namespace ccfsense {

enum class Orientation { Initial, Flipped };

inline std::string_view to_string(Orientation o) {
    return o == Orientation::Initial ? "Initial" : "Flipped";
}

/// Two gauges per beam. In the Initial orientation gauge 0 sits on the loaded
/// (compressed) face; flipping the beam swaps the faces.
inline constexpr int kGaugeCount = 2;

/// -1 for the gauge on the compressed face, +1 for the gauge in tension.
inline int face_sign(int gauge, Orientation o) {
    const bool top = (gauge == 0) == (o == Orientation::Initial);
    return top ? -1 : +1;
}

struct LoadCase {
    double force = 0.0;  // N, downward positive
    Orientation orientation = Orientation::Initial;
};

struct BendingState {
    double moment = 0.0;          // N*m
    double deflection = 0.0;      // m, centre
    double max_strain = 0.0;      // at the compressed composite-line centroid
    double avg_strain = 0.0;      // gauge-averaged, half of max_strain
    double max_fiber_stress = 0.0;  // outermost fibres of the compressed line, Pa
    std::array<double, kGaugeCount> gauge_strain{};       // peak strain per gauge
    std::array<double, kGaugeCount> gauge_avg_strain{};   // averaged over the gauge length
    std::array<double, kGaugeCount> gauge_fiber_stress{};
};

struct ThermalState {
    double stress = 0.0;            // on the composite, Pa
    double composite_delta_t = 0.0; // T_ambient - T_comp
    double petg_delta_t = 0.0;      // T_ambient - T_PETG
};

inline BendingState bend(const BeamGeometry& g, const MaterialSet& m, const LoadCase& load) {
    if (load.force < 0) throw PhysicsError("load must be non-negative");
    const auto sec = section_properties(g, m);
    const double ej = m.petg_modulus * sec.second_moment;
    const double span = g.span;

    BendingState b;
    b.moment = -load.force * span / 4.0;
    b.deflection = -load.force * span * span * span / (48.0 * ej);
    b.max_strain = g.na_offset * b.moment / ej;
    b.avg_strain = b.max_strain / 2.0;
    b.max_fiber_stress =
        b.moment * (g.na_offset + 0.5 * g.comp_height) / sec.second_moment * sec.transformation_factor;

    for (int i = 0; i < kGaugeCount; ++i) {
        // max_* values describe the compressed face, hence the minus sign.
        const double s = -face_sign(i, load.orientation);
        b.gauge_strain[i] = s * b.max_strain;
        b.gauge_avg_strain[i] = s * b.avg_strain;
        b.gauge_fiber_stress[i] = s * b.max_fiber_stress;
    }
    for (double* v : {&b.moment, &b.deflection, &b.max_strain, &b.avg_strain, &b.max_fiber_stress}) *v += 0.0;
    for (int i = 0; i < kGaugeCount; ++i) {
        b.gauge_strain[i] += 0.0;
        b.gauge_avg_strain[i] += 0.0;
        b.gauge_fiber_stress[i] += 0.0;
    }
    return b;
}

/// Peak composite-line strain recovered from a centre deflection.
inline double strain_from_center_deflection(const BeamGeometry& g, double deflection) {
    return 12.0 * g.na_offset * deflection / (g.span * g.span);
}

/// Two bonded bars (PETG and both composite lines) cooled from their deposit
/// temperatures to ambient.
inline ThermalState residual_thermal_stress(const BeamGeometry& g, const MaterialSet& m,
                                            PetgAreaRule rule = PetgAreaRule::ExcludeComposite) {
    const auto sec = section_properties(g, m, rule);
    ThermalState t;
    t.composite_delta_t = m.ambient_temperature - m.composite_deposit_temperature;
    t.petg_delta_t = m.ambient_temperature - m.petg_deposit_temperature;

    const double ep = m.petg_modulus;
    const double ec = m.composite_modulus;
    const double ap = sec.petg_area;
    const double ac2 = 2.0 * sec.comp_area;
    const double mismatch = m.petg_cte * t.petg_delta_t - m.fiber_cte * t.composite_delta_t;
    const double denom = ep * ap * (1.0 + m.fiber_cte * t.composite_delta_t) +
                         ec * ac2 * (1.0 + m.petg_cte * t.petg_delta_t);
    if (!(denom > 0)) throw PhysicsError("residual stress balance has non-positive stiffness");
    t.stress = ep * ec * ap * mismatch / denom;
    return t;
}

enum class FailureBand { Elastic, CompressiveYield, TensileYield };

inline std::string_view to_string(FailureBand b) {
    switch (b) {
    case FailureBand::Elastic: return "Elastic";
    case FailureBand::CompressiveYield: return "CompressiveYield";
    case FailureBand::TensileYield: return "TensileYield";
    }
    return "?";
}

struct FiberStress {
    double load = 0.0;
    double thermal = 0.0;
    double total = 0.0;
    FailureBand band = FailureBand::Elastic;
};

/// Classifies against the composite datasheet strengths. Tensile yield is
/// not expected for any of the reference samples.
inline FailureBand classify_stress(double total, const MaterialSet& m) {
    if (total <= -m.composite_compressive_strength) return FailureBand::CompressiveYield;
    if (total >= m.composite_tensile_strength) return FailureBand::TensileYield;
    return FailureBand::Elastic;
}

inline FiberStress total_fiber_stress(const BendingState& b, const ThermalState& t, int gauge,
                                      const MaterialSet& m) {
    if (gauge < 0 || gauge >= kGaugeCount) throw PhysicsError("gauge index out of range");
    FiberStress s;
    s.load = b.gauge_fiber_stress[gauge];
    s.thermal = t.stress;
    s.total = s.load + s.thermal;
    s.band = classify_stress(s.total, m);
    return s;
}

/// One row of the loading/residual stress comparison, compressed face.
struct StressRow {
    double beam_height = 0.0;
    double force = 0.0;
    double load_stress = 0.0;
    double thermal_stress = 0.0;
    double total_stress = 0.0;
    FailureBand band = FailureBand::Elastic;
};

inline StressRow stress_row(const BeamGeometry& g, const MaterialSet& m, double force) {
    const auto b = bend(g, m, {force, Orientation::Initial});
    const auto t = residual_thermal_stress(g, m);
    const auto s = total_fiber_stress(b, t, 0, m);
    return {g.beam_height, force, s.load, s.thermal, s.total, s.band};
}

}  // namespace ccfsense
