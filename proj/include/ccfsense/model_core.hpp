#pragma once

#include <cmath>
#include <string>

#include "ccfsense/error.hpp"

namespace ccfsense {

/// Cross-section and span of a printed sandwich beam: a rectangle with a
/// rectangular hollow core and two identical composite lines mirrored about
/// the neutral axis. All lengths in metres.
struct BeamGeometry {
    double beam_height = 0.0;
    double beam_width = 0.0;
    double hollow_height = 0.0;
    double hollow_width = 0.0;
    double comp_height = 0.0;   // height of one coextruded composite line
    double comp_width = 0.0;
    double na_offset = 0.0;     // neutral axis to composite-line centroid
    double span = 0.0;          // support-to-support distance

    /// Throws PhysicsError when the lines do not fit in the section.
    void validate() const {
        auto require = [](bool ok, const char* what) {
            if (!ok) throw PhysicsError(std::string("inconsistent beam geometry: ") + what);
        };
        require(beam_height > 0 && beam_width > 0, "beam dimensions must be positive");
        require(span > 0, "span must be positive");
        require(hollow_height >= 0 && hollow_width >= 0, "hollow dimensions must be non-negative");
        require(comp_height >= 0 && comp_width >= 0, "composite dimensions must be non-negative");
        require(na_offset >= 0, "neutral-axis offset must be non-negative");
        require(hollow_height < beam_height, "hollow taller than beam");
        require(hollow_width < beam_width, "hollow wider than beam");
        require(comp_width <= beam_width, "composite line wider than beam");
        require(na_offset + comp_height / 2 <= beam_height / 2,
                "composite line extends outside the beam");
        require(na_offset - comp_height / 2 >= hollow_height / 2 || comp_height == 0,
                "composite line overlaps the hollow core");
    }
};

/// Material constants. Moduli in Pa, CTEs in 1/K, temperatures in K,
/// resistivities in ohm*m, strengths in Pa (magnitudes).
struct MaterialSet {
    double petg_modulus = 0.0;
    double composite_modulus = 0.0;
    double fiber_modulus = 0.0;
    double pla_modulus = 0.0;  // carried with the data set; no model uses it
    double petg_cte = 0.0;
    double fiber_cte = 0.0;
    double ambient_temperature = 0.0;
    double composite_deposit_temperature = 0.0;
    double petg_deposit_temperature = 0.0;
    double fiber_resistivity = 0.0;
    double matrix_resistivity = 0.0;
    double composite_tensile_strength = 0.0;
    double composite_compressive_strength = 0.0;

    void validate() const {
        auto require = [](bool ok, const char* what) {
            if (!ok) throw PhysicsError(std::string("inconsistent material set: ") + what);
        };
        require(petg_modulus > 0, "E_PETG must be positive");
        require(composite_modulus > petg_modulus, "E_comp must exceed E_PETG");
        require(fiber_resistivity > 0 && matrix_resistivity > 0, "resistivities must be positive");
        require(composite_compressive_strength > 0, "compressive strength must be positive");
        require(composite_compressive_strength < composite_tensile_strength,
                "compressive strength must be below tensile strength");
        require(ambient_temperature > 0 && composite_deposit_temperature > 0 &&
                    petg_deposit_temperature > 0,
                "temperatures must be above absolute zero");
    }
};

/// How the PETG area entering the residual-stress balance is counted.
enum class PetgAreaRule {
    ExcludeComposite,  // gross - hollow - both composite lines
    IncludeComposite,  // gross - hollow
};

struct SectionProperties {
    double transformation_factor = 0.0;  // n = E_comp / E_PETG
    double comp_area = 0.0;              // one composite line
    double petg_area = 0.0;
    double second_moment = 0.0;          // transformed, in PETG units
};

/// Transformed-section properties of the sandwich beam. Both composite lines
/// enter the second moment through the factor 2n (parallel-axis term included).
inline SectionProperties section_properties(const BeamGeometry& g, const MaterialSet& m,
                                            PetgAreaRule rule = PetgAreaRule::ExcludeComposite) {
    g.validate();
    if (!(m.petg_modulus > 0) || !(m.composite_modulus > 0))
        throw PhysicsError("moduli must be positive");

    SectionProperties s;
    s.transformation_factor = m.composite_modulus / m.petg_modulus;
    s.comp_area = g.comp_height * g.comp_width;
    s.petg_area = g.beam_width * g.beam_height - g.hollow_width * g.hollow_height;
    if (rule == PetgAreaRule::ExcludeComposite) s.petg_area -= 2.0 * s.comp_area;

    const double outer = g.beam_width * std::pow(g.beam_height, 3);
    const double hollow = g.hollow_width * std::pow(g.hollow_height, 3);
    const double line = g.comp_width * std::pow(g.comp_height, 3) / 12.0 +
                        s.comp_area * g.na_offset * g.na_offset;
    s.second_moment = (outer - hollow) / 12.0 + 2.0 * s.transformation_factor * line;
    return s;
}

}  // namespace ccfsense
