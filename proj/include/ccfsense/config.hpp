#pragma once

#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccfsense/error.hpp"
#include "ccfsense/plan.hpp"
#include "ccfsense/units.hpp"

// JSON configuration. Dimensional fields are {"value": x, "unit": "mm"};
// dimensionless fields may be plain numbers. Unknown keys are rejected so a
// typo in a physics input cannot silently fall back to something else.
namespace ccfsense::config {

using json = nlohmann::json;
using units::Dimension;

inline constexpr int kSchemaVersion = 1;

class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    const json& raw(const std::string& key) {
        if (!obj_.contains(key)) throw ConfigError(path_ + "." + key + ": missing");
        seen_.insert(key);
        return obj_.at(key);
    }

    double quantity(const std::string& key, Dimension dim) {
        return parse_quantity(raw(key), path_ + "." + key, dim);
    }

    std::optional<double> optional_quantity(const std::string& key, Dimension dim) {
        if (!has(key)) return std::nullopt;
        return quantity(key, dim);
    }

    double number(const std::string& key) { return quantity(key, Dimension::Dimensionless); }

    std::int64_t integer(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(path_ + "." + key + ": expected an integer");
        return v.get<std::int64_t>();
    }

    std::string string(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_string()) throw ConfigError(path_ + "." + key + ": expected a string");
        return v.get<std::string>();
    }

    ObjectReader object(const std::string& key) { return ObjectReader(raw(key), path_ + "." + key); }

    std::string path_of(const std::string& key) const { return path_ + "." + key; }

    /// Rejects keys that were never read.
    void finish() const {
        for (const auto& [k, v] : obj_.items())
            if (!seen_.count(k)) throw ConfigError(path_ + "." + k + ": unknown key");
    }

    static double parse_quantity(const json& v, const std::string& where, Dimension dim) {
        if (v.is_number()) {
            if (dim != Dimension::Dimensionless)
                throw ConfigError(where + ": " + std::string(units::dimension_name(dim)) +
                                  " needs {\"value\", \"unit\"}");
            return v.get<double>();
        }
        if (!v.is_object()) throw ConfigError(where + ": expected {\"value\", \"unit\"}");
        for (const auto& [k, _] : v.items())
            if (k != "value" && k != "unit") throw ConfigError(where + "." + k + ": unknown key");
        if (!v.contains("value") || !v.at("value").is_number())
            throw ConfigError(where + ".value: expected a number");
        if (!v.contains("unit") || !v.at("unit").is_string())
            throw ConfigError(where + ".unit: expected a string");
        try {
            return units::to_si(v.at("value").get<double>(), v.at("unit").get<std::string>(), dim);
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

inline json qty(double v, const char* unit) { return json{{"value", v}, {"unit", unit}}; }

// --- geometry --------------------------------------------------------------

inline BeamGeometry parse_geometry(const json& j) {
    ObjectReader r(j, "geometry");
    BeamGeometry g;
    g.beam_height = r.quantity("h_beam", Dimension::Length);
    g.beam_width = r.quantity("b_beam", Dimension::Length);
    g.hollow_height = r.quantity("h_hollow", Dimension::Length);
    g.hollow_width = r.quantity("b_hollow", Dimension::Length);
    g.comp_height = r.quantity("h_comp", Dimension::Length);
    g.comp_width = r.quantity("b_comp", Dimension::Length);
    g.na_offset = r.quantity("d_NA", Dimension::Length);
    g.span = r.quantity("span_L", Dimension::Length);
    r.finish();
    g.validate();
    return g;
}

inline json to_json(const BeamGeometry& g) {
    return json{{"h_beam", qty(g.beam_height, "m")},     {"b_beam", qty(g.beam_width, "m")},
                {"h_hollow", qty(g.hollow_height, "m")}, {"b_hollow", qty(g.hollow_width, "m")},
                {"h_comp", qty(g.comp_height, "m")},     {"b_comp", qty(g.comp_width, "m")},
                {"d_NA", qty(g.na_offset, "m")},         {"span_L", qty(g.span, "m")}};
}

// --- materials -------------------------------------------------------------

inline MaterialSet parse_materials(const json& j) {
    ObjectReader r(j, "materials");
    MaterialSet m;
    m.petg_modulus = r.quantity("E_PETG", Dimension::Pressure);
    m.composite_modulus = r.quantity("E_comp", Dimension::Pressure);
    m.fiber_modulus = r.quantity("E_fiber", Dimension::Pressure);
    m.pla_modulus = r.quantity("E_PLA", Dimension::Pressure);
    m.petg_cte = r.quantity("alpha_PETG", Dimension::ThermalExpansion);
    m.fiber_cte = r.quantity("alpha_fiber", Dimension::ThermalExpansion);
    m.ambient_temperature = r.quantity("T_ambient", Dimension::Temperature);
    m.composite_deposit_temperature = r.quantity("T_comp", Dimension::Temperature);
    m.petg_deposit_temperature = r.quantity("T_PETG", Dimension::Temperature);
    m.fiber_resistivity = r.quantity("rho_fiber", Dimension::Resistivity);
    m.matrix_resistivity = r.quantity("rho_matrix", Dimension::Resistivity);
    m.composite_tensile_strength = r.quantity("sigma_t_comp_tension", Dimension::Pressure);
    m.composite_compressive_strength = r.quantity("sigma_t_comp_compression", Dimension::Pressure);
    r.finish();
    m.validate();
    return m;
}

inline json to_json(const MaterialSet& m) {
    return json{{"E_PETG", qty(m.petg_modulus, "Pa")},
                {"E_comp", qty(m.composite_modulus, "Pa")},
                {"E_fiber", qty(m.fiber_modulus, "Pa")},
                {"E_PLA", qty(m.pla_modulus, "Pa")},
                {"alpha_PETG", qty(m.petg_cte, "1/K")},
                {"alpha_fiber", qty(m.fiber_cte, "1/K")},
                {"T_ambient", qty(m.ambient_temperature, "K")},
                {"T_comp", qty(m.composite_deposit_temperature, "K")},
                {"T_PETG", qty(m.petg_deposit_temperature, "K")},
                {"rho_fiber", qty(m.fiber_resistivity, "ohm*m")},
                {"rho_matrix", qty(m.matrix_resistivity, "ohm*m")},
                {"sigma_t_comp_tension", qty(m.composite_tensile_strength, "Pa")},
                {"sigma_t_comp_compression", qty(m.composite_compressive_strength, "Pa")}};
}

// --- sensing ---------------------------------------------------------------

inline MatrixKind parse_matrix(const std::string& s, const std::string& where) {
    if (s == "conductive") return MatrixKind::Conductive;
    if (s == "insulating") return MatrixKind::Insulating;
    throw ConfigError(where + ": expected \"conductive\" or \"insulating\", got \"" + s + "\"");
}

inline ElectricalModel parse_electrical(const std::string& s, const std::string& where) {
    if (s == "linear") return ElectricalModel::Linear;
    if (s == "network") return ElectricalModel::Network;
    throw ConfigError(where + ": expected \"linear\" or \"network\", got \"" + s + "\"");
}

struct SensingSection {
    GaugeConfig gauge;
    DividerConfig divider;
    DriftNoise drift;
    ElectricalModel electrical = ElectricalModel::Linear;
};

/// `fiber_resistivity` resolves R0 when the section does not pin it.
inline SensingSection parse_sensing(const json& j, double fiber_resistivity) {
    ObjectReader r(j, "sensing");
    SensingSection s;
    auto& g = s.gauge;
    const auto r0 = r.optional_quantity("R0", Dimension::Resistance);
    g.intrinsic_gauge_factor = r.number("k_intrinsic");
    g.matrix = parse_matrix(r.string("matrix"), r.path_of("matrix"));
    g.filament_count = r.integer("filament_count");
    g.filament_diameter = r.quantity("filament_diameter", Dimension::Length);
    g.gauge_length = r.quantity("gauge_length", Dimension::Length);
    g.weibull_modulus = r.number("weibull_modulus");
    g.weibull_scale = r.quantity("weibull_scale", Dimension::Pressure);
    g.bridge_resistance = r.quantity("bridge_resistance_scale", Dimension::Resistance);
    g.contact_resistance = r.quantity("contact_resistance_scale", Dimension::Resistance);
    g.crack_sensitivity = r.number("crack_sensitivity");
    g.closing_ratio = r.number("closing_ratio");
    g.contact_loss_exponent = r.number("contact_loss_exponent");
    g.stress_concentration = r.number("stress_concentration");
    g.nominal_resistance = r0 ? *r0 : baseline_resistance(g, fiber_resistivity);
    s.electrical = parse_electrical(r.string("electrical_model"), r.path_of("electrical_model"));

    {
        auto d = r.object("divider");
        const auto& arr = d.raw("R_div");
        if (!arr.is_array() || arr.size() != 2)
            throw ConfigError("sensing.divider.R_div: expected two resistances");
        for (std::size_t i = 0; i < 2; ++i)
            s.divider.resistors[i] = ObjectReader::parse_quantity(
                arr[i], "sensing.divider.R_div[" + std::to_string(i) + "]", Dimension::Resistance);
        s.divider.supply = d.quantity("V_supply", Dimension::Voltage);
        d.finish();
    }
    if (r.has("drift")) {
        auto d = r.object("drift");
        s.drift.decay_rate = d.quantity("decay_rate", Dimension::Frequency);
        s.drift.first_peak_excess = d.number("first_peak_excess");
        s.drift.first_peak_tau = d.quantity("first_peak_tau", Dimension::Time);
        s.drift.noise_conductive = d.number("noise_conductive");
        s.drift.noise_insulating = d.number("noise_insulating");
        d.finish();
    }
    r.finish();
    g.validate();
    s.divider.validate();
    return s;
}

inline json to_json(const SensingSection& s) {
    const auto& g = s.gauge;
    return json{
        {"R0", qty(g.nominal_resistance, "ohm")},
        {"k_intrinsic", g.intrinsic_gauge_factor},
        {"matrix", std::string(to_string(g.matrix))},
        {"filament_count", g.filament_count},
        {"filament_diameter", qty(g.filament_diameter, "m")},
        {"gauge_length", qty(g.gauge_length, "m")},
        {"weibull_modulus", g.weibull_modulus},
        {"weibull_scale", qty(g.weibull_scale, "Pa")},
        {"bridge_resistance_scale", qty(g.bridge_resistance, "ohm")},
        {"contact_resistance_scale", qty(g.contact_resistance, "ohm")},
        {"crack_sensitivity", g.crack_sensitivity},
        {"closing_ratio", g.closing_ratio},
        {"contact_loss_exponent", g.contact_loss_exponent},
        {"stress_concentration", g.stress_concentration},
        {"electrical_model", std::string(to_string(s.electrical))},
        {"divider",
         {{"R_div", json::array({qty(s.divider.resistors[0], "ohm"), qty(s.divider.resistors[1], "ohm")})},
          {"V_supply", qty(s.divider.supply, "V")}}},
        {"drift",
         {{"decay_rate", qty(s.drift.decay_rate, "1/s")},
          {"first_peak_excess", s.drift.first_peak_excess},
          {"first_peak_tau", qty(s.drift.first_peak_tau, "s")},
          {"noise_conductive", s.drift.noise_conductive},
          {"noise_insulating", s.drift.noise_insulating}}},
    };
}

// --- experiment ------------------------------------------------------------

inline Orientation parse_orientation(const json& v, const std::string& where) {
    if (v == "Initial") return Orientation::Initial;
    if (v == "Flipped") return Orientation::Flipped;
    throw ConfigError(where + ": expected \"Initial\" or \"Flipped\"");
}

struct ExperimentSection {
    WaveformSpec waveform;
    std::vector<Orientation> orientations;
    double sample_rate = 0.0;
};

inline ExperimentSection parse_experiment(const json& j) {
    ObjectReader r(j, "experiment");
    ExperimentSection e;
    auto& w = e.waveform;
    w.small_amplitude = r.quantity("small_amplitude", Dimension::Force);
    w.small_cycles = static_cast<int>(r.integer("small_cycles"));
    w.breakin_cycles = static_cast<int>(r.integer("breakin_cycles_per_set"));
    w.hold_duration = r.quantity("hold_duration", Dimension::Time);
    w.cycle_frequency = r.quantity("cycle_frequency", Dimension::Frequency);
    w.force_floor = r.quantity("force_floor", Dimension::Force);
    w.force_ceiling = r.quantity("force_ceiling", Dimension::Force);

    const auto& sets = r.raw("breakin_sets");
    if (sets.is_array()) {
        for (std::size_t i = 0; i < sets.size(); ++i) {
            ObjectReader s(sets[i], "experiment.breakin_sets[" + std::to_string(i) + "]");
            LoadSet ls;
            ls.offset = s.quantity("offset", Dimension::Force);
            ls.amplitude = s.quantity("amplitude", Dimension::Force);
            s.finish();
            w.breakin_sets.push_back(ls);
        }
    } else {
        ObjectReader s(sets, "experiment.breakin_sets");
        const auto count = s.integer("count");
        const double first = s.quantity("first_offset", Dimension::Force);
        const double last = s.quantity("last_offset", Dimension::Force);
        const double amp = s.quantity("amplitude", Dimension::Force);
        s.finish();
        w.breakin_sets = linear_breakin_schedule(static_cast<int>(count), first, last, amp);
    }

    const auto& ors = r.raw("orientations");
    if (!ors.is_array()) throw ConfigError("experiment.orientations: expected an array");
    for (std::size_t i = 0; i < ors.size(); ++i)
        e.orientations.push_back(
            parse_orientation(ors[i], "experiment.orientations[" + std::to_string(i) + "]"));
    e.sample_rate = r.quantity("sample_rate", Dimension::Frequency);
    r.finish();
    w.validate();
    return e;
}

inline json to_json(const WaveformSpec& w, const std::vector<Orientation>& orientations,
                    double sample_rate) {
    json sets = json::array();
    for (const auto& s : w.breakin_sets)
        sets.push_back({{"offset", qty(s.offset, "N")}, {"amplitude", qty(s.amplitude, "N")}});
    json ors = json::array();
    for (auto o : orientations) ors.push_back(std::string(to_string(o)));
    return json{{"small_amplitude", qty(w.small_amplitude, "N")},
                {"small_cycles", w.small_cycles},
                {"breakin_cycles_per_set", w.breakin_cycles},
                {"breakin_sets", sets},
                {"hold_duration", qty(w.hold_duration, "s")},
                {"cycle_frequency", qty(w.cycle_frequency, "Hz")},
                {"force_floor", qty(w.force_floor, "N")},
                {"force_ceiling", qty(w.force_ceiling, "N")},
                {"orientations", ors},
                {"sample_rate", qty(sample_rate, "Hz")}};
}

inline AnalysisOptions parse_analysis(const json& j) {
    ObjectReader r(j, "analysis");
    AnalysisOptions a;
    a.small_set_tolerance = r.number("small_set_tolerance");
    a.min_cycles = static_cast<int>(r.integer("min_cycles"));
    const auto mode = r.string("strain_mode");
    if (mode == "absolute") a.relative_strain = false;
    else if (mode == "relative") a.relative_strain = true;
    else throw ConfigError("analysis.strain_mode: expected \"absolute\" or \"relative\"");
    r.finish();
    if (!(a.small_set_tolerance >= 0)) throw ConfigError("analysis.small_set_tolerance must be >= 0");
    if (a.min_cycles < 2) throw ConfigError("analysis.min_cycles must be at least 2");
    return a;
}

inline json to_json(const AnalysisOptions& a) {
    return json{{"small_set_tolerance", a.small_set_tolerance},
                {"min_cycles", a.min_cycles},
                {"strain_mode", a.relative_strain ? "relative" : "absolute"}};
}

// --- whole documents -------------------------------------------------------

/// A fully parsed configuration document. Sections other than geometry and
/// materials are optional so the calculators can run on partial configs.
struct Document {
    std::string name;
    BeamGeometry geometry;
    MaterialSet materials;
    std::optional<SensingSection> sensing;
    std::optional<ExperimentSection> experiment;
    AnalysisOptions analysis;
};

inline Document parse_document(const json& j) {
    ObjectReader r(j, "config");
    Document d;
    if (r.has("schema_version")) {
        if (r.integer("schema_version") != kSchemaVersion)
            throw ConfigError("config.schema_version: unsupported version");
    }
    if (r.has("name")) d.name = r.string("name");
    d.geometry = parse_geometry(r.raw("geometry"));
    d.materials = parse_materials(r.raw("materials"));
    if (r.has("sensing")) d.sensing = parse_sensing(r.raw("sensing"), d.materials.fiber_resistivity);
    if (r.has("experiment")) d.experiment = parse_experiment(r.raw("experiment"));
    if (r.has("analysis")) d.analysis = parse_analysis(r.raw("analysis"));
    r.finish();
    return d;
}

inline SampleSetup to_setup(const Document& d) {
    if (!d.sensing) throw ConfigError("config: missing \"sensing\" section");
    SampleSetup s;
    s.name = d.name;
    s.geometry = d.geometry;
    s.materials = d.materials;
    s.gauge = d.sensing->gauge;
    s.divider = d.sensing->divider;
    s.drift = d.sensing->drift;
    s.electrical = d.sensing->electrical;
    return s;
}

inline ExperimentPlan to_plan(const Document& d, std::uint64_t seed) {
    if (!d.experiment) throw ConfigError("config: missing \"experiment\" section");
    ExperimentPlan p;
    p.setup = to_setup(d);
    p.waveform = d.experiment->waveform;
    p.orientations = d.experiment->orientations;
    p.sample_rate = d.experiment->sample_rate;
    p.seed = seed;
    p.validate();
    return p;
}

/// Canonical SI form of a plan. Parsing it back yields the same plan.
inline json to_json(const ExperimentPlan& p) {
    const auto& s = p.setup;
    SensingSection sens{s.gauge, s.divider, s.drift, s.electrical};
    return json{{"schema_version", kSchemaVersion},
                {"name", s.name},
                {"geometry", to_json(s.geometry)},
                {"materials", to_json(s.materials)},
                {"sensing", to_json(sens)},
                {"experiment", to_json(p.waveform, p.orientations, p.sample_rate)}};
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string plan_digest(const ExperimentPlan& p) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json(p).dump())));
    return buf;
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

inline std::filesystem::path preset_path(const std::string& name, const std::filesystem::path& dir) {
    if (name != "short" && name != "medium" && name != "tall")
        throw ConfigError("unknown preset '" + name + "' (expected short, medium or tall)");
    return dir / (name + ".json");
}

/// Merges documents in order with JSON merge-patch; later files win.
inline json merge(const std::vector<json>& docs) {
    json out = json::object();
    for (const auto& d : docs) out.merge_patch(d);
    return out;
}

}  // namespace ccfsense::config
