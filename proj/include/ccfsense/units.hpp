#pragma once

#include <array>
#include <string>
#include <string_view>

#include "ccfsense/error.hpp"

// Unit tags accepted at the I/O boundary. Everything inside the library is SI
// (m, Pa, K, ohm, ohm*m, N, s, Hz, V).
namespace ccfsense::units {

enum class Dimension {
    Length,
    Pressure,
    Temperature,
    ThermalExpansion,
    Resistivity,
    Resistance,
    Force,
    Time,
    Frequency,
    Voltage,
    Dimensionless,
};

inline constexpr double mm = 1e-3;
inline constexpr double um = 1e-6;
inline constexpr double MPa = 1e6;
inline constexpr double GPa = 1e9;
inline constexpr double ohm_cm = 1e-2;
inline constexpr double kelvin_offset = 273.15;

struct UnitDef {
    std::string_view symbol;
    Dimension dimension;
    double scale;
    double offset;  // si = value * scale + offset
};

inline constexpr std::array<UnitDef, 31> kUnitTable{{
    {"1/s", Dimension::Frequency, 1.0, 0.0},
    {"m", Dimension::Length, 1.0, 0.0},
    {"cm", Dimension::Length, 1e-2, 0.0},
    {"mm", Dimension::Length, 1e-3, 0.0},
    {"um", Dimension::Length, 1e-6, 0.0},
    {"Pa", Dimension::Pressure, 1.0, 0.0},
    {"kPa", Dimension::Pressure, 1e3, 0.0},
    {"MPa", Dimension::Pressure, 1e6, 0.0},
    {"GPa", Dimension::Pressure, 1e9, 0.0},
    {"K", Dimension::Temperature, 1.0, 0.0},
    {"degC", Dimension::Temperature, 1.0, kelvin_offset},
    {"C", Dimension::Temperature, 1.0, kelvin_offset},
    {"1/K", Dimension::ThermalExpansion, 1.0, 0.0},
    {"1/degC", Dimension::ThermalExpansion, 1.0, 0.0},
    {"ppm/K", Dimension::ThermalExpansion, 1e-6, 0.0},
    {"ppm/degC", Dimension::ThermalExpansion, 1e-6, 0.0},
    {"ohm*m", Dimension::Resistivity, 1.0, 0.0},
    {"ohm*cm", Dimension::Resistivity, 1e-2, 0.0},
    {"mohm*cm", Dimension::Resistivity, 1e-5, 0.0},
    {"ohm", Dimension::Resistance, 1.0, 0.0},
    {"kohm", Dimension::Resistance, 1e3, 0.0},
    {"N", Dimension::Force, 1.0, 0.0},
    {"kN", Dimension::Force, 1e3, 0.0},
    {"s", Dimension::Time, 1.0, 0.0},
    {"ms", Dimension::Time, 1e-3, 0.0},
    {"Hz", Dimension::Frequency, 1.0, 0.0},
    {"V", Dimension::Voltage, 1.0, 0.0},
    {"mV", Dimension::Voltage, 1e-3, 0.0},
    {"1", Dimension::Dimensionless, 1.0, 0.0},
    {"strain", Dimension::Dimensionless, 1.0, 0.0},
    {"percent", Dimension::Dimensionless, 1e-2, 0.0},
}};

inline std::string_view dimension_name(Dimension d) {
    switch (d) {
    case Dimension::Length: return "length";
    case Dimension::Pressure: return "pressure";
    case Dimension::Temperature: return "temperature";
    case Dimension::ThermalExpansion: return "thermal expansion";
    case Dimension::Resistivity: return "resistivity";
    case Dimension::Resistance: return "resistance";
    case Dimension::Force: return "force";
    case Dimension::Time: return "time";
    case Dimension::Frequency: return "frequency";
    case Dimension::Voltage: return "voltage";
    case Dimension::Dimensionless: return "dimensionless";
    }
    return "?";
}

inline const UnitDef& lookup(std::string_view symbol, Dimension expected) {
    for (const auto& u : kUnitTable) {
        if (u.symbol != symbol) continue;
        if (u.dimension != expected)
            throw ConfigError("unit '" + std::string(symbol) + "' is not a " +
                              std::string(dimension_name(expected)) + " unit");
        return u;
    }
    throw ConfigError("unknown unit '" + std::string(symbol) + "'");
}

inline double to_si(double value, std::string_view unit, Dimension expected) {
    const auto& u = lookup(unit, expected);
    return value * u.scale + u.offset;
}

inline double from_si(double si, std::string_view unit, Dimension expected) {
    const auto& u = lookup(unit, expected);
    return (si - u.offset) / u.scale;
}

}  // namespace ccfsense::units
