#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>

#include "ccfsense/error.hpp"

// Electrical model of one carbon-fibre strain gauge.
//
// The gauge is a bundle of N filaments in parallel. Filaments fail
// independently under compressive peaks with Weibull-distributed strengths.
// A broken filament keeps conducting through a crack whose resistance is
// modulated by strain; that modulation is what lifts the gauge factor above
// the intrinsic value of the fibre. As damage accumulates, a growing share of
// the broken filaments loses contact entirely: with an insulating matrix those
// filaments are open, with a conductive matrix they fall back to a
// strain-insensitive matrix bridge. The result is a gauge factor that rises
// with damage, peaks, and then falls again.
namespace ccfsense {

enum class MatrixKind { Insulating, Conductive };

inline std::string_view to_string(MatrixKind m) {
    return m == MatrixKind::Conductive ? "conductive" : "insulating";
}

struct GaugeConfig {
    double nominal_resistance = 0.0;     // R0, undamaged and unstrained (ohm)
    double intrinsic_gauge_factor = 0.0; // piezoresistivity of intact fibre
    MatrixKind matrix = MatrixKind::Conductive;
    std::int64_t filament_count = 0;
    double filament_diameter = 0.0;      // m
    double gauge_length = 0.0;           // m
    double weibull_modulus = 0.0;
    double weibull_scale = 0.0;          // Pa
    double bridge_resistance = 0.0;      // ohm per crack, conductive matrix
    double contact_resistance = 0.0;     // ohm per crack, insulating matrix, intact neighbourhood
    double crack_sensitivity = 0.0;      // relative crack-resistance change per unit strain (opening)
    double closing_ratio = 1.0;          // closing sensitivity / opening sensitivity
    double contact_loss_exponent = 1.0;  // share of broken filaments without contact = f^p
    double stress_concentration = 1.0;   // tensile stress multiplier at damaged sites

    void validate() const {
        auto require = [](bool ok, const char* what) {
            if (!ok) throw PhysicsError(std::string("invalid gauge config: ") + what);
        };
        require(nominal_resistance > 0, "R0 must be positive");
        require(filament_count >= 1, "at least one filament");
        require(filament_diameter > 0, "filament diameter must be positive");
        require(gauge_length >= 0, "gauge length must be non-negative");
        require(weibull_modulus > 0 && weibull_scale > 0, "Weibull parameters must be positive");
        require(crack_sensitivity >= 0 && closing_ratio >= 0, "crack sensitivities must be non-negative");
        require(contact_loss_exponent > 0, "contact-loss exponent must be positive");
        require(stress_concentration >= 0, "stress concentration must be non-negative");
        if (matrix == MatrixKind::Conductive)
            require(bridge_resistance > 0, "bridge resistance must be positive");
        else
            require(contact_resistance > 0, "contact resistance must be positive");
    }
};

struct GaugeState {
    GaugeConfig config;
    std::int64_t broken_count = 0;
    double broken_fraction = 0.0;
    double sigma_peak_seen = 0.0;      // largest damage-driving stress magnitude so far (Pa)
    double unstrained_resistance = 0.0;
    double gauge_factor = 0.0;         // small-signal, opening (positive strain) side
    double closing_gauge_factor = 0.0; // small-signal, closing (negative strain) side
    bool open_circuit = false;
};

/// R = rho * L / (N * pi * (d/2)^2).
inline double baseline_resistance(const GaugeConfig& c, double fiber_resistivity) {
    const double r = c.filament_diameter / 2.0;
    const double area = static_cast<double>(c.filament_count) * std::numbers::pi * r * r;
    if (!(area > 0)) throw PhysicsError("gauge has zero conducting area");
    return fiber_resistivity * c.gauge_length / area;
}

/// Resistance of the matrix path relative to the fibre path, for a matrix
/// cross-section `area_ratio` times that of the fibres.
inline double matrix_parallel_ratio(double matrix_resistivity, double fiber_resistivity,
                                    double area_ratio) {
    return (matrix_resistivity / fiber_resistivity) / area_ratio;
}

inline constexpr double kNegligibleMatrixRatio = 100.0;

inline double linear_resistance(double unstrained, double gauge_factor, double avg_strain) {
    const double rel = 1.0 + gauge_factor * avg_strain;
    if (!(rel > 0))
        throw PhysicsError("linear model gives non-positive resistance (k*eps <= -1)");
    return unstrained * rel;
}

inline double weibull_cdf(double stress, double modulus, double scale) {
    if (!(stress > 0)) return 0.0;
    return -std::expm1(-std::pow(stress / scale, modulus));
}

// ---------------------------------------------------------------------------
// Crack network

namespace detail {

struct Branch {
    double share;  // fraction of the N filaments in this branch
    double base;   // branch resistance at zero strain, in units of one filament
    double slope;  // d(base)/d(strain)
};

struct Network {
    std::array<Branch, 3> branches{};
    int used = 0;
};

// Crack resistance in units of one filament's resistance.
inline double crack_ratio(const GaugeConfig& c, double fraction) {
    const double filament = c.nominal_resistance * static_cast<double>(c.filament_count);
    if (c.matrix == MatrixKind::Conductive) return c.bridge_resistance / filament;
    // Contact through neighbouring filaments degrades as they break too.
    return c.contact_resistance / filament / (1.0 - fraction);
}

inline Network build_network(const GaugeConfig& c, double fraction, double crack_slope) {
    Network n;
    const double ki = c.intrinsic_gauge_factor;
    n.branches[n.used++] = {1.0 - fraction, 1.0, ki};
    if (fraction <= 0.0) return n;

    const double lost = std::pow(fraction, c.contact_loss_exponent);
    if (fraction < 1.0) {
        const double beta = crack_ratio(c, fraction);
        n.branches[n.used++] = {fraction * (1.0 - lost), 1.0 + beta, ki + beta * crack_slope};
    }
    if (c.matrix == MatrixKind::Conductive) {
        const double beta = crack_ratio(c, fraction);
        n.branches[n.used++] = {fraction * lost, 1.0 + beta, ki};
    }
    return n;
}

// Conductance in units of 1/R0.
inline double conductance(const Network& n) {
    double g = 0.0;
    for (int i = 0; i < n.used; ++i) g += n.branches[i].share / n.branches[i].base;
    return g;
}

inline double conductance_slope(const Network& n) {
    double dg = 0.0;
    for (int i = 0; i < n.used; ++i) {
        const auto& b = n.branches[i];
        dg -= b.share * b.slope / (b.base * b.base);
    }
    return dg;
}

}  // namespace detail

struct GaugeResponse {
    double unstrained_resistance = 0.0;
    double gauge_factor = 0.0;          // opening side
    double closing_gauge_factor = 0.0;  // closing side
    bool open_circuit = false;
};

/// Unstrained resistance and small-signal gauge factors of the crack network
/// at a given broken fraction.
inline GaugeResponse gauge_factor_from_damage(const GaugeConfig& c, double fraction) {
    GaugeResponse r;
    const auto opening = detail::build_network(c, fraction, c.crack_sensitivity);
    const auto closing = detail::build_network(c, fraction, c.crack_sensitivity * c.closing_ratio);
    const double g = detail::conductance(opening);
    if (!(g > 0)) {
        r.open_circuit = true;
        r.unstrained_resistance = std::numeric_limits<double>::infinity();
        return r;
    }
    r.unstrained_resistance = c.nominal_resistance / g;
    r.gauge_factor = -detail::conductance_slope(opening) / g + 0.0;
    r.closing_gauge_factor = -detail::conductance_slope(closing) / g + 0.0;
    return r;
}

inline double gauge_factor_from_damage(const GaugeState& s) {
    return gauge_factor_from_damage(s.config, s.broken_fraction).gauge_factor;
}

/// Full (nonlinear) network resistance at a gauge-averaged strain. Cracks
/// that close completely stop contributing crack resistance.
inline double gauge_resistance(const GaugeState& s, double avg_strain) {
    const auto& c = s.config;
    const double slope = avg_strain >= 0 ? c.crack_sensitivity : c.crack_sensitivity * c.closing_ratio;
    const auto n = detail::build_network(c, s.broken_fraction, slope);
    double g = 0.0;
    for (int i = 0; i < n.used; ++i) {
        const auto& b = n.branches[i];
        // Crack part of the branch cannot go below zero resistance.
        const double fibre = 1.0 + c.intrinsic_gauge_factor * avg_strain;
        const double crack0 = b.base - 1.0;
        const double crack_rate = b.slope - c.intrinsic_gauge_factor;
        const double crack = crack0 > 0 ? std::max(0.0, crack0 + crack_rate * avg_strain) : 0.0;
        const double r = fibre + crack;
        if (!(r > 0)) throw PhysicsError("fibre strain beyond the linear piezoresistive range");
        g += b.share / r;
    }
    if (!(g > 0)) return std::numeric_limits<double>::infinity();
    return c.nominal_resistance / g;
}

/// Resistance under the linear electrical model, with the gauge factor of
/// the side (opening or closing) the strain is on.
inline double linear_gauge_resistance(const GaugeState& s, double avg_strain) {
    if (s.open_circuit) return std::numeric_limits<double>::infinity();
    const double k = avg_strain >= 0 ? s.gauge_factor : s.closing_gauge_factor;
    return linear_resistance(s.unstrained_resistance, k, avg_strain);
}

inline GaugeState make_gauge(const GaugeConfig& c) {
    c.validate();
    GaugeState s;
    s.config = c;
    const auto r = gauge_factor_from_damage(c, 0.0);
    s.unstrained_resistance = r.unstrained_resistance;
    s.gauge_factor = r.gauge_factor;
    s.closing_gauge_factor = r.closing_gauge_factor;
    return s;
}

/// Stress magnitude that drives filament failure for a total (load plus
/// residual) stress at the gauge. Compression drives damage directly; tension
/// only matters at sites that are already damaged, amplified by the stress
/// concentration around broken filaments.
inline double damage_driving_stress(const GaugeState& s, double sigma_total) {
    if (sigma_total < 0) return -sigma_total;
    if (sigma_total > 0 && s.broken_count > 0) return s.config.stress_concentration * sigma_total;
    return 0.0;
}

/// Applies one half-cycle stress peak. Survivors of all earlier peaks fail
/// with the conditional Weibull probability, so the expected cumulative
/// broken fraction follows F(peak). Peaks no more severe than any earlier one
/// change nothing.
template <class Rng>
GaugeState apply_stress_peak(GaugeState s, double sigma_total, Rng& rng) {
    const double driver = damage_driving_stress(s, sigma_total);
    if (!(driver > s.sigma_peak_seen)) return s;

    const auto& c = s.config;
    const double x_old = std::pow(s.sigma_peak_seen / c.weibull_scale, c.weibull_modulus);
    const double x_new = std::pow(driver / c.weibull_scale, c.weibull_modulus);
    s.sigma_peak_seen = driver;

    const std::int64_t intact = c.filament_count - s.broken_count;
    if (intact == 0) return s;
    double p = std::isinf(x_new) ? 1.0 : -std::expm1(x_old - x_new);
    p = std::clamp(p, 0.0, 1.0);
    if (p == 0.0) return s;

    std::binomial_distribution<std::int64_t> draw(intact, p);
    const std::int64_t fresh = draw(rng);
    if (fresh == 0) return s;

    s.broken_count += fresh;
    s.broken_fraction = static_cast<double>(s.broken_count) / static_cast<double>(c.filament_count);
    const auto r = gauge_factor_from_damage(c, s.broken_fraction);
    s.unstrained_resistance = r.unstrained_resistance;
    s.gauge_factor = r.gauge_factor;
    s.closing_gauge_factor = r.closing_gauge_factor;
    s.open_circuit = r.open_circuit;
    return s;
}

// ---------------------------------------------------------------------------
// Voltage-divider readout. The gauge sits on the low side:
//   V = V_supply * R_gauge / (R_gauge + R_div)

struct DividerChannel {
    double resistor = 0.0;
    double supply = 0.0;
};

struct DividerConfig {
    std::array<double, 2> resistors{};
    double supply = 0.0;

    DividerChannel channel(int i) const { return {resistors.at(static_cast<std::size_t>(i)), supply}; }

    void validate() const {
        for (double r : resistors)
            if (!(r > 0)) throw PhysicsError("divider resistor must be positive");
        if (!(supply > 0)) throw PhysicsError("supply voltage must be positive");
    }
};

inline double divider_forward(double gauge_resistance, const DividerChannel& ch) {
    if (!(gauge_resistance > 0)) throw PhysicsError("gauge resistance must be positive");
    if (std::isinf(gauge_resistance)) return ch.supply;
    return ch.supply * gauge_resistance / (gauge_resistance + ch.resistor);
}

inline double divider_inverse(double voltage, const DividerChannel& ch) {
    if (!(voltage > 0) || !(voltage < ch.supply))
        throw PhysicsError("divider voltage " + std::to_string(voltage) +
                           " V outside (0, supply): saturated or open channel");
    return ch.resistor * voltage / (ch.supply - voltage);
}

// ---------------------------------------------------------------------------
// Optional decorator on simulated resistance. Off unless configured; it
// exists to exercise the analysis pipeline, not as a viscoelastic model.

struct DriftNoise {
    double decay_rate = 0.0;        // relative baseline loss per second
    double first_peak_excess = 0.0; // extra relative response right after new damage
    double first_peak_tau = 1.0;    // s, decay of that excess
    double noise_conductive = 0.0;  // noise std relative to R_unstrained
    double noise_insulating = 0.0;

    bool enabled() const {
        return decay_rate != 0.0 || first_peak_excess != 0.0 || noise_conductive != 0.0 ||
               noise_insulating != 0.0;
    }

    template <class Rng>
    double apply(double clean, double unstrained, double elapsed, double since_damage,
                 MatrixKind matrix, Rng& rng) const {
        double r = clean;
        if (first_peak_excess != 0.0 && since_damage >= 0.0)
            r += first_peak_excess * (clean - unstrained) * std::exp(-since_damage / first_peak_tau);
        r *= 1.0 - decay_rate * elapsed;
        const double rel = matrix == MatrixKind::Conductive ? noise_conductive : noise_insulating;
        if (rel != 0.0) {
            std::normal_distribution<double> n(0.0, rel * unstrained);
            r += n(rng);
        }
        return r;
    }
};

}  // namespace ccfsense
