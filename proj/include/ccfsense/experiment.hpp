#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ccfsense/config.hpp"
#include "ccfsense/mechanics.hpp"
#include "ccfsense/plan.hpp"
#include "ccfsense/sensing.hpp"

namespace ccfsense {

enum class SegmentKind { Hold, Small, Ramp, BreakIn };

inline std::string_view to_string(SegmentKind k) {
    switch (k) {
    case SegmentKind::Hold: return "hold";
    case SegmentKind::Small: return "small";
    case SegmentKind::Ramp: return "ramp";
    case SegmentKind::BreakIn: return "breakin";
    }
    return "?";
}

struct WaveformSegment {
    SegmentKind kind = SegmentKind::Hold;
    std::size_t begin = 0;  // sample index, inclusive
    std::size_t end = 0;    // exclusive
    double trough = 0.0;    // N
    double peak = 0.0;      // N
};

struct SampledWaveform {
    double sample_rate = 0.0;
    std::vector<double> force;
    std::vector<WaveformSegment> segments;

    std::size_t size() const { return force.size(); }
    double time(std::size_t i) const { return static_cast<double>(i) / sample_rate; }
};

namespace detail {

inline std::size_t sample_count(double duration, double rate) {
    return static_cast<std::size_t>(std::llround(duration * rate));
}

// Raised-cosine cycles starting and ending at the trough.
inline void append_cycles(SampledWaveform& w, SegmentKind kind, double trough, double amplitude,
                          int cycles, double freq) {
    const std::size_t n = sample_count(cycles / freq, w.sample_rate);
    const std::size_t begin = w.force.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double tau = static_cast<double>(j) / w.sample_rate;
        w.force.push_back(trough + amplitude * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * freq * tau)));
    }
    w.segments.push_back({kind, begin, w.force.size(), trough, trough + amplitude});
}

inline void append_hold(SampledWaveform& w, double level, double duration) {
    const std::size_t begin = w.force.size();
    w.force.insert(w.force.end(), sample_count(duration, w.sample_rate), level);
    w.segments.push_back({SegmentKind::Hold, begin, w.force.size(), level, level});
}

// Half-cosine transition over half a cycle.
inline void append_ramp(SampledWaveform& w, double from, double to, double freq) {
    if (from == to) return;
    const double duration = 0.5 / freq;
    const std::size_t n = sample_count(duration, w.sample_rate);
    const std::size_t begin = w.force.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double u = static_cast<double>(j) / static_cast<double>(n);
        w.force.push_back(from + (to - from) * 0.5 * (1.0 - std::cos(std::numbers::pi * u)));
    }
    w.segments.push_back({SegmentKind::Ramp, begin, w.force.size(), std::min(from, to), std::max(from, to)});
}

}  // namespace detail

/// Samples the protocol: hold, small set, then per break-in set
/// [hold, ramp up, break-in cycles, ramp down, hold, small set], closed by a
/// single floor sample so the last cycle ends on its trough.
/// Deterministic; no randomness involved.
inline SampledWaveform build_waveform(const WaveformSpec& spec, double sample_rate) {
    spec.validate();
    if (!(sample_rate > 0)) throw PhysicsError("sample rate must be positive");
    SampledWaveform w;
    w.sample_rate = sample_rate;
    const double floor = spec.force_floor;
    const double f = spec.cycle_frequency;

    detail::append_hold(w, floor, spec.hold_duration);
    detail::append_cycles(w, SegmentKind::Small, floor, spec.small_amplitude, spec.small_cycles, f);
    for (const auto& set : spec.breakin_sets) {
        detail::append_hold(w, floor, spec.hold_duration);
        detail::append_ramp(w, floor, set.offset, f);
        detail::append_cycles(w, SegmentKind::BreakIn, set.offset, set.amplitude, spec.breakin_cycles, f);
        detail::append_ramp(w, set.offset, floor, f);
        detail::append_hold(w, floor, spec.hold_duration);
        detail::append_cycles(w, SegmentKind::Small, floor, spec.small_amplitude, spec.small_cycles, f);
    }
    detail::append_hold(w, floor, 1.0 / sample_rate);
    return w;
}

/// Indices of force maxima; each is a compressive half-cycle peak for the
/// gauge on the loaded face.
inline std::vector<bool> force_peaks(const std::vector<double>& force) {
    std::vector<bool> peak(force.size(), false);
    for (std::size_t i = 1; i < force.size(); ++i) {
        const bool rising = force[i] > force[i - 1];
        const bool not_rising_after = i + 1 == force.size() || force[i + 1] <= force[i];
        peak[i] = rising && not_rising_after;
    }
    return peak;
}

// ---------------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader = "t_s,force_N,deflection_m,R1_ohm,R2_ohm,V1_V,V2_V";
inline constexpr int kRecordSchemaVersion = 1;

/// Sampled experiment data, column-wise. NaN in a voltage channel marks an
/// open circuit; NaN in a resistance channel means "not recorded".
struct TimeSeriesRecord {
    std::vector<double> time;
    std::vector<double> force;
    std::vector<double> deflection;
    std::array<std::vector<double>, 2> resistance;
    std::array<std::vector<double>, 2> voltage;
    nlohmann::json metadata = nlohmann::json::object();

    std::size_t size() const { return time.size(); }

    void reserve(std::size_t n) {
        for (auto* v : {&time, &force, &deflection, &resistance[0], &resistance[1], &voltage[0], &voltage[1]})
            v->reserve(n);
    }

    void push_back(double t, double f, double y, std::array<double, 2> r, std::array<double, 2> v) {
        time.push_back(t);
        force.push_back(f);
        deflection.push_back(y);
        for (int g = 0; g < 2; ++g) {
            resistance[g].push_back(r[g]);
            voltage[g].push_back(v[g]);
        }
    }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Independent RNG stream per purpose, derived from the plan seed.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(detail::splitmix64(seed ^ detail::splitmix64(stream + 1)));
}

struct GaugeTruth {
    double gauge_factor_start = 0.0;  // of the side the gauge is strained towards
    double gauge_factor_end = 0.0;
    double unstrained_start = 0.0;
    double unstrained_end = 0.0;
    double broken_fraction_end = 0.0;
    bool open_circuit = false;
};

/// Forward simulation: force -> bending -> per-gauge strain and stress ->
/// damage at every force peak -> resistance -> divider voltages.
///
/// The record metadata carries the canonical plan, its digest, the seed, the
/// orientation spans and the per-set ground truth (gauge factor and
/// unstrained resistance at start and end of every small set).
inline TimeSeriesRecord run_experiment(const ExperimentPlan& plan) {
    using nlohmann::json;
    plan.validate();
    const auto& setup = plan.setup;
    const auto wave = build_waveform(plan.waveform, plan.sample_rate);
    const auto peaks = force_peaks(wave.force);
    const auto thermal = residual_thermal_stress(setup.geometry, setup.materials);

    std::array<GaugeState, 2> gauges{make_gauge(setup.gauge), make_gauge(setup.gauge)};
    std::array<std::mt19937_64, 2> damage_rng{make_stream(plan.seed, 0), make_stream(plan.seed, 1)};
    auto noise_rng = make_stream(plan.seed, 2);
    std::array<double, 2> last_damage{-1.0, -1.0};

    TimeSeriesRecord rec;
    rec.reserve(wave.size() * plan.orientations.size());
    json spans = json::array();
    json sets = json::array();

    auto side_factor = [&](int g, Orientation o) {
        const auto& s = gauges[g];
        return face_sign(g, o) < 0 ? s.closing_gauge_factor : s.gauge_factor;
    };

    std::size_t global = 0;
    for (const auto orientation : plan.orientations) {
        const double t_begin = static_cast<double>(global) / plan.sample_rate;
        std::size_t seg_idx = 0;
        std::array<GaugeTruth, 2> truth{};

        for (std::size_t i = 0; i < wave.size(); ++i, ++global) {
            const double t = static_cast<double>(global) / plan.sample_rate;
            const double force = wave.force[i];

            while (seg_idx < wave.segments.size() && wave.segments[seg_idx].end <= i) ++seg_idx;
            const auto& seg = wave.segments[seg_idx];
            if (seg.kind == SegmentKind::Small && i == seg.begin) {
                for (int g = 0; g < 2; ++g) {
                    truth[g].gauge_factor_start = side_factor(g, orientation);
                    truth[g].unstrained_start = gauges[g].unstrained_resistance;
                }
            }

            const auto bending = bend(setup.geometry, setup.materials, {force, orientation});
            if (peaks[i]) {
                for (int g = 0; g < 2; ++g) {
                    const double total = bending.gauge_fiber_stress[g] + thermal.stress;
                    const auto before = gauges[g].broken_count;
                    gauges[g] = apply_stress_peak(gauges[g], total, damage_rng[g]);
                    if (gauges[g].broken_count != before) last_damage[g] = t;
                }
            }

            std::array<double, 2> r{};
            std::array<double, 2> v{};
            for (int g = 0; g < 2; ++g) {
                const auto& st = gauges[g];
                const double eps = bending.gauge_avg_strain[g];
                if (st.open_circuit) {
                    r[g] = std::numeric_limits<double>::quiet_NaN();
                    v[g] = std::numeric_limits<double>::quiet_NaN();
                    continue;
                }
                double res = setup.electrical == ElectricalModel::Linear ? linear_gauge_resistance(st, eps)
                                                                         : gauge_resistance(st, eps);
                if (setup.drift.enabled()) {
                    const double since = last_damage[g] < 0 ? -1.0 : t - last_damage[g];
                    res = setup.drift.apply(res, st.unstrained_resistance, t, since, st.config.matrix,
                                            noise_rng);
                }
                r[g] = res;
                v[g] = res > 0 ? divider_forward(res, setup.divider.channel(g))
                               : std::numeric_limits<double>::quiet_NaN();
            }
            rec.push_back(t, force, bending.deflection, r, v);

            if (i + 1 == seg.end) {
                json entry{{"kind", std::string(to_string(seg.kind))},
                           {"orientation", std::string(to_string(orientation))},
                           {"t_start", rec.time[rec.size() - (seg.end - seg.begin)]},
                           {"t_end", t},
                           {"trough_N", seg.trough},
                           {"peak_N", seg.peak}};
                if (seg.kind == SegmentKind::Small) {
                    json gs = json::array();
                    for (int g = 0; g < 2; ++g) {
                        truth[g].gauge_factor_end = side_factor(g, orientation);
                        truth[g].unstrained_end = gauges[g].unstrained_resistance;
                        truth[g].broken_fraction_end = gauges[g].broken_fraction;
                        truth[g].open_circuit = gauges[g].open_circuit;
                        gs.push_back({{"k_start", truth[g].gauge_factor_start},
                                      {"k_end", truth[g].gauge_factor_end},
                                      {"R_unstrained_start", truth[g].unstrained_start},
                                      {"R_unstrained_end", truth[g].unstrained_end},
                                      {"broken_fraction", truth[g].broken_fraction_end},
                                      {"open_circuit", truth[g].open_circuit}});
                    }
                    entry["gauges"] = gs;
                }
                if (seg.kind == SegmentKind::Small || seg.kind == SegmentKind::BreakIn) sets.push_back(entry);
            }
        }
        spans.push_back({{"orientation", std::string(to_string(orientation))},
                         {"t_start", t_begin},
                         {"t_end", static_cast<double>(global - 1) / plan.sample_rate}});
    }

    json states = json::array();
    for (const auto& g : gauges)
        states.push_back({{"broken_fraction", g.broken_fraction},
                          {"sigma_peak_seen_Pa", g.sigma_peak_seen},
                          {"R_unstrained", g.unstrained_resistance},
                          {"k_effective", g.gauge_factor},
                          {"k_closing", g.closing_gauge_factor},
                          {"open_circuit", g.open_circuit}});

    rec.metadata = json{{"schema_version", kRecordSchemaVersion},
                        {"seed", plan.seed},
                        {"plan_digest", config::plan_digest(plan)},
                        {"plan", config::to_json(plan)},
                        {"force_floor_N", plan.waveform.force_floor},
                        {"small_amplitude_N", plan.waveform.small_amplitude},
                        {"cycle_frequency_Hz", plan.waveform.cycle_frequency},
                        {"orientation_spans", spans},
                        {"sets", sets},
                        {"final_gauges", states}};
    return rec;
}

// ---------------------------------------------------------------------------
// CSV output: header row, LF endings, 9 significant digits, NaN spelled "NaN".

inline void append_number(std::string& out, double v) {
    if (std::isnan(v)) {
        out += "NaN";
        return;
    }
    if (std::isinf(v)) {
        out += v > 0 ? "Inf" : "-Inf";
        return;
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
    out.append(buf, res.ptr);
}

inline std::string to_csv(const TimeSeriesRecord& rec) {
    std::string out;
    out.reserve(rec.size() * 96 + 64);
    out += kCsvHeader;
    out += '\n';
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const double row[7] = {rec.time[i],          rec.force[i],         rec.deflection[i],
                               rec.resistance[0][i], rec.resistance[1][i], rec.voltage[0][i],
                               rec.voltage[1][i]};
        for (int c = 0; c < 7; ++c) {
            if (c) out += ',';
            append_number(out, row[c]);
        }
        out += '\n';
    }
    return out;
}

inline std::filesystem::path metadata_path(const std::filesystem::path& csv) {
    auto p = csv;
    p += ".meta.json";
    return p;
}

inline void write_record(const TimeSeriesRecord& rec, const std::filesystem::path& csv) {
    {
        std::ofstream out(csv, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + csv.string());
        out << to_csv(rec);
    }
    std::ofstream meta(metadata_path(csv), std::ios::binary);
    if (!meta) throw ConfigError("cannot write " + metadata_path(csv).string());
    meta << rec.metadata.dump(2) << '\n';
}

}  // namespace ccfsense
