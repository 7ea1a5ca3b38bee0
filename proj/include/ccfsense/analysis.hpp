#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ccfsense/error.hpp"
#include "ccfsense/experiment.hpp"
#include "ccfsense/mechanics.hpp"
#include "ccfsense/plan.hpp"
#include "ccfsense/sensing.hpp"

// Inverse pipeline: time series in, gauge factors and break-in curves out.
namespace ccfsense {

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline constexpr std::array<std::string_view, 7> kColumns{"t_s",    "force_N", "deflection_m", "R1_ohm",
                                                          "R2_ohm", "V1_V",    "V2_V"};

inline void check_header(const std::vector<std::string>& fields) {
    if (fields.size() != kColumns.size())
        throw ParseError(ParseError::Kind::MalformedHeader, 1,
                         "expected " + std::to_string(kColumns.size()) + " columns, found " +
                             std::to_string(fields.size()));
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        const auto& got = fields[c];
        const auto want = kColumns[c];
        if (got == want) continue;
        const auto stem = want.substr(0, want.rfind('_') + 1);
        if (got.size() > stem.size() && std::string_view(got).substr(0, stem.size()) == stem)
            throw ParseError(ParseError::Kind::UnitMismatch, 1,
                             "column " + std::to_string(c + 1) + " is '" + got + "', expected unit in '" +
                                 std::string(want) + "'");
        throw ParseError(ParseError::Kind::MalformedHeader, 1,
                         "column " + std::to_string(c + 1) + " is '" + got + "', expected '" +
                             std::string(want) + "'");
    }
}

inline double parse_field(const std::string& s, std::size_t line, std::size_t column, bool may_be_empty) {
    if (s.empty()) {
        if (may_be_empty) return std::numeric_limits<double>::quiet_NaN();
        throw ParseError(ParseError::Kind::BadField, line,
                         "column " + std::to_string(column + 1) + " is empty");
    }
    if (s == "NaN" || s == "nan" || s == "NAN") return std::numeric_limits<double>::quiet_NaN();
    if (s == "Inf" || s == "inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto* first = s.data();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError(ParseError::Kind::BadField, line,
                         "column " + std::to_string(column + 1) + ": '" + s + "' is not a number");
    return v;
}

}  // namespace detail

/// Parses CSV text. Empty resistance/voltage fields are allowed (lab data
/// that only recorded voltages); they come back as NaN.
inline TimeSeriesRecord parse_csv(std::string_view text) {
    TimeSeriesRecord rec;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const bool terminated = nl != std::string_view::npos;
        auto line = text.substr(pos, terminated ? nl - pos : std::string_view::npos);
        pos = terminated ? nl + 1 : text.size();
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) {
            if (!terminated) break;
            throw ParseError(ParseError::Kind::BadField, line_no, "blank line");
        }
        const auto fields = detail::split_csv_line(line);
        if (!header_seen) {
            detail::check_header(fields);
            header_seen = true;
            continue;
        }
        if (fields.size() != detail::kColumns.size()) {
            const bool last = !terminated || pos >= text.size();
            throw ParseError(last ? ParseError::Kind::Truncated : ParseError::Kind::BadField, line_no,
                             "expected 7 fields, found " + std::to_string(fields.size()));
        }
        std::array<double, 7> v{};
        for (std::size_t c = 0; c < 7; ++c) v[c] = detail::parse_field(fields[c], line_no, c, c >= 3);
        if (!std::isfinite(v[0])) throw ParseError(ParseError::Kind::BadField, line_no, "time is not finite");
        if (rec.size() > 0 && !(v[0] > rec.time.back()))
            throw ParseError(ParseError::Kind::NonMonotoneTime, line_no,
                             "time " + fields[0] + " does not increase");
        rec.push_back(v[0], v[1], v[2], {v[3], v[4]}, {v[5], v[6]});
    }
    if (!header_seen) throw ParseError(ParseError::Kind::MalformedHeader, 1, "missing header");
    return rec;
}

/// Reads `path` and, when present, its `.meta.json` sidecar.
inline TimeSeriesRecord parse_record(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto rec = parse_csv(ss.str());
    const auto meta = metadata_path(path);
    if (std::filesystem::exists(meta)) {
        std::ifstream m(meta);
        try {
            rec.metadata = nlohmann::json::parse(m);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(meta.string() + ": " + e.what());
        }
    }
    return rec;
}

/// Fills missing resistance samples from the divider voltages. Voltages at or
/// beyond the rails stay NaN (open or saturated channel).
inline void reconstruct_resistance(TimeSeriesRecord& rec, const DividerConfig& divider) {
    for (int g = 0; g < 2; ++g) {
        const auto ch = divider.channel(g);
        for (std::size_t i = 0; i < rec.size(); ++i) {
            if (!std::isnan(rec.resistance[g][i])) continue;
            const double v = rec.voltage[g][i];
            if (v > 0 && v < ch.supply) rec.resistance[g][i] = divider_inverse(v, ch);
        }
    }
}

/// Share of samples whose voltage channel is marked open (NaN).
inline std::array<double, 2> open_circuit_fraction(const TimeSeriesRecord& rec) {
    std::array<double, 2> out{};
    if (rec.size() == 0) return out;
    for (int g = 0; g < 2; ++g) {
        const auto n = std::count_if(rec.voltage[g].begin(), rec.voltage[g].end(),
                                     [](double v) { return std::isnan(v); });
        out[g] = static_cast<double>(n) / static_cast<double>(rec.size());
    }
    return out;
}

/// Orientation of every sample, from the sidecar spans; Initial otherwise.
inline std::vector<Orientation> sample_orientations(const TimeSeriesRecord& rec) {
    std::vector<Orientation> out(rec.size(), Orientation::Initial);
    if (!rec.metadata.contains("orientation_spans")) return out;
    for (const auto& span : rec.metadata.at("orientation_spans")) {
        const auto o = span.at("orientation") == "Flipped" ? Orientation::Flipped : Orientation::Initial;
        const double t0 = span.at("t_start").get<double>();
        const double t1 = span.at("t_end").get<double>();
        for (std::size_t i = 0; i < rec.size(); ++i)
            if (rec.time[i] >= t0 && rec.time[i] <= t1) out[i] = o;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Strain

struct StrainSeries {
    std::vector<double> max_strain;                 // compressed face, from deflection
    std::array<std::vector<double>, 2> gauge_avg;   // per gauge, signed
};

inline StrainSeries strain_from_deflection(const TimeSeriesRecord& rec, const BeamGeometry& g,
                                           const std::vector<Orientation>& orientation) {
    if (!(g.span > 0) || !(g.na_offset > 0))
        throw ConfigError("strain reconstruction needs span and neutral-axis offset");
    if (orientation.size() != rec.size()) throw ConfigError("orientation series length mismatch");
    StrainSeries s;
    s.max_strain.resize(rec.size());
    for (auto& v : s.gauge_avg) v.resize(rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const double eps = strain_from_center_deflection(g, rec.deflection[i]);
        s.max_strain[i] = eps;
        for (int k = 0; k < 2; ++k) s.gauge_avg[k][i] = -face_sign(k, orientation[i]) * eps / 2.0;
    }
    return s;
}

inline StrainSeries strain_from_deflection(const TimeSeriesRecord& rec, const BeamGeometry& g) {
    return strain_from_deflection(rec, g, sample_orientations(rec));
}

/// Peak-to-peak-preserving variant: subtracts the mean over [begin, end).
inline std::vector<double> mean_removed(const std::vector<double>& x, std::size_t begin, std::size_t end) {
    std::vector<double> out(x.begin() + static_cast<std::ptrdiff_t>(begin),
                            x.begin() + static_cast<std::ptrdiff_t>(end));
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : out)
        if (!std::isnan(v)) {
            sum += v;
            ++n;
        }
    const double mean = n ? sum / static_cast<double>(n) : 0.0;
    for (auto& v : out) v -= mean;
    return out;
}

// ---------------------------------------------------------------------------
// Segmentation

struct Window {
    int id = 0;
    std::size_t begin = 0;  // inclusive sample index
    std::size_t end = 0;    // exclusive
    int cycles = 0;
    Orientation orientation = Orientation::Initial;
};

struct SmallSetCriteria {
    double floor = 0.0;      // N
    double amplitude = 0.0;  // N, peak-to-peak
    double tolerance = 0.1;
    int min_cycles = 2;
};

namespace detail {

struct Extremum {
    bool is_peak = false;
    std::size_t first = 0;  // plateau start
    std::size_t last = 0;   // plateau end
    double value = 0.0;
};

// Alternating extrema with a hysteresis threshold; flat runs at an extremum
// are kept as [first, last] plateaus.
inline std::vector<Extremum> turning_points(const std::vector<double>& x, std::size_t begin,
                                            std::size_t end, double threshold) {
    std::vector<Extremum> out;
    if (end <= begin) return out;
    const double flat = threshold * 1e-6;
    Extremum lo{false, begin, begin, x[begin]};
    Extremum hi{true, begin, begin, x[begin]};
    int dir = 0;  // +1 looking for a peak, -1 looking for a valley
    for (std::size_t i = begin + 1; i < end; ++i) {
        const double v = x[i];
        if (std::isnan(v)) continue;
        if (dir >= 0) {
            if (v > hi.value + flat) hi = {true, i, i, v};
            else if (std::abs(v - hi.value) <= flat && hi.last + 1 == i) hi.last = i;
        }
        if (dir <= 0) {
            if (v < lo.value - flat) lo = {false, i, i, v};
            else if (std::abs(v - lo.value) <= flat && lo.last + 1 == i) lo.last = i;
        }
        if (dir == 0) {
            if (hi.value - lo.value >= threshold) {
                // Whichever came first is confirmed; keep tracking the other.
                const bool valley_first = lo.first < hi.first;
                out.push_back(valley_first ? lo : hi);
                dir = valley_first ? +1 : -1;
            }
        } else if (dir > 0 && hi.value - v >= threshold) {
            out.push_back(hi);
            dir = -1;
            lo = {false, i, i, v};
        } else if (dir < 0 && v - lo.value >= threshold) {
            out.push_back(lo);
            dir = +1;
            hi = {true, i, i, v};
        }
    }
    if (dir > 0) out.push_back(hi);
    else if (dir < 0) out.push_back(lo);
    return out;
}

}  // namespace detail

/// Maximal runs of back-to-back small force cycles: troughs near the floor,
/// peak-to-peak close to the small amplitude. Holds, ramps and break-in sets
/// never qualify.
inline std::vector<Window> segment_small_sets(const TimeSeriesRecord& rec, const SmallSetCriteria& c) {
    std::vector<Window> windows;
    if (rec.size() < 3 || !(c.amplitude > 0)) return windows;
    const auto ext = detail::turning_points(rec.force, 0, rec.size(), 0.5 * c.amplitude);

    struct Cycle {
        std::size_t begin, end;  // valley plateau end .. next valley plateau start
        std::size_t gap_before;  // plateau length at the starting valley
    };
    const double max_peak = c.floor + c.amplitude * (1.0 + c.tolerance);
    const double min_valley = c.floor - c.amplitude * c.tolerance;
    const double min_pp = c.amplitude * (1.0 - c.tolerance);
    const double max_pp = c.amplitude * (1.0 + c.tolerance);

    std::vector<Cycle> cand;
    for (std::size_t k = 0; k + 2 < ext.size(); ++k) {
        const auto& v0 = ext[k];
        const auto& p = ext[k + 1];
        const auto& v1 = ext[k + 2];
        if (v0.is_peak || !p.is_peak || v1.is_peak) continue;
        const double pp = p.value - std::min(v0.value, v1.value);
        if (p.value > max_peak || std::min(v0.value, v1.value) < min_valley) continue;
        if (pp < min_pp || pp > max_pp) continue;
        cand.push_back({v0.last, v1.first, v0.last - v0.first});
    }
    if (cand.empty()) return windows;

    std::vector<std::size_t> durations;
    for (const auto& cy : cand) durations.push_back(cy.end - cy.begin);
    std::nth_element(durations.begin(), durations.begin() + static_cast<std::ptrdiff_t>(durations.size() / 2),
                     durations.end());
    const double typical = static_cast<double>(durations[durations.size() / 2]);

    const auto orient = sample_orientations(rec);
    auto flush = [&](std::size_t b, std::size_t e, int n) {
        if (n < c.min_cycles) return;
        while (e > b && orient[e] != orient[b]) --e;
        Window w;
        w.id = static_cast<int>(windows.size());
        w.begin = b;
        w.end = e + 1;
        w.cycles = n;
        w.orientation = orient[b];
        windows.push_back(w);
    };

    std::size_t run_begin = 0, run_end = 0;
    int run_cycles = 0;
    for (const auto& cy : cand) {
        const bool regular = static_cast<double>(cy.end - cy.begin) <= 1.5 * typical;
        const bool adjacent = run_cycles > 0 && cy.begin <= run_end + static_cast<std::size_t>(0.25 * typical) &&
                              static_cast<double>(cy.gap_before) <= 0.25 * typical;
        if (!regular) {
            flush(run_begin, run_end, run_cycles);
            run_cycles = 0;
            continue;
        }
        if (adjacent) {
            run_end = cy.end;
            ++run_cycles;
        } else {
            flush(run_begin, run_end, run_cycles);
            run_begin = cy.begin;
            run_end = cy.end;
            run_cycles = 1;
        }
    }
    flush(run_begin, run_end, run_cycles);
    return windows;
}

// ---------------------------------------------------------------------------
// Fitting

struct FitResult {
    int window = 0;
    double k = 0.0;
    double R0_fit = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
    std::size_t n_points = 0;
};

inline constexpr std::size_t kMinFitPoints = 10;

/// Ordinary least squares of R on strain; k = slope / intercept, so the
/// intercept plays the role of the unstrained resistance of this window.
inline FitResult fit_gauge_factor(std::span<const double> strain, std::span<const double> resistance,
                                  int window_id = 0) {
    if (strain.size() != resistance.size()) throw ConfigError("strain/resistance length mismatch");
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < strain.size(); ++i) {
        if (std::isnan(strain[i]) || std::isnan(resistance[i])) continue;
        sx += strain[i];
        sy += resistance[i];
        ++n;
    }
    if (n < kMinFitPoints)
        throw PhysicsError("window " + std::to_string(window_id) + ": only " + std::to_string(n) +
                           " usable points, need " + std::to_string(kMinFitPoints));
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < strain.size(); ++i) {
        if (std::isnan(strain[i]) || std::isnan(resistance[i])) continue;
        const double dx = strain[i] - mx;
        const double dy = resistance[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || sxx <= 1e-24 * static_cast<double>(n) * (mx * mx + 1e-30))
        throw PhysicsError("window " + std::to_string(window_id) + ": strain has zero variance");

    FitResult f;
    f.window = window_id;
    f.n_points = n;
    f.slope = sxy / sxx;
    f.R0_fit = my - f.slope * mx;
    f.k = f.slope / f.R0_fit + 0.0;
    if (syy > 0.0) {
        const double ss_res = std::max(0.0, syy - f.slope * sxy);
        f.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return f;
}

// ---------------------------------------------------------------------------
// Hysteresis and drift

struct LoopMetrics {
    double hysteresis = 0.0;  // widest R gap between branches / R span of the window
    double drift = 0.0;       // ohm per cycle, slope of per-cycle mean R
    int cycles = 0;
};

namespace detail {

inline double interp_sorted(const std::vector<std::pair<double, double>>& pts, double x) {
    auto it = std::lower_bound(pts.begin(), pts.end(), x,
                               [](const auto& p, double v) { return p.first < v; });
    if (it == pts.begin()) return it->second;
    if (it == pts.end()) return pts.back().second;
    const auto& b = *it;
    const auto& a = *(it - 1);
    if (b.first == a.first) return b.second;
    return a.second + (b.second - a.second) * (x - a.first) / (b.first - a.first);
}

inline std::vector<std::pair<double, double>> branch(std::span<const double> x, std::span<const double> r,
                                                     std::size_t from, std::size_t to) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = from; i <= to; ++i)
        if (!std::isnan(x[i]) && !std::isnan(r[i])) pts.emplace_back(x[i], r[i]);
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return pts;
}

}  // namespace detail

/// Cycles are cut at strain minima. Needs at least two complete cycles.
inline LoopMetrics hysteresis_and_drift(std::span<const double> strain, std::span<const double> resistance) {
    if (strain.size() != resistance.size()) throw ConfigError("strain/resistance length mismatch");
    std::vector<double> x(strain.begin(), strain.end());
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    double rlo = lo, rhi = -lo;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isnan(x[i]) || std::isnan(resistance[i])) continue;
        lo = std::min(lo, x[i]);
        hi = std::max(hi, x[i]);
        rlo = std::min(rlo, resistance[i]);
        rhi = std::max(rhi, resistance[i]);
    }
    if (!(hi > lo)) throw PhysicsError("too few cycles: strain does not vary");
    const auto ext = detail::turning_points(x, 0, x.size(), 0.25 * (hi - lo));

    std::vector<std::size_t> valleys, peaks;
    for (const auto& e : ext) (e.is_peak ? peaks : valleys).push_back(e.first);
    LoopMetrics m;
    std::vector<double> means;
    double widest = 0.0;
    for (std::size_t v = 0; v + 1 < valleys.size(); ++v) {
        const std::size_t a = valleys[v], b = valleys[v + 1];
        auto pk = std::find_if(peaks.begin(), peaks.end(), [&](std::size_t p) { return p > a && p < b; });
        if (pk == peaks.end()) continue;
        const auto up = detail::branch(strain, resistance, a, *pk);
        const auto down = detail::branch(strain, resistance, *pk, b);
        if (up.size() < 2 || down.size() < 2) continue;
        const double x0 = std::max(up.front().first, down.front().first);
        const double x1 = std::min(up.back().first, down.back().first);
        for (int k = 1; k < 20; ++k) {
            const double xs = x0 + (x1 - x0) * (0.05 + 0.9 * k / 20.0);
            widest = std::max(widest, std::abs(detail::interp_sorted(up, xs) - detail::interp_sorted(down, xs)));
        }
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = a; i < b; ++i)
            if (!std::isnan(resistance[i])) {
                sum += resistance[i];
                ++n;
            }
        means.push_back(n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN());
    }
    m.cycles = static_cast<int>(means.size());
    if (m.cycles < 2) throw PhysicsError("too few cycles: need at least two complete cycles");
    m.hysteresis = rhi > rlo ? widest / (rhi - rlo) : 0.0;

    const double nc = static_cast<double>(means.size());
    const double mi = (nc - 1.0) / 2.0;
    double mm = 0.0;
    for (double v : means) mm += v;
    mm /= nc;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) {
        const double di = static_cast<double>(i) - mi;
        sxy += di * (means[i] - mm);
        sxx += di * di;
    }
    m.drift = sxy / sxx;
    return m;
}

// ---------------------------------------------------------------------------
// Break-in curves and the full report

struct BreakinPoint {
    double max_breakin_strain = 0.0;
    double k = 0.0;
    double R_unstrained = 0.0;
    int window = 0;
};

struct BreakinCurve {
    int gauge = 0;
    Orientation orientation = Orientation::Initial;
    std::vector<BreakinPoint> points;
};

struct GaugeWindowResult {
    int gauge = 0;
    Window window;
    std::optional<FitResult> fit;
    std::optional<LoopMetrics> loop;
    double R_floor = std::numeric_limits<double>::quiet_NaN();
    double max_breakin_strain = 0.0;
    std::string skipped;  // reason when no fit was emitted
};

struct AnalysisReport {
    std::vector<Window> windows;
    std::vector<GaugeWindowResult> results;
    std::vector<BreakinCurve> curves;
    std::array<double, 2> open_fraction{};
};

/// One point per small-set window, keyed to the largest strain magnitude seen
/// earlier in the same orientation. Equal keys collapse onto the latest window
/// so the strain axis stays strictly increasing.
inline std::vector<BreakinCurve> breakin_curve(const std::vector<GaugeWindowResult>& results) {
    std::vector<BreakinCurve> curves;
    for (int g = 0; g < 2; ++g) {
        for (auto o : {Orientation::Initial, Orientation::Flipped}) {
            BreakinCurve c{g, o, {}};
            for (const auto& r : results) {
                if (r.gauge != g || r.window.orientation != o || !r.fit) continue;
                BreakinPoint p{r.max_breakin_strain, r.fit->k, r.fit->R0_fit, r.window.id};
                if (!c.points.empty() && !(p.max_breakin_strain > c.points.back().max_breakin_strain))
                    c.points.back() = p;
                else
                    c.points.push_back(p);
            }
            if (!c.points.empty()) curves.push_back(std::move(c));
        }
    }
    return curves;
}

inline SmallSetCriteria criteria_from(const TimeSeriesRecord& rec, const AnalysisOptions& opt,
                                      std::optional<double> floor = {}, std::optional<double> amplitude = {}) {
    SmallSetCriteria c;
    c.tolerance = opt.small_set_tolerance;
    c.min_cycles = opt.min_cycles;
    if (floor) c.floor = *floor;
    else if (rec.metadata.contains("force_floor_N")) c.floor = rec.metadata.at("force_floor_N").get<double>();
    else throw ConfigError("force floor unknown: pass it explicitly or provide the metadata sidecar");
    if (amplitude) c.amplitude = *amplitude;
    else if (rec.metadata.contains("small_amplitude_N"))
        c.amplitude = rec.metadata.at("small_amplitude_N").get<double>();
    else throw ConfigError("small amplitude unknown: pass it explicitly or provide the metadata sidecar");
    return c;
}

inline AnalysisReport analyze(const TimeSeriesRecord& rec, const BeamGeometry& geometry,
                              const SmallSetCriteria& crit, const AnalysisOptions& opt) {
    AnalysisReport rep;
    rep.open_fraction = open_circuit_fraction(rec);
    const auto orient = sample_orientations(rec);
    const auto strain = strain_from_deflection(rec, geometry, orient);
    rep.windows = segment_small_sets(rec, crit);

    // Running maximum of |strain| per orientation, for the break-in axis.
    std::vector<double> running(rec.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (i > 0 && orient[i] != orient[i - 1]) acc = 0.0;
        running[i] = acc;
        if (!std::isnan(strain.max_strain[i])) acc = std::max(acc, std::abs(strain.max_strain[i]));
    }

    const double floor_band = crit.floor + 0.05 * crit.amplitude;
    for (const auto& w : rep.windows) {
        for (int g = 0; g < 2; ++g) {
            GaugeWindowResult r;
            r.gauge = g;
            r.window = w;
            r.max_breakin_strain = running[w.begin];
            const std::span<const double> R(rec.resistance[g].data() + w.begin, w.end - w.begin);
            std::vector<double> x;
            if (opt.relative_strain) x = mean_removed(strain.gauge_avg[g], w.begin, w.end);
            else x.assign(strain.gauge_avg[g].begin() + static_cast<std::ptrdiff_t>(w.begin),
                          strain.gauge_avg[g].begin() + static_cast<std::ptrdiff_t>(w.end));

            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t i = w.begin; i < w.end; ++i)
                if (rec.force[i] <= floor_band && !std::isnan(rec.resistance[g][i])) {
                    sum += rec.resistance[g][i];
                    ++n;
                }
            if (n) r.R_floor = sum / static_cast<double>(n);

            try {
                r.fit = fit_gauge_factor(x, R, w.id);
            } catch (const PhysicsError& e) {
                r.skipped = e.what();
            }
            if (r.fit) {
                try {
                    r.loop = hysteresis_and_drift(x, R);
                } catch (const PhysicsError&) {
                }
            }
            rep.results.push_back(std::move(r));
        }
    }
    rep.curves = breakin_curve(rep.results);
    return rep;
}

inline nlohmann::json to_json(const AnalysisReport& rep) {
    using nlohmann::json;
    auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
    json fits = json::array();
    for (const auto& r : rep.results) {
        json e{{"gauge", r.gauge + 1},
               {"window", r.window.id},
               {"orientation", std::string(to_string(r.window.orientation))},
               {"begin", r.window.begin},
               {"end", r.window.end},
               {"cycles", r.window.cycles},
               {"max_breakin_strain", r.max_breakin_strain},
               {"R_floor", num(r.R_floor)}};
        if (r.fit) {
            e["k"] = num(r.fit->k);
            e["R0_fit"] = num(r.fit->R0_fit);
            e["r_squared"] = r.fit->r_squared;
            e["n_points"] = r.fit->n_points;
        } else {
            e["skipped"] = r.skipped;
        }
        if (r.loop) {
            e["hysteresis"] = r.loop->hysteresis;
            e["drift_ohm_per_cycle"] = r.loop->drift;
        }
        fits.push_back(e);
    }
    json curves = json::array();
    for (const auto& c : rep.curves) {
        json pts = json::array();
        for (const auto& p : c.points)
            pts.push_back({{"max_breakin_strain", p.max_breakin_strain},
                           {"k", num(p.k)},
                           {"R_unstrained", num(p.R_unstrained)},
                           {"window", p.window}});
        curves.push_back({{"gauge", c.gauge + 1},
                          {"orientation", std::string(to_string(c.orientation))},
                          {"points", pts}});
    }
    return json{{"schema_version", 1},
                {"window_count", rep.windows.size()},
                {"open_circuit_fraction", {rep.open_fraction[0], rep.open_fraction[1]}},
                {"fits", fits},
                {"breakin_curves", curves}};
}

}  // namespace ccfsense
