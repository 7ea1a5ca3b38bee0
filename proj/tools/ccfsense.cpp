#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccfsense/ccfsense.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ccfsense;

namespace {

enum Exit { kOk = 0, kAcceptanceFail = 1, kUsage = 2, kPhysics = 3 };

struct Options {
    std::vector<std::string> configs;
    std::optional<std::string> preset;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
    std::string preset_dir = CCFSENSE_PRESET_DIR;
    double force = 0.0;
    std::string in;
    std::string svg;
    std::string table;
};

struct Sample {
    std::string label;
    config::Document doc;
};

config::Document load_document(const Options& o) {
    std::vector<json> parts;
    if (o.preset) parts.push_back(config::read_json_file(config::preset_path(*o.preset, o.preset_dir)));
    for (const auto& c : o.configs) parts.push_back(config::read_json_file(c));
    if (parts.empty()) throw ConfigError("no configuration: pass --preset or --config");
    return config::parse_document(config::merge(parts));
}

// Calculators run on every preset when no configuration is given.
std::vector<Sample> load_samples(const Options& o) {
    std::vector<Sample> out;
    if (o.preset || !o.configs.empty()) {
        auto d = load_document(o);
        out.push_back({d.name.empty() ? "config" : d.name, std::move(d)});
        return out;
    }
    for (const auto* name : {"short", "medium", "tall"}) {
        auto d = config::parse_document(config::read_json_file(config::preset_path(name, o.preset_dir)));
        out.push_back({d.name.empty() ? name : d.name, std::move(d)});
    }
    return out;
}

void emit(const Options& o, const std::string& text) {
    if (o.out.empty() || o.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + o.out);
    f << text;
}

std::string num(double v) {
    std::string s;
    append_number(s, v);
    return s;
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
        out += '\n';
    }
    return out;
}

void require_format(const Options& o, std::initializer_list<const char*> allowed) {
    for (const auto* a : allowed)
        if (o.format == a) return;
    std::string list;
    for (const auto* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    throw ConfigError("--format " + o.format + " is not available here (use " + list + ")");
}

// --- calculators -----------------------------------------------------------

int cmd_section(Options o) {
    if (o.format.empty()) o.format = "json";
    require_format(o, {"json", "csv"});
    json arr = json::array();
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : load_samples(o)) {
        const auto p = section_properties(s.doc.geometry, s.doc.materials);
        arr.push_back({{"sample", s.label},
                       {"transformation_factor", p.transformation_factor},
                       {"composite_area_m2", p.comp_area},
                       {"petg_area_m2", p.petg_area},
                       {"second_moment_m4", p.second_moment}});
        rows.push_back({s.label, num(p.transformation_factor), num(p.comp_area), num(p.petg_area),
                        num(p.second_moment)});
    }
    emit(o, o.format == "csv" ? csv_table({"sample", "n", "A_comp_m2", "A_PETG_m2", "J_m4"}, rows)
                              : arr.dump(2) + "\n");
    return kOk;
}

int cmd_bend(Options o) {
    if (o.format.empty()) o.format = "json";
    require_format(o, {"json", "csv"});
    json arr = json::array();
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : load_samples(o)) {
        const auto b = bend(s.doc.geometry, s.doc.materials, {o.force, Orientation::Initial});
        json gauges = json::array();
        for (int g = 0; g < kGaugeCount; ++g) {
            gauges.push_back({{"gauge", g + 1},
                              {"max_strain", b.gauge_strain[g]},
                              {"avg_strain", b.gauge_avg_strain[g]},
                              {"fiber_stress_Pa", b.gauge_fiber_stress[g]}});
            rows.push_back({s.label, std::to_string(g + 1), num(o.force), num(b.moment), num(b.deflection),
                            num(b.gauge_strain[g]), num(b.gauge_avg_strain[g]), num(b.gauge_fiber_stress[g])});
        }
        arr.push_back({{"sample", s.label},
                       {"force_N", o.force},
                       {"moment_Nm", b.moment},
                       {"deflection_m", b.deflection},
                       {"max_strain", b.max_strain},
                       {"avg_strain", b.avg_strain},
                       {"max_fiber_stress_Pa", b.max_fiber_stress},
                       {"gauges", gauges}});
    }
    emit(o, o.format == "csv" ? csv_table({"sample", "gauge", "force_N", "moment_Nm", "deflection_m", "max_strain",
                                           "avg_strain", "fiber_stress_Pa"},
                                          rows)
                              : arr.dump(2) + "\n");
    return kOk;
}

int cmd_thermal(Options o) {
    if (o.format.empty()) o.format = "json";
    require_format(o, {"json", "csv"});
    json arr = json::array();
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : load_samples(o)) {
        const auto t = residual_thermal_stress(s.doc.geometry, s.doc.materials);
        arr.push_back({{"sample", s.label},
                       {"stress_Pa", t.stress},
                       {"composite_delta_T_K", t.composite_delta_t},
                       {"petg_delta_T_K", t.petg_delta_t}});
        rows.push_back({s.label, num(t.stress), num(t.composite_delta_t), num(t.petg_delta_t)});
    }
    emit(o, o.format == "csv" ? csv_table({"sample", "stress_Pa", "dT_comp_K", "dT_PETG_K"}, rows)
                              : arr.dump(2) + "\n");
    return kOk;
}

// --- simulation and analysis -----------------------------------------------

svg::Chart trace_chart(const TimeSeriesRecord& rec, const std::string& title) {
    svg::Chart c{title, "time (s)", "resistance (ohm)", {}};
    for (int g = 0; g < 2; ++g)
        c.series.push_back(svg::decimate({"R" + std::to_string(g + 1), rec.time, rec.resistance[g]}, 4000));
    return c;
}

int cmd_simulate(const Options& o) {
    if (!o.seed) throw ConfigError("simulate needs --seed");
    if (o.out.empty() || o.out == "-") throw ConfigError("simulate needs --out PATH for the CSV");
    const std::string format = o.format.empty() ? "csv" : o.format;
    if (format != "csv" && format != "svg") throw ConfigError("simulate supports --format csv or svg");
    const auto doc = load_document(o);
    const auto plan = config::to_plan(doc, *o.seed);
    const auto rec = run_experiment(plan);
    if (format == "svg") {
        std::ofstream f(o.out, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + o.out);
        f << svg::render(trace_chart(rec, plan.setup.name + " simulated resistance"));
        return kOk;
    }
    write_record(rec, o.out);
    if (!o.svg.empty()) {
        std::ofstream f(o.svg, std::ios::binary);
        f << svg::render(trace_chart(rec, plan.setup.name + " simulated resistance"));
    }
    return kOk;
}

svg::Chart breakin_chart(const AnalysisReport& rep) {
    svg::Chart c{"Gauge factor after break-in", "max break-in strain (-)", "gauge factor k (-)", {}};
    for (const auto& cv : rep.curves) {
        svg::Series s{"gauge " + std::to_string(cv.gauge + 1) + " " + std::string(to_string(cv.orientation)),
                      {},
                      {},
                      true};
        for (const auto& p : cv.points) {
            s.x.push_back(p.max_breakin_strain);
            s.y.push_back(p.k);
        }
        c.series.push_back(std::move(s));
    }
    return c;
}

int cmd_analyze(const Options& o) {
    if (o.in.empty()) throw ConfigError("analyze needs --in CSV");
    const std::string format = o.format.empty() ? "json" : o.format;
    if (format != "json" && format != "csv" && format != "svg")
        throw ConfigError("analyze supports --format json, csv or svg");
    auto rec = parse_record(o.in);

    config::Document doc;
    std::optional<DividerConfig> divider;
    if (o.preset || !o.configs.empty()) {
        doc = load_document(o);
        if (doc.sensing) divider = doc.sensing->divider;
    } else if (rec.metadata.contains("plan")) {
        doc = config::parse_document(rec.metadata.at("plan"));
        if (doc.sensing) divider = doc.sensing->divider;
    } else {
        throw ConfigError("no geometry: pass --preset/--config or keep the .meta.json sidecar next to the CSV");
    }
    if (divider) reconstruct_resistance(rec, *divider);

    std::optional<double> floor, amplitude;
    if (doc.experiment) {
        floor = doc.experiment->waveform.force_floor;
        amplitude = doc.experiment->waveform.small_amplitude;
    }
    const auto crit = criteria_from(rec, doc.analysis, floor, amplitude);
    const auto rep = analyze(rec, doc.geometry, crit, doc.analysis);

    if (!o.svg.empty()) {
        std::ofstream f(o.svg, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + o.svg);
        f << svg::render(breakin_chart(rep));
    }
    if (format == "svg") {
        emit(o, svg::render(breakin_chart(rep)));
    } else if (format == "csv") {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : rep.results)
            rows.push_back({std::to_string(r.window.id), std::to_string(r.gauge + 1),
                            std::string(to_string(r.window.orientation)), num(r.max_breakin_strain),
                            r.fit ? num(r.fit->k) : "NaN", r.fit ? num(r.fit->R0_fit) : "NaN",
                            r.fit ? num(r.fit->r_squared) : "NaN"});
        emit(o, csv_table({"window", "gauge", "orientation", "max_breakin_strain", "k", "R0_fit_ohm", "r_squared"},
                          rows));
    } else {
        emit(o, to_json(rep).dump(2) + "\n");
    }
    return kOk;
}

// --- reproduction ----------------------------------------------------------

int reproduce_table3(const Options& o) {
    const std::string format = o.format.empty() ? "text" : o.format;
    if (format != "text" && format != "csv" && format != "json")
        throw ConfigError("reproduce table3 supports --format text, csv or json");
    bool all = true;
    std::vector<reproduce::StressComparison> rows;
    for (const auto& ref : reproduce::kReferenceStresses) {
        auto base = config::read_json_file(config::preset_path(ref.preset, o.preset_dir));
        std::vector<json> parts{base};
        for (const auto& c : o.configs) parts.push_back(config::read_json_file(c));
        const auto doc = config::parse_document(config::merge(parts));
        rows.push_back(reproduce::compare(ref, doc.geometry, doc.materials));
        all = all && reproduce::pass(rows.back());
    }
    if (format == "csv") {
        std::vector<std::vector<std::string>> r;
        for (const auto& c : rows)
            r.push_back({num(c.ref.beam_height_mm), num(c.load.computed), num(c.thermal.computed),
                         num(c.total.computed)});
        emit(o, csv_table({"height_mm", "sigma_load_MPa", "sigma_therm_MPa", "sigma_total_MPa"}, r));
    } else if (format == "json") {
        json arr = json::array();
        for (const auto& c : rows) arr.push_back(reproduce::to_json(c));
        emit(o, json{{"rows", arr}, {"pass", all}}.dump(2) + "\n");
    } else {
        std::ostringstream s;
        char line[160];
        std::snprintf(line, sizeof line, "%-7s %-8s %10s %10s %9s %9s  %s\n", "height", "stress", "reference",
                      "computed", "deviation", "allowed", "result");
        s << line;
        for (const auto& c : rows) {
            const std::pair<const char*, const reproduce::Comparison*> items[] = {
                {"load", &c.load}, {"thermal", &c.thermal}, {"total", &c.total}};
            for (const auto& [label, cmp] : items) {
                std::snprintf(line, sizeof line, "%4.0f mm %-8s %10.1f %10.1f %+8.2f%% %8.1f  %s\n",
                              c.ref.beam_height_mm, label, cmp->reference, cmp->computed, 100.0 * cmp->deviation(),
                              cmp->tolerance, cmp->pass() ? "PASS" : "FAIL");
                s << line;
            }
            std::snprintf(line, sizeof line, "%4.0f mm band     compressed face %s, tensioned face %s  %s\n",
                          c.ref.beam_height_mm, std::string(to_string(c.row.band)).c_str(),
                          std::string(to_string(c.tension_band)).c_str(),
                          c.row.band == FailureBand::CompressiveYield && c.tension_band != FailureBand::TensileYield
                              ? "PASS"
                              : "FAIL");
            s << line;
        }
        s << (all ? "table3: PASS\n" : "table3: FAIL\n");
        emit(o, s.str());
    }
    return all ? kOk : kAcceptanceFail;
}

struct TrendRow {
    std::string preset;
    double height_mm;
    double k_compression;  // largest compression-side k, both orientations
    double k_tension;      // largest tension-side k
};

int reproduce_table4(const Options& o) {
    if (!o.seed) throw ConfigError("reproduce table4-trends needs --seed");
    const std::string format = o.format.empty() ? "text" : o.format;
    if (format != "text" && format != "json") throw ConfigError("reproduce table4-trends supports text or json");
    std::vector<TrendRow> rows;
    for (const auto& ref : reproduce::kReferenceSensitivities) {
        std::vector<json> parts{config::read_json_file(config::preset_path(ref.preset, o.preset_dir))};
        for (const auto& c : o.configs) parts.push_back(config::read_json_file(c));
        const auto doc = config::parse_document(config::merge(parts));
        const auto plan = config::to_plan(doc, *o.seed);
        const auto rec = run_experiment(plan);
        const auto rep = analyze(rec, plan.setup.geometry, criteria_from(rec, doc.analysis), doc.analysis);
        TrendRow row{ref.preset, ref.beam_height_mm, 0.0, 0.0};
        for (const auto& r : rep.results) {
            if (!r.fit) continue;
            const bool compressed = face_sign(r.gauge, r.window.orientation) < 0;
            double& slot = compressed ? row.k_compression : row.k_tension;
            slot = std::max(slot, r.fit->k);
        }
        rows.push_back(row);
    }
    const bool ordering = rows[0].k_compression > rows[1].k_compression &&
                          rows[1].k_compression > rows[2].k_compression;
    const bool magnitude = std::max(rows[0].k_compression, rows[0].k_tension) >= 100.0;
    const bool all = ordering && magnitude;

    if (format == "json") {
        json arr = json::array();
        for (std::size_t i = 0; i < rows.size(); ++i)
            arr.push_back({{"preset", rows[i].preset},
                           {"height_mm", rows[i].height_mm},
                           {"k_compression_max", rows[i].k_compression},
                           {"k_tension_max", rows[i].k_tension},
                           {"reference_k_compression", reproduce::kReferenceSensitivities[i].k_compression}});
        emit(o, json{{"rows", arr},
                     {"ordering_pass", ordering},
                     {"short_peak_pass", magnitude},
                     {"reference_short_peak", reproduce::kReferencePeakTension},
                     {"pass", all}}
                    .dump(2) +
                    "\n");
    } else {
        std::ostringstream s;
        char line[160];
        std::snprintf(line, sizeof line, "%-7s %14s %14s %14s\n", "height", "k_comp (sim)", "k_comp (ref)",
                      "k_tens (sim)");
        s << line;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::snprintf(line, sizeof line, "%4.0f mm %14.2f %14.2f %14.2f\n", rows[i].height_mm,
                          rows[i].k_compression, reproduce::kReferenceSensitivities[i].k_compression,
                          rows[i].k_tension);
            s << line;
        }
        s << "ordering short > medium > tall in compression: " << (ordering ? "PASS" : "FAIL") << "\n";
        std::snprintf(line, sizeof line, "short peak k >= 100 (reference %.0f): %s\n", reproduce::kReferencePeakTension,
                      magnitude ? "PASS" : "FAIL");
        s << line;
        s << (all ? "table4-trends: PASS\n" : "table4-trends: FAIL\n");
        emit(o, s.str());
    }
    return all ? kOk : kAcceptanceFail;
}

int cmd_reproduce(const Options& o) {
    if (o.table == "table3") return reproduce_table3(o);
    if (o.table == "table4-trends") return reproduce_table4(o);
    throw ConfigError("unknown table '" + o.table + "' (expected table3 or table4-trends)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Carbon-fiber beam strain gauge toolkit"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub, bool with_seed) {
        sub->add_option("--config", o.configs, "configuration file; repeat to layer overrides")->check(CLI::ExistingFile);
        sub->add_option("--preset", o.preset, "built-in sample preset")
            ->check(CLI::IsMember({"short", "medium", "tall"}));
        sub->add_option("--out", o.out, "output path (default stdout)");
        sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json", "svg", "text"}));
        sub->add_option("--preset-dir", o.preset_dir, "directory holding the preset files");
        if (with_seed) sub->add_option("--seed", o.seed, "random seed (unsigned 64-bit)");
    };

    auto* section = app.add_subcommand("section", "transformed-section properties");
    common(section, false);
    auto* bendc = app.add_subcommand("bend", "three-point bending response");
    common(bendc, false);
    bendc->add_option("--force", o.force, "load at mid-span in N")->required()->check(CLI::NonNegativeNumber);
    auto* thermal = app.add_subcommand("thermal", "residual thermal stress on the composite");
    common(thermal, false);
    auto* simulate = app.add_subcommand("simulate", "simulate the break-in experiment");
    common(simulate, true);
    simulate->add_option("--svg", o.svg, "also plot the resistance traces");
    auto* analyzec = app.add_subcommand("analyze", "extract gauge factors from a recorded series");
    common(analyzec, false);
    analyzec->add_option("--in", o.in, "CSV time series")->required();
    analyzec->add_option("--svg", o.svg, "also plot gauge factor against break-in strain");
    auto* repro = app.add_subcommand("reproduce", "compare against the reference tables");
    common(repro, true);
    repro->add_option("table", o.table, "table3 or table4-trends")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*section) return cmd_section(o);
        if (*bendc) return cmd_bend(o);
        if (*thermal) return cmd_thermal(o);
        if (*simulate) return cmd_simulate(o);
        if (*analyzec) return cmd_analyze(o);
        if (*repro) return cmd_reproduce(o);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const PhysicsError& e) {
        std::cerr << "physics error: " << e.what() << "\n";
        return kPhysics;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kPhysics;
    }
    return kUsage;
}
