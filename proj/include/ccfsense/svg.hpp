#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

// Minimal deterministic SVG line charts. Same input, same bytes.
namespace ccfsense::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    int width = 720;
    int height = 440;
};

namespace detail {

inline std::string fmt(double v, int digits = 6) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
    return std::string(buf, r.ptr);
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace detail

/// Keeps every `stride`-th point so long traces stay small.
inline Series decimate(Series s, std::size_t max_points) {
    if (max_points == 0 || s.x.size() <= max_points) return s;
    const std::size_t stride = (s.x.size() + max_points - 1) / max_points;
    Series out{s.name, {}, {}, s.markers};
    for (std::size_t i = 0; i < s.x.size(); i += stride) {
        out.x.push_back(s.x[i]);
        out.y.push_back(s.y[i]);
    }
    return out;
}

inline std::string render(const Chart& c) {
    using detail::fmt;
    const double left = 70, right = 150, top = 40, bottom = 50;
    const double pw = c.width - left - right, ph = c.height - top - bottom;

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : c.series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::string o;
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(c.width) + "\" height=\"" +
         std::to_string(c.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         detail::escape(c.title) + "</text>\n";
    o += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
        o += "<text x=\"" + fmt(px(xv)) + "\" y=\"" + fmt(top + ph + 16) + "\" text-anchor=\"middle\">" +
             fmt(xv, 4) + "</text>\n";
        o += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(py(yv) + 4) + "\" text-anchor=\"end\">" + fmt(yv, 4) +
             "</text>\n";
    }
    o += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(c.height - 10.0) + "\" text-anchor=\"middle\">" +
         detail::escape(c.x_label) + "</text>\n";
    o += "<text transform=\"translate(16," + fmt(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         detail::escape(c.y_label) + "</text>\n";

    for (std::size_t k = 0; k < c.series.size(); ++k) {
        const auto& s = c.series[k];
        const std::string color = detail::kPalette[k % std::size(detail::kPalette)];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (!pts.empty()) pts += ' ';
            pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i]));
            if (s.markers)
                o += "<circle cx=\"" + fmt(px(s.x[i])) + "\" cy=\"" + fmt(py(s.y[i])) + "\" r=\"3\" fill=\"" + color +
                     "\"/>\n";
        }
        o += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        const double ly = top + 14 + 18.0 * static_cast<double>(k);
        o += "<line x1=\"" + fmt(left + pw + 10) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" + fmt(left + pw + 30) +
             "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        o += "<text x=\"" + fmt(left + pw + 35) + "\" y=\"" + fmt(ly) + "\">" + detail::escape(s.name) + "</text>\n";
    }
    o += "</svg>\n";
    return o;
}

}  // namespace ccfsense::svg
