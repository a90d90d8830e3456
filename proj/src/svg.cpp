#include "densiflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "densiflow/error.hpp"
#include "densiflow/fields.hpp"
#include "densiflow/io.hpp"

namespace densiflow {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

Range pad(double lo, double hi) {
    if (!(lo < hi)) {
        const double d = lo == 0.0 ? 1.0 : 0.1 * std::abs(lo);
        return {lo - d, hi + d};
    }
    return {lo, hi};
}

}  // namespace

std::string render_svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    const auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
    double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
    for (const PlotSeries& s : series) {
        if (s.x.size() != s.y.size()) throw Error(ErrorCode::FormatError, "series " + s.name + " has ragged data");
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (spec.log_y && !(s.y[k] > 0.0))) continue;
            xmin = std::min(xmin, s.x[k]);
            xmax = std::max(xmax, s.x[k]);
            ymin = std::min(ymin, ty(s.y[k]));
            ymax = std::max(ymax, ty(s.y[k]));
        }
    }
    if (xmin > xmax) xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    const Range xr = pad(xmin, xmax);
    const Range yr = pad(ymin, ymax);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    const auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    const auto py = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
           "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
           escape(spec.title) + "</text>\n";
    out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xr.lo + (xr.hi - xr.lo) * k / 4.0;
        const double yv = yr.lo + (yr.hi - yr.lo) * k / 4.0;
        out += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(kTop + ph + 16) + "\" text-anchor=\"middle\">" +
               tick(xv) + "</text>\n";
        const std::string label = spec.log_y ? "1e" + tick(yv) : tick(yv);
        out += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(yv) + 4) + "\" text-anchor=\"end\">" + label +
               "</text>\n";
        out += "<line x1=\"" + num(kLeft) + "\" x2=\"" + num(kLeft + pw) + "\" y1=\"" + num(py(yv)) + "\" y2=\"" +
               num(py(yv)) + "\" stroke=\"#ddd\"/>\n";
    }
    out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 12) + "\" text-anchor=\"middle\">" +
           escape(spec.x_label) + "</text>\n";
    out += "<text x=\"16\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           num(kTop + ph / 2) + ")\">" + escape(spec.y_label) + "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kColors[s % (sizeof kColors / sizeof kColors[0])];
        std::string points;
        for (std::size_t k = 0; k < series[s].x.size(); ++k) {
            const double x = series[s].x[k];
            const double y = series[s].y[k];
            if (!std::isfinite(x) || !std::isfinite(y) || (spec.log_y && !(y > 0.0))) continue;
            points += num(px(x)) + "," + num(py(ty(y))) + " ";
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
               points + "\"/>\n";
        const double ly = kTop + 14.0 * (s + 1);
        out += "<line x1=\"" + num(kWidth - kRight + 10) + "\" x2=\"" + num(kWidth - kRight + 30) + "\" y1=\"" +
               num(ly - 4) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + num(kWidth - kRight + 34) + "\" y=\"" + num(ly) + "\">" + escape(series[s].name) +
               "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

void write_svg_plot(const std::string& path, const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    write_text(path, render_svg_plot(spec, series));
}

}  // namespace densiflow
