#include "desn/svg.hpp"

#include "desn/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace desn {

namespace {

constexpr std::array<const char*, 6> palette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
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

/// Tick step from the 1-2-5 sequence giving roughly `target` intervals.
double nice_step(double span, int target) {
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    const double f = norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0;
    return f * mag;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finalize() {
        if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
        if (hi - lo < 1e-12) {
            const double pad = std::max(std::abs(lo) * 0.1, 1e-3);
            lo -= pad;
            hi += pad;
        }
    }
};

}  // namespace

std::string line_chart_svg(const ChartSpec& spec, const std::vector<ChartSeries>& series) {
    Range xr, yr;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || (!s.error.empty() && s.error.size() != s.y.size())) {
            throw data_error(fmt::format("chart series '{}' has mismatched lengths", s.name));
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xr.include(s.x[i]);
            const double e = s.error.empty() ? 0.0 : s.error[i];
            yr.include(s.y[i] - e);
            yr.include(s.y[i] + e);
        }
    }
    xr.finalize();
    yr.finalize();
    const double ystep = nice_step(yr.hi - yr.lo, 6);
    yr.lo = std::floor(yr.lo / ystep) * ystep;
    yr.hi = std::ceil(yr.hi / ystep) * ystep;
    const double xstep = nice_step(xr.hi - xr.lo, 8);

    const double left = 70, right = 160, top = 40, bottom = 60;
    const double pw = spec.width - left - right;
    const double ph = spec.height - top - bottom;
    const auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    const auto py = [&](double y) { return top + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

    std::string out;
    out += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n",
        spec.width, spec.height, spec.width, spec.height);
    out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", spec.width, spec.height);
    out += fmt::format("<text x=\"{:.2f}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                       left + pw / 2, escape(spec.title));

    // grid and ticks
    for (double y = yr.lo; y <= yr.hi + ystep * 1e-9; y += ystep) {
        out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#e0e0e0\"/>\n", left,
                           py(y), left + pw, py(y));
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.4g}</text>\n", left - 6,
                           py(y) + 4, y);
    }
    for (double x = std::ceil(xr.lo / xstep) * xstep; x <= xr.hi + xstep * 1e-9; x += xstep) {
        out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#333\"/>\n", px(x),
                           top + ph, px(x), top + ph + 5);
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.4g}</text>\n", px(x),
                           top + ph + 19, x);
    }
    out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" "
                       "stroke=\"#333\"/>\n",
                       left, top, pw, ph);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2,
                       spec.height - 15.0, escape(spec.x_label));
    out += fmt::format("<text x=\"18\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2f})\">{}"
                       "</text>\n",
                       top + ph / 2, top + ph / 2, escape(spec.y_label));

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = palette[si % palette.size()];
        std::string points;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            points += fmt::format("{}{:.2f},{:.2f}", points.empty() ? "" : " ", px(s.x[i]), py(s.y[i]));
        }
        out += fmt::format("<g class=\"series\" data-name=\"{}\">\n", escape(s.name));
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", color,
                           points);
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            if (!s.error.empty() && s.error[i] > 0.0) {
                const double x = px(s.x[i]);
                const double y0 = py(s.y[i] - s.error[i]);
                const double y1 = py(s.y[i] + s.error[i]);
                out += fmt::format(
                    "<path class=\"errorbar\" d=\"M{0:.2f},{1:.2f}V{2:.2f}M{3:.2f},{1:.2f}H{4:.2f}M{3:.2f},{2:.2f}"
                    "H{4:.2f}\" stroke=\"{5}\"/>\n",
                    x, y0, y1, x - 4, x + 4, color);
            }
            out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3.5\" fill=\"{}\"/>\n", px(s.x[i]),
                               py(s.y[i]), color);
        }
        out += "</g>\n";
        const double ly = top + 10 + 20.0 * static_cast<double>(si);
        out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
                           "stroke-width=\"2\"/>\n",
                           left + pw + 15, ly, left + pw + 40, ly, color);
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", left + pw + 46, ly + 4, escape(s.name));
    }
    out += "</svg>\n";
    return out;
}

}  // namespace desn
