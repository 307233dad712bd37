#include "lyapspec/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lyapspec/io.hpp"

namespace lyap {

namespace {

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string fmt_coord(double x) {
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << x;
    return os.str();
}

std::string fmt_tick(double x) {
    if (x == 0.0) return "0";
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// tick spacing on the 1-2-5 ladder giving 4..9 intervals
double tick_step(double span) {
    if (!(span > 0.0)) return 1.0;
    double raw = span / 6.0;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * mult >= raw) return mag * mult;
    }
    return mag * 10.0;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string xlabel, std::string ylabel)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

void SvgPlot::add_series(SvgSeries series) { series_.push_back(std::move(series)); }

void SvgPlot::add_vline(double x, std::string color, std::string label) {
    guides_.push_back({true, x, std::move(color), std::move(label)});
}

void SvgPlot::add_hline(double y, std::string color, std::string label) {
    guides_.push_back({false, y, std::move(color), std::move(label)});
}

std::string SvgPlot::render(int width, int height) const {
    const double ml = 64, mr = 16, mt = 36, mb = 48;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
    bool seen = false;
    auto absorb = [&](double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) return;
        if (!seen) {
            x_lo = x_hi = x;
            y_lo = y_hi = y;
            seen = true;
        } else {
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    };
    for (const SvgSeries& s : series_)
        for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) absorb(s.x[i], s.y[i]);
    for (const SvgGuide& g : guides_) {
        if (!std::isfinite(g.value)) continue;
        if (g.vertical) absorb(g.value, seen ? y_lo : 0.0);
        else absorb(seen ? x_lo : 0.0, g.value);
    }
    if (x_hi - x_lo < 1e-12) { x_lo -= 0.5; x_hi += 0.5; }
    if (y_hi - y_lo < 1e-12) { y_lo -= 0.5; y_hi += 0.5; }
    double xpad = 0.04 * (x_hi - x_lo), ypad = 0.06 * (y_hi - y_lo);
    x_lo -= xpad; x_hi += xpad;
    y_lo -= ypad; y_hi += ypad;

    auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto py = [&](double y) { return mt + (y_hi - y) / (y_hi - y_lo) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height
        << "\" fill=\"#ffffff\"/>\n";

    // grid + ticks
    double xs = tick_step(x_hi - x_lo), ys = tick_step(y_hi - y_lo);
    svg << "<g font-family=\"monospace\" font-size=\"11\" fill=\"#444444\">\n";
    for (double t = std::ceil(x_lo / xs) * xs; t <= x_hi + 1e-12 * xs; t += xs) {
        double X = px(t);
        svg << "<line x1=\"" << fmt_coord(X) << "\" y1=\"" << fmt_coord(mt) << "\" x2=\""
            << fmt_coord(X) << "\" y2=\"" << fmt_coord(mt + ph)
            << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt_coord(X) << "\" y=\"" << fmt_coord(mt + ph + 16)
            << "\" text-anchor=\"middle\">" << fmt_tick(std::fabs(t) < 1e-12 * xs ? 0.0 : t)
            << "</text>\n";
    }
    for (double t = std::ceil(y_lo / ys) * ys; t <= y_hi + 1e-12 * ys; t += ys) {
        double Y = py(t);
        svg << "<line x1=\"" << fmt_coord(ml) << "\" y1=\"" << fmt_coord(Y) << "\" x2=\""
            << fmt_coord(ml + pw) << "\" y2=\"" << fmt_coord(Y)
            << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt_coord(ml - 6) << "\" y=\"" << fmt_coord(Y + 4)
            << "\" text-anchor=\"end\">" << fmt_tick(std::fabs(t) < 1e-12 * ys ? 0.0 : t)
            << "</text>\n";
    }
    svg << "</g>\n";

    // frame
    svg << "<rect x=\"" << fmt_coord(ml) << "\" y=\"" << fmt_coord(mt) << "\" width=\""
        << fmt_coord(pw) << "\" height=\"" << fmt_coord(ph)
        << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    // guides
    for (const SvgGuide& g : guides_) {
        if (!std::isfinite(g.value)) continue;
        double X1, Y1, X2, Y2;
        if (g.vertical) {
            X1 = X2 = px(g.value);
            Y1 = mt;
            Y2 = mt + ph;
        } else {
            Y1 = Y2 = py(g.value);
            X1 = ml;
            X2 = ml + pw;
        }
        svg << "<line x1=\"" << fmt_coord(X1) << "\" y1=\"" << fmt_coord(Y1) << "\" x2=\""
            << fmt_coord(X2) << "\" y2=\"" << fmt_coord(Y2) << "\" stroke=\"" << g.color
            << "\" stroke-width=\"1\" stroke-dasharray=\"5,4\"/>\n";
        if (!g.label.empty()) {
            double tx = g.vertical ? X1 + 4 : ml + pw - 4;
            double ty = g.vertical ? mt + 14 : Y1 - 4;
            svg << "<text x=\"" << fmt_coord(tx) << "\" y=\"" << fmt_coord(ty) << "\""
                << (g.vertical ? "" : " text-anchor=\"end\"")
                << " font-family=\"monospace\" font-size=\"11\" fill=\"" << g.color << "\">"
                << escape_xml(g.label) << "</text>\n";
        }
    }

    // series as polyline segments split on non-finite samples
    for (const SvgSeries& s : series_) {
        std::string points;
        auto flush = [&]() {
            if (points.empty()) return;
            svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\""
                << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << points
                << "\"/>\n";
            points.clear();
        };
        for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                flush();
                continue;
            }
            if (!points.empty()) points.push_back(' ');
            points += fmt_coord(px(s.x[i])) + "," + fmt_coord(py(s.y[i]));
        }
        flush();
    }

    // legend
    double ly = mt + 14;
    for (const SvgSeries& s : series_) {
        if (s.label.empty()) continue;
        svg << "<line x1=\"" << fmt_coord(ml + 10) << "\" y1=\"" << fmt_coord(ly - 4)
            << "\" x2=\"" << fmt_coord(ml + 34) << "\" y2=\"" << fmt_coord(ly - 4)
            << "\" stroke=\"" << s.color << "\" stroke-width=\"1.6\""
            << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        svg << "<text x=\"" << fmt_coord(ml + 40) << "\" y=\"" << fmt_coord(ly)
            << "\" font-family=\"monospace\" font-size=\"12\" fill=\"#222222\">"
            << escape_xml(s.label) << "</text>\n";
        ly += 16;
    }

    // titles
    svg << "<text x=\"" << fmt_coord(ml + pw / 2) << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-family=\"monospace\" font-size=\"14\" fill=\"#111111\">" << escape_xml(title_)
        << "</text>\n";
    svg << "<text x=\"" << fmt_coord(ml + pw / 2) << "\" y=\"" << fmt_coord(mt + ph + 36)
        << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" "
        << "fill=\"#222222\">" << escape_xml(xlabel_) << "</text>\n";
    svg << "<text x=\"14\" y=\"" << fmt_coord(mt + ph / 2)
        << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" "
        << "fill=\"#222222\" transform=\"rotate(-90 14 " << fmt_coord(mt + ph / 2) << ")\">"
        << escape_xml(ylabel_) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace lyap
