#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "propsurro/common.hpp"

namespace propsurro {

// Minimal self-contained SVG rendering for the two figure families the tool
// emits: density-vs-temperature curves with shaded 2-sigma bands, and the
// cv heat map. Output carries no timestamps or other run metadata, so a rerun
// with the same inputs is byte-identical.

namespace svg_detail {

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

struct Frame {
    double width = 800, height = 500;
    double left = 70, right = 30, top = 40, bottom = 55;
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;

    double px(double x) const {
        return left + (x - x_lo) / (x_hi - x_lo) * (width - left - right);
    }
    double py(double y) const {
        return height - bottom - (y - y_lo) / (y_hi - y_lo) * (height - top - bottom);
    }
};

inline void expand(double& lo, double& hi, const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::isfinite(v(i))) {
            lo = std::min(lo, v(i));
            hi = std::max(hi, v(i));
        }
    }
}

inline void open_svg(std::ofstream& out, const Frame& f, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\""
        << f.height << "\" viewBox=\"0 0 " << f.width << " " << f.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << f.width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
}

inline void draw_axes(std::ofstream& out, const Frame& f, const std::string& x_label,
                      const std::string& y_label, int ticks = 6) {
    out << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\""
        << f.width - f.left - f.right << "\" height=\"" << f.height - f.top - f.bottom
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i < ticks; ++i) {
        const double t = static_cast<double>(i) / (ticks - 1);
        const double xv = f.x_lo + t * (f.x_hi - f.x_lo);
        const double yv = f.y_lo + t * (f.y_hi - f.y_lo);
        const double xp = f.px(xv), yp = f.py(yv);
        out << "<line x1=\"" << xp << "\" y1=\"" << f.height - f.bottom << "\" x2=\"" << xp
            << "\" y2=\"" << f.height - f.bottom + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << xp << "\" y=\"" << f.height - f.bottom + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(xv)
            << "</text>\n";
        out << "<line x1=\"" << f.left - 5 << "\" y1=\"" << yp << "\" x2=\"" << f.left
            << "\" y2=\"" << yp << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << f.left - 8 << "\" y=\"" << yp + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(yv)
            << "</text>\n";
    }
    out << "<text x=\"" << (f.left + f.width - f.right) / 2 << "\" y=\"" << f.height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
        << "</text>\n";
    out << "<text x=\"18\" y=\"" << (f.top + f.height - f.bottom) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << (f.top + f.height - f.bottom) / 2 << ")\">" << y_label
        << "</text>\n";
}

// simple perceptual ramp, dark blue -> teal -> yellow
inline std::string colormap(double t) {
    struct Stop { double t; int r, g, b; };
    static const Stop stops[] = {{0.0, 68, 1, 84},
                                 {0.25, 59, 82, 139},
                                 {0.5, 33, 145, 140},
                                 {0.75, 94, 201, 98},
                                 {1.0, 253, 231, 37}};
    t = std::clamp(t, 0.0, 1.0);
    const Stop* a = &stops[0];
    const Stop* b = &stops[4];
    for (int i = 0; i < 4; ++i)
        if (t >= stops[i].t && t <= stops[i + 1].t) { a = &stops[i]; b = &stops[i + 1]; break; }
    const double u = (b->t == a->t) ? 0.0 : (t - a->t) / (b->t - a->t);
    char buf[10];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(std::lround(a->r + u * (b->r - a->r))),
                  static_cast<int>(std::lround(a->g + u * (b->g - a->g))),
                  static_cast<int>(std::lround(a->b + u * (b->b - a->b))));
    return buf;
}

}  // namespace svg_detail

// ------------------------------- band plot -------------------------------

struct SvgSeries {
    Vec x;
    Vec mean;
    Vec lo;   // lower band edge (e.g. mean - 2 sd)
    Vec hi;   // upper band edge
    std::string color = "#1f77b4";
    std::string label;
};

struct SvgPoints {
    Vec x;
    Vec y;
    std::string color = "#d62728";
    std::string label;
};

inline void svg_band_plot(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<SvgSeries>& series,
                          const std::vector<SvgPoints>& points = {}) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write SVG file '" + path + "'");
    svg_detail::Frame f;
    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (const auto& s : series) {
        svg_detail::expand(x_lo, x_hi, s.x);
        svg_detail::expand(y_lo, y_hi, s.lo);
        svg_detail::expand(y_lo, y_hi, s.hi);
        svg_detail::expand(y_lo, y_hi, s.mean);
    }
    for (const auto& p : points) {
        svg_detail::expand(x_lo, x_hi, p.x);
        svg_detail::expand(y_lo, y_hi, p.y);
    }
    if (x_lo > x_hi || y_lo > y_hi) { x_lo = 0; x_hi = 1; y_lo = 0; y_hi = 1; }
    const double pad = 0.05 * (y_hi - y_lo + 1e-12);
    f.x_lo = x_lo; f.x_hi = x_hi; f.y_lo = y_lo - pad; f.y_hi = y_hi + pad;
    if (f.x_lo == f.x_hi) { f.x_lo -= 1; f.x_hi += 1; }
    if (f.y_lo == f.y_hi) { f.y_lo -= 1; f.y_hi += 1; }

    svg_detail::open_svg(out, f, title);
    svg_detail::draw_axes(out, f, x_label, y_label);
    for (const auto& s : series) {
        if (s.x.size() != s.mean.size() || s.x.size() != s.lo.size() || s.x.size() != s.hi.size())
            throw DimensionMismatch("svg_band_plot: series vectors disagree");
        out << "<path d=\"M";
        for (Eigen::Index i = 0; i < s.x.size(); ++i)
            out << " " << svg_detail::num(f.px(s.x(i))) << " " << svg_detail::num(f.py(s.lo(i)));
        for (Eigen::Index i = s.x.size() - 1; i >= 0; --i)
            out << " L " << svg_detail::num(f.px(s.x(i))) << " " << svg_detail::num(f.py(s.hi(i)));
        out << " Z\" fill=\"" << s.color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\" points=\"";
        for (Eigen::Index i = 0; i < s.x.size(); ++i)
            out << svg_detail::num(f.px(s.x(i))) << "," << svg_detail::num(f.py(s.mean(i))) << " ";
        out << "\"/>\n";
    }
    for (const auto& p : points) {
        if (p.x.size() != p.y.size()) throw DimensionMismatch("svg_band_plot: point vectors disagree");
        for (Eigen::Index i = 0; i < p.x.size(); ++i)
            out << "<circle cx=\"" << svg_detail::num(f.px(p.x(i))) << "\" cy=\""
                << svg_detail::num(f.py(p.y(i))) << "\" r=\"3\" fill=\"" << p.color << "\"/>\n";
    }
    // legend
    double ly = f.top + 14;
    for (const auto& s : series) {
        if (s.label.empty()) continue;
        out << "<line x1=\"" << f.left + 10 << "\" y1=\"" << ly << "\" x2=\"" << f.left + 34
            << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << f.left + 40 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
        ly += 18;
    }
    for (const auto& p : points) {
        if (p.label.empty()) continue;
        out << "<circle cx=\"" << f.left + 22 << "\" cy=\"" << ly << "\" r=\"3\" fill=\""
            << p.color << "\"/>\n"
            << "<text x=\"" << f.left + 40 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << p.label << "</text>\n";
        ly += 18;
    }
    out << "</svg>\n";
}

// ------------------------------- heat map -------------------------------

// Grid values(i, j) over y_nodes[i] x x_nodes[j]; x optionally positioned on
// a log10 axis. Invalid cells are drawn hatched gray.
inline void svg_heat_map(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const Vec& x_nodes, const Vec& y_nodes, const Mat& values,
                         const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& valid,
                         bool log_x = false) {
    if (values.rows() != y_nodes.size() || values.cols() != x_nodes.size())
        throw DimensionMismatch("svg_heat_map: grid shape");
    std::ofstream out(path);
    if (!out) throw Error("cannot write SVG file '" + path + "'");

    Vec xs = x_nodes;
    if (log_x)
        for (Eigen::Index i = 0; i < xs.size(); ++i) xs(i) = std::log10(xs(i));

    svg_detail::Frame f;
    f.right = 90;  // room for the color bar
    f.x_lo = xs.minCoeff(); f.x_hi = xs.maxCoeff();
    f.y_lo = y_nodes.minCoeff(); f.y_hi = y_nodes.maxCoeff();

    double v_lo = 1e300, v_hi = -1e300;
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = 0; j < values.cols(); ++j)
            if (valid(i, j)) { v_lo = std::min(v_lo, values(i, j)); v_hi = std::max(v_hi, values(i, j)); }
    if (v_lo > v_hi) { v_lo = 0; v_hi = 1; }
    if (v_lo == v_hi) v_hi = v_lo + 1;

    svg_detail::open_svg(out, f, title);
    out << "<defs><pattern id=\"invalid\" width=\"6\" height=\"6\" "
           "patternUnits=\"userSpaceOnUse\"><rect width=\"6\" height=\"6\" fill=\"#e0e0e0\"/>"
           "<line x1=\"0\" y1=\"6\" x2=\"6\" y2=\"0\" stroke=\"#909090\"/></pattern></defs>\n";

    auto edge = [](const Vec& v, Eigen::Index i) {
        if (i <= 0) return v(0) - (v.size() > 1 ? (v(1) - v(0)) / 2 : 0.5);
        if (i >= v.size()) return v(v.size() - 1) + (v.size() > 1 ? (v(v.size() - 1) - v(v.size() - 2)) / 2 : 0.5);
        return (v(i - 1) + v(i)) / 2;
    };
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            const double x0 = f.px(edge(xs, j)), x1 = f.px(edge(xs, j + 1));
            const double y0 = f.py(edge(y_nodes, i)), y1 = f.py(edge(y_nodes, i + 1));
            std::string fill = valid(i, j)
                                   ? svg_detail::colormap((values(i, j) - v_lo) / (v_hi - v_lo))
                                   : "url(#invalid)";
            out << "<rect x=\"" << svg_detail::num(std::min(x0, x1)) << "\" y=\""
                << svg_detail::num(std::min(y0, y1)) << "\" width=\""
                << svg_detail::num(std::abs(x1 - x0)) << "\" height=\""
                << svg_detail::num(std::abs(y1 - y0)) << "\" fill=\"" << fill << "\"/>\n";
        }
    svg_detail::draw_axes(out, f, x_label, y_label);

    // color bar
    const double bx = f.width - 70, bw = 16, by = f.top, bh = f.height - f.top - f.bottom;
    for (int i = 0; i < 64; ++i) {
        const double t0 = static_cast<double>(i) / 64, t1 = static_cast<double>(i + 1) / 64;
        out << "<rect x=\"" << bx << "\" y=\"" << by + (1 - t1) * bh << "\" width=\"" << bw
            << "\" height=\"" << bh / 64 + 0.5 << "\" fill=\"" << svg_detail::colormap((t0 + t1) / 2)
            << "\"/>\n";
    }
    out << "<rect x=\"" << bx << "\" y=\"" << by << "\" width=\"" << bw << "\" height=\"" << bh
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << bx + bw + 4 << "\" y=\"" << by + bh + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << svg_detail::num(v_lo) << "</text>\n";
    out << "<text x=\"" << bx + bw + 4 << "\" y=\"" << by + 8
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << svg_detail::num(v_hi) << "</text>\n";
    out << "</svg>\n";
}

}  // namespace propsurro
