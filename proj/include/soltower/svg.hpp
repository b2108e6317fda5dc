#pragma once

// Deterministic SVG rendering of a decomposition: input cubes, the grid,
// removed strips, the boxes of U, and the retained sub-cubes, projected to
// two chosen axes.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include "soltower/decompose.hpp"

namespace soltower {

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

}  // namespace detail

// axes are 1-based; for dim == 2 the default projection (1,2) applies.
inline std::string plot_decomposition_svg(const DecompositionResult& res, int ax1 = 1,
                                          int ax2 = 2) {
    if (res.boxes.empty()) throw std::invalid_argument("plot: empty decomposition");
    if (ax1 < 1 || ax2 < 1 || ax1 > res.dim || ax2 > res.dim || ax1 == ax2)
        throw std::invalid_argument("plot: bad projection axes");
    const int a = ax1 - 1, b = ax2 - 1;

    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    bool first = true;
    for (const auto& c : res.cubes) {
        Box bx = c.box();
        double cx0 = bx.iv[a].lo.get_d(), cx1 = bx.iv[a].hi.get_d();
        double cy0 = bx.iv[b].lo.get_d(), cy1 = bx.iv[b].hi.get_d();
        if (first || cx0 < x0) x0 = cx0;
        if (first || cx1 > x1) x1 = cx1;
        if (first || cy0 < y0) y0 = cy0;
        if (first || cy1 > y1) y1 = cy1;
        first = false;
    }
    const double margin = 0.75, S = 100.0;
    x0 -= margin; y0 -= margin; x1 += margin; y1 += margin;
    auto X = [&](double v) { return (v - x0) * S; };
    auto Y = [&](double v) { return (y1 - v) * S; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << detail::fmt((x1 - x0) * S)
       << " " << detail::fmt((y1 - y0) * S) << "\">\n";

    // lattice grid (cell walls at half-integers)
    for (double v = std::floor(x0) - 0.5; v <= x1; v += 1.0) {
        if (v < x0) continue;
        os << "<line class=\"grid\" x1=\"" << detail::fmt(X(v)) << "\" y1=\"" << detail::fmt(Y(y0))
           << "\" x2=\"" << detail::fmt(X(v)) << "\" y2=\"" << detail::fmt(Y(y1))
           << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    }
    for (double v = std::floor(y0) - 0.5; v <= y1; v += 1.0) {
        if (v < y0) continue;
        os << "<line class=\"grid\" x1=\"" << detail::fmt(X(x0)) << "\" y1=\"" << detail::fmt(Y(v))
           << "\" x2=\"" << detail::fmt(X(x1)) << "\" y2=\"" << detail::fmt(Y(v))
           << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    }

    // removed strips on the projected axes (thick black, minimum visible width)
    for (const auto& s : res.strips) {
        if (s.axis != a && s.axis != b) continue;
        double c = s.coord.get_d();
        double w = std::max(2 * s.delta.get_d() * S, 1.5);
        if (s.axis == a) {
            double lo = y0, hi = y1;
            if (!s.scope.empty()) {
                lo = s.scope[b] - 0.5;
                hi = s.scope[b] + 0.5;
            }
            os << "<rect class=\"strip\" x=\"" << detail::fmt(X(c) - w / 2) << "\" y=\""
               << detail::fmt(Y(hi)) << "\" width=\"" << detail::fmt(w) << "\" height=\""
               << detail::fmt((hi - lo) * S) << "\" fill=\"#000000\"/>\n";
        } else {
            double lo = x0, hi = x1;
            if (!s.scope.empty()) {
                lo = s.scope[a] - 0.5;
                hi = s.scope[a] + 0.5;
            }
            os << "<rect class=\"strip\" x=\"" << detail::fmt(X(lo)) << "\" y=\""
               << detail::fmt(Y(c) - w / 2) << "\" width=\"" << detail::fmt((hi - lo) * S)
               << "\" height=\"" << detail::fmt(w) << "\" fill=\"#000000\"/>\n";
        }
    }

    // boxes of U
    for (const auto& leaf : res.boxes) {
        double bx0 = leaf.box.iv[a].lo.get_d(), bx1 = leaf.box.iv[a].hi.get_d();
        double by0 = leaf.box.iv[b].lo.get_d(), by1 = leaf.box.iv[b].hi.get_d();
        os << "<rect class=\"ubox\" x=\"" << detail::fmt(X(bx0)) << "\" y=\"" << detail::fmt(Y(by1))
           << "\" width=\"" << detail::fmt((bx1 - bx0) * S) << "\" height=\""
           << detail::fmt((by1 - by0) * S) << "\" fill=\"#7aa8d4\" fill-opacity=\"0.55\"/>\n";
    }

    // input cubes and retained sub-cubes
    for (size_t j = 0; j < res.cubes.size(); ++j) {
        Box bx = res.cubes[j].box();
        os << "<rect class=\"cube\" x=\"" << detail::fmt(X(bx.iv[a].lo.get_d())) << "\" y=\""
           << detail::fmt(Y(bx.iv[b].hi.get_d())) << "\" width=\""
           << detail::fmt(bx.iv[a].length().get_d() * S) << "\" height=\""
           << detail::fmt(bx.iv[b].length().get_d() * S)
           << "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"2\"/>\n";
        Box sb = res.hosts[j].sub.sub_box(res.cubes[j]);
        os << "<rect class=\"retained\" x=\"" << detail::fmt(X(sb.iv[a].lo.get_d())) << "\" y=\""
           << detail::fmt(Y(sb.iv[b].hi.get_d())) << "\" width=\""
           << detail::fmt(sb.iv[a].length().get_d() * S) << "\" height=\""
           << detail::fmt(sb.iv[b].length().get_d() * S)
           << "\" fill=\"none\" stroke=\"#b05030\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace soltower
