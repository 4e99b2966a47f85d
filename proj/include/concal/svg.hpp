#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "concal/calibration.hpp"
#include "concal/types.hpp"

namespace concal {

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string palette(std::size_t i) {
    static const char* colours[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colours[i % 10];
}

}  // namespace detail

// Consensus score against G, one polyline per lambda, calibrated cell circled.
inline void write_calibration_svg(std::ostream& out, const ScoreGrid& grid, const Calibration& cal,
                                  ScoreKind kind = ScoreKind::consensus) {
    const double W = 640, H = 400, left = 60, right = 130, top = 30, bottom = 50;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& c : grid.cells) {
        const double v = grid.value(c, kind);
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi == lo) hi = lo + 1.0;
    const int gmin = *std::min_element(grid.Gs.begin(), grid.Gs.end());
    const int gmax = std::max(*std::max_element(grid.Gs.begin(), grid.Gs.end()), gmin + 1);
    auto X = [&](double g) { return left + (g - gmin) / (gmax - gmin) * (W - left - right); };
    auto Y = [&](double v) { return top + (hi - v) / (hi - lo) * (H - top - bottom); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
        << "\" stroke=\"black\"/>\n";
    for (int g : grid.Gs)
        out << "<text x=\"" << detail::fmt(X(g)) << "\" y=\"" << H - bottom + 16
            << "\" font-size=\"10\" text-anchor=\"middle\">" << g << "</text>\n";
    out << "<text x=\"" << detail::fmt(left - 6) << "\" y=\"" << detail::fmt(Y(hi) + 4)
        << "\" font-size=\"10\" text-anchor=\"end\">" << detail::fmt(hi) << "</text>\n";
    out << "<text x=\"" << detail::fmt(left - 6) << "\" y=\"" << detail::fmt(Y(lo) + 4)
        << "\" font-size=\"10\" text-anchor=\"end\">" << detail::fmt(lo) << "</text>\n";
    out << "<text x=\"" << detail::fmt((left + W - right) / 2) << "\" y=\"" << H - 12
        << "\" font-size=\"12\" text-anchor=\"middle\">G</text>\n";
    out << "<text x=\"14\" y=\"" << detail::fmt((top + H - bottom) / 2) << "\" font-size=\"12\" transform=\"rotate(-90 14 "
        << detail::fmt((top + H - bottom) / 2) << ")\" text-anchor=\"middle\">" << to_string(kind) << "</text>\n";

    for (std::size_t l = 0; l < grid.lambdas.size(); ++l) {
        std::string pts;
        for (std::size_t g = 0; g < grid.Gs.size(); ++g) {
            const double v = grid.value(grid.at(l, g), kind);
            if (!std::isfinite(v)) continue;
            pts += detail::fmt(X(grid.Gs[g])) + "," + detail::fmt(Y(v)) + " ";
        }
        out << "<polyline fill=\"none\" stroke=\"" << detail::palette(l) << "\" points=\"" << pts << "\"/>\n";
        out << "<text x=\"" << W - right + 10 << "\" y=\"" << top + 14 * static_cast<double>(l) << "\" font-size=\"10\" fill=\""
            << detail::palette(l) << "\">lambda=" << detail::fmt(grid.lambdas[l]) << "</text>\n";
    }
    if (cal.status == CalibrationStatus::ok)
        out << "<circle cx=\"" << detail::fmt(X(cal.G)) << "\" cy=\"" << detail::fmt(Y(cal.score))
            << "\" r=\"5\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
    out << "</svg>\n";
}

// Consensus matrix as a grey-scale heatmap (black = 1), items ordered by cluster.
inline void write_heatmap_svg(std::ostream& out, const Eigen::MatrixXd& gamma, const ClusterAssignment& z) {
    const int n = static_cast<int>(gamma.rows());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return z.labels[static_cast<std::size_t>(a)] < z.labels[static_cast<std::size_t>(b)];
    });
    const double cell = std::max(1.0, 600.0 / n);
    const double size = cell * n;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(size) << "\" height=\"" << detail::fmt(size)
        << "\" shape-rendering=\"crispEdges\">\n";
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double v = std::clamp(gamma(order[static_cast<std::size_t>(r)], order[static_cast<std::size_t>(c)]), 0.0, 1.0);
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
            out << "<rect x=\"" << detail::fmt(c * cell) << "\" y=\"" << detail::fmt(r * cell) << "\" width=\""
                << detail::fmt(cell) << "\" height=\"" << detail::fmt(cell) << "\" fill=\"rgb(" << shade << ',' << shade
                << ',' << shade << ")\"/>\n";
        }
    out << "</svg>\n";
}

}  // namespace concal
