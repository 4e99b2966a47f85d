#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "concal/types.hpp"

namespace concal {

// Score value for cells where a score is undefined. Never selected by calibration.
inline constexpr double kScoreSentinel = -std::numeric_limits<double>::infinity();

inline bool is_sentinel(double v) { return !std::isfinite(v); }

// Co-membership (X) and co-sampling (N) totals over within- and between-cluster pairs.
struct WithinBetweenTallies {
    std::int64_t within_comembers = 0;   // X_w
    std::int64_t between_comembers = 0;  // X_b
    std::int64_t within_pairs = 0;       // N_w
    std::int64_t between_pairs = 0;      // N_b
};

inline WithinBetweenTallies tally(const CountMatrix& C, const CountMatrix& H, const ClusterAssignment& Z) {
    const Eigen::Index n = H.rows();
    if (C.rows() != n || C.cols() != n || H.cols() != n || Z.n() != n)
        throw DimensionError("tally: C, H and Z do not conform");
    WithinBetweenTallies t;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int zi = Z.labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (zi == Z.labels[static_cast<std::size_t>(j)]) {
                t.within_comembers += C(i, j);
                t.within_pairs += H(i, j);
            } else {
                t.between_comembers += C(i, j);
                t.between_pairs += H(i, j);
            }
        }
    }
    return t;
}

// Two-proportion z statistic comparing within- and between-cluster co-membership
// rates. Returns the sentinel when either group is empty or the pooled rate is 0 or 1.
inline double consensus_score(const WithinBetweenTallies& t) {
    const auto nw = static_cast<double>(t.within_pairs);
    const auto nb = static_cast<double>(t.between_pairs);
    if (t.within_pairs <= 0 || t.between_pairs <= 0) return kScoreSentinel;
    const std::int64_t x = t.within_comembers + t.between_comembers;
    if (x <= 0 || x >= t.within_pairs + t.between_pairs) return kScoreSentinel;
    const double pw = static_cast<double>(t.within_comembers) / nw;
    const double pb = static_cast<double>(t.between_comembers) / nb;
    const double p0 = static_cast<double>(x) / (nw + nb);
    return (pw - pb) / std::sqrt(p0 * (1.0 - p0) * (1.0 / nw + 1.0 / nb));
}

// Sorted off-diagonal consensus values; CDF(x) = #{v <= x} / N.
class EmpiricalCDF {
public:
    explicit EmpiricalCDF(const Eigen::MatrixXd& gamma) {
        const Eigen::Index n = gamma.rows();
        values_.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) values_.push_back(gamma(i, j));
        std::sort(values_.begin(), values_.end());
    }

    double operator()(double x) const {
        if (values_.empty()) return 0.0;
        const auto it = std::upper_bound(values_.begin(), values_.end(), x);
        return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
    }

    // Integral of the CDF over [0, 1]; equals 1 - mean for values in [0, 1].
    double area() const {
        if (values_.empty()) return 0.0;
        double sum = 0.0;
        for (double v : values_) sum += v;
        return 1.0 - sum / static_cast<double>(values_.size());
    }

    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

struct CdfScores {
    double area = 0.0;  // a_G
    double pac = 0.0;
};

inline CdfScores cdf_scores(const Eigen::MatrixXd& gamma, double x1 = 0.1, double x2 = 0.9) {
    const EmpiricalCDF cdf(gamma);
    return {cdf.area(), cdf(x2) - cdf(x1)};
}

// Delta_2 = a_2, Delta_G = (a_G - a_{G-1}) / a_{G-1}. `areas[i]` belongs to G = 2 + i.
inline std::vector<double> delta_score(const std::vector<double>& areas) {
    std::vector<double> out(areas.size(), kScoreSentinel);
    for (std::size_t i = 0; i < areas.size(); ++i) {
        if (i == 0)
            out[i] = areas[0];
        else if (areas[i - 1] != 0.0)
            out[i] = (areas[i] - areas[i - 1]) / areas[i - 1];
    }
    return out;
}

// Mean silhouette width. Items alone in their cluster contribute 0, as do items
// whose within and nearest-other distances are both 0.
inline double silhouette_score(const DistanceMatrix& dist, const ClusterAssignment& Z) {
    const int n = dist.n();
    if (Z.n() != n) throw DimensionError("silhouette: assignment length does not match distances");
    if (Z.num_clusters < 2) throw InputError("silhouette needs at least 2 clusters");
    const auto G = static_cast<std::size_t>(Z.num_clusters);
    std::vector<int> sizes(G, 0);
    for (int l : Z.labels) ++sizes[static_cast<std::size_t>(l - 1)];

    double total = 0.0;
    std::vector<double> sums(G);
    for (int i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(Z.labels[static_cast<std::size_t>(i)] - 1);
        if (sizes[own] <= 1) continue;
        std::fill(sums.begin(), sums.end(), 0.0);
        for (int j = 0; j < n; ++j)
            if (j != i) sums[static_cast<std::size_t>(Z.labels[static_cast<std::size_t>(j)] - 1)] += dist(i, j);
        const double a = sums[own] / (sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < G; ++g)
            if (g != own && sizes[g] > 0) b = std::min(b, sums[g] / sizes[g]);
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / n;
}

enum class ScoreKind { consensus, delta, pac, silhouette };

inline std::string to_string(ScoreKind k) {
    switch (k) {
        case ScoreKind::consensus: return "consensus";
        case ScoreKind::delta: return "delta";
        case ScoreKind::pac: return "pac";
        case ScoreKind::silhouette: return "silhouette";
    }
    return "?";
}

inline ScoreKind parse_score_kind(const std::string& s) {
    if (s == "consensus") return ScoreKind::consensus;
    if (s == "delta") return ScoreKind::delta;
    if (s == "pac") return ScoreKind::pac;
    if (s == "silhouette") return ScoreKind::silhouette;
    throw InputError("unknown score '" + s + "'");
}

struct ScoreCell {
    double lambda = 0.0;
    int G = 0;
    WithinBetweenTallies tallies;
    double consensus = kScoreSentinel;
    double area = 0.0;
    double delta = kScoreSentinel;
    double pac = 0.0;
    double silhouette = std::numeric_limits<double>::quiet_NaN();
    double weights_converged = 1.0;  // fraction of subsample weight fits that converged
};

// One cell per (lambda, G), lambda-major.
struct ScoreGrid {
    std::vector<double> lambdas;
    std::vector<int> Gs;
    std::vector<ScoreCell> cells;

    const ScoreCell& at(std::size_t l, std::size_t g) const { return cells[l * Gs.size() + g]; }
    ScoreCell& at(std::size_t l, std::size_t g) { return cells[l * Gs.size() + g]; }

    double value(const ScoreCell& c, ScoreKind kind) const {
        switch (kind) {
            case ScoreKind::consensus: return c.consensus;
            case ScoreKind::delta: return c.delta;
            case ScoreKind::pac: return c.pac;
            case ScoreKind::silhouette: return c.silhouette;
        }
        return kScoreSentinel;
    }
};

// Fills delta from the areas, per lambda, for G values that have their G - 1
// predecessor in the grid (G = 2 needs none).
inline void fill_delta(ScoreGrid& grid) {
    for (std::size_t l = 0; l < grid.lambdas.size(); ++l) {
        for (std::size_t g = 0; g < grid.Gs.size(); ++g) {
            ScoreCell& c = grid.at(l, g);
            c.delta = kScoreSentinel;
            if (grid.Gs[g] == 2) {
                c.delta = c.area;
            } else if (g > 0 && grid.Gs[g - 1] == grid.Gs[g] - 1) {
                const double prev = grid.at(l, g - 1).area;
                if (prev != 0.0) c.delta = (c.area - prev) / prev;
            }
        }
    }
}

enum class CalibrationStatus { ok, no_stable_structure };

struct Calibration {
    CalibrationStatus status = CalibrationStatus::no_stable_structure;
    std::size_t lambda_index = 0;
    std::size_t G_index = 0;
    double lambda = 0.0;
    int G = 0;
    double score = kScoreSentinel;
};

// Best cell under `kind` (argmin for PAC, argmax otherwise). Ties go to the
// smaller G, then the smaller lambda. Undefined cells never win.
inline Calibration calibrate(const ScoreGrid& grid, ScoreKind kind) {
    Calibration best;
    const bool minimise = kind == ScoreKind::pac;
    for (std::size_t l = 0; l < grid.lambdas.size(); ++l) {
        for (std::size_t g = 0; g < grid.Gs.size(); ++g) {
            const ScoreCell& c = grid.at(l, g);
            const double v = grid.value(c, kind);
            if (!std::isfinite(v)) continue;
            bool take = best.status != CalibrationStatus::ok;
            if (!take) {
                const bool better = minimise ? v < best.score : v > best.score;
                const bool tie = v == best.score;
                take = better || (tie && (c.G < best.G || (c.G == best.G && c.lambda < best.lambda)));
            }
            if (take) {
                best.status = CalibrationStatus::ok;
                best.lambda_index = l;
                best.G_index = g;
                best.lambda = c.lambda;
                best.G = c.G;
                best.score = v;
            }
        }
    }
    return best;
}

}  // namespace concal
