#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "concal/types.hpp"

namespace concal {

// Pair counts over the n(n-1)/2 unordered item pairs, truth vs estimate.
struct PairConfusion {
    std::int64_t tp = 0;  // together in both
    std::int64_t tn = 0;  // apart in both
    std::int64_t fp = 0;  // together only in the estimate
    std::int64_t fn = 0;  // together only in the truth

    std::int64_t total() const { return tp + tn + fp + fn; }
};

inline PairConfusion pair_confusion(const ClusterAssignment& truth, const ClusterAssignment& est) {
    if (truth.n() != est.n()) throw InputError("partitions have different lengths");
    PairConfusion pc;
    const int n = truth.n();
    for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        for (int j = i + 1; j < n; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            const bool same_truth = truth.labels[ui] == truth.labels[uj];
            const bool same_est = est.labels[ui] == est.labels[uj];
            if (same_truth && same_est)
                ++pc.tp;
            else if (!same_truth && !same_est)
                ++pc.tn;
            else if (same_est)
                ++pc.fp;
            else
                ++pc.fn;
        }
    }
    return pc;
}

inline double rand_index(const PairConfusion& pc) {
    return pc.total() == 0 ? 1.0 : static_cast<double>(pc.tp + pc.tn) / static_cast<double>(pc.total());
}

inline double jaccard_index(const PairConfusion& pc) {
    const std::int64_t d = pc.tp + pc.fp + pc.fn;
    return d == 0 ? 1.0 : static_cast<double>(pc.tp) / static_cast<double>(d);
}

// True when the ARI denominator vanishes (both partitions trivial).
inline bool ari_degenerate(const PairConfusion& pc) {
    return (pc.tp + pc.fp) * (pc.tn + pc.fp) + (pc.tp + pc.fn) * (pc.tn + pc.fn) == 0;
}

// Pair-counting ARI. With a vanishing denominator: 1 for identical partitions, else 0.
inline double adjusted_rand_index(const PairConfusion& pc) {
    if (ari_degenerate(pc)) return pc.fp == 0 && pc.fn == 0 ? 1.0 : 0.0;
    const long double tp = pc.tp, tn = pc.tn, fp = pc.fp, fn = pc.fn;
    const long double num = 2.0L * (tp * tn - fp * fn);
    const long double den = (tp + fp) * (tn + fp) + (tp + fn) * (tn + fn);
    return static_cast<double>(num / den);
}

// Indices of the q largest weights, ties to the lower index.
inline std::vector<int> top_attributes(std::span<const double> weights, int q) {
    std::vector<int> idx(weights.size());
    std::iota(idx.begin(), idx.end(), 0);
    q = std::clamp(q, 0, static_cast<int>(weights.size()));
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return weights[static_cast<std::size_t>(a)] > weights[static_cast<std::size_t>(b)];
    });
    idx.resize(static_cast<std::size_t>(q));
    return idx;
}

// F1 of the top-q attributes by weight against the truly contributing set.
inline double weighting_f1(const std::vector<int>& contributing, std::span<const double> weights, int q) {
    if (q > static_cast<int>(weights.size())) throw InputError("q exceeds the number of attributes");
    const auto selected = top_attributes(weights, q);
    std::int64_t hits = 0;
    for (int s : selected)
        if (std::find(contributing.begin(), contributing.end(), s) != contributing.end()) ++hits;
    const double precision = selected.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(selected.size());
    const double recall = contributing.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(contributing.size());
    return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

// Median with the midpoint convention for even counts. Copies its input.
inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

// Quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double prob) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Column medians of an item x attribute weight matrix.
inline std::vector<double> column_medians(const RowMatrix& W) {
    std::vector<double> out(static_cast<std::size_t>(W.cols()));
    std::vector<double> col(static_cast<std::size_t>(W.rows()));
    for (Eigen::Index m = 0; m < W.cols(); ++m) {
        for (Eigen::Index i = 0; i < W.rows(); ++i) col[static_cast<std::size_t>(i)] = W(i, m);
        out[static_cast<std::size_t>(m)] = median(col);
    }
    return out;
}

// Per-attribute median across subsamples of per-subsample attribute summaries.
inline std::vector<double> median_across(const std::vector<std::vector<double>>& per_subsample) {
    if (per_subsample.empty()) return {};
    const std::size_t p = per_subsample.front().size();
    std::vector<double> out(p);
    std::vector<double> vals(per_subsample.size());
    for (std::size_t m = 0; m < p; ++m) {
        for (std::size_t k = 0; k < per_subsample.size(); ++k) vals[k] = per_subsample[k][m];
        out[m] = median(vals);
    }
    return out;
}

// Fraction of subsamples in which each attribute received a non-zero weight.
inline std::vector<double> selection_proportions(const std::vector<std::vector<double>>& per_subsample) {
    if (per_subsample.empty()) return {};
    const std::size_t p = per_subsample.front().size();
    std::vector<double> out(p, 0.0);
    for (const auto& w : per_subsample)
        for (std::size_t m = 0; m < p; ++m)
            if (w[m] > 0.0) out[m] += 1.0;
    for (double& v : out) v /= static_cast<double>(per_subsample.size());
    return out;
}

}  // namespace concal
