#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "concal/types.hpp"

namespace concal {

enum class DistanceMetric { euclidean, manhattan };

// Per-attribute dissimilarity d_ijm.
enum class AttributeKernel { squared_difference, absolute_difference };

// Lazy view yielding d_ijm = k(x_im - x_jm). Holds a reference to the data; the
// data must outlive the view.
class PerAttributeDistance {
public:
    PerAttributeDistance(const RowMatrix& data, AttributeKernel kernel = AttributeKernel::squared_difference)
        : data_(&data), kernel_(kernel) {}

    int n() const { return static_cast<int>(data_->rows()); }
    int p() const { return static_cast<int>(data_->cols()); }
    AttributeKernel kernel() const { return kernel_; }
    const RowMatrix& data() const { return *data_; }

    double operator()(int i, int j, int m) const { return apply(data_->coeff(i, m) - data_->coeff(j, m)); }

    double apply(double diff) const {
        return kernel_ == AttributeKernel::squared_difference ? diff * diff : std::abs(diff);
    }

private:
    const RowMatrix* data_;
    AttributeKernel kernel_;
};

inline DistanceMatrix pairwise_distance(const DataMatrix& data, DistanceMetric metric = DistanceMetric::euclidean) {
    data.validate();
    const int n = data.n();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const auto diff = data.values.row(i) - data.values.row(j);
            const double v = metric == DistanceMetric::euclidean ? std::sqrt(diff.squaredNorm()) : diff.cwiseAbs().sum();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return DistanceMatrix(std::move(d));
}

// d_ij = sum_m w_m d_ijm
inline DistanceMatrix sparse_weighted_distance(const PerAttributeDistance& dists, std::span<const double> w) {
    const int n = dists.n();
    const int p = dists.p();
    if (static_cast<int>(w.size()) != p) throw DimensionError("weight vector length does not match attribute count");
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    const RowMatrix& x = dists.data();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (int m = 0; m < p; ++m) s += w[static_cast<std::size_t>(m)] * dists.apply(x(i, m) - x(j, m));
            d(i, j) = s;
            d(j, i) = s;
        }
    }
    return DistanceMatrix(std::move(d));
}

struct SparseWeightOptions {
    int max_iterations = 15;
    double tolerance = 1e-4;  // relative l1 change of w
    int bisection_steps = 30;
};

struct SparseWeightFit {
    std::vector<double> weights;
    // Objective sum_m w_m a_m after each full (U, w) update.
    std::vector<double> objective;
    int iterations = 0;
    bool converged = false;
};

namespace detail {

// normalize_2(soft_threshold(a, delta)), with delta chosen by bisection so that
// the l1 norm of the result is at most `bound`.
inline std::vector<double> constrained_weight_update(const std::vector<double>& a, double bound, int steps) {
    const std::size_t p = a.size();
    auto threshold = [&](double delta) {
        std::vector<double> s(p);
        double norm2 = 0.0;
        for (std::size_t m = 0; m < p; ++m) {
            s[m] = std::max(a[m] - delta, 0.0);
            norm2 += s[m] * s[m];
        }
        const double norm = std::sqrt(norm2);
        if (norm > 0.0)
            for (double& v : s) v /= norm;
        return std::pair{s, norm};
    };
    auto l1 = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); };

    auto [w, norm] = threshold(0.0);
    if (norm == 0.0) return w;
    if (l1(w) <= bound) return w;

    const double amax = *std::max_element(a.begin(), a.end());
    double lo = 0.0;
    double hi = amax;
    for (int it = 0; it < steps; ++it) {
        const double mid = 0.5 * (lo + hi);
        auto [cand, cnorm] = threshold(mid);
        if (cnorm > 0.0 && l1(cand) > bound)
            lo = mid;
        else
            hi = mid;
    }
    auto [out, onorm] = threshold(hi);
    if (onorm == 0.0) {
        // Everything thresholded away: keep the single strongest attribute.
        out.assign(p, 0.0);
        out[static_cast<std::size_t>(std::max_element(a.begin(), a.end()) - a.begin())] = 1.0;
    }
    return out;
}

}  // namespace detail

// Attribute weights maximising sum_m w_m sum_ij d_ijm U_ij subject to ||U||_F <= 1,
// ||w||_2 <= 1, ||w||_1 <= lambda, w >= 0, by alternating the two block updates.
inline SparseWeightFit fit_sparse_weights(const PerAttributeDistance& dists, double lambda,
                                          std::optional<std::vector<double>> init = std::nullopt,
                                          const SparseWeightOptions& opts = {}) {
    if (!(lambda > 1.0)) throw InputError("sparse clustering requires lambda > 1");
    const int n = dists.n();
    const int p = dists.p();
    const RowMatrix& x = dists.data();

    std::vector<double> w;
    if (init) {
        if (static_cast<int>(init->size()) != p) throw DimensionError("initial weights have the wrong length");
        w = *init;
    } else {
        w.assign(static_cast<std::size_t>(p), 1.0 / std::sqrt(static_cast<double>(p)));
    }

    SparseWeightFit fit;
    const std::size_t npairs = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
    std::vector<double> dw(npairs);
    std::vector<double> a(static_cast<std::size_t>(p));
    for (int it = 1; it <= opts.max_iterations; ++it) {
        // U step: U proportional to the current weighted distances.
        double fro2 = 0.0;
        std::size_t k = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++k) {
                double s = 0.0;
                for (int m = 0; m < p; ++m) s += w[static_cast<std::size_t>(m)] * dists.apply(x(i, m) - x(j, m));
                dw[k] = s;
                fro2 += 2.0 * s * s;
            }
        const double fro = std::sqrt(fro2);
        const double u_uniform = 1.0 / std::sqrt(static_cast<double>(n) * (n - 1));

        // w step: a_m = sum_ij d_ijm U_ij over ordered pairs.
        std::fill(a.begin(), a.end(), 0.0);
        k = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++k) {
                const double u = fro > 0.0 ? dw[k] / fro : u_uniform;
                for (int m = 0; m < p; ++m) a[static_cast<std::size_t>(m)] += 2.0 * u * dists.apply(x(i, m) - x(j, m));
            }

        std::vector<double> w_new = detail::constrained_weight_update(a, lambda, opts.bisection_steps);
        if (std::all_of(w_new.begin(), w_new.end(), [](double v) { return v == 0.0; })) {
            // No attribute separates anything; spread the budget evenly.
            const double v = std::min(1.0 / std::sqrt(static_cast<double>(p)), lambda / p);
            w_new.assign(static_cast<std::size_t>(p), v);
        }

        double obj = 0.0;
        double change = 0.0;
        double old_l1 = 0.0;
        for (std::size_t m = 0; m < a.size(); ++m) {
            obj += w_new[m] * a[m];
            change += std::abs(w_new[m] - w[m]);
            old_l1 += std::abs(w[m]);
        }
        fit.objective.push_back(obj);
        w = std::move(w_new);
        fit.iterations = it;
        if (old_l1 > 0.0 && change / old_l1 < opts.tolerance) {
            fit.converged = true;
            break;
        }
    }
    fit.weights = std::move(w);
    return fit;
}

struct CosaOptions {
    int max_iterations = 20;
    double tolerance = 1e-4;  // max |W_new - W_old|
};

struct CosaFit {
    RowMatrix weights;  // n x p, rows on the simplex
    int iterations = 0;
    bool converged = false;
};

inline int cosa_neighbourhood_size(int n) {
    const int k = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
    return std::clamp(k, 1, std::max(1, n - 1));
}

namespace detail {

// Row-wise minimiser of sum_m W_m s_m + lambda sum_m W_m log W_m on the simplex.
inline void entropy_softmax(std::span<const double> s, double lambda, std::span<double> out) {
    const double smin = *std::min_element(s.begin(), s.end());
    double total = 0.0;
    for (std::size_t m = 0; m < s.size(); ++m) {
        out[m] = std::exp(-(s[m] - smin) / lambda);
        total += out[m];
    }
    for (double& v : out) v /= total;
}

// Indices of the k nearest neighbours of i (excluding i) under row-weighted
// distance, ties broken by lower index.
inline void nearest_neighbours(const std::vector<double>& dist_row, int i, int k, std::vector<int>& out) {
    const int n = static_cast<int>(dist_row.size());
    out.clear();
    for (int j = 0; j < n; ++j)
        if (j != i) out.push_back(j);
    auto closer = [&](int x, int y) { return dist_row[static_cast<std::size_t>(x)] < dist_row[static_cast<std::size_t>(y)] ||
                                             (dist_row[static_cast<std::size_t>(x)] == dist_row[static_cast<std::size_t>(y)] && x < y); };
    std::partial_sort(out.begin(), out.begin() + k, out.end(), closer);
    out.resize(static_cast<std::size_t>(k));
}

}  // namespace detail

// Item- and attribute-specific weights from the entropy-penalised nearest-neighbour
// objective, by fixed-point iteration of the per-row softmax update.
inline CosaFit fit_cosa_weights(const PerAttributeDistance& dists, double lambda, const CosaOptions& opts = {}) {
    if (!(lambda > 0.0)) throw InputError("COSA requires lambda > 0");
    const int n = dists.n();
    const int p = dists.p();
    if (n < 3) throw InputError("COSA requires at least 3 items");
    const RowMatrix& x = dists.data();
    const int k = cosa_neighbourhood_size(n);

    CosaFit fit;
    fit.weights = RowMatrix::Constant(n, p, 1.0 / p);
    RowMatrix next(n, p);
    std::vector<double> row_dist(static_cast<std::size_t>(n));
    std::vector<double> s(static_cast<std::size_t>(p));
    std::vector<int> knn;

    for (int it = 1; it <= opts.max_iterations; ++it) {
        for (int i = 0; i < n; ++i) {
            const auto wi = fit.weights.row(i);
            for (int j = 0; j < n; ++j) {
                if (j == i) {
                    row_dist[static_cast<std::size_t>(j)] = 0.0;
                    continue;
                }
                double acc = 0.0;
                for (int m = 0; m < p; ++m) acc += wi(m) * dists.apply(x(i, m) - x(j, m));
                row_dist[static_cast<std::size_t>(j)] = acc;
            }
            detail::nearest_neighbours(row_dist, i, k, knn);
            std::fill(s.begin(), s.end(), 0.0);
            for (int j : knn)
                for (int m = 0; m < p; ++m) s[static_cast<std::size_t>(m)] += dists.apply(x(i, m) - x(j, m));
            for (double& v : s) v /= k;
            detail::entropy_softmax(s, lambda, std::span<double>(next.row(i).data(), static_cast<std::size_t>(p)));
        }
        const double change = (next - fit.weights).cwiseAbs().maxCoeff();
        fit.weights = next;
        fit.iterations = it;
        if (change < opts.tolerance) {
            fit.converged = true;
            break;
        }
    }
    return fit;
}

// d_ij = sum_m max(W_im, W_jm) d_ijm
inline DistanceMatrix cosa_distance(const PerAttributeDistance& dists, const RowMatrix& W) {
    const int n = dists.n();
    const int p = dists.p();
    if (W.rows() != n || W.cols() != p) throw DimensionError("COSA weight matrix shape does not match the data");
    const RowMatrix& x = dists.data();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (int m = 0; m < p; ++m) s += std::max(W(i, m), W(j, m)) * dists.apply(x(i, m) - x(j, m));
            d(i, j) = s;
            d(j, i) = s;
        }
    }
    return DistanceMatrix(std::move(d));
}

}  // namespace concal
