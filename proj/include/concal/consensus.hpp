#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "concal/cluster.hpp"
#include "concal/parallel.hpp"
#include "concal/types.hpp"

namespace concal {

// K item subsets drawn without replacement, plus the co-sampling counts H.
struct SubsampleSet {
    int n = 0;
    int K = 0;
    double tau = 0.0;
    std::uint64_t master_seed = 0;
    std::vector<std::vector<int>> subsamples;  // sorted item indices
    CountMatrix H;

    int subsample_size() const { return subsamples.empty() ? 0 : static_cast<int>(subsamples.front().size()); }
};

inline int subsample_size(int n, double tau) { return static_cast<int>(std::floor(tau * n)); }

// Items of one subsample, via a partial Fisher-Yates shuffle seeded from (master_seed, k).
inline std::vector<int> draw_subsample(int n, int m, std::uint64_t master_seed, int k) {
    std::mt19937_64 rng(derive_seed(master_seed, static_cast<std::uint64_t>(k)));
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < m; ++i) {
        const auto j = static_cast<std::size_t>(i) + uniform_index(rng, static_cast<std::uint64_t>(n - i));
        std::swap(perm[static_cast<std::size_t>(i)], perm[j]);
    }
    perm.resize(static_cast<std::size_t>(m));
    std::sort(perm.begin(), perm.end());
    return perm;
}

inline SubsampleSet draw_subsamples(int n, int K, double tau, std::uint64_t master_seed) {
    if (K < 1) throw InputError("number of subsamples K must be positive");
    if (!(tau > 0.0 && tau <= 1.0)) throw InputError("subsampling proportion tau must lie in (0, 1]");
    const int m = subsample_size(n, tau);
    if (m < 2) throw InputError("subsample size floor(tau * n) = " + std::to_string(m) + " is below 2");

    SubsampleSet set;
    set.n = n;
    set.K = K;
    set.tau = tau;
    set.master_seed = master_seed;
    set.subsamples.reserve(static_cast<std::size_t>(K));
    set.H = CountMatrix::Zero(n, n);
    for (int k = 0; k < K; ++k) {
        auto items = draw_subsample(n, m, master_seed, k);
        for (std::size_t a = 0; a < items.size(); ++a)
            for (std::size_t b = a; b < items.size(); ++b) {
                ++set.H(items[a], items[b]);
                if (a != b) ++set.H(items[b], items[a]);
            }
        set.subsamples.push_back(std::move(items));
    }
    return set;
}

// Co-membership counts for one (lambda, G) cell.
struct ComembershipCounts {
    CountMatrix C;
    double lambda = 0.0;
    int G = 0;
};

class SubsampleError : public NumericalError {
public:
    SubsampleError(int index, const std::string& what)
        : NumericalError("clustering failed on subsample " + std::to_string(index) + ": " + what), index_(index) {}
    int index() const { return index_; }

private:
    int index_;
};

// Adds the co-membership of one labelled subsample into C.
inline void add_comembership(CountMatrix& C, const std::vector<int>& items, const std::vector<int>& labels) {
    for (std::size_t a = 0; a < items.size(); ++a) {
        ++C(items[a], items[a]);
        for (std::size_t b = a + 1; b < items.size(); ++b)
            if (labels[a] == labels[b]) {
                ++C(items[a], items[b]);
                ++C(items[b], items[a]);
            }
    }
}

// Per-subsample clustering: given the subsample index and its items, returns one
// label vector (aligned with the items) per entry of the G grid.
using SubsampleClusterFn = std::function<std::vector<std::vector<int>>(int k, const std::vector<int>& items)>;

// Runs `cluster_fn` on every subsample (in parallel when threads > 1) and sums the
// co-membership matrices. Integer sums make the result independent of scheduling.
inline std::vector<ComembershipCounts> accumulate_comembership(const SubsampleSet& subsamples,
                                                               const SubsampleClusterFn& cluster_fn,
                                                               const std::vector<int>& G_grid, double lambda,
                                                               unsigned threads = 1) {
    const std::size_t K = subsamples.subsamples.size();
    std::vector<std::vector<std::vector<int>>> labels(K);
    parallel_for(K, threads, [&](std::size_t k) {
        const auto& items = subsamples.subsamples[k];
        try {
            labels[k] = cluster_fn(static_cast<int>(k), items);
        } catch (const SubsampleError&) {
            throw;
        } catch (const std::exception& e) {
            throw SubsampleError(static_cast<int>(k), e.what());
        }
        if (labels[k].size() != G_grid.size())
            throw SubsampleError(static_cast<int>(k), "expected one labelling per G");
        for (const auto& l : labels[k])
            if (l.size() != items.size()) throw SubsampleError(static_cast<int>(k), "labelling length mismatch");
    });

    std::vector<ComembershipCounts> out(G_grid.size());
    for (std::size_t g = 0; g < G_grid.size(); ++g) {
        out[g].C = CountMatrix::Zero(subsamples.n, subsamples.n);
        out[g].lambda = lambda;
        out[g].G = G_grid[g];
        for (std::size_t k = 0; k < K; ++k) add_comembership(out[g].C, subsamples.subsamples[k], labels[k][g]);
    }
    return out;
}

struct ConsensusMatrix {
    Eigen::MatrixXd gamma;
    // Off-diagonal pairs (i < j) never sampled together; their entry is 0.
    std::vector<std::pair<int, int>> uncovered;
};

inline ConsensusMatrix consensus_matrix(const CountMatrix& C, const CountMatrix& H) {
    if (C.rows() != H.rows() || C.cols() != H.cols() || C.rows() != C.cols())
        throw DimensionError("co-membership and co-sampling matrices do not conform");
    const Eigen::Index n = C.rows();
    ConsensusMatrix out;
    out.gamma = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (H(i, i) > 0) out.gamma(i, i) = static_cast<double>(C(i, i)) / H(i, i);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (H(i, j) > 0) {
                const double v = static_cast<double>(C(i, j)) / H(i, j);
                out.gamma(i, j) = v;
                out.gamma(j, i) = v;
            } else {
                out.uncovered.emplace_back(static_cast<int>(i), static_cast<int>(j));
            }
        }
    }
    return out;
}

inline DistanceMatrix consensus_distance(const Eigen::MatrixXd& gamma) {
    Eigen::MatrixXd d = (1.0 - gamma.array()).matrix();
    d.diagonal().setZero();
    return DistanceMatrix(std::move(d));
}

// Stable clusters: hierarchical clustering on 1 - Gamma cut at G.
inline ClusterAssignment stable_clusters(const Eigen::MatrixXd& gamma, int G, Linkage linkage = Linkage::complete) {
    return cut(hierarchical(consensus_distance(gamma), linkage), G);
}

}  // namespace concal
