#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "concal/types.hpp"

namespace concal {

enum class Linkage { complete, average, single };

inline std::string to_string(Linkage l) {
    switch (l) {
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
        case Linkage::single: return "single";
    }
    return "?";
}

inline Linkage parse_linkage(const std::string& s) {
    if (s == "complete") return Linkage::complete;
    if (s == "average") return Linkage::average;
    if (s == "single") return Linkage::single;
    throw InputError("unknown linkage '" + s + "'");
}

// Node ids follow the usual convention: 0..n-1 are items, n+k is the cluster
// created by merge k.
struct Merge {
    int left = 0;
    int right = 0;
    double height = 0.0;
};

struct Dendrogram {
    int n = 0;
    Linkage linkage = Linkage::complete;
    std::vector<Merge> merges;  // n - 1 entries, in merge order
};

namespace detail {

// Lance-Williams update for the distance between cluster k and the union of i and j.
inline double lance_williams(Linkage linkage, double d_ki, double d_kj, int n_i, int n_j) {
    switch (linkage) {
        case Linkage::single: return std::min(d_ki, d_kj);
        case Linkage::complete: return std::max(d_ki, d_kj);
        case Linkage::average: return (n_i * d_ki + n_j * d_kj) / (n_i + n_j);
    }
    return 0.0;
}

}  // namespace detail

// Agglomerative clustering. Each active cluster is indexed by its smallest item;
// among equal-height candidates the pair with the smallest (lower, upper) index
// pair merges first.
inline Dendrogram hierarchical(const DistanceMatrix& dist, Linkage linkage = Linkage::complete) {
    const int n = dist.n();
    if (n < 2) throw InputError("hierarchical clustering needs at least 2 items");
    constexpr double inf = std::numeric_limits<double>::infinity();

    Eigen::MatrixXd d = dist.values;
    std::vector<char> active(static_cast<std::size_t>(n), 1);
    std::vector<int> size(static_cast<std::size_t>(n), 1);
    std::vector<int> node(static_cast<std::size_t>(n));
    std::iota(node.begin(), node.end(), 0);

    // Cached nearest active partner with a larger index, per active row.
    std::vector<int> nn(static_cast<std::size_t>(n), -1);
    std::vector<double> nn_dist(static_cast<std::size_t>(n), inf);
    auto refresh = [&](int a) {
        nn[static_cast<std::size_t>(a)] = -1;
        nn_dist[static_cast<std::size_t>(a)] = inf;
        for (int b = a + 1; b < n; ++b) {
            if (!active[static_cast<std::size_t>(b)]) continue;
            if (d(a, b) < nn_dist[static_cast<std::size_t>(a)]) {
                nn_dist[static_cast<std::size_t>(a)] = d(a, b);
                nn[static_cast<std::size_t>(a)] = b;
            }
        }
    };
    for (int a = 0; a < n; ++a) refresh(a);

    Dendrogram out;
    out.n = n;
    out.linkage = linkage;
    out.merges.reserve(static_cast<std::size_t>(n - 1));

    for (int step = 0; step < n - 1; ++step) {
        int a = -1;
        double best = inf;
        for (int r = 0; r < n; ++r) {
            if (!active[static_cast<std::size_t>(r)] || nn[static_cast<std::size_t>(r)] < 0) continue;
            if (a < 0 || nn_dist[static_cast<std::size_t>(r)] < best) {
                best = nn_dist[static_cast<std::size_t>(r)];
                a = r;
            }
        }
        const int b = nn[static_cast<std::size_t>(a)];
        out.merges.push_back({node[static_cast<std::size_t>(a)], node[static_cast<std::size_t>(b)], best});

        for (int k = 0; k < n; ++k) {
            if (!active[static_cast<std::size_t>(k)] || k == a || k == b) continue;
            const double v = detail::lance_williams(linkage, d(k, a), d(k, b), size[static_cast<std::size_t>(a)],
                                                    size[static_cast<std::size_t>(b)]);
            d(k, a) = v;
            d(a, k) = v;
        }
        active[static_cast<std::size_t>(b)] = 0;
        size[static_cast<std::size_t>(a)] += size[static_cast<std::size_t>(b)];
        node[static_cast<std::size_t>(a)] = n + step;

        refresh(a);
        for (int r = 0; r < a; ++r) {
            if (!active[static_cast<std::size_t>(r)]) continue;
            const int cur = nn[static_cast<std::size_t>(r)];
            if (cur == a || cur == b) {
                refresh(r);
            } else if (d(r, a) < nn_dist[static_cast<std::size_t>(r)] ||
                       (d(r, a) == nn_dist[static_cast<std::size_t>(r)] && a < cur)) {
                nn_dist[static_cast<std::size_t>(r)] = d(r, a);
                nn[static_cast<std::size_t>(r)] = a;
            }
        }
        // Rows between a and b may have pointed at b.
        for (int r = a + 1; r < b; ++r)
            if (active[static_cast<std::size_t>(r)] && nn[static_cast<std::size_t>(r)] == b) refresh(r);
    }
    return out;
}

// Partition after applying the first n - G merges, i.e. removing the G - 1 last ones.
inline ClusterAssignment cut(const Dendrogram& dendro, int G) {
    const int n = dendro.n;
    if (G < 1 || G > n) throw InputError("cut: G=" + std::to_string(G) + " outside [1, " + std::to_string(n) + "]");
    std::vector<int> parent(static_cast<std::size_t>(2 * n - 1));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (int k = 0; k < n - G; ++k) {
        const Merge& m = dendro.merges[static_cast<std::size_t>(k)];
        parent[static_cast<std::size_t>(find(m.left))] = n + k;
        parent[static_cast<std::size_t>(find(m.right))] = n + k;
    }
    std::vector<int> roots(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = find(i);
    return ClusterAssignment::from_labels(roots);
}

struct PamResult {
    ClusterAssignment assignment;
    std::vector<int> medoids;  // medoids[g] is the medoid of cluster label g + 1
    double build_cost = 0.0;
    double cost = 0.0;
    int swaps = 0;
};

// Partitioning around medoids: greedy BUILD followed by best-improvement SWAP.
// Deterministic; `seed` is unused.
inline PamResult pam(const DistanceMatrix& dist, int G, std::uint64_t seed = 0) {
    (void)seed;
    const int n = dist.n();
    if (G < 1 || G > n) throw InputError("pam: G=" + std::to_string(G) + " outside [1, " + std::to_string(n) + "]");
    const Eigen::MatrixXd& d = dist.values;
    constexpr double inf = std::numeric_limits<double>::infinity();

    std::vector<char> is_medoid(static_cast<std::size_t>(n), 0);
    std::vector<int> medoids;
    std::vector<double> nearest(static_cast<std::size_t>(n), inf);

    // BUILD
    {
        int first = 0;
        double best = inf;
        for (int c = 0; c < n; ++c) {
            const double s = d.row(c).sum();
            if (s < best) {
                best = s;
                first = c;
            }
        }
        medoids.push_back(first);
        is_medoid[static_cast<std::size_t>(first)] = 1;
        for (int j = 0; j < n; ++j) nearest[static_cast<std::size_t>(j)] = d(first, j);
    }
    while (static_cast<int>(medoids.size()) < G) {
        int pick = -1;
        double best_gain = -inf;
        for (int c = 0; c < n; ++c) {
            if (is_medoid[static_cast<std::size_t>(c)]) continue;
            double gain = 0.0;
            for (int j = 0; j < n; ++j) gain += std::max(nearest[static_cast<std::size_t>(j)] - d(c, j), 0.0);
            if (gain > best_gain) {
                best_gain = gain;
                pick = c;
            }
        }
        medoids.push_back(pick);
        is_medoid[static_cast<std::size_t>(pick)] = 1;
        for (int j = 0; j < n; ++j) nearest[static_cast<std::size_t>(j)] = std::min(nearest[static_cast<std::size_t>(j)], d(pick, j));
    }

    auto total_cost = [&] {
        double c = 0.0;
        for (int j = 0; j < n; ++j) {
            double m = inf;
            for (int med : medoids) m = std::min(m, d(med, j));
            c += m;
        }
        return c;
    };

    PamResult res;
    res.build_cost = total_cost();
    double cost = res.build_cost;

    // SWAP: nearest and second-nearest medoid distances give each swap's delta in O(n).
    std::vector<int> near_idx(static_cast<std::size_t>(n));
    std::vector<double> near_d(static_cast<std::size_t>(n)), second_d(static_cast<std::size_t>(n));
    for (;;) {
        for (int j = 0; j < n; ++j) {
            double d1 = inf, d2 = inf;
            int i1 = -1;
            for (int mi = 0; mi < G; ++mi) {
                const double v = d(medoids[static_cast<std::size_t>(mi)], j);
                if (v < d1) {
                    d2 = d1;
                    d1 = v;
                    i1 = mi;
                } else if (v < d2) {
                    d2 = v;
                }
            }
            near_idx[static_cast<std::size_t>(j)] = i1;
            near_d[static_cast<std::size_t>(j)] = d1;
            second_d[static_cast<std::size_t>(j)] = d2;
        }
        double best_delta = 0.0;
        int best_m = -1, best_o = -1;
        for (int mi = 0; mi < G; ++mi) {
            for (int o = 0; o < n; ++o) {
                if (is_medoid[static_cast<std::size_t>(o)]) continue;
                double delta = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double doj = d(o, j);
                    const double now = near_d[static_cast<std::size_t>(j)];
                    const double after = near_idx[static_cast<std::size_t>(j)] == mi
                                             ? std::min(second_d[static_cast<std::size_t>(j)], doj)
                                             : std::min(now, doj);
                    delta += after - now;
                }
                if (delta < best_delta) {
                    best_delta = delta;
                    best_m = mi;
                    best_o = o;
                }
            }
        }
        if (best_m < 0 || best_delta >= -1e-12 * (1.0 + cost)) break;
        is_medoid[static_cast<std::size_t>(medoids[static_cast<std::size_t>(best_m)])] = 0;
        medoids[static_cast<std::size_t>(best_m)] = best_o;
        is_medoid[static_cast<std::size_t>(best_o)] = 1;
        cost = total_cost();
        ++res.swaps;
    }

    std::vector<int> raw(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        int pick = 0;
        for (int mi = 1; mi < G; ++mi)
            if (d(medoids[static_cast<std::size_t>(mi)], j) < d(medoids[static_cast<std::size_t>(pick)], j)) pick = mi;
        raw[static_cast<std::size_t>(j)] = pick;
    }
    // A medoid always belongs to its own cluster, even next to a duplicate medoid.
    for (int mi = 0; mi < G; ++mi) raw[static_cast<std::size_t>(medoids[static_cast<std::size_t>(mi)])] = mi;
    res.assignment = ClusterAssignment::from_labels(raw);
    // Order medoids by the label their cluster received.
    res.medoids.assign(static_cast<std::size_t>(G), -1);
    for (int j = 0; j < n; ++j) {
        const int label = res.assignment.labels[static_cast<std::size_t>(j)];
        res.medoids[static_cast<std::size_t>(label - 1)] = medoids[static_cast<std::size_t>(raw[static_cast<std::size_t>(j)])];
    }
    res.cost = cost;
    return res;
}

}  // namespace concal
