#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "concal/calibration.hpp"
#include "concal/cluster.hpp"
#include "concal/consensus.hpp"
#include "concal/distance.hpp"
#include "concal/metrics.hpp"
#include "concal/parallel.hpp"
#include "concal/types.hpp"

namespace concal {

enum class Method { unweighted, sparcl, cosa };
enum class Algorithm { hierarchical, pam };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::unweighted: return "unweighted";
        case Method::sparcl: return "sparcl";
        case Method::cosa: return "cosa";
    }
    return "?";
}

inline Method parse_method(const std::string& s) {
    if (s == "unweighted") return Method::unweighted;
    if (s == "sparcl") return Method::sparcl;
    if (s == "cosa") return Method::cosa;
    throw InputError("unknown method '" + s + "'");
}

inline std::string to_string(Algorithm a) { return a == Algorithm::pam ? "pam" : "hierarchical"; }

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "hierarchical") return Algorithm::hierarchical;
    if (s == "pam") return Algorithm::pam;
    throw InputError("unknown algorithm '" + s + "'");
}

// `count` log-spaced values from hi down to lo.
inline std::vector<double> geometric_grid(double lo, double hi, int count) {
    if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw InputError("invalid geometric grid");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out.push_back(std::exp(std::log(hi) + t * (std::log(lo) - std::log(hi))));
    }
    return out;
}

inline std::vector<int> integer_range(int lo, int hi) {
    std::vector<int> out;
    for (int g = lo; g <= hi; ++g) out.push_back(g);
    return out;
}

inline std::vector<double> default_lambda_grid(Method m) {
    switch (m) {
        case Method::unweighted: return {0.0};
        case Method::sparcl: return geometric_grid(1.1, 10.0, 10);
        case Method::cosa: return geometric_grid(0.1, 10.0, 10);
    }
    return {0.0};
}

struct PipelineConfig {
    Method method = Method::unweighted;
    Algorithm algorithm = Algorithm::hierarchical;
    Linkage linkage = Linkage::complete;            // per-subsample clustering
    std::optional<Linkage> consensus_linkage;      // stable clusters on 1 - Gamma; unset follows `linkage`
    DistanceMetric metric = DistanceMetric::euclidean;
    AttributeKernel kernel = AttributeKernel::squared_difference;
    int K = 100;
    double tau = 0.5;
    std::uint64_t seed = 1;
    std::vector<int> G_grid = integer_range(2, 20);
    // Empty means the method default. A lambda of 0 bypasses weighting.
    std::vector<double> lambda_grid;
    bool compute_silhouette = false;
    double pac_lower = 0.1;
    double pac_upper = 0.9;
    unsigned threads = 1;
    SparseWeightOptions sparse;
    CosaOptions cosa;

    std::vector<double> lambdas() const {
        if (method == Method::unweighted) return {0.0};
        return lambda_grid.empty() ? default_lambda_grid(method) : lambda_grid;
    }

    void validate(int n) const {
        if (G_grid.empty()) throw InputError("G grid is empty");
        const int m = subsample_size(n, tau);
        for (int G : G_grid)
            if (G < 1 || G > m)
                throw InputError("G=" + std::to_string(G) + " is outside [1, subsample size " + std::to_string(m) + "]");
        for (double l : lambdas()) {
            if (l == 0.0) continue;
            if (method == Method::sparcl && !(l > 1.0)) throw InputError("sparcl lambdas must exceed 1 (or be 0)");
            if (method == Method::cosa && !(l > 0.0)) throw InputError("COSA lambdas must be positive (or 0)");
        }
        if (!(pac_lower <= pac_upper)) throw InputError("PAC bounds must satisfy x1 <= x2");
    }
};

// Everything one consensus run produces over its (lambda, G) grid.
struct ConsensusRun {
    SubsampleSet subsamples;
    ScoreGrid grid;
    std::vector<CountMatrix> counts;          // per cell, same order as grid.cells
    std::vector<ClusterAssignment> stable;    // per cell
    std::vector<std::vector<double>> median_weights;         // per lambda; empty when unweighted
    std::vector<std::vector<double>> selection_proportions;  // per lambda; sparcl only
    std::vector<std::string> warnings;

    std::size_t cell_index(std::size_t l, std::size_t g) const { return l * grid.Gs.size() + g; }

    Eigen::MatrixXd gamma(std::size_t cell) const { return consensus_matrix(counts[cell], subsamples.H).gamma; }
};

namespace detail {

struct SubsampleWeights {
    std::vector<double> summary;  // sparcl: w; cosa: column medians of W
    bool converged = true;
};

inline std::vector<std::vector<int>> cluster_subsample(const DataMatrix& sub, const PipelineConfig& cfg, double lambda,
                                                       SubsampleWeights& weights) {
    DistanceMatrix dist;
    if (cfg.method == Method::unweighted || lambda == 0.0) {
        dist = pairwise_distance(sub, cfg.metric);
    } else if (cfg.method == Method::sparcl) {
        const PerAttributeDistance pad(sub.values, cfg.kernel);
        auto fit = fit_sparse_weights(pad, lambda, std::nullopt, cfg.sparse);
        dist = sparse_weighted_distance(pad, fit.weights);
        weights.summary = std::move(fit.weights);
        weights.converged = fit.converged;
    } else {
        const PerAttributeDistance pad(sub.values, cfg.kernel);
        auto fit = fit_cosa_weights(pad, lambda, cfg.cosa);
        dist = cosa_distance(pad, fit.weights);
        weights.summary = column_medians(fit.weights);
        weights.converged = fit.converged;
    }

    std::vector<std::vector<int>> out;
    out.reserve(cfg.G_grid.size());
    if (cfg.algorithm == Algorithm::hierarchical) {
        const Dendrogram dendro = hierarchical(dist, cfg.linkage);
        for (int G : cfg.G_grid) out.push_back(cut(dendro, G).labels);
    } else {
        for (int G : cfg.G_grid) out.push_back(pam(dist, G).assignment.labels);
    }
    return out;
}

}  // namespace detail

// Consensus (weighted) clustering over the full (lambda, G) grid: subsampling,
// per-subsample clustering, co-membership counts, consensus matrices, stable
// clusters and every calibration score. Results do not depend on cfg.threads.
inline ConsensusRun run_consensus(const DataMatrix& data, const PipelineConfig& cfg) {
    data.validate();
    cfg.validate(data.n());

    ConsensusRun run;
    run.subsamples = draw_subsamples(data.n(), cfg.K, cfg.tau, cfg.seed);
    run.grid.lambdas = cfg.lambdas();
    run.grid.Gs = cfg.G_grid;
    const std::size_t L = run.grid.lambdas.size();
    const std::size_t NG = run.grid.Gs.size();
    const std::size_t K = run.subsamples.subsamples.size();
    run.grid.cells.resize(L * NG);
    run.counts.resize(L * NG);
    run.stable.resize(L * NG);
    run.median_weights.resize(L);
    run.selection_proportions.resize(L);

    for (std::size_t l = 0; l < L; ++l) {
        const double lambda = run.grid.lambdas[l];
        std::vector<detail::SubsampleWeights> weights(K);
        auto fn = [&](int k, const std::vector<int>& items) {
            return detail::cluster_subsample(data.subset(items), cfg, lambda, weights[static_cast<std::size_t>(k)]);
        };
        auto counts = accumulate_comembership(run.subsamples, fn, cfg.G_grid, lambda, cfg.threads);

        std::size_t converged = 0;
        std::vector<std::vector<double>> summaries;
        for (auto& w : weights) {
            converged += w.converged ? 1 : 0;
            if (!w.summary.empty()) summaries.push_back(std::move(w.summary));
        }
        if (!summaries.empty()) {
            run.median_weights[l] = median_across(summaries);
            if (cfg.method == Method::sparcl) run.selection_proportions[l] = selection_proportions(summaries);
        }
        for (std::size_t g = 0; g < NG; ++g) {
            ScoreCell& cell = run.grid.at(l, g);
            cell.lambda = lambda;
            cell.G = cfg.G_grid[g];
            cell.weights_converged = static_cast<double>(converged) / static_cast<double>(K);
            run.counts[run.cell_index(l, g)] = std::move(counts[g].C);
        }
        if (converged < K)
            run.warnings.push_back("lambda=" + std::to_string(lambda) + ": " + std::to_string(K - converged) + " of " +
                                   std::to_string(K) + " weight fits hit the iteration limit");
    }

    // Step 6 and scoring, one cell per task.
    parallel_for(L * NG, cfg.threads, [&](std::size_t idx) {
        ScoreCell& cell = run.grid.cells[idx];
        const ConsensusMatrix cm = consensus_matrix(run.counts[idx], run.subsamples.H);
        const DistanceMatrix cdist = consensus_distance(cm.gamma);
        run.stable[idx] = cut(hierarchical(cdist, cfg.consensus_linkage.value_or(cfg.linkage)), cell.G);
        cell.tallies = tally(run.counts[idx], run.subsamples.H, run.stable[idx]);
        cell.consensus = consensus_score(cell.tallies);
        const CdfScores cdf = cdf_scores(cm.gamma, cfg.pac_lower, cfg.pac_upper);
        cell.area = cdf.area;
        cell.pac = cdf.pac;
        if (cfg.compute_silhouette && run.stable[idx].num_clusters >= 2)
            cell.silhouette = silhouette_score(cdist, run.stable[idx]);
    });
    fill_delta(run.grid);

    const auto uncovered = consensus_matrix(run.counts.front(), run.subsamples.H).uncovered;
    if (!uncovered.empty()) {
        std::string msg = std::to_string(uncovered.size()) + " item pairs were never sampled together (consensus set to 0):";
        for (std::size_t i = 0; i < std::min<std::size_t>(uncovered.size(), 20); ++i)
            msg += " (" + std::to_string(uncovered[i].first) + "," + std::to_string(uncovered[i].second) + ")";
        run.warnings.push_back(msg);
    }
    return run;
}

// Plain (non-consensus) clustering of the full data at every G, for baselines.
struct BaselineRun {
    std::vector<int> Gs;
    std::vector<ClusterAssignment> assignments;
    std::vector<double> silhouette;  // NaN for G < 2
};

inline BaselineRun run_baseline(const DataMatrix& data, const std::vector<int>& G_grid,
                                Linkage linkage = Linkage::complete, DistanceMetric metric = DistanceMetric::euclidean) {
    const DistanceMatrix dist = pairwise_distance(data, metric);
    const Dendrogram dendro = hierarchical(dist, linkage);
    BaselineRun out;
    out.Gs = G_grid;
    for (int G : G_grid) {
        out.assignments.push_back(cut(dendro, G));
        out.silhouette.push_back(G >= 2 ? silhouette_score(dist, out.assignments.back())
                                        : std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

}  // namespace concal
