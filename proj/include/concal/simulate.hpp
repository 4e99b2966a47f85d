#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "concal/parallel.hpp"
#include "concal/types.hpp"

namespace concal {

enum class CorrelationKind { independent, block_graph };

// Block-graph correlation: contiguous attribute blocks, each a random connected
// graph (spanning tree plus extra edges) turned into a diagonally dominant precision matrix.
struct CorrelationScenario {
    CorrelationKind kind = CorrelationKind::independent;
    int min_block = 5;
    int max_block = 15;
    double edge_value = 0.5;
    double extra_edge_probability = 0.1;
    double diagonal_offset = 0.1;
};

struct SimulationSpec {
    std::vector<int> cluster_sizes;
    std::vector<double> explained_variance;  // E_j, one per attribute
    CorrelationScenario correlation;
    std::uint64_t seed = 1;

    int n() const {
        int s = 0;
        for (int c : cluster_sizes) s += c;
        return s;
    }
    int p() const { return static_cast<int>(explained_variance.size()); }

    void validate() const {
        if (cluster_sizes.empty()) throw InputError("simulation needs at least one cluster");
        for (int c : cluster_sizes)
            if (c < 1) throw InputError("cluster sizes must be positive");
        if (n() < 2) throw InputError("simulation needs at least 2 items");
        if (explained_variance.empty()) throw InputError("simulation needs at least 1 attribute");
        for (double e : explained_variance)
            if (!(e >= 0.0 && e <= 1.0)) throw InputError("explained variance must lie in [0, 1]");
        if (correlation.kind == CorrelationKind::block_graph &&
            (correlation.min_block < 1 || correlation.max_block < correlation.min_block))
            throw InputError("invalid block size range");
    }
};

// E = `value` on the first q attributes, 0 on the remaining p - q.
inline std::vector<double> explained_variance_profile(int p, int q, double value) {
    if (q < 0 || q > p) throw InputError("number of contributing attributes must lie in [0, p]");
    std::vector<double> e(static_cast<std::size_t>(p), 0.0);
    for (int j = 0; j < q; ++j) e[static_cast<std::size_t>(j)] = value;
    return e;
}

inline ClusterAssignment truth_from_sizes(const std::vector<int>& sizes) {
    ClusterAssignment z;
    for (std::size_t g = 0; g < sizes.size(); ++g)
        for (int i = 0; i < sizes[g]; ++i) z.labels.push_back(static_cast<int>(g) + 1);
    z.num_clusters = static_cast<int>(sizes.size());
    return z;
}

// Cluster means M (n x p) with each column's sample variance (n - 1 denominator)
// equal to E_j. Columns whose draws coincide across clusters are redrawn.
inline RowMatrix simulate_means(const ClusterAssignment& truth, const std::vector<double>& E, std::uint64_t seed) {
    const int n = truth.n();
    const int p = static_cast<int>(E.size());
    const int G = truth.num_clusters;
    bool any_signal = false;
    for (double e : E) any_signal = any_signal || e > 0.0;
    if (any_signal && G < 2) throw InputError("explained variance > 0 requires at least 2 clusters");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    RowMatrix M = RowMatrix::Zero(n, p);
    std::vector<double> eta(static_cast<std::size_t>(G));
    Eigen::VectorXd col(n);

    constexpr int kMaxRedraws = 100;
    for (int j = 0; j < p; ++j) {
        for (int attempt = 0;; ++attempt) {
            for (double& v : eta) v = normal(rng);
            if (E[static_cast<std::size_t>(j)] == 0.0) break;
            for (int i = 0; i < n; ++i) col(i) = eta[static_cast<std::size_t>(truth.labels[static_cast<std::size_t>(i)] - 1)];
            const double mean = col.mean();
            col.array() -= mean;
            const double sd = std::sqrt(col.squaredNorm() / (n - 1));
            if (sd > 0.0) {
                M.col(j) = std::sqrt(E[static_cast<std::size_t>(j)]) * col / sd;
                break;
            }
            if (attempt + 1 >= kMaxRedraws)
                throw NumericalError("cluster means for attribute " + std::to_string(j + 1) + " stayed constant after " +
                                     std::to_string(kMaxRedraws) + " draws");
        }
    }
    return M;
}

struct CovarianceResult {
    Eigen::MatrixXd covariance;   // Sigma
    Eigen::MatrixXd correlation;  // Sigma tilde
    std::vector<int> block;       // block id per attribute
    std::vector<std::string> warnings;
};

namespace detail {

inline Eigen::MatrixXd block_graph_correlation(int size, const CorrelationScenario& sc, std::mt19937_64& rng) {
    if (size == 1) return Eigen::MatrixXd::Ones(1, 1);
    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(size, size);
    for (int t = 1; t < size; ++t) {
        const int u = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(t)));
        adj(t, u) = adj(u, t) = 1;
    }
    for (int u = 0; u < size; ++u)
        for (int v = u + 1; v < size; ++v)
            if (!adj(u, v) && uniform_unit(rng) < sc.extra_edge_probability) adj(u, v) = adj(v, u) = 1;

    Eigen::MatrixXd precision = Eigen::MatrixXd::Zero(size, size);
    for (int u = 0; u < size; ++u) {
        double row = 0.0;
        for (int v = 0; v < size; ++v)
            if (adj(u, v)) {
                precision(u, v) = -sc.edge_value;
                row += sc.edge_value;
            }
        precision(u, u) = row + sc.diagonal_offset;
    }
    const Eigen::MatrixXd cov = precision.ldlt().solve(Eigen::MatrixXd::Identity(size, size));
    Eigen::MatrixXd corr(size, size);
    for (int u = 0; u < size; ++u)
        for (int v = 0; v < size; ++v) corr(u, v) = u == v ? 1.0 : cov(u, v) / std::sqrt(cov(u, u) * cov(v, v));
    return 0.5 * (corr + corr.transpose());
}

}  // namespace detail

// Sigma_ij = sqrt((1 - E_i)(1 - E_j)) * Sigma~_ij, with Sigma~ the identity or a
// block-graph correlation matrix.
inline CovarianceResult simulate_covariance(int p, const std::vector<double>& E, const CorrelationScenario& scenario,
                                            std::uint64_t seed) {
    if (static_cast<int>(E.size()) != p) throw DimensionError("explained variance vector length must equal p");
    CovarianceResult out;
    out.correlation = Eigen::MatrixXd::Identity(p, p);
    out.block.assign(static_cast<std::size_t>(p), 0);
    if (scenario.kind == CorrelationKind::independent) {
        for (int j = 0; j < p; ++j) out.block[static_cast<std::size_t>(j)] = j;
    } else {
        std::mt19937_64 rng(seed);
        int start = 0;
        int id = 0;
        while (start < p) {
            const int span = scenario.max_block - scenario.min_block + 1;
            int size = scenario.min_block + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(span)));
            size = std::min(size, p - start);
            out.correlation.block(start, start, size, size) = detail::block_graph_correlation(size, scenario, rng);
            for (int j = start; j < start + size; ++j) out.block[static_cast<std::size_t>(j)] = id;
            start += size;
            ++id;
        }
    }

    out.covariance.resize(p, p);
    for (int i = 0; i < p; ++i) {
        const double ei = E[static_cast<std::size_t>(i)];
        for (int j = 0; j < p; ++j) {
            const double ej = E[static_cast<std::size_t>(j)];
            out.covariance(i, j) = i == j ? (1.0 - ei) * out.correlation(i, i)
                                          : std::sqrt((1.0 - ei) * (1.0 - ej)) * out.correlation(i, j);
        }
    }

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.covariance, Eigen::EigenvaluesOnly);
    const double min_ev = eig.eigenvalues().minCoeff();
    if (min_ev < -1e-10) {
        out.covariance.diagonal().array() += -min_ev + 1e-10;
        out.warnings.push_back("covariance was not positive semi-definite; diagonal inflated by " +
                               std::to_string(-min_ev + 1e-10));
    }
    return out;
}

struct SimulatedDataset {
    DataMatrix data;
    ClusterAssignment truth;
    RowMatrix means;
    Eigen::MatrixXd covariance;
    std::vector<int> contributing;  // attributes with E_j > 0
    std::vector<std::string> warnings;
};

// Factor A with A A^T = sigma: Cholesky, or clipped eigen-decomposition when
// sigma is singular.
inline Eigen::MatrixXd noise_factor(const Eigen::MatrixXd& sigma, std::vector<std::string>& warnings) {
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    warnings.push_back("Cholesky factorisation failed; using eigenvalues clipped at 1e-10");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    const Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(1e-10).cwiseSqrt();
    return eig.eigenvectors() * ev.asDiagonal();
}

// X_i = M_i + eps_i, eps_i ~ N(0, Sigma). Deterministic in spec.seed.
inline SimulatedDataset simulate_dataset(const SimulationSpec& spec) {
    spec.validate();
    SimulatedDataset out;
    out.truth = truth_from_sizes(spec.cluster_sizes);
    const int n = spec.n();
    const int p = spec.p();

    out.means = simulate_means(out.truth, spec.explained_variance, derive_seed(spec.seed, 1));
    auto cov = simulate_covariance(p, spec.explained_variance, spec.correlation, derive_seed(spec.seed, 2));
    out.covariance = std::move(cov.covariance);
    out.warnings = std::move(cov.warnings);
    const Eigen::MatrixXd A = noise_factor(out.covariance, out.warnings);

    std::mt19937_64 rng(derive_seed(spec.seed, 3));
    std::normal_distribution<double> normal(0.0, 1.0);
    RowMatrix X(n, p);
    Eigen::VectorXd z(p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) z(j) = normal(rng);
        X.row(i) = out.means.row(i) + (A * z).transpose();
    }
    out.data = DataMatrix(std::move(X));
    for (int j = 0; j < p; ++j)
        if (spec.explained_variance[static_cast<std::size_t>(j)] > 0.0) out.contributing.push_back(j);
    return out;
}

}  // namespace concal
