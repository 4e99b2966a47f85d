#include <cmath>
#include <cstring>
#include <set>

#include <gtest/gtest.h>

#include "concal/cluster.hpp"
#include "concal/distance.hpp"
#include "concal/metrics.hpp"
#include "concal/simulate.hpp"

using namespace concal;

namespace {

double sample_variance(const Eigen::VectorXd& v) {
    const double m = v.mean();
    return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

SimulationSpec headline(std::uint64_t seed) {
    SimulationSpec s;
    s.cluster_sizes = {20, 50, 30, 10, 40};
    s.explained_variance = explained_variance_profile(10, 10, 0.6);
    s.seed = seed;
    return s;
}

}  // namespace

TEST(SimulateMeans, ColumnVarianceIsExact) {
    const auto truth = truth_from_sizes({20, 50, 30, 10, 40});
    const std::vector<double> E{0.6, 0.1, 0.95, 0.0, 0.33};
    const RowMatrix M = simulate_means(truth, E, 17);
    for (int j = 0; j < 5; ++j) {
        if (E[static_cast<std::size_t>(j)] == 0.0)
            EXPECT_TRUE(M.col(j).isZero(0.0));
        else
            EXPECT_NEAR(sample_variance(M.col(j)), E[static_cast<std::size_t>(j)], 1e-12);
    }
}

TEST(SimulateMeans, ConstantWithinClusters) {
    const auto truth = truth_from_sizes({3, 4, 2});
    const RowMatrix M = simulate_means(truth, {0.5, 0.5}, 4);
    for (int i = 1; i < truth.n(); ++i)
        if (truth.labels[static_cast<std::size_t>(i)] == truth.labels[static_cast<std::size_t>(i - 1)]) {
            EXPECT_EQ(M.row(i), M.row(i - 1));
        }
}

TEST(SimulateMeans, TwoEqualClustersAreSymmetric) {
    // Two values +-c around zero with n/2 items each: variance n c^2 / (n-1) = E.
    const int n = 12;
    const auto truth = truth_from_sizes({6, 6});
    const RowMatrix M = simulate_means(truth, {0.5}, 3);
    const double c = std::sqrt(0.5 * (n - 1) / static_cast<double>(n));
    EXPECT_NEAR(std::abs(M(0, 0)), c, 1e-12);
    EXPECT_NEAR(M(0, 0), -M(n - 1, 0), 1e-12);
    std::set<double> distinct(M.col(0).data(), M.col(0).data() + n);
    EXPECT_EQ(distinct.size(), 2u);
}

TEST(SimulateMeans, SignalNeedsTwoClusters) {
    EXPECT_THROW(simulate_means(truth_from_sizes({5}), {0.5}, 1), InputError);
    EXPECT_NO_THROW(simulate_means(truth_from_sizes({5}), {0.0}, 1));
}

TEST(SimulateCovariance, IndependentIsDiagonal) {
    const std::vector<double> E{0.2, 0.6, 0.0};
    const auto cov = simulate_covariance(3, E, {}, 1);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
    expected.diagonal() << 0.8, 0.4, 1.0;
    EXPECT_TRUE(cov.covariance.isApprox(expected, 1e-15));
}

TEST(SimulateCovariance, NoSignalLeavesTheCorrelationMatrix) {
    CorrelationScenario sc;
    sc.kind = CorrelationKind::block_graph;
    const auto cov = simulate_covariance(20, std::vector<double>(20, 0.0), sc, 5);
    EXPECT_EQ(cov.covariance, cov.correlation);
}

TEST(SimulateCovariance, BlockMask) {
    CorrelationScenario sc;
    sc.kind = CorrelationKind::block_graph;
    sc.min_block = sc.max_block = 5;
    const std::vector<double> E(10, 0.3);
    const auto cov = simulate_covariance(10, E, sc, 8);
    ASSERT_EQ(cov.block, (std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1}));
    for (int i = 0; i < 10; ++i) {
        EXPECT_NEAR(cov.covariance(i, i), 0.7, 1e-12);
        for (int j = 0; j < 10; ++j) {
            if (i == j) continue;
            if (cov.block[static_cast<std::size_t>(i)] != cov.block[static_cast<std::size_t>(j)])
                EXPECT_EQ(cov.covariance(i, j), 0.0);
            else
                EXPECT_GT(cov.covariance(i, j), 0.0);
        }
    }
    EXPECT_TRUE(cov.covariance.isApprox(cov.covariance.transpose(), 0.0));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov.covariance);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
    EXPECT_TRUE(cov.warnings.empty());
}

TEST(SimulateDataset, SameSeedIsBitwiseIdentical) {
    auto spec = headline(42);
    spec.correlation.kind = CorrelationKind::block_graph;
    const auto a = simulate_dataset(spec);
    const auto b = simulate_dataset(spec);
    ASSERT_EQ(a.data.values.size(), b.data.values.size());
    EXPECT_EQ(std::memcmp(a.data.values.data(), b.data.values.data(),
                          sizeof(double) * static_cast<std::size_t>(a.data.values.size())),
              0);
    EXPECT_EQ(a.truth.labels, b.truth.labels);
    spec.seed = 43;
    EXPECT_NE(simulate_dataset(spec).data.values, a.data.values);
}

TEST(SimulateDataset, ContributingSetAndShape) {
    SimulationSpec s;
    s.cluster_sizes = {10, 15};
    s.explained_variance = explained_variance_profile(8, 3, 0.5);
    const auto d = simulate_dataset(s);
    EXPECT_EQ(d.data.n(), 25);
    EXPECT_EQ(d.data.p(), 8);
    EXPECT_EQ(d.contributing, (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(d.truth.num_clusters, 2);
}

TEST(SimulateDataset, NoiselessLimitIsRecovered) {
    SimulationSpec s;
    s.cluster_sizes = {20, 50, 30, 10, 40};
    s.explained_variance = std::vector<double>(10, 1.0 - 1e-8);
    s.seed = 9;
    const auto d = simulate_dataset(s);
    const auto z = cut(hierarchical(pairwise_distance(d.data)), 5);
    EXPECT_NEAR(adjusted_rand_index(pair_confusion(d.truth, z)), 1.0, 1e-12);
}

TEST(SimulateDataset, ColumnsHaveUnitExpectedVariance) {
    // Each column's sample variance has expectation E + (1 - E) = 1.
    constexpr int repeats = 200;
    std::vector<double> sums(10, 0.0), sq(10, 0.0);
    for (int r = 0; r < repeats; ++r) {
        const auto d = simulate_dataset(headline(1000 + static_cast<std::uint64_t>(r)));
        for (int j = 0; j < 10; ++j) {
            const double v = sample_variance(d.data.values.col(j));
            sums[static_cast<std::size_t>(j)] += v;
            sq[static_cast<std::size_t>(j)] += v * v;
        }
    }
    for (int j = 0; j < 10; ++j) {
        const double mean = sums[static_cast<std::size_t>(j)] / repeats;
        const double var = (sq[static_cast<std::size_t>(j)] - repeats * mean * mean) / (repeats - 1);
        EXPECT_LT(std::abs(mean - 1.0), 4.0 * std::sqrt(var / repeats)) << "column " << j;
    }
}

TEST(SimulationSpec, Validation) {
    SimulationSpec s;
    s.cluster_sizes = {1};
    s.explained_variance = {0.0};
    EXPECT_THROW(s.validate(), InputError);
    s.cluster_sizes = {2, 0};
    EXPECT_THROW(s.validate(), InputError);
    s.cluster_sizes = {2, 2};
    s.explained_variance = {1.5};
    EXPECT_THROW(s.validate(), InputError);
    s.explained_variance = {};
    EXPECT_THROW(s.validate(), InputError);
    EXPECT_THROW(explained_variance_profile(5, 6, 0.5), InputError);
}
