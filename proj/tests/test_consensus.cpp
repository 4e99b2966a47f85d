#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "concal/consensus.hpp"
#include "concal/distance.hpp"

using namespace concal;

namespace {

RowMatrix two_blobs(int per_blob, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 0.2);
    RowMatrix x(2 * per_blob, 2);
    for (int i = 0; i < 2 * per_blob; ++i) x.row(i) << N(rng) + (i < per_blob ? 0.0 : 5.0), N(rng);
    return x;
}

SubsampleClusterFn hierarchical_fn(const RowMatrix& x, const std::vector<int>& G_grid) {
    return [&x, G_grid](int, const std::vector<int>& items) {
        RowMatrix sub(static_cast<Eigen::Index>(items.size()), x.cols());
        for (std::size_t r = 0; r < items.size(); ++r) sub.row(static_cast<Eigen::Index>(r)) = x.row(items[r]);
        const auto dendro = hierarchical(pairwise_distance(DataMatrix(sub)));
        std::vector<std::vector<int>> out;
        for (int G : G_grid) out.push_back(cut(dendro, G).labels);
        return out;
    };
}

}  // namespace

TEST(DrawSubsamples, FullProportionTakesEverything) {
    const auto set = draw_subsamples(7, 5, 1.0, 3);
    for (const auto& s : set.subsamples) EXPECT_EQ(s, (std::vector<int>{0, 1, 2, 3, 4, 5, 6}));
    EXPECT_TRUE((set.H.array() == 5).all());
}

TEST(DrawSubsamples, SingleSubsampleCounts) {
    // Find a seed whose single draw of 2 from 3 items is {0, 1}, then count by hand.
    std::uint64_t seed = 0;
    while (draw_subsample(3, 2, seed, 0) != std::vector<int>{0, 1}) ++seed;
    const auto set = draw_subsamples(3, 1, 2.0 / 3.0, seed);
    ASSERT_EQ(set.subsamples[0], (std::vector<int>{0, 1}));
    CountMatrix expected(3, 3);
    expected << 1, 1, 0, 1, 1, 0, 0, 0, 0;  // item 2 was never drawn
    EXPECT_EQ(set.H, expected);
}

TEST(DrawSubsamples, CoSamplingMatchesHypergeometricMean) {
    // E[H_ij] = K (m/n)((m-1)/(n-1)) = 100 * 5/10 * 4/9.
    const double expected = 100.0 * 0.5 * 4.0 / 9.0;
    const double p = 0.5 * 4.0 / 9.0;
    const double sd_entry = std::sqrt(100.0 * p * (1.0 - p));
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto set = draw_subsamples(10, 100, 0.5, seed);
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < 10; ++i)
            for (int j = i + 1; j < 10; ++j) {
                sum += set.H(i, j);
                ++count;
                EXPECT_LT(std::abs(set.H(i, j) - expected), 4.0 * sd_entry);
            }
        EXPECT_NEAR(sum / count, expected, 3.0 * sd_entry / std::sqrt(count));
        for (int i = 0; i < 10; ++i) EXPECT_NEAR(set.H(i, i), 50.0, 3.0 * std::sqrt(100 * 0.25));
    }
}

TEST(DrawSubsamples, FloorSizeAndValidation) {
    EXPECT_EQ(subsample_size(11, 0.5), 5);
    EXPECT_EQ(draw_subsamples(11, 3, 0.5, 1).subsample_size(), 5);
    EXPECT_THROW(draw_subsamples(3, 10, 0.5, 1), InputError);  // floor(1.5) = 1
    EXPECT_THROW(draw_subsamples(10, 0, 0.5, 1), InputError);
    EXPECT_THROW(draw_subsamples(10, 5, 0.0, 1), InputError);
    EXPECT_THROW(draw_subsamples(10, 5, 1.5, 1), InputError);
}

TEST(DrawSubsamples, SeedDeterminesEverything) {
    const auto a = draw_subsamples(40, 30, 0.5, 77);
    const auto b = draw_subsamples(40, 30, 0.5, 77);
    const auto c = draw_subsamples(40, 30, 0.5, 78);
    EXPECT_EQ(a.subsamples, b.subsamples);
    EXPECT_EQ(a.H, b.H);
    EXPECT_NE(a.subsamples, c.subsamples);
}

TEST(Accumulate, OneClusterGivesH) {
    const RowMatrix x = two_blobs(6, 1);
    const auto set = draw_subsamples(12, 15, 0.5, 2);
    const auto counts = accumulate_comembership(set, hierarchical_fn(x, {1, 6}), {1, 6}, 0.0);
    EXPECT_EQ(counts[0].C, set.H);
    // G = subsample size: singletons.
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) EXPECT_EQ(counts[1].C(i, j), i == j ? set.H(i, i) : 0);
}

TEST(Accumulate, MatchesRecountFromLoggedAssignments) {
    const RowMatrix x = two_blobs(3, 4);
    const auto set = draw_subsamples(6, 20, 0.5, 9);
    std::vector<std::vector<int>> logged(20);
    auto inner = hierarchical_fn(x, {2});
    auto logging = [&](int k, const std::vector<int>& items) {
        auto out = inner(k, items);
        logged[static_cast<std::size_t>(k)] = out[0];
        return out;
    };
    const auto counts = accumulate_comembership(set, logging, {2}, 0.0);

    CountMatrix oracle = CountMatrix::Zero(6, 6);
    for (int k = 0; k < 20; ++k) {
        const auto& items = set.subsamples[static_cast<std::size_t>(k)];
        const auto& lab = logged[static_cast<std::size_t>(k)];
        for (std::size_t a = 0; a < items.size(); ++a)
            for (std::size_t b = 0; b < items.size(); ++b)
                if (lab[a] == lab[b]) oracle(items[a], items[b]) += 1;
    }
    EXPECT_EQ(counts[0].C, oracle);
}

TEST(Accumulate, BoundedByHAndThreadIndependent) {
    const RowMatrix x = two_blobs(15, 5);
    const auto set = draw_subsamples(30, 40, 0.5, 6);
    const std::vector<int> grid{2, 3, 4, 5};
    const auto serial = accumulate_comembership(set, hierarchical_fn(x, grid), grid, 0.0, 1);
    const auto threaded = accumulate_comembership(set, hierarchical_fn(x, grid), grid, 0.0, 4);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        EXPECT_EQ(serial[g].C, threaded[g].C);
        EXPECT_TRUE((serial[g].C.array() <= set.H.array()).all());
        EXPECT_EQ(serial[g].C.diagonal(), set.H.diagonal());
    }
}

TEST(Accumulate, WrapsFailuresWithTheSubsampleIndex) {
    const auto set = draw_subsamples(10, 8, 0.5, 1);
    auto failing = [](int k, const std::vector<int>& items) -> std::vector<std::vector<int>> {
        if (k == 3 || k == 6) throw std::runtime_error("boom");
        return {std::vector<int>(items.size(), 1)};
    };
    for (unsigned threads : {1u, 4u}) {
        try {
            accumulate_comembership(set, failing, {1}, 0.0, threads);
            FAIL() << "expected a SubsampleError";
        } catch (const SubsampleError& e) {
            EXPECT_EQ(e.index(), 3);
        }
    }
}

TEST(ConsensusMatrix, Ratios) {
    CountMatrix H(2, 2), C(2, 2);
    H << 40, 26, 26, 40;
    C << 40, 13, 13, 40;
    const auto cm = consensus_matrix(C, H);
    EXPECT_DOUBLE_EQ(cm.gamma(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(cm.gamma(0, 0), 1.0);
    EXPECT_TRUE(cm.uncovered.empty());

    const auto ones = consensus_matrix(H, H);
    EXPECT_TRUE((ones.gamma.array() == 1.0).all());
    CountMatrix D = CountMatrix::Zero(2, 2);
    D.diagonal() = H.diagonal();
    EXPECT_EQ(consensus_matrix(D, H).gamma, Eigen::MatrixXd::Identity(2, 2));
}

TEST(ConsensusMatrix, UncoveredPairsAreZeroAndReported) {
    CountMatrix H(3, 3), C(3, 3);
    H << 2, 1, 0, 1, 2, 1, 0, 1, 2;
    C << 2, 1, 0, 1, 2, 0, 0, 0, 2;
    const auto cm = consensus_matrix(C, H);
    EXPECT_EQ(cm.gamma(0, 2), 0.0);
    ASSERT_EQ(cm.uncovered.size(), 1u);
    EXPECT_EQ(cm.uncovered[0], (std::pair<int, int>{0, 2}));
}

TEST(ConsensusMatrix, SingleFullSubsampleIsBinaryComembership) {
    const RowMatrix x = two_blobs(4, 8);
    const auto set = draw_subsamples(8, 1, 1.0, 1);
    const auto counts = accumulate_comembership(set, hierarchical_fn(x, {3}), {3}, 0.0);
    const auto direct = cut(hierarchical(pairwise_distance(DataMatrix(x))), 3);
    const auto gamma = consensus_matrix(counts[0].C, set.H).gamma;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            EXPECT_EQ(gamma(i, j), direct.labels[static_cast<std::size_t>(i)] == direct.labels[static_cast<std::size_t>(j)] ? 1.0 : 0.0);
}

TEST(StableClusters, BlockDiagonalRecovered) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) g(i, j) = (i % 2) == (j % 2) ? 1.0 : 0.0;
    EXPECT_EQ(stable_clusters(g, 2).labels, (std::vector<int>{1, 2, 1, 2, 1, 2}));
    EXPECT_EQ(stable_clusters(Eigen::MatrixXd::Ones(6, 6), 1).labels, std::vector<int>(6, 1));
}

TEST(StableClusters, PerturbedBlocksRecovered) {
    Eigen::MatrixXd g(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) g(i, j) = i == j ? 1.0 : ((i < 3) == (j < 3) ? 0.9 : 0.1);
    for (Linkage l : {Linkage::complete, Linkage::average, Linkage::single})
        EXPECT_EQ(stable_clusters(g, 2, l).labels, (std::vector<int>{1, 1, 1, 2, 2, 2}));
}
