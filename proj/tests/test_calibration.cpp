#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "concal/calibration.hpp"
#include "concal/consensus.hpp"
#include "oracles.hpp"

using namespace concal;

namespace {

WithinBetweenTallies T(std::int64_t nw, std::int64_t nb, std::int64_t xw, std::int64_t xb) {
    return {xw, xb, nw, nb};
}

ClusterAssignment labels(std::vector<int> l) { return ClusterAssignment::from_labels(l); }

ScoreGrid grid_of(std::vector<double> lambdas, std::vector<int> Gs) {
    ScoreGrid g;
    g.lambdas = lambdas;
    g.Gs = Gs;
    for (double l : lambdas)
        for (int G : Gs) {
            ScoreCell c;
            c.lambda = l;
            c.G = G;
            g.cells.push_back(c);
        }
    return g;
}

}  // namespace

TEST(Tally, OneClusterHasNoBetweenPairs) {
    CountMatrix H(3, 3), C(3, 3);
    H << 5, 3, 2, 3, 5, 4, 2, 4, 5;
    C << 5, 2, 1, 2, 5, 4, 1, 4, 5;
    const auto t = tally(C, H, labels({1, 1, 1}));
    EXPECT_EQ(t.between_pairs, 0);
    EXPECT_EQ(t.between_comembers, 0);
    EXPECT_EQ(t.within_comembers, 2 + 1 + 4);
    EXPECT_EQ(t.within_pairs, 3 + 2 + 4);
    EXPECT_EQ(tally(C, H, labels({1, 2, 3})).within_pairs, 0);
}

TEST(Tally, MatchesDoubleLoopOnFourItems) {
    CountMatrix H(4, 4), C(4, 4);
    H << 6, 3, 2, 4, 3, 5, 3, 2, 2, 3, 6, 3, 4, 2, 3, 7;
    C << 6, 3, 0, 1, 3, 5, 1, 0, 0, 1, 6, 3, 1, 0, 3, 7;
    const auto Z = labels({1, 1, 2, 2});
    std::int64_t xw = 0, xb = 0, nw = 0, nb = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (i >= j) continue;
            const bool same = Z.labels[static_cast<std::size_t>(i)] == Z.labels[static_cast<std::size_t>(j)];
            (same ? xw : xb) += C(i, j);
            (same ? nw : nb) += H(i, j);
        }
    const auto t = tally(C, H, Z);
    EXPECT_EQ(t.within_comembers, xw);
    EXPECT_EQ(t.between_comembers, xb);
    EXPECT_EQ(t.within_pairs, nw);
    EXPECT_EQ(t.between_pairs, nb);
    EXPECT_EQ(xw, 3 + 3);
    EXPECT_EQ(nb, 2 + 4 + 3 + 2);
}

TEST(ConsensusScore, MaximumAtPerfectSeparation) {
    EXPECT_NEAR(consensus_score(T(10, 20, 10, 0)), std::sqrt(30.0), 1e-9);
}

TEST(ConsensusScore, DirectEvaluation) {
    EXPECT_NEAR(consensus_score(T(10, 20, 8, 4)), std::sqrt(10.0), 1e-9);
    EXPECT_NEAR(consensus_score(T(10, 20, 8, 4)), static_cast<double>(oracle::z_statistic(10, 20, 8, 4)), 1e-12);
}

TEST(ConsensusScore, DegenerateCellsAreSentinel) {
    EXPECT_TRUE(is_sentinel(consensus_score(T(10, 20, 0, 0))));
    EXPECT_TRUE(is_sentinel(consensus_score(T(10, 20, 10, 20))));
    EXPECT_TRUE(is_sentinel(consensus_score(T(0, 20, 0, 5))));
    EXPECT_TRUE(is_sentinel(consensus_score(T(10, 0, 5, 0))));
    EXPECT_EQ(consensus_score(T(10, 20, 0, 0)), kScoreSentinel);
}

TEST(ConsensusScore, ExhaustiveBoundAndMonotonicity) {
    for (int nw = 1; nw <= 12; ++nw)
        for (int nb = 1; nb <= 12; ++nb)
            for (int xw = 0; xw <= nw; ++xw)
                for (int xb = 0; xb <= nb; ++xb) {
                    const double s = consensus_score(T(nw, nb, xw, xb));
                    if (is_sentinel(s)) continue;
                    const double bound = std::sqrt(static_cast<double>(nw + nb));
                    ASSERT_LE(s, bound + 1e-9);
                    ASSERT_EQ(std::abs(s - bound) <= 1e-9, xw == nw && xb == 0) << nw << ' ' << nb << ' ' << xw << ' ' << xb;
                    ASSERT_NEAR(s, static_cast<double>(oracle::z_statistic(nw, nb, xw, xb)), 1e-12);
                    if (xw < nw) {
                        const double up = consensus_score(T(nw, nb, xw + 1, xb));
                        if (!is_sentinel(up)) {
                            ASSERT_GE(up, s - 1e-12);
                        }
                    }
                    if (xb < nb) {
                        const double up = consensus_score(T(nw, nb, xw, xb + 1));
                        if (!is_sentinel(up)) {
                            ASSERT_LE(up, s + 1e-12);
                        }
                    }
                }
}

TEST(CdfScores, BinaryConsensusHasNoAmbiguity) {
    Eigen::MatrixXd g(3, 3);
    g << 1, 1, 0, 1, 1, 0, 0, 0, 1;
    EXPECT_EQ(cdf_scores(g).pac, 0.0);
}

TEST(CdfScores, ThreeValues) {
    Eigen::MatrixXd g(3, 3);
    g << 1, 0.05, 0.5, 0.05, 1, 0.95, 0.5, 0.95, 1;
    const EmpiricalCDF cdf(g);
    EXPECT_DOUBLE_EQ(cdf(0.1), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(cdf(0.9), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(cdf_scores(g).pac, 1.0 / 3.0);
    EXPECT_NEAR(cdf_scores(g).area, 1.0 - 1.5 / 3.0, 1e-15);
}

TEST(CdfScores, ConstantHalf) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Constant(5, 5, 0.5);
    g.diagonal().setOnes();
    EXPECT_DOUBLE_EQ(cdf_scores(g).area, 0.5);
    EXPECT_DOUBLE_EQ(cdf_scores(g).pac, 1.0);
}

TEST(CdfScores, AreaIsTheIntegralOfTheStepFunction) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> U(0, 20);
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = i + 1; j < 8; ++j) g(i, j) = g(j, i) = U(rng) / 20.0;
    const EmpiricalCDF cdf(g);
    // Midpoint rule on a fine grid away from the jump points (multiples of 0.05).
    const int steps = 200000;
    double integral = 0.0;
    for (int s = 0; s < steps; ++s) integral += cdf((s + 0.5) / steps) / steps;
    EXPECT_NEAR(cdf.area(), integral, 1e-6);
}

TEST(DeltaScore, FlatCurve) {
    EXPECT_EQ(delta_score({0.5, 0.5, 0.5}), (std::vector<double>{0.5, 0.0, 0.0}));
}

TEST(DeltaScore, RelativeChange) {
    EXPECT_DOUBLE_EQ(delta_score({0.4, 0.6})[1], 0.5);
}

TEST(FillDelta, UsesThePredecessorInTheGrid) {
    auto g = grid_of({1.0}, {2, 3, 5});
    g.at(0, 0).area = 0.4;
    g.at(0, 1).area = 0.6;
    g.at(0, 2).area = 0.7;
    fill_delta(g);
    EXPECT_DOUBLE_EQ(g.at(0, 0).delta, 0.4);
    EXPECT_DOUBLE_EQ(g.at(0, 1).delta, 0.5);
    EXPECT_TRUE(is_sentinel(g.at(0, 2).delta));  // G = 4 missing
}

TEST(Silhouette, SeparatedPairsApproachOne) {
    Eigen::MatrixXd d(4, 4);
    const double far = 1e9;
    d << 0, 1, far, far, 1, 0, far, far, far, far, 0, 1, far, far, 1, 0;
    EXPECT_NEAR(silhouette_score(DistanceMatrix(d), labels({1, 1, 2, 2})), 1.0, 1e-8);
}

TEST(Silhouette, IdenticalPointsScoreZero) {
    EXPECT_EQ(silhouette_score(DistanceMatrix(Eigen::MatrixXd::Zero(4, 4)), labels({1, 1, 2, 2})), 0.0);
}

TEST(Silhouette, FourPointsByHand) {
    // Points 0, 1, 5, 6 on a line, clusters {0,1} and {5,6}:
    // s = 9/11 for the outer points and 7/9 for the inner ones.
    Eigen::MatrixXd d(4, 4);
    const double x[4] = {0, 1, 5, 6};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) d(i, j) = std::abs(x[i] - x[j]);
    EXPECT_NEAR(silhouette_score(DistanceMatrix(d), labels({1, 1, 2, 2})), (9.0 / 11 + 7.0 / 9) / 2, 1e-15);
}

TEST(Silhouette, SingletonsContributeZero) {
    Eigen::MatrixXd d(3, 3);
    d << 0, 1, 4, 1, 0, 4, 4, 4, 0;
    // Items 0 and 1: a = 1, b = 4 -> 3/4 each; item 2 alone -> 0.
    EXPECT_NEAR(silhouette_score(DistanceMatrix(d), labels({1, 1, 2})), 1.5 / 3, 1e-15);
    EXPECT_THROW(silhouette_score(DistanceMatrix(d), labels({1, 1, 1})), InputError);
}

TEST(Calibrate, SingleCell) {
    auto g = grid_of({0.0}, {3});
    g.cells[0].consensus = 1.5;
    const auto cal = calibrate(g, ScoreKind::consensus);
    EXPECT_EQ(cal.status, CalibrationStatus::ok);
    EXPECT_EQ(cal.G, 3);
    EXPECT_EQ(cal.score, 1.5);
}

TEST(Calibrate, TiesGoToSmallerGThenSmallerLambda) {
    auto g = grid_of({0.5, 0.2}, {2, 3});
    for (auto& c : g.cells) c.consensus = 1.0;
    auto cal = calibrate(g, ScoreKind::consensus);
    EXPECT_EQ(cal.G, 2);
    EXPECT_EQ(cal.lambda, 0.2);
    g.at(0, 0).consensus = 0.5;
    g.at(1, 0).consensus = 0.5;
    cal = calibrate(g, ScoreKind::consensus);
    EXPECT_EQ(cal.G, 3);
    EXPECT_EQ(cal.lambda, 0.2);
}

TEST(Calibrate, PacIsMinimised) {
    auto g = grid_of({1.0}, {2, 3, 4});
    g.at(0, 0).pac = 0.3;
    g.at(0, 1).pac = 0.1;
    g.at(0, 2).pac = 0.2;
    EXPECT_EQ(calibrate(g, ScoreKind::pac).G, 3);
}

TEST(Calibrate, AllSentinelMeansNoStableStructure) {
    auto g = grid_of({1.0, 2.0}, {2, 3});
    EXPECT_EQ(calibrate(g, ScoreKind::consensus).status, CalibrationStatus::no_stable_structure);
    EXPECT_EQ(calibrate(g, ScoreKind::silhouette).status, CalibrationStatus::no_stable_structure);
}

TEST(Calibrate, BinaryConsensusCellWins) {
    // One cell whose subsample clusterings always agree with Z; others are noisy.
    auto g = grid_of({0.1, 1.0}, {2, 3});
    const std::int64_t nw = 40, nb = 60;
    g.at(0, 0).tallies = T(nw, nb, 30, 20);
    g.at(0, 1).tallies = T(nw, nb, 25, 15);
    g.at(1, 0).tallies = T(nw, nb, nw, 0);
    g.at(1, 1).tallies = T(nw, nb, 35, 5);
    for (auto& c : g.cells) c.consensus = consensus_score(c.tallies);
    const auto cal = calibrate(g, ScoreKind::consensus);
    EXPECT_EQ(cal.lambda, 1.0);
    EXPECT_EQ(cal.G, 2);
    EXPECT_NEAR(cal.score, std::sqrt(100.0), 1e-12);
}

TEST(ScoreKind, RoundTripsThroughStrings) {
    for (ScoreKind k : {ScoreKind::consensus, ScoreKind::delta, ScoreKind::pac, ScoreKind::silhouette})
        EXPECT_EQ(parse_score_kind(to_string(k)), k);
    EXPECT_THROW(parse_score_kind("gap"), InputError);
}

TEST(ConsensusScore, BinaryConsensusScoresTheSameForAnyG) {
    // Perfectly stable runs at G = 2 and G = 3 over the same co-sampling counts.
    CountMatrix H = CountMatrix::Constant(6, 6, 7);
    H.diagonal().setConstant(12);
    for (const auto& z : {std::vector<int>{1, 1, 1, 2, 2, 2}, std::vector<int>{1, 1, 2, 2, 3, 3}}) {
        CountMatrix C = CountMatrix::Zero(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                if (z[static_cast<std::size_t>(i)] == z[static_cast<std::size_t>(j)]) C(i, j) = H(i, j);
        EXPECT_NEAR(consensus_score(tally(C, H, labels(z))), std::sqrt(15.0 * 7.0), 1e-12);
    }
}

TEST(CdfScores, NonDecreasingAndBounded) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Identity(7, 7);
        for (int i = 0; i < 7; ++i)
            for (int j = i + 1; j < 7; ++j) g(i, j) = g(j, i) = U(rng);
        const EmpiricalCDF cdf(g);
        double prev = 0.0;
        for (int s = 0; s <= 100; ++s) {
            const double v = cdf(s / 100.0);
            ASSERT_GE(v, prev);
            prev = v;
        }
        EXPECT_EQ(cdf(1.0), 1.0);
        const auto sc = cdf_scores(g);
        EXPECT_GE(sc.pac, 0.0);
        EXPECT_LE(sc.pac, 1.0);
        EXPECT_GE(sc.area, 0.0);
        EXPECT_LE(sc.area, 1.0);
    }
}
