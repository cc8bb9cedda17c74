#include "fsgad/reconstruct.hpp"

#include "gradcheck.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace fsgad;
using ad::Tape;
using ad::Var;

namespace {

TEST(ExtractEnvSubgraphTest, SaturatesToWholeGraph) {
    SparseGraph g = testutil::random_graph(15, 0.3, 1);
    Matrix x = testutil::random_matrix(15, 3, 2);
    auto [sub, block, mapping] = extract_env_subgraph(g, x, NodeSet::of({0, 7}), 15);
    // A 15-hop ball covers every node reachable from the seeds.
    auto reach = testutil::khop_oracle(g, {0, 7}, 15);
    EXPECT_EQ(mapping.ids, reach);
}

TEST(ExtractEnvSubgraphTest, OrderZeroSingleton) {
    SparseGraph g = testutil::random_graph(10, 0.4, 3);
    Matrix x = testutil::random_matrix(10, 3, 4);
    auto [sub, block, mapping] = extract_env_subgraph(g, x, NodeSet::of({6}), 0);
    EXPECT_EQ(sub.n, 1);
    EXPECT_EQ(mapping.ids, std::vector<NodeId>{6});
    EXPECT_TRUE(block.isApprox(x.row(6), 0));
}

TEST(ExtractEnvSubgraphTest, EmptyFewshotErrors) {
    SparseGraph g = testutil::random_graph(5, 0.5, 5);
    Matrix x = testutil::random_matrix(5, 2, 6);
    EXPECT_THROW(extract_env_subgraph(g, x, NodeSet{}, 2), std::invalid_argument);
}

TEST(ExtractEnvSubgraphTest, MatchesReachabilityOracle) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SparseGraph g = testutil::random_graph(30, 0.07, 10 + seed);
        Matrix x = testutil::random_matrix(30, 2, 20 + seed);
        std::vector<NodeId> seeds = {static_cast<NodeId>(seed), static_cast<NodeId>(29 - seed)};
        auto [sub, block, mapping] = extract_env_subgraph(g, x, NodeSet::of(seeds), 2);
        EXPECT_EQ(mapping.ids, testutil::khop_oracle(g, seeds, 2));
        for (std::size_t i = 0; i < mapping.ids.size(); ++i)
            EXPECT_TRUE(block.row(static_cast<Eigen::Index>(i)).isApprox(x.row(mapping.ids[i]), 0));
    }
}

TEST(LowpassEncodeTest, ZeroWeightsGiveZero) {
    SparseGraph g = testutil::random_graph(10, 0.3, 30);
    SparseMatrix op = sym_normalize(g, true);
    Tape t;
    Var x = t.constant(testutil::random_matrix(10, 4, 31));
    std::vector<Var> w = {t.param(Matrix::Zero(4, 3)), t.param(Matrix::Zero(3, 3))};
    EXPECT_EQ(ad::evaluate(lowpass_encode(t, op, x, w)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(LowpassEncodeTest, IdentityAdjacencyMeansNoMixing) {
    // Empty graph + self-loops: each node transforms independently.
    SparseGraph g = SparseGraph::from_edges(6, {});
    SparseMatrix op = sym_normalize(g, true);
    Matrix x = testutil::random_matrix(6, 3, 32);
    Matrix w0 = testutil::random_matrix(3, 4, 33);
    Matrix w1 = testutil::random_matrix(4, 4, 34);
    Tape t;
    std::vector<Var> w = {t.param(w0), t.param(w1)};
    Matrix got = ad::evaluate(lowpass_encode(t, op, t.constant(x), w));
    for (NodeId i = 0; i < 6; ++i) {
        Matrix row = ((x.row(i) * w0).cwiseMax(0.0) * w1).cwiseMax(0.0);
        EXPECT_LT((got.row(i) - row).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(LowpassEncodeTest, MatchesDenseOracle) {
    SparseGraph g = testutil::random_graph(12, 0.25, 35);
    SparseMatrix op = sym_normalize(g, true);
    Matrix x = testutil::random_matrix(12, 5, 36);
    Matrix w0 = testutil::random_matrix(5, 4, 37);
    Matrix w1 = testutil::random_matrix(4, 4, 38);
    Tape t;
    std::vector<Var> w = {t.param(w0), t.param(w1)};
    Matrix got = ad::evaluate(lowpass_encode(t, op, t.constant(x), w));
    Matrix dense = op.dense();
    Matrix want = (dense * (x * w0)).cwiseMax(0.0);
    want = (dense * (want * w1)).cwiseMax(0.0);
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HighpassEncodeTest, ZeroWeightsGiveZero) {
    SparseGraph g = testutil::random_graph(10, 0.3, 40);
    SparseMatrix op = high_pass_filter(g, 0.5);
    Tape t;
    Var x = t.constant(testutil::random_matrix(10, 4, 41));
    std::vector<Var> w = {t.param(Matrix::Zero(4, 3))};
    EXPECT_EQ(ad::evaluate(highpass_encode(t, op, x, w)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(HighpassEncodeTest, EpsilonOnePropagatesWithLaplacian) {
    SparseGraph g = testutil::random_graph(9, 0.35, 42);
    SparseMatrix hp = high_pass_filter(g, 1.0);
    SparseMatrix lap = laplacian(g);
    Matrix x = testutil::random_matrix(9, 3, 43);
    Matrix w0 = testutil::random_matrix(3, 3, 44);
    Tape t1, t2;
    std::vector<Var> wa = {t1.param(w0)}, wb = {t2.param(w0)};
    Matrix a = ad::evaluate(highpass_encode(t1, hp, t1.constant(x), wa));
    Matrix b = ad::evaluate(highpass_encode(t2, lap, t2.constant(x), wb));
    EXPECT_TRUE(a.isApprox(b, 0));  // identical operators, bitwise
}

TEST(HighpassEncodeTest, MatchesDenseOracleFiveLayers) {
    SparseGraph g = testutil::random_graph(11, 0.3, 45);
    SparseMatrix op = high_pass_filter(g, 0.5);
    Matrix x = testutil::random_matrix(11, 4, 46);
    std::vector<Matrix> ws = {testutil::random_matrix(4, 3, 47)};
    for (int l = 1; l < 5; ++l) ws.push_back(testutil::random_matrix(3, 3, 47 + l));
    Tape t;
    std::vector<Var> w;
    for (const Matrix& m : ws) w.push_back(t.param(m));
    Matrix got = ad::evaluate(highpass_encode(t, op, t.constant(x), w));
    Matrix dense = op.dense();
    Matrix want = x;
    for (const Matrix& m : ws) want = (dense * (want * m)).cwiseMax(0.0);
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FuseTest, OutsideNodesCarryExactZeros) {
    SparseGraph g = testutil::random_graph(20, 0.1, 50);
    Matrix x = testutil::random_matrix(20, 3, 51);
    auto [sub, block, mapping] = extract_env_subgraph(g, x, NodeSet::of({0}), 1);
    SparseMatrix scatter = make_scatter(g.n, mapping);
    Tape t;
    Var hr = t.constant(testutil::random_matrix(20, 4, 52));
    Var hf = t.constant(testutil::random_matrix(static_cast<Eigen::Index>(mapping.size()), 4, 53));
    Matrix fused = ad::evaluate(fuse(t, hr, hf, scatter));
    ASSERT_EQ(fused.cols(), 8);
    for (NodeId i = 0; i < g.n; ++i) {
        if (!mapping.contains(i)) {
            for (Eigen::Index j = 4; j < 8; ++j) EXPECT_EQ(fused(i, j), 0.0);  // bitwise zero
        }
    }
}

TEST(FuseTest, WholeGraphEnvironmentHasNoPadding) {
    SparseGraph g = testutil::random_graph(8, 0.9, 54);
    Matrix x = testutil::random_matrix(8, 3, 55);
    auto [sub, block, mapping] = extract_env_subgraph(g, x, NodeSet::of({0}), 8);
    ASSERT_EQ(mapping.size(), 8u);
    SparseMatrix scatter = make_scatter(g.n, mapping);
    Tape t;
    Matrix hf_in = (testutil::random_matrix(8, 3, 56).array().abs() + 0.1).matrix();
    Matrix fused = ad::evaluate(fuse(t, t.constant(x), t.constant(hf_in), scatter));
    EXPECT_GT(fused.rightCols(3).cwiseAbs().minCoeff(), 0.0);
}

TEST(FuseTest, MatchesScatterOracleIndexByIndex) {
    SparseGraph g = testutil::random_graph(15, 0.15, 57);
    Matrix x = testutil::random_matrix(15, 2, 58);
    auto [sub, block, mapping] = extract_env_subgraph(g, x, NodeSet::of({3, 9}), 1);
    SparseMatrix scatter = make_scatter(g.n, mapping);
    Matrix hr = testutil::random_matrix(15, 3, 59);
    Matrix hf = testutil::random_matrix(static_cast<Eigen::Index>(mapping.size()), 3, 60);
    Tape t;
    Matrix fused = ad::evaluate(fuse(t, t.constant(hr), t.constant(hf), scatter));
    for (NodeId i = 0; i < g.n; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) {
            EXPECT_EQ(fused(i, j), hr(i, j));
            std::size_t local = mapping.local_index(i);
            double want = local < mapping.size() ? hf(static_cast<Eigen::Index>(local), j) : 0.0;
            EXPECT_EQ(fused(i, 3 + j), want);
        }
    }
}

TEST(ReconstructFeaturesTest, ZeroWeightsGiveZero) {
    Tape t;
    Var h = t.constant(testutil::random_matrix(6, 4, 61));
    Var xhat = reconstruct_features(t, h, t.param(Matrix::Zero(4, 3)), t.param(Matrix::Zero(1, 3)));
    EXPECT_EQ(ad::evaluate(xhat).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ReconstructFeaturesTest, IdentityPassthrough) {
    Tape t;
    Matrix h = testutil::random_matrix(5, 3, 62);
    Var xhat = reconstruct_features(t, t.constant(h), t.param(Matrix::Identity(3, 3)),
                                    t.param(Matrix::Zero(1, 3)));
    EXPECT_TRUE(ad::evaluate(xhat).isApprox(h, 1e-15));
}

TEST(ReconstructFeaturesTest, MatchesDenseOracle) {
    Tape t;
    Matrix h = testutil::random_matrix(7, 6, 63);
    Matrix w = testutil::random_matrix(6, 4, 64);
    Matrix b = testutil::random_matrix(1, 4, 65);
    Matrix got = ad::evaluate(reconstruct_features(t, t.constant(h), t.param(w), t.param(b)));
    Matrix want = h * w;
    want.rowwise() += b.row(0);
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(ReconLossTest, PerfectReconstructionIsZero) {
    Tape t;
    Matrix x = testutil::random_matrix(5, 4, 66);
    EXPECT_EQ(ad::evaluate(recon_loss(t, t.constant(x), t.constant(x)))(0, 0), 0.0);
}

TEST(ReconLossTest, SingleNodeUnitErrors) {
    Tape t;
    Matrix a(1, 2), b(1, 2);
    a << 1, 1;
    b << 0, 0;
    EXPECT_DOUBLE_EQ(ad::evaluate(recon_loss(t, t.constant(a), t.constant(b)))(0, 0), 2.0);
}

TEST(ReconLossTest, MatchesScalarOracle) {
    Matrix a = testutil::random_matrix(8, 5, 67);
    Matrix b = testutil::random_matrix(8, 5, 68);
    Tape t;
    double got = ad::evaluate(recon_loss(t, t.constant(a), t.constant(b)))(0, 0);
    double want = 0.0;
    for (Eigen::Index i = 0; i < 8; ++i) want += (a.row(i) - b.row(i)).squaredNorm();
    want /= 8.0;
    EXPECT_NEAR(got, want, 1e-12);
}

TEST(ReconLossTest, ShapeMismatchThrows) {
    Tape t;
    EXPECT_THROW(
        recon_loss(t, t.constant(Matrix::Zero(2, 2)), t.constant(Matrix::Zero(2, 3))),
        std::invalid_argument);
}

TEST(ReceptiveFieldTest, SeedPerturbationStaysWithinDepthHops) {
    SparseGraph g = testutil::random_graph(60, 0.04, 70);
    Matrix x = testutil::random_matrix(60, 3, 71);
    NodeId seed_node = 12;
    int depth = 3;  // high-pass depth == M so field and neighborhood agree
    auto [sub, block, mapping] = extract_env_subgraph(g, x, NodeSet::of({seed_node}), depth);
    SparseMatrix hp = high_pass_filter(sub, 0.5);

    std::vector<Matrix> ws = {testutil::random_matrix(3, 4, 72)};
    for (int l = 1; l < depth; ++l) ws.push_back(testutil::random_matrix(4, 4, 72 + l));

    auto forward = [&](const Matrix& feats) {
        Matrix h = feats;
        for (const Matrix& w : ws) h = hp.apply(h * w).cwiseMax(0.0);
        return h;
    };
    Matrix base = forward(block);
    Matrix perturbed_block = block;
    std::size_t local_seed = mapping.local_index(seed_node);
    perturbed_block.row(static_cast<Eigen::Index>(local_seed)).array() += 1.0;
    Matrix changed = forward(perturbed_block);

    NodeSet ball = k_hop_neighborhood(g, NodeSet::of({seed_node}), depth);
    for (std::size_t i = 0; i < mapping.ids.size(); ++i) {
        bool altered = (base.row(static_cast<Eigen::Index>(i)) -
                        changed.row(static_cast<Eigen::Index>(i)))
                           .cwiseAbs()
                           .maxCoeff() > 0.0;
        if (altered) EXPECT_TRUE(ball.contains(mapping.ids[i]));
    }
}

TEST(OverSmoothingProbeTest, ExposesPerLayerRowVariance) {
    SparseGraph g = testutil::random_graph(25, 0.15, 80);
    SparseMatrix hp = high_pass_filter(g, 0.5);
    Matrix x = testutil::random_matrix(25, 4, 81);
    std::vector<Matrix> ws = {testutil::random_matrix(4, 4, 82),
                              testutil::random_matrix(4, 4, 83),
                              testutil::random_matrix(4, 4, 84)};
    std::vector<double> variances;
    Matrix h = highpass_row_variances(hp, x, ws, variances);
    ASSERT_EQ(variances.size(), 3u);
    for (double v : variances) EXPECT_GE(v, 0.0);
    // The returned representation matches the plain forward pass.
    Matrix want = x;
    for (const Matrix& w : ws) want = hp.apply(want * w).cwiseMax(0.0);
    EXPECT_TRUE(h.isApprox(want, 0));
}

TEST(ReconGradcheckTest, FullReconstructionLossPassesFiniteDifferences) {
    SparseGraph g = testutil::random_graph(10, 0.25, 90);
    Matrix x = testutil::random_matrix(10, 3, 91);
    auto [sub, block, mapping] = extract_env_subgraph(g, x, NodeSet::of({2}), 2);
    SparseMatrix low = sym_normalize(g, true);
    SparseMatrix hp = high_pass_filter(sub, 0.5);
    SparseMatrix scatter = make_scatter(g.n, mapping);
    Matrix env = block;

    auto build = [&](Tape& t, const std::vector<Var>& v) {
        std::vector<Var> low_w = {v[0], v[1]};
        std::vector<Var> high_w = {v[2], v[3]};
        Var xfull = t.constant(x);
        Var hr = lowpass_encode(t, low, xfull, low_w);
        Var hf = highpass_encode(t, hp, t.constant(env), high_w);
        Var fused = fuse(t, hr, hf, scatter);
        Var xhat = reconstruct_features(t, fused, v[4], v[5]);
        return recon_loss(t, xhat, xfull);
    };
    std::vector<Matrix> inputs = {testutil::random_matrix(3, 4, 92, 0.5),
                                  testutil::random_matrix(4, 4, 93, 0.5),
                                  testutil::random_matrix(3, 4, 94, 0.5),
                                  testutil::random_matrix(4, 4, 95, 0.5),
                                  testutil::random_matrix(8, 3, 96, 0.5),
                                  testutil::random_matrix(1, 3, 97, 0.5)};
    auto r = testutil::gradcheck(build, inputs);
    EXPECT_LT(r.max_rel_err, 1e-4) << r.where;
}

}  // namespace
