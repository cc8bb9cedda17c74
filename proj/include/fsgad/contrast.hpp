#pragma once

#include "fsgad/autodiff.hpp"
#include "fsgad/matrix.hpp"
#include "fsgad/rng.hpp"
#include "fsgad/sampler.hpp"

#include <stdexcept>
#include <vector>

namespace fsgad {

/// Glorot-uniform init, deterministic per stream.
inline Matrix glorot(Eigen::Index rows, Eigen::Index cols, rng::Stream& stream) {
    double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = (2.0 * stream.uniform() - 1.0) * s;
    return m;
}

/// Shared-weight encoder stack plus the bilinear discriminator matrix.
/// The same weight stack drives both subgraph encoding and target projection,
/// and is shared across the two views.
struct ContrastParams {
    std::vector<Matrix> enc_weights;  // layer 0: d x hidden, then hidden x hidden
    Matrix bilinear;                  // hidden x hidden

    static ContrastParams init(Eigen::Index d, Eigen::Index hidden, int layers,
                               rng::Stream& stream) {
        if (layers < 1) throw std::invalid_argument("contrast: need >= 1 encoder layer");
        ContrastParams p;
        p.enc_weights.push_back(glorot(d, hidden, stream));
        for (int l = 1; l < layers; ++l) p.enc_weights.push_back(glorot(hidden, hidden, stream));
        // Identity start: the discriminator opens as plain dot-product
        // agreement between subgraph and target embeddings.
        p.bilinear = Matrix::Identity(hidden, hidden);
        return p;
    }
};

/// Tape-resident handles to the contrast parameters for one training step.
struct ContrastVars {
    std::vector<ad::Var> enc_weights;
    ad::Var bilinear;

    static ContrastVars attach(ad::Tape& t, const ContrastParams& p) {
        ContrastVars v;
        for (const Matrix& w : p.enc_weights) v.enc_weights.push_back(t.param(w));
        v.bilinear = t.param(p.bilinear);
        return v;
    }
};

/// GCN encoding of one sampled view: layers of relu(A_norm * H * W).
inline ad::Var encode_subgraph(ad::Tape& t, const SubgraphSample& s, const ContrastVars& p) {
    ad::Var adj = t.constant(s.adj_norm);
    ad::Var h = t.constant(s.features);
    for (ad::Var w : p.enc_weights) h = t.relu(t.matmul(adj, t.matmul(h, w)));
    return h;
}

/// Average-pooling readout over subgraph rows (masked target row included).
inline ad::Var readout(ad::Tape& t, ad::Var embeddings) {
    return t.row_mean(embeddings);
}

/// Projects the target's raw feature row through the shared encoder weights:
/// layers of relu(h * W). No adjacency term; operates on the masked node.
inline ad::Var project_target(ad::Tape& t, const RowVec& target_features, const ContrastVars& p) {
    ad::Var h = t.constant(target_features);
    for (ad::Var w : p.enc_weights) h = t.relu(t.matmul(h, w));
    return h;
}

/// sigmoid(e * W_s * h^T), always in (0, 1).
inline ad::Var bilinear_score(ad::Tape& t, ad::Var subgraph_embedding, ad::Var target_embedding,
                              ad::Var bilinear) {
    return t.sigmoid(t.dot(t.matmul(subgraph_embedding, bilinear), target_embedding));
}

/// Binary cross-entropy over one view's scored pairs:
/// -sum_i [y_i log s_i + (1 - y_i) log(1 - s_i)].
inline ad::Var view_bce(ad::Tape& t, const std::vector<ad::Var>& scores,
                        const std::vector<int>& polarity) {
    if (scores.size() != polarity.size())
        throw std::invalid_argument("view_bce: scores/polarity size mismatch");
    ad::Var one = t.constant_scalar(1.0);
    ad::Var total = t.constant_scalar(0.0);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        ad::Var term = polarity[i] ? t.log(scores[i]) : t.log(t.sub(one, scores[i]));
        total = t.add(total, term);
    }
    return t.scale(total, -1.0);
}

/// Two-view node-subgraph loss: alpha * L1 + (1 - alpha) * L2.
inline ad::Var node_subgraph_loss(ad::Tape& t, const std::vector<ad::Var>& scores_v1,
                                  const std::vector<int>& polarity_v1,
                                  const std::vector<ad::Var>& scores_v2,
                                  const std::vector<int>& polarity_v2, double alpha) {
    ad::Var l1 = view_bce(t, scores_v1, polarity_v1);
    ad::Var l2 = view_bce(t, scores_v2, polarity_v2);
    return t.add(t.scale(l1, alpha), t.scale(l2, 1.0 - alpha));
}

/// Cross-view subgraph-subgraph loss:
///   -sum_i log[ exp(e1_i . e2_i) / (exp(e1_i . e1_j) + exp(e1_i . e2_j)) ],
/// j = neg(i). The denominator excludes the positive term, so the loss is
/// unbounded below; evaluated with log-sum-exp stabilization.
inline ad::Var subgraph_subgraph_loss(ad::Tape& t, const std::vector<ad::Var>& view1_embeddings,
                                      const std::vector<ad::Var>& view2_embeddings,
                                      const std::vector<int>& negatives) {
    std::size_t b = view1_embeddings.size();
    if (b < 2 || view2_embeddings.size() != b || negatives.size() != b)
        throw std::invalid_argument("subgraph_subgraph_loss: need matching batches of size >= 2");
    ad::Var total = t.constant_scalar(0.0);
    for (std::size_t i = 0; i < b; ++i) {
        int j = negatives[i];
        ad::Var pos = t.dot(view1_embeddings[i], view2_embeddings[i]);
        ad::Var n1 = t.dot(view1_embeddings[i], view1_embeddings[static_cast<std::size_t>(j)]);
        ad::Var n2 = t.dot(view1_embeddings[i], view2_embeddings[static_cast<std::size_t>(j)]);
        total = t.add(total, t.sub(t.log_sum_exp2(n1, n2), pos));
    }
    return total;
}

/// gamma * L_NS + (1 - gamma) * L_SS.
inline ad::Var contrast_loss(ad::Tape& t, ad::Var node_subgraph, ad::Var subgraph_subgraph,
                             double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("contrast_loss: gamma must be in (0, 1]");
    return t.add(t.scale(node_subgraph, gamma), t.scale(subgraph_subgraph, 1.0 - gamma));
}

}  // namespace fsgad
