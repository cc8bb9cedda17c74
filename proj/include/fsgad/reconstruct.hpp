#pragma once

#include "fsgad/autodiff.hpp"
#include "fsgad/contrast.hpp"
#include "fsgad/graph.hpp"
#include "fsgad/matrix.hpp"

#include <stdexcept>
#include <tuple>
#include <vector>

namespace fsgad {

struct ReconConfig {
    int M = 5;            // environment-subgraph neighborhood order
    double epsilon = 0.5; // high-pass filter epsilon
    int low_depth = 2;
    int high_depth = 5;

    void validate() const {
        if (M < 1) throw std::invalid_argument("recon: M must be >= 1");
        if (epsilon < 0.0) throw std::invalid_argument("recon: epsilon must be >= 0");
        if (low_depth < 1 || high_depth < 1)
            throw std::invalid_argument("recon: encoder depths must be >= 1");
    }
};

/// Low-pass stack (original graph), high-pass stack (environment subgraph),
/// and the single-layer reconstruction MLP over the fused embedding.
struct ReconParams {
    std::vector<Matrix> low_weights;   // low_depth layers, d -> hidden -> ...
    std::vector<Matrix> high_weights;  // high_depth layers, d -> hidden -> ...
    Matrix mlp_weight;                 // 2*hidden x d
    Matrix mlp_bias;                   // 1 x d

    static ReconParams init(Eigen::Index d, Eigen::Index hidden, const ReconConfig& cfg,
                            rng::Stream& stream) {
        cfg.validate();
        ReconParams p;
        p.low_weights.push_back(glorot(d, hidden, stream));
        for (int l = 1; l < cfg.low_depth; ++l) p.low_weights.push_back(glorot(hidden, hidden, stream));
        p.high_weights.push_back(glorot(d, hidden, stream));
        for (int l = 1; l < cfg.high_depth; ++l) p.high_weights.push_back(glorot(hidden, hidden, stream));
        p.mlp_weight = glorot(2 * hidden, d, stream);
        p.mlp_bias = Matrix::Zero(1, d);
        return p;
    }
};

struct ReconVars {
    std::vector<ad::Var> low_weights;
    std::vector<ad::Var> high_weights;
    ad::Var mlp_weight;
    ad::Var mlp_bias;

    static ReconVars attach(ad::Tape& t, const ReconParams& p) {
        ReconVars v;
        for (const Matrix& w : p.low_weights) v.low_weights.push_back(t.param(w));
        for (const Matrix& w : p.high_weights) v.high_weights.push_back(t.param(w));
        v.mlp_weight = t.param(p.mlp_weight);
        v.mlp_bias = t.param(p.mlp_bias);
        return v;
    }
};

/// Environment subgraph: the induced subgraph over the M-order neighborhood
/// of the few-shot labeled nodes, with its feature block and mapping.
inline std::tuple<SparseGraph, Matrix, NodeSet> extract_env_subgraph(const SparseGraph& g,
                                                                     const Matrix& features,
                                                                     const NodeSet& fewshot,
                                                                     int order) {
    if (fewshot.empty()) throw std::invalid_argument("extract_env_subgraph: empty few-shot set");
    NodeSet env = k_hop_neighborhood(g, fewshot, order);
    auto [sub, mapping] = induced_subgraph(g, env);
    Matrix block(static_cast<Eigen::Index>(mapping.size()), features.cols());
    for (std::size_t i = 0; i < mapping.ids.size(); ++i)
        block.row(static_cast<Eigen::Index>(i)) = features.row(mapping.ids[i]);
    return {std::move(sub), std::move(block), std::move(mapping)};
}

/// Low-pass encoding on the original graph: layers of relu(A_norm * H * W).
inline ad::Var lowpass_encode(ad::Tape& t, const SparseMatrix& adj_norm, ad::Var features,
                              const std::vector<ad::Var>& weights) {
    ad::Var h = features;
    for (ad::Var w : weights) h = t.relu(t.spmm(adj_norm, t.matmul(h, w)));
    return h;
}

/// High-pass encoding on the environment subgraph: layers of relu(F_H * H * W).
inline ad::Var highpass_encode(ad::Tape& t, const SparseMatrix& high_pass, ad::Var features,
                               const std::vector<ad::Var>& weights) {
    ad::Var h = features;
    for (ad::Var w : weights) h = t.relu(t.spmm(high_pass, t.matmul(h, w)));
    return h;
}

/// Same forward as highpass_encode, recording the mean row-wise variance of
/// the representation after each layer. Diagnostic only (over-smoothing
/// probe); nothing is asserted on it.
inline Matrix highpass_row_variances(const SparseMatrix& high_pass, const Matrix& features,
                                     const std::vector<Matrix>& weights,
                                     std::vector<double>& per_layer_variance) {
    per_layer_variance.clear();
    Matrix h = features;
    for (const Matrix& w : weights) {
        h = high_pass.apply(h * w).cwiseMax(0.0);
        RowVec mean = h.colwise().mean();
        double var = (h.rowwise() - mean).array().square().mean();
        per_layer_variance.push_back(var);
    }
    return h;
}

/// Scatter matrix lifting environment-subgraph rows back to full-graph rows;
/// rows for nodes outside the subgraph are entirely empty (exact zeros).
inline SparseMatrix make_scatter(NodeId n, const NodeSet& mapping) {
    SparseMatrix s;
    s.rows = n;
    s.cols = static_cast<NodeId>(mapping.size());
    s.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    for (NodeId i = 0; i < n; ++i) {
        std::size_t local = mapping.local_index(i);
        if (local < mapping.size()) {
            s.col_idx.push_back(static_cast<NodeId>(local));
            s.values.push_back(1.0);
        }
        s.row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<NodeId>(s.col_idx.size());
    }
    return s;
}

/// Column-concatenation [H_r || scatter(H_f)]: nodes outside the environment
/// subgraph carry exact zeros in the H_f half.
inline ad::Var fuse(ad::Tape& t, ad::Var low_embeddings, ad::Var high_embeddings,
                    const SparseMatrix& scatter) {
    return t.concat_cols(low_embeddings, t.spmm(scatter, high_embeddings));
}

/// Single-layer MLP decode: X_hat = H * W + b (linear output).
inline ad::Var reconstruct_features(ad::Tape& t, ad::Var fused, ad::Var mlp_weight,
                                    ad::Var mlp_bias) {
    return t.add_rowvec(t.matmul(fused, mlp_weight), mlp_bias);
}

/// MSE over nodes: (1/N) * sum_i ||xhat_i - x_i||^2.
inline ad::Var recon_loss(ad::Tape& t, ad::Var reconstructed, ad::Var original) {
    const Matrix& a = t.value(reconstructed);
    const Matrix& b = t.value(original);
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("recon_loss: shape mismatch");
    ad::Var diff = t.sub(reconstructed, original);
    return t.scale(t.sum(t.square(diff)), 1.0 / static_cast<double>(a.rows()));
}

}  // namespace fsgad
