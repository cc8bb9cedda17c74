#pragma once

#include "fsgad/autodiff.hpp"
#include "fsgad/contrast.hpp"
#include "fsgad/graph.hpp"
#include "fsgad/matrix.hpp"
#include "fsgad/reconstruct.hpp"
#include "fsgad/rng.hpp"
#include "fsgad/sampler.hpp"

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsgad {

struct TrainConfig {
    double alpha = 0.7;   // view trade-off in the node-subgraph loss
    double gamma = 0.6;   // node-subgraph vs subgraph-subgraph trade-off
    double psi = 0.5;     // contrast vs reconstruction trade-off
    double lambda = 0.5;  // contrast vs reconstruction score mix
    double weight_decay = 0.1;  // L2 on the reconstruction parameters; keeps the
                                // decoder from memorizing desk-scale datasets
    int epochs = 100;
    int batch_size = 128;
    int score_rounds = 16;  // R
    int hidden = 128;
    int contrast_layers = 2;
    SamplerConfig sampler;
    ReconConfig recon;
    ad::AdamConfig adam;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("train: alpha must be in (0,1)");
        // gamma = 1 is admitted as the documented ablation that disables the
        // subgraph-subgraph term.
        if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("train: gamma must be in (0,1]");
        if (psi < 0.0) throw std::invalid_argument("train: psi must be >= 0");
        if (weight_decay < 0.0) throw std::invalid_argument("train: weight_decay must be >= 0");
        if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("train: lambda must be in (0,1)");
        if (epochs < 1 || batch_size < 1) throw std::invalid_argument("train: epochs and batch_size must be >= 1");
        if (score_rounds < 1) throw std::invalid_argument("train: score_rounds must be >= 1");
        if (hidden < 1 || contrast_layers < 1) throw std::invalid_argument("train: bad model dims");
        sampler.validate();
        recon.validate();
    }
};

/// All trainable state.
struct ModelParams {
    ContrastParams contrast;
    ReconParams recon;
    Eigen::Index input_dim = 0;
    Eigen::Index hidden = 0;

    static ModelParams init(Eigen::Index d, const TrainConfig& cfg) {
        rng::Stream stream = rng::derive(cfg.seed, rng::kInit);
        ModelParams p;
        p.input_dim = d;
        p.hidden = cfg.hidden;
        p.contrast = ContrastParams::init(d, cfg.hidden, cfg.contrast_layers, stream);
        p.recon = ReconParams::init(d, cfg.hidden, cfg.recon, stream);
        return p;
    }

    std::vector<Matrix*> contrast_ptrs() {
        std::vector<Matrix*> v;
        for (Matrix& w : contrast.enc_weights) v.push_back(&w);
        v.push_back(&contrast.bilinear);
        return v;
    }

    std::vector<Matrix*> all_ptrs() {
        std::vector<Matrix*> v = contrast_ptrs();
        for (Matrix& w : recon.low_weights) v.push_back(&w);
        for (Matrix& w : recon.high_weights) v.push_back(&w);
        v.push_back(&recon.mlp_weight);
        v.push_back(&recon.mlp_bias);
        return v;
    }
};

/// L = L_con + psi * L_rec.
inline double joint_loss(double contrast_total, double reconstruction, double psi) {
    if (psi < 0.0) throw std::invalid_argument("joint_loss: psi must be >= 0");
    return contrast_total + psi * reconstruction;
}

inline ad::Var joint_loss(ad::Tape& t, ad::Var contrast_total, ad::Var reconstruction, double psi) {
    if (psi < 0.0) throw std::invalid_argument("joint_loss: psi must be >= 0");
    return t.add(contrast_total, t.scale(reconstruction, psi));
}

struct LossRecord {
    double total = 0.0;
    double contrast = 0.0;
    double node_subgraph = 0.0;
    double subgraph_subgraph = 0.0;
    double reconstruction = 0.0;
};

struct TrainResult {
    ModelParams params;
    std::vector<LossRecord> history;  // one record per epoch (summed over batches)
};

namespace detail {

/// Epoch-shuffled batches; a trailing singleton is folded into the previous
/// batch so every batch can form negative pairs.
inline std::vector<std::vector<NodeId>> make_batches(NodeId n, int batch_size,
                                                     std::uint64_t seed, int epoch) {
    std::vector<NodeId> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    rng::Stream stream = rng::derive(seed, rng::kShuffle, static_cast<std::uint64_t>(epoch));
    stream.shuffle(order);
    std::vector<std::vector<NodeId>> batches;
    for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(batch_size)) {
        std::size_t end = std::min(order.size(), i + static_cast<std::size_t>(batch_size));
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    if (batches.size() >= 2 && batches.back().size() == 1) {
        batches[batches.size() - 2].push_back(batches.back()[0]);
        batches.pop_back();
    }
    return batches;
}

/// Plain forward encode used by scoring (no gradients): layers of
/// relu(A * (H * W)).
inline Matrix encode_sample_forward(const SubgraphSample& s, const ContrastParams& p) {
    Matrix h = s.features;
    for (const Matrix& w : p.enc_weights) h = (s.adj_norm * (h * w)).cwiseMax(0.0);
    return h;
}

inline RowVec project_target_forward(const RowVec& x, const ContrastParams& p) {
    RowVec h = x;
    for (const Matrix& w : p.enc_weights) h = (h * w).cwiseMax(0.0).eval();
    return h;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct ReconContext {
    SparseMatrix low_op;       // self-loop normalized adjacency, full graph
    SparseMatrix high_op;      // high-pass operator on the environment subgraph
    SparseMatrix scatter;      // env rows -> full rows
    Matrix env_features;
    NodeSet env_nodes;

    static ReconContext build(const SparseGraph& g, const Matrix& x, const NodeSet& fewshot,
                              const ReconConfig& cfg) {
        ReconContext c;
        c.low_op = sym_normalize(g, /*add_self_loops=*/true);
        auto [sub, block, mapping] = extract_env_subgraph(g, x, fewshot, cfg.M);
        c.high_op = high_pass_filter(sub, cfg.epsilon);
        c.env_features = std::move(block);
        c.env_nodes = std::move(mapping);
        c.scatter = make_scatter(g.n, c.env_nodes);
        return c;
    }

    /// Forward-only reconstruction (scoring path).
    Matrix reconstruct(const Matrix& x, const ReconParams& p) const {
        Matrix hr = x;
        for (const Matrix& w : p.low_weights) hr = low_op.apply(hr * w).cwiseMax(0.0);
        Matrix hf = env_features;
        for (const Matrix& w : p.high_weights) hf = high_op.apply(hf * w).cwiseMax(0.0);
        Matrix fused(x.rows(), hr.cols() + hf.cols());
        fused.leftCols(hr.cols()) = hr;
        fused.rightCols(hf.cols()) = scatter.apply(hf);
        Matrix xhat = fused * p.mlp_weight;
        xhat.rowwise() += p.mlp_bias.row(0);
        return xhat;
    }
};

}  // namespace detail

/// Joint training of the contrastive and reconstruction modules on Eq.-style
/// losses; deterministic given (graph, features, fewshot, cfg.seed).
inline TrainResult train(const SparseGraph& g, const Matrix& x, const NodeSet& fewshot,
                         const TrainConfig& cfg) {
    cfg.validate();
    if (fewshot.empty()) throw std::invalid_argument("train: empty few-shot set");
    for (NodeId s : fewshot.ids)
        if (s < 0 || s >= g.n) throw std::invalid_argument("train: few-shot node out of range");
    if (g.n < 2) throw std::invalid_argument("train: need at least 2 nodes");
    if (x.rows() != g.n) throw std::invalid_argument("train: feature rows != node count");

    TrainResult result;
    result.params = ModelParams::init(x.cols(), cfg);
    ModelParams& params = result.params;

    const bool use_recon = cfg.psi > 0.0;
    detail::ReconContext recon_ctx;
    if (use_recon) recon_ctx = detail::ReconContext::build(g, x, fewshot, cfg.recon);

    ad::AdamState opt(cfg.adam);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        LossRecord rec;
        auto batches = detail::make_batches(g.n, cfg.batch_size, cfg.seed, epoch);
        for (const auto& batch : batches) {
            ad::Tape tape;
            ContrastVars cvars = ContrastVars::attach(tape, params.contrast);

            std::size_t b = batch.size();
            std::vector<ad::Var> e1(b), e2(b), h(b);
            for (std::size_t i = 0; i < b; ++i) {
                NodeId target = batch[i];
                for (int view = 1; view <= 2; ++view) {
                    rng::Stream stream =
                        rng::derive(cfg.seed, rng::kTrainView, static_cast<std::uint64_t>(epoch),
                                    static_cast<std::uint64_t>(target), static_cast<std::uint64_t>(view));
                    SubgraphSample s = make_view(g, x, target, cfg.sampler, stream, view);
                    ad::Var emb = readout(tape, encode_subgraph(tape, s, cvars));
                    (view == 1 ? e1 : e2)[i] = emb;
                }
                // Both views share weights and consume the same raw target
                // row, so the per-view projections coincide; compute once.
                h[i] = project_target(tape, x.row(target), cvars);
            }

            std::vector<int> neg = pair_negatives(b);
            std::vector<ad::Var> scores1, scores2;
            std::vector<int> polarity;
            scores1.reserve(2 * b);
            scores2.reserve(2 * b);
            for (std::size_t i = 0; i < b; ++i) {
                scores1.push_back(bilinear_score(tape, e1[i], h[i], cvars.bilinear));
                scores2.push_back(bilinear_score(tape, e2[i], h[i], cvars.bilinear));
                polarity.push_back(1);
            }
            for (std::size_t i = 0; i < b; ++i) {
                std::size_t j = static_cast<std::size_t>(neg[i]);
                scores1.push_back(bilinear_score(tape, e1[j], h[i], cvars.bilinear));
                scores2.push_back(bilinear_score(tape, e2[j], h[i], cvars.bilinear));
                polarity.push_back(0);
            }
            ad::Var l_ns = node_subgraph_loss(tape, scores1, polarity, scores2, polarity, cfg.alpha);
            ad::Var l_ss = subgraph_subgraph_loss(tape, e1, e2, neg);
            ad::Var l_con = contrast_loss(tape, l_ns, l_ss, cfg.gamma);

            ad::Var loss = l_con;
            double l_rec_value = 0.0;
            ReconVars rvars;
            if (use_recon) {
                rvars = ReconVars::attach(tape, params.recon);
                ad::Var xfull = tape.constant(x);
                ad::Var hr = lowpass_encode(tape, recon_ctx.low_op, xfull, rvars.low_weights);
                ad::Var hf = highpass_encode(tape, recon_ctx.high_op,
                                             tape.constant(recon_ctx.env_features), rvars.high_weights);
                ad::Var fused = fuse(tape, hr, hf, recon_ctx.scatter);
                ad::Var xhat = reconstruct_features(tape, fused, rvars.mlp_weight, rvars.mlp_bias);
                ad::Var l_rec = recon_loss(tape, xhat, xfull);
                l_rec_value = tape.value(l_rec)(0, 0);
                loss = joint_loss(tape, l_con, l_rec, cfg.psi);
            }

            tape.backward(loss);

            std::vector<Matrix*> tracked = use_recon ? params.all_ptrs() : params.contrast_ptrs();
            std::vector<Matrix> grads;
            grads.reserve(tracked.size());
            for (ad::Var v : cvars.enc_weights) grads.push_back(tape.grad(v));
            grads.push_back(tape.grad(cvars.bilinear));
            if (use_recon) {
                for (ad::Var v : rvars.low_weights) grads.push_back(tape.grad(v));
                for (ad::Var v : rvars.high_weights) grads.push_back(tape.grad(v));
                grads.push_back(tape.grad(rvars.mlp_weight));
                grads.push_back(tape.grad(rvars.mlp_bias));
            }
            if (use_recon && cfg.weight_decay > 0.0) {
                // Decay only the reconstruction stack; the contrastive losses
                // are optimized exactly as written.
                std::size_t first_recon = params.contrast_ptrs().size();
                for (std::size_t i = first_recon; i < tracked.size(); ++i)
                    grads[i] += cfg.weight_decay * (*tracked[i]);
            }
            ad::adam_step(tracked, grads, opt);

            rec.total += tape.value(loss)(0, 0);
            rec.contrast += tape.value(l_con)(0, 0);
            rec.node_subgraph += tape.value(l_ns)(0, 0);
            rec.subgraph_subgraph += tape.value(l_ss)(0, 0);
            rec.reconstruction += l_rec_value;
        }
        if (!std::isfinite(rec.total))
            throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch));
        result.history.push_back(rec);
    }
    return result;
}

/// Per-node anomaly scores and their components.
struct ScoreReport {
    std::vector<double> score;      // y_i = lambda * c_i + (1 - lambda) * r_i
    std::vector<double> contrast;   // c_i in [0, 1]
    std::vector<double> recon;      // r_i, min-max normalized over nodes
    std::string config_fingerprint; // filled by the pipeline layer
};

/// Multi-round contrastive scoring mixed with normalized reconstruction
/// error: c_i averages (s_neg - s_pos + 1)/2 over rounds and views; r_i is
/// the min-max normalized squared reconstruction error; y = lambda * c +
/// (1 - lambda) * r.
inline ScoreReport anomaly_scores(const ModelParams& params, const SparseGraph& g, const Matrix& x,
                                  const NodeSet& fewshot, const TrainConfig& cfg) {
    if (cfg.score_rounds < 1) throw std::invalid_argument("anomaly_scores: score_rounds must be >= 1");
    cfg.sampler.validate();
    if (g.n < 2) throw std::invalid_argument("anomaly_scores: need at least 2 nodes");
    if (x.cols() != params.input_dim)
        throw std::invalid_argument("anomaly_scores: feature dim does not match trained model");

    const std::size_t n = static_cast<std::size_t>(g.n);
    std::vector<double> c_sum(n, 0.0);

    Matrix targets(g.n, params.hidden);
    for (NodeId i = 0; i < g.n; ++i)
        targets.row(i) = detail::project_target_forward(x.row(i), params.contrast);

    for (int round = 0; round < cfg.score_rounds; ++round) {
        for (int view = 1; view <= 2; ++view) {
            Matrix embeddings(g.n, params.hidden);
            for (NodeId i = 0; i < g.n; ++i) {
                rng::Stream stream =
                    rng::derive(cfg.seed, rng::kScoreView, static_cast<std::uint64_t>(round),
                                static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(view));
                SubgraphSample s = make_view(g, x, i, cfg.sampler, stream, view);
                Matrix h = detail::encode_sample_forward(s, params.contrast);
                embeddings.row(i) = h.colwise().mean();
            }
            // Fresh negative pairing each round: cyclic shift over a
            // round-shuffled order, so every node's negatives sweep the graph
            // instead of sticking to one fixed partner.
            std::vector<NodeId> order(static_cast<std::size_t>(g.n));
            std::iota(order.begin(), order.end(), 0);
            rng::Stream neg_stream =
                rng::derive(cfg.seed, rng::kScoreNegatives, static_cast<std::uint64_t>(round),
                            static_cast<std::uint64_t>(view));
            neg_stream.shuffle(order);
            std::vector<NodeId> negative_of(static_cast<std::size_t>(g.n));
            for (std::size_t p = 0; p < order.size(); ++p)
                negative_of[static_cast<std::size_t>(order[p])] = order[(p + 1) % order.size()];

            Matrix projected = embeddings * params.contrast.bilinear;  // e_i * W_s
            for (NodeId i = 0; i < g.n; ++i) {
                double s_pos = detail::sigmoid(projected.row(i).dot(targets.row(i)));
                double s_neg = detail::sigmoid(
                    projected.row(negative_of[static_cast<std::size_t>(i)]).dot(targets.row(i)));
                c_sum[static_cast<std::size_t>(i)] += (s_neg - s_pos + 1.0) / 2.0;
            }
        }
    }

    ScoreReport report;
    report.contrast.resize(n);
    double rounds = static_cast<double>(2 * cfg.score_rounds);
    for (std::size_t i = 0; i < n; ++i) report.contrast[i] = c_sum[i] / rounds;

    report.recon.assign(n, 0.0);
    if (cfg.psi > 0.0) {
        // psi = 0 removes the reconstruction module end to end: it is
        // neither trained nor consulted at scoring time.
        detail::ReconContext ctx = detail::ReconContext::build(g, x, fewshot, cfg.recon);
        Matrix xhat = ctx.reconstruct(x, params.recon);
        std::vector<double> err(n);
        for (std::size_t i = 0; i < n; ++i)
            err[i] = (xhat.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(i)))
                         .squaredNorm();
        double lo = *std::min_element(err.begin(), err.end());
        double hi = *std::max_element(err.begin(), err.end());
        for (std::size_t i = 0; i < n; ++i)
            report.recon[i] = hi > lo ? (err[i] - lo) / (hi - lo) : 0.0;
    }

    report.score.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        report.score[i] = cfg.lambda * report.contrast[i] + (1.0 - cfg.lambda) * report.recon[i];
        if (!std::isfinite(report.score[i]))
            throw std::runtime_error("anomaly_scores: non-finite score");
    }
    return report;
}

}  // namespace fsgad
