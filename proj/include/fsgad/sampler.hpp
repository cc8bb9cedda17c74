#pragma once

#include "fsgad/graph.hpp"
#include "fsgad/matrix.hpp"
#include "fsgad/rng.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace fsgad {

struct SamplerConfig {
    int K = 8;              // subgraph node budget
    double restart_p = 0.5; // restart probability per step
    int max_steps = 3200;   // walk-step cap (default 400 * K)
    std::uint64_t seed = 0; // global seed; per-target streams derive from it

    void validate() const {
        if (K < 1) throw std::invalid_argument("sampler: K must be >= 1");
        if (!(restart_p > 0.0 && restart_p <= 1.0))
            throw std::invalid_argument("sampler: restart_p must be in (0, 1]");
        if (max_steps < K) throw std::invalid_argument("sampler: max_steps must be >= K");
    }
};

/// One RWR-sampled, target-masked, renormalized view of one target node.
/// Local node 0 is always the target; its feature row is zeroed.
struct SubgraphSample {
    NodeId target = -1;
    std::vector<NodeId> nodes;  // target first, remaining nodes sorted
    Matrix adj_norm;            // self-loop normalized induced adjacency
    Matrix features;            // |nodes| x d, row 0 zeroed
    int view_id = 1;
};

/// Distinct nodes visited by a random walk that restarts to `target` with
/// probability restart_p each step; stops after K distinct nodes or
/// max_steps steps. Always contains the target.
inline std::vector<NodeId> rwr_sample(const SparseGraph& g, NodeId target,
                                      const SamplerConfig& cfg, rng::Stream& stream) {
    if (target < 0 || target >= g.n) throw std::invalid_argument("rwr_sample: target out of range");
    cfg.validate();
    std::vector<NodeId> visited{target};
    if (cfg.K == 1) return visited;
    NodeId cur = target;
    for (int step = 0; step < cfg.max_steps; ++step) {
        if (stream.uniform() < cfg.restart_p) {
            cur = target;
        } else {
            auto nb = g.neighbors(cur);
            if (nb.empty()) {
                cur = target;
            } else {
                cur = nb[static_cast<std::size_t>(stream.uniform_int(nb.size()))];
            }
        }
        if (std::find(visited.begin(), visited.end(), cur) == visited.end()) {
            visited.push_back(cur);
            if (static_cast<int>(visited.size()) == cfg.K) break;
        }
    }
    return visited;
}

/// rwr_sample -> induced subgraph (target-first order) -> self-loop
/// normalization -> target feature row masked to zero.
inline SubgraphSample make_view(const SparseGraph& g, const Matrix& features, NodeId target,
                                const SamplerConfig& cfg, rng::Stream& stream, int view_id) {
    std::vector<NodeId> walk = rwr_sample(g, target, cfg, stream);
    std::sort(walk.begin() + 1, walk.end());

    SubgraphSample s;
    s.target = target;
    s.nodes = std::move(walk);
    s.view_id = view_id;
    s.adj_norm = sym_normalize(induced_subgraph_ordered(g, s.nodes), /*add_self_loops=*/true).dense();
    s.features.resize(static_cast<Eigen::Index>(s.nodes.size()), features.cols());
    s.features.row(0).setZero();
    for (std::size_t i = 1; i < s.nodes.size(); ++i) s.features.row(static_cast<Eigen::Index>(i)) = features.row(s.nodes[i]);
    return s;
}

/// Cyclic-shift negative pairing: sample i's negative is sample (i+1) mod B.
/// Never maps an index to itself.
inline std::vector<int> pair_negatives(std::size_t batch_size) {
    if (batch_size < 2) throw std::invalid_argument("pair_negatives: need batch size >= 2");
    std::vector<int> neg(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) neg[i] = static_cast<int>((i + 1) % batch_size);
    return neg;
}

}  // namespace fsgad
