#pragma once

#include "fsgad/graph.hpp"
#include "fsgad/matrix.hpp"
#include "fsgad/rng.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace fsgad {

struct InjectionSpec {
    int clique_size = 15;     // m
    int clique_count = 0;     // q, derived by inject()
    int attribute_count = 0;  // derived by inject()
    int candidate_pool = 50;  // k_cand for attribute swaps
    std::uint64_t seed = 0;

    void validate(NodeId n) const {
        if (clique_size < 2) throw std::invalid_argument("inject: clique_size must be >= 2");
        long planted = static_cast<long>(clique_size) * clique_count + attribute_count;
        if (planted > n) throw std::invalid_argument("inject: more anomalies than nodes");
    }
};

namespace detail {

/// First `count` entries of a seeded shuffle of nodes not in `exclude`.
inline std::vector<NodeId> draw_nodes(NodeId n, std::size_t count, const std::vector<bool>& exclude,
                                      rng::Stream& stream) {
    std::vector<NodeId> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (NodeId i = 0; i < n; ++i)
        if (!exclude[static_cast<std::size_t>(i)]) pool.push_back(i);
    if (pool.size() < count) throw std::invalid_argument("inject: not enough unlabeled nodes");
    stream.shuffle(pool);
    pool.resize(count);
    return pool;
}

}  // namespace detail

/// Plants `clique_count` disjoint cliques of `clique_size` random nodes;
/// every member is labeled anomalous. No existing edge is removed.
inline std::pair<SparseGraph, NodeSet> inject_structural(const SparseGraph& g,
                                                         const InjectionSpec& spec,
                                                         rng::Stream& stream) {
    spec.validate(g.n);
    std::size_t need = static_cast<std::size_t>(spec.clique_size) * static_cast<std::size_t>(spec.clique_count);
    std::vector<bool> exclude(static_cast<std::size_t>(g.n), false);
    std::vector<NodeId> members = detail::draw_nodes(g.n, need, exclude, stream);

    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(g.col_idx.size() / 2 + need * static_cast<std::size_t>(spec.clique_size));
    for (NodeId u = 0; u < g.n; ++u)
        for (NodeId v : g.neighbors(u))
            if (u < v) edges.emplace_back(u, v);
    for (int c = 0; c < spec.clique_count; ++c) {
        const NodeId* grp = members.data() + static_cast<std::size_t>(c) * spec.clique_size;
        for (int i = 0; i < spec.clique_size; ++i)
            for (int j = i + 1; j < spec.clique_size; ++j) edges.emplace_back(grp[i], grp[j]);
    }
    return {SparseGraph::from_edges(g.n, edges), NodeSet::of(members)};
}

/// For each selected node i, samples candidate_pool distinct other nodes,
/// finds the candidate j with the largest Euclidean feature distance, and
/// overwrites x_i with x_j; i is labeled anomalous.
inline std::pair<Matrix, NodeSet> inject_attribute(const Matrix& x, const SparseGraph& g,
                                                   const InjectionSpec& spec, rng::Stream& stream,
                                                   const std::vector<bool>& exclude) {
    spec.validate(g.n);
    if (spec.candidate_pool >= g.n)
        throw std::invalid_argument("inject: candidate_pool must be < node count");
    std::vector<NodeId> selected =
        detail::draw_nodes(g.n, static_cast<std::size_t>(spec.attribute_count), exclude, stream);

    Matrix out = x;
    for (NodeId i : selected) {
        // candidate_pool distinct nodes != i
        std::vector<NodeId> pool;
        pool.reserve(static_cast<std::size_t>(g.n) - 1);
        for (NodeId v = 0; v < g.n; ++v)
            if (v != i) pool.push_back(v);
        stream.shuffle(pool);
        pool.resize(static_cast<std::size_t>(spec.candidate_pool));

        NodeId best = pool[0];
        double best_dist = -1.0;
        for (NodeId j : pool) {
            double d = (x.row(i) - x.row(j)).squaredNorm();
            if (d > best_dist) {
                best_dist = d;
                best = j;
            }
        }
        out.row(i) = x.row(best);
    }
    return {std::move(out), NodeSet::of(selected)};
}

inline std::pair<Matrix, NodeSet> inject_attribute(const Matrix& x, const SparseGraph& g,
                                                   const InjectionSpec& spec, rng::Stream& stream) {
    return inject_attribute(x, g, spec, stream,
                            std::vector<bool>(static_cast<std::size_t>(g.n), false));
}

struct InjectedDataset {
    SparseGraph graph;
    Matrix features;
    std::vector<int> labels;  // 1 = anomalous
    NodeSet structural;
    NodeSet attribute;
};

/// Plants total/2 structural anomalies (total/(2m) cliques) and total/2
/// attribute anomalies on disjoint node sets.
inline InjectedDataset inject(const SparseGraph& g, const Matrix& x, int total_anomalies,
                              InjectionSpec spec) {
    if (total_anomalies < 2 || total_anomalies % (2 * spec.clique_size) != 0)
        throw std::invalid_argument(
            "inject: total_anomalies must be a positive multiple of 2*clique_size (" +
            std::to_string(2 * spec.clique_size) + "); half become " +
            std::to_string(spec.clique_size) + "-cliques and half become attribute swaps");
    spec.clique_count = total_anomalies / (2 * spec.clique_size);
    spec.attribute_count = total_anomalies / 2;
    spec.validate(g.n);

    rng::Stream stream = rng::derive(spec.seed, rng::kInject);
    InjectedDataset out;
    auto [graph, structural] = inject_structural(g, spec, stream);
    out.graph = std::move(graph);
    out.structural = std::move(structural);

    std::vector<bool> exclude(static_cast<std::size_t>(g.n), false);
    for (NodeId v : out.structural.ids) exclude[static_cast<std::size_t>(v)] = true;
    auto [features, attribute] = inject_attribute(x, out.graph, spec, stream, exclude);
    out.features = std::move(features);
    out.attribute = std::move(attribute);

    out.labels.assign(static_cast<std::size_t>(g.n), 0);
    for (NodeId v : out.structural.ids) out.labels[static_cast<std::size_t>(v)] = 1;
    for (NodeId v : out.attribute.ids) out.labels[static_cast<std::size_t>(v)] = 1;
    return out;
}

}  // namespace fsgad
