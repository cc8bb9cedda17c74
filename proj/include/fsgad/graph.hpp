#pragma once

#include "fsgad/matrix.hpp"

#include <algorithm>
#include <cstddef>
#include <queue>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fsgad {

/// Sorted set of node ids with the usual local-index <-> global-id bijection:
/// local index of id = its position in the sorted vector.
struct NodeSet {
    std::vector<NodeId> ids;  // sorted, unique

    static NodeSet of(std::vector<NodeId> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return NodeSet{std::move(v)};
    }

    std::size_t size() const { return ids.size(); }
    bool empty() const { return ids.empty(); }
    bool contains(NodeId id) const {
        return std::binary_search(ids.begin(), ids.end(), id);
    }
    /// Local index of a member id; ids.size() if absent.
    std::size_t local_index(NodeId id) const {
        auto it = std::lower_bound(ids.begin(), ids.end(), id);
        if (it == ids.end() || *it != id) return ids.size();
        return static_cast<std::size_t>(it - ids.begin());
    }
};

/// Undirected, unweighted graph in CSR form. Edges are stored symmetrically
/// ((u,v) and (v,u) both present), without duplicates or self-loops.
struct SparseGraph {
    NodeId n = 0;
    std::vector<NodeId> row_ptr;  // length n+1, nondecreasing
    std::vector<NodeId> col_idx;  // length row_ptr[n], sorted within each row

    /// Build from an edge list: symmetrizes, deduplicates, drops self-loops.
    static SparseGraph from_edges(NodeId n, const std::vector<std::pair<NodeId, NodeId>>& edges) {
        if (n < 0) throw std::invalid_argument("graph: negative node count");
        std::vector<std::pair<NodeId, NodeId>> sym;
        sym.reserve(edges.size() * 2);
        for (auto [u, v] : edges) {
            if (u < 0 || u >= n || v < 0 || v >= n)
                throw std::invalid_argument("graph: edge endpoint out of range");
            if (u == v) continue;
            sym.emplace_back(u, v);
            sym.emplace_back(v, u);
        }
        std::sort(sym.begin(), sym.end());
        sym.erase(std::unique(sym.begin(), sym.end()), sym.end());

        SparseGraph g;
        g.n = n;
        g.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
        g.col_idx.reserve(sym.size());
        for (auto [u, v] : sym) {
            ++g.row_ptr[static_cast<std::size_t>(u) + 1];
            g.col_idx.push_back(v);
        }
        for (std::size_t i = 1; i < g.row_ptr.size(); ++i) g.row_ptr[i] += g.row_ptr[i - 1];
        return g;
    }

    NodeId num_edges() const {
        return row_ptr.empty() ? 0 : row_ptr.back() / 2;
    }

    std::span<const NodeId> neighbors(NodeId u) const {
        return {col_idx.data() + row_ptr[static_cast<std::size_t>(u)],
                col_idx.data() + row_ptr[static_cast<std::size_t>(u) + 1]};
    }

    NodeId degree(NodeId u) const {
        return row_ptr[static_cast<std::size_t>(u) + 1] - row_ptr[static_cast<std::size_t>(u)];
    }

    bool has_edge(NodeId u, NodeId v) const {
        auto nb = neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    /// Structural validity check (CSR shape, symmetry, no loops/dups).
    bool valid() const {
        if (row_ptr.size() != static_cast<std::size_t>(n) + 1) return false;
        if (row_ptr.front() != 0 || row_ptr.back() != static_cast<NodeId>(col_idx.size()))
            return false;
        for (NodeId u = 0; u < n; ++u) {
            if (row_ptr[u] > row_ptr[u + 1]) return false;
            auto nb = neighbors(u);
            for (std::size_t i = 0; i < nb.size(); ++i) {
                NodeId v = nb[i];
                if (v < 0 || v >= n || v == u) return false;
                if (i > 0 && nb[i - 1] >= v) return false;
                if (!has_edge(v, u)) return false;
            }
        }
        return true;
    }
};

/// Real-valued CSR matrix used for propagation operators (normalized
/// adjacency, Laplacian, high-pass filter) and structured gather/scatter.
struct SparseMatrix {
    NodeId rows = 0;
    NodeId cols = 0;
    std::vector<NodeId> row_ptr;
    std::vector<NodeId> col_idx;
    std::vector<double> values;

    Matrix dense() const {
        Matrix m = Matrix::Zero(rows, cols);
        for (NodeId i = 0; i < rows; ++i)
            for (NodeId k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
                m(i, col_idx[k]) = values[k];
        return m;
    }

    /// this * x
    Matrix apply(const Matrix& x) const {
        if (x.rows() != cols) throw std::invalid_argument("spmm: shape mismatch");
        Matrix y = Matrix::Zero(rows, x.cols());
        for (NodeId i = 0; i < rows; ++i)
            for (NodeId k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
                y.row(i) += values[k] * x.row(col_idx[k]);
        return y;
    }

    /// this^T * x (used by reverse-mode differentiation).
    Matrix apply_transposed(const Matrix& x) const {
        if (x.rows() != rows) throw std::invalid_argument("spmm^T: shape mismatch");
        Matrix y = Matrix::Zero(cols, x.cols());
        for (NodeId i = 0; i < rows; ++i)
            for (NodeId k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
                y.row(col_idx[k]) += values[k] * x.row(i);
        return y;
    }
};

namespace detail {

inline std::vector<double> inv_sqrt_degrees(const SparseGraph& g, bool add_self_loops) {
    std::vector<double> dinv(static_cast<std::size_t>(g.n));
    for (NodeId u = 0; u < g.n; ++u) {
        double d = static_cast<double>(g.degree(u)) + (add_self_loops ? 1.0 : 0.0);
        dinv[u] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    return dinv;
}

}  // namespace detail

/// D~^{-1/2} A~ D~^{-1/2}, with A~ = A + I when add_self_loops is set.
/// Isolated nodes (possible only without self-loops) get zero rows.
inline SparseMatrix sym_normalize(const SparseGraph& g, bool add_self_loops) {
    auto dinv = detail::inv_sqrt_degrees(g, add_self_loops);
    SparseMatrix m;
    m.rows = m.cols = g.n;
    m.row_ptr.assign(static_cast<std::size_t>(g.n) + 1, 0);
    m.col_idx.reserve(g.col_idx.size() + (add_self_loops ? g.n : 0));
    m.values.reserve(m.col_idx.capacity());
    for (NodeId u = 0; u < g.n; ++u) {
        bool loop_emitted = false;
        auto emit_loop = [&] {
            m.col_idx.push_back(u);
            m.values.push_back(dinv[u] * dinv[u]);
            loop_emitted = true;
        };
        for (NodeId v : g.neighbors(u)) {
            if (add_self_loops && !loop_emitted && v > u) emit_loop();
            m.col_idx.push_back(v);
            m.values.push_back(dinv[u] * dinv[v]);
        }
        if (add_self_loops && !loop_emitted) emit_loop();
        m.row_ptr[static_cast<std::size_t>(u) + 1] = static_cast<NodeId>(m.col_idx.size());
    }
    return m;
}

/// High-pass spectral operator eps*I - D^{-1/2} A D^{-1/2}, equal to
/// (eps-1)*I + L. Built on the non-self-looped normalization.
inline SparseMatrix high_pass_filter(const SparseGraph& g, double epsilon) {
    auto dinv = detail::inv_sqrt_degrees(g, /*add_self_loops=*/false);
    SparseMatrix m;
    m.rows = m.cols = g.n;
    m.row_ptr.assign(static_cast<std::size_t>(g.n) + 1, 0);
    for (NodeId u = 0; u < g.n; ++u) {
        bool diag_emitted = false;
        auto emit_diag = [&] {
            m.col_idx.push_back(u);
            m.values.push_back(epsilon);
            diag_emitted = true;
        };
        for (NodeId v : g.neighbors(u)) {
            if (!diag_emitted && v > u) emit_diag();
            m.col_idx.push_back(v);
            m.values.push_back(-dinv[u] * dinv[v]);
        }
        if (!diag_emitted) emit_diag();
        m.row_ptr[static_cast<std::size_t>(u) + 1] = static_cast<NodeId>(m.col_idx.size());
    }
    return m;
}

/// Symmetric normalized Laplacian I - D^{-1/2} A D^{-1/2}; identity rows for
/// isolated nodes. Identical code path to the high-pass operator so that
/// high_pass_filter(g, 1.0) matches bitwise.
inline SparseMatrix laplacian(const SparseGraph& g) {
    return high_pass_filter(g, 1.0);
}

/// All nodes within shortest-path distance <= order of any seed (BFS).
inline NodeSet k_hop_neighborhood(const SparseGraph& g, const NodeSet& seeds, int order) {
    if (seeds.empty()) throw std::invalid_argument("k_hop_neighborhood: empty seed set");
    if (order < 0) throw std::invalid_argument("k_hop_neighborhood: negative order");
    std::vector<int> dist(static_cast<std::size_t>(g.n), -1);
    std::queue<NodeId> frontier;
    for (NodeId s : seeds.ids) {
        if (s < 0 || s >= g.n) throw std::invalid_argument("k_hop_neighborhood: seed out of range");
        dist[s] = 0;
        frontier.push(s);
    }
    std::vector<NodeId> out(seeds.ids);
    while (!frontier.empty()) {
        NodeId u = frontier.front();
        frontier.pop();
        if (dist[u] == order) continue;
        for (NodeId v : g.neighbors(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                out.push_back(v);
                frontier.push(v);
            }
        }
    }
    return NodeSet::of(std::move(out));
}

/// Subgraph induced by `nodes` taken in the given order: local node i is
/// nodes[i], and a local edge exists iff the corresponding global edge does.
inline SparseGraph induced_subgraph_ordered(const SparseGraph& g, const std::vector<NodeId>& nodes) {
    std::vector<NodeId> local(static_cast<std::size_t>(g.n), -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        NodeId v = nodes[i];
        if (v < 0 || v >= g.n) throw std::invalid_argument("induced_subgraph: node out of range");
        if (local[v] != -1) throw std::invalid_argument("induced_subgraph: duplicate node");
        local[v] = static_cast<NodeId>(i);
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (NodeId v : g.neighbors(nodes[i])) {
            NodeId lv = local[v];
            if (lv >= 0 && lv > static_cast<NodeId>(i)) edges.emplace_back(static_cast<NodeId>(i), lv);
        }
    }
    return SparseGraph::from_edges(static_cast<NodeId>(nodes.size()), edges);
}

/// Induced subgraph over a NodeSet; local indices follow the set's sorted
/// order, and the set itself is the local->global mapping.
inline std::pair<SparseGraph, NodeSet> induced_subgraph(const SparseGraph& g, const NodeSet& nodes) {
    return {induced_subgraph_ordered(g, nodes.ids), nodes};
}

}  // namespace fsgad
