#pragma once

#include "fsgad/graph.hpp"
#include "fsgad/rng.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsgad {

/// AUC-ROC via the Mann-Whitney U statistic with the half-credit tie
/// convention: (#concordant + 0.5 * #ties) / (P * N).
inline double auc_roc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("auc_roc: size mismatch");
    std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midranks over tie groups; rank_sum accumulates positive midranks.
    double rank_sum = 0.0;
    std::size_t positives = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double midrank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]]) {
                rank_sum += midrank;
                ++positives;
            }
        }
        i = j;
    }
    std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0)
        throw std::invalid_argument("auc_roc: need at least one positive and one negative label");
    double u = rank_sum - 0.5 * static_cast<double>(positives) * static_cast<double>(positives + 1);
    return u / (static_cast<double>(positives) * static_cast<double>(negatives));
}

/// AUC-PR as average precision: mean over positives (in descending score
/// order) of precision at each positive's rank. Ties are broken by stable
/// input order.
inline double auc_pr(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("auc_pr: size mismatch");
    std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    std::size_t positives_seen = 0;
    for (std::size_t rank = 1; rank <= n; ++rank) {
        if (labels[order[rank - 1]]) {
            ++positives_seen;
            ap += static_cast<double>(positives_seen) / static_cast<double>(rank);
        }
    }
    if (positives_seen == 0) throw std::invalid_argument("auc_pr: need at least one positive label");
    return ap / static_cast<double>(positives_seen);
}

/// k anomalies sampled uniformly without replacement as the labeled set V^L;
/// every other node lands in V^U. Deterministic per seed.
inline std::pair<NodeSet, NodeSet> make_few_shot_split(const std::vector<int>& labels, int k,
                                                       std::uint64_t seed) {
    std::vector<NodeId> anomalies;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i]) anomalies.push_back(static_cast<NodeId>(i));
    if (k < 0 || static_cast<std::size_t>(k) > anomalies.size())
        throw std::invalid_argument("make_few_shot_split: k exceeds anomaly count (" +
                                    std::to_string(anomalies.size()) + ")");
    rng::Stream stream = rng::derive(seed, rng::kSplit);
    stream.shuffle(anomalies);
    anomalies.resize(static_cast<std::size_t>(k));
    NodeSet labeled = NodeSet::of(anomalies);
    std::vector<NodeId> rest;
    rest.reserve(labels.size() - static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (!labeled.contains(static_cast<NodeId>(i))) rest.push_back(static_cast<NodeId>(i));
    return {std::move(labeled), NodeSet::of(std::move(rest))};
}

struct EvalResult {
    double auc_roc = 0.0;
    double auc_pr = 0.0;
    std::size_t node_count = 0;
    std::size_t positive_count = 0;
    std::string evaluated_set;  // "unlabeled" (V^U) or "all"
};

/// Metrics over V^U by default; include_labeled widens to every node.
inline EvalResult evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                                  const NodeSet& fewshot, bool include_labeled) {
    if (scores.size() != labels.size()) throw std::invalid_argument("evaluate_scores: size mismatch");
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!include_labeled && fewshot.contains(static_cast<NodeId>(i))) continue;
        s.push_back(scores[i]);
        y.push_back(labels[i]);
    }
    EvalResult r;
    r.auc_roc = auc_roc(s, y);
    r.auc_pr = auc_pr(s, y);
    r.node_count = s.size();
    r.positive_count = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    r.evaluated_set = include_labeled ? "all" : "unlabeled";
    return r;
}

}  // namespace fsgad
