#pragma once

#include "fsgad/graph.hpp"
#include "fsgad/inject.hpp"
#include "fsgad/matrix.hpp"
#include "fsgad/metrics.hpp"
#include "fsgad/trainer.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsgad::io {

using nlohmann::json;

/// Errors attributable to input data (maps to CLI exit code 2).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string location(const std::string& path, std::size_t line) {
    return path + ":" + std::to_string(line);
}

inline std::ifstream open_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return in;
}

inline bool is_comment_or_blank(const std::string& s) {
    for (char c : s) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

}  // namespace detail

// ---- dataset files ----------------------------------------------------------
//
// edges:    one "u<TAB>v" pair per line, 0-indexed, undirected; '#' comments.
// features: CSV of n rows x d decimal values, or binary container with magic
//           "FMAT", two 32-bit little-endian dims, 32-bit little-endian float
//           row-major payload.
// labels:   n lines of 0/1.
// fewshot:  one node id per line.

inline std::vector<std::pair<NodeId, NodeId>> load_edges(const std::string& path) {
    std::ifstream in = detail::open_text(path);
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::is_comment_or_blank(line)) continue;
        const char* p = line.c_str();
        char* end = nullptr;
        long u = std::strtol(p, &end, 10);
        if (end == p) throw DataError(detail::location(path, lineno) +
                                      ": expected \"u<TAB>v\" with integer node ids");
        p = end;
        long v = std::strtol(p, &end, 10);
        if (end == p) throw DataError(detail::location(path, lineno) +
                                      ": expected \"u<TAB>v\" with integer node ids");
        while (*end != '\0') {
            if (!std::isspace(static_cast<unsigned char>(*end)))
                throw DataError(detail::location(path, lineno) + ": trailing junk after edge");
            ++end;
        }
        if (u < 0 || v < 0) throw DataError(detail::location(path, lineno) + ": negative node id");
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
    return edges;
}

inline void save_edges(const SparseGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (NodeId u = 0; u < g.n; ++u)
        for (NodeId v : g.neighbors(u))
            if (u < v) out << u << '\t' << v << '\n';
}

inline Matrix load_features_csv(const std::string& path) {
    std::ifstream in = detail::open_text(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::is_comment_or_blank(line)) continue;
        std::vector<double> row;
        const char* p = line.c_str();
        for (;;) {
            char* end = nullptr;
            double v = std::strtod(p, &end);
            if (end == p)
                throw DataError(detail::location(path, lineno) +
                                ": expected comma-separated decimal values");
            row.push_back(v);
            p = end;
            while (*p == ' ' || *p == '\t') ++p;
            if (*p == ',') {
                ++p;
                continue;
            }
            if (*p == '\0' || *p == '\r') break;
            throw DataError(detail::location(path, lineno) + ": unexpected character '" +
                            std::string(1, *p) + "'");
        }
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw DataError(detail::location(path, lineno) + ": expected " + std::to_string(width) +
                            " columns, got " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": no feature rows");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    if (!all_finite(m)) throw DataError(path + ": non-finite feature value");
    return m;
}

inline Matrix load_features_fmat(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "FMAT", 4) != 0)
        throw DataError(path + ": missing FMAT magic");
    std::uint32_t dims[2];
    if (!in.read(reinterpret_cast<char*>(dims), 8)) throw DataError(path + ": truncated header");
    std::size_t rows = dims[0], cols = dims[1];
    std::vector<float> payload(rows * cols);
    if (!in.read(reinterpret_cast<char*>(payload.data()),
                 static_cast<std::streamsize>(payload.size() * sizeof(float))))
        throw DataError(path + ": truncated payload (" + std::to_string(rows) + "x" +
                        std::to_string(cols) + " expected)");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                static_cast<double>(payload[i * cols + j]);
    if (!all_finite(m)) throw DataError(path + ": non-finite feature value");
    return m;
}

/// Sniffs the FMAT magic; falls back to CSV.
inline Matrix load_features(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw DataError("cannot open " + path);
    char magic[4] = {0, 0, 0, 0};
    probe.read(magic, 4);
    probe.close();
    if (std::memcmp(magic, "FMAT", 4) == 0) return load_features_fmat(path);
    return load_features_csv(path);
}

inline void save_features_csv(const Matrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            if (j) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

inline void save_features_fmat(const Matrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out.write("FMAT", 4);
    std::uint32_t dims[2] = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    out.write(reinterpret_cast<const char*>(dims), 8);
    std::vector<float> payload(static_cast<std::size_t>(m.rows()) * static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            payload[static_cast<std::size_t>(i * m.cols() + j)] = static_cast<float>(m(i, j));
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
}

inline std::vector<int> load_labels(const std::string& path) {
    std::ifstream in = detail::open_text(path);
    std::vector<int> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::is_comment_or_blank(line)) continue;
        if (line == "0" || line == "0\r")
            labels.push_back(0);
        else if (line == "1" || line == "1\r")
            labels.push_back(1);
        else
            throw DataError(detail::location(path, lineno) + ": expected 0 or 1");
    }
    return labels;
}

inline void save_labels(const std::vector<int>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (int v : labels) out << v << '\n';
}

inline NodeSet load_fewshot(const std::string& path, NodeId n) {
    std::ifstream in = detail::open_text(path);
    std::vector<NodeId> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::is_comment_or_blank(line)) continue;
        char* end = nullptr;
        long v = std::strtol(line.c_str(), &end, 10);
        if (end == line.c_str() || v < 0 || v >= n)
            throw DataError(detail::location(path, lineno) + ": expected node id in [0, " +
                            std::to_string(n) + ")");
        ids.push_back(static_cast<NodeId>(v));
    }
    return NodeSet::of(std::move(ids));
}

inline void save_fewshot(const NodeSet& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (NodeId v : s.ids) out << v << '\n';
}

struct DatasetBundle {
    std::string edges;
    std::string features;
    std::string labels;   // optional (pre-injection datasets have none)
    std::string fewshot;  // optional
};

struct Dataset {
    SparseGraph graph;
    Matrix features;
    std::vector<int> labels;  // empty if not provided
};

/// Parses, validates, symmetrizes and deduplicates a dataset bundle. The
/// node count is fixed by the feature matrix; edges and labels must agree.
inline Dataset load_dataset(const DatasetBundle& bundle) {
    Dataset d;
    d.features = load_features(bundle.features);
    NodeId n = static_cast<NodeId>(d.features.rows());
    auto edges = load_edges(bundle.edges);
    for (auto [u, v] : edges)
        if (u >= n || v >= n)
            throw DataError(bundle.edges + ": edge (" + std::to_string(u) + "," + std::to_string(v) +
                            ") out of range for " + std::to_string(n) + " feature rows");
    d.graph = SparseGraph::from_edges(n, edges);
    if (!bundle.labels.empty()) {
        d.labels = load_labels(bundle.labels);
        if (static_cast<NodeId>(d.labels.size()) != n)
            throw DataError(bundle.labels + ": " + std::to_string(d.labels.size()) +
                            " labels for " + std::to_string(n) + " nodes");
    }
    return d;
}

// ---- run configuration ------------------------------------------------------

struct RunConfig {
    DatasetBundle dataset;
    int inject_total = 0;  // 0 disables injection
    InjectionSpec inject;
    TrainConfig trainer;
    int k_shot = 10;
    bool include_labeled = false;
    std::string out_dir = "out";

    void validate() const {
        trainer.validate();
        if (k_shot < 0) throw std::invalid_argument("config: k_shot must be >= 0");
        if (inject_total < 0) throw std::invalid_argument("config: inject.total must be >= 0");
    }
};

inline json to_json(const RunConfig& c) {
    return json{
        {"dataset",
         {{"edges", c.dataset.edges},
          {"features", c.dataset.features},
          {"labels", c.dataset.labels},
          {"fewshot", c.dataset.fewshot}}},
        {"inject",
         {{"total", c.inject_total},
          {"clique_size", c.inject.clique_size},
          {"candidate_pool", c.inject.candidate_pool}}},
        {"sampler",
         {{"K", c.trainer.sampler.K},
          {"restart_p", c.trainer.sampler.restart_p},
          {"max_steps", c.trainer.sampler.max_steps}}},
        {"model", {{"hidden", c.trainer.hidden}, {"contrast_layers", c.trainer.contrast_layers}}},
        {"recon",
         {{"M", c.trainer.recon.M},
          {"epsilon", c.trainer.recon.epsilon},
          {"low_depth", c.trainer.recon.low_depth},
          {"high_depth", c.trainer.recon.high_depth}}},
        {"trainer",
         {{"alpha", c.trainer.alpha},
          {"gamma", c.trainer.gamma},
          {"psi", c.trainer.psi},
          {"lambda", c.trainer.lambda},
          {"epochs", c.trainer.epochs},
          {"batch_size", c.trainer.batch_size},
          {"score_rounds", c.trainer.score_rounds},
          {"lr", c.trainer.adam.lr},
          {"beta1", c.trainer.adam.beta1},
          {"beta2", c.trainer.adam.beta2},
          {"adam_eps", c.trainer.adam.eps}}},
        {"eval", {{"k_shot", c.k_shot}, {"include_labeled", c.include_labeled}}},
        {"seed", c.trainer.seed},
        {"out_dir", c.out_dir},
    };
}

namespace detail {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

/// Parses a config JSON; missing keys keep their defaults, unknown keys are
/// rejected to catch typos early.
inline RunConfig config_from_json(const json& j, RunConfig base = {}) {
    static const std::vector<std::string> known = {"dataset", "inject", "sampler", "model",
                                                   "recon",   "trainer", "eval",   "seed",
                                                   "out_dir"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw DataError("config: unknown key \"" + it.key() + "\"");
    }
    RunConfig c = std::move(base);
    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        detail::maybe(d, "edges", c.dataset.edges);
        detail::maybe(d, "features", c.dataset.features);
        detail::maybe(d, "labels", c.dataset.labels);
        detail::maybe(d, "fewshot", c.dataset.fewshot);
    }
    if (j.contains("inject")) {
        const json& d = j.at("inject");
        detail::maybe(d, "total", c.inject_total);
        detail::maybe(d, "clique_size", c.inject.clique_size);
        detail::maybe(d, "candidate_pool", c.inject.candidate_pool);
    }
    if (j.contains("sampler")) {
        const json& d = j.at("sampler");
        detail::maybe(d, "K", c.trainer.sampler.K);
        detail::maybe(d, "restart_p", c.trainer.sampler.restart_p);
        detail::maybe(d, "max_steps", c.trainer.sampler.max_steps);
    }
    if (j.contains("model")) {
        const json& d = j.at("model");
        detail::maybe(d, "hidden", c.trainer.hidden);
        detail::maybe(d, "contrast_layers", c.trainer.contrast_layers);
    }
    if (j.contains("recon")) {
        const json& d = j.at("recon");
        detail::maybe(d, "M", c.trainer.recon.M);
        detail::maybe(d, "epsilon", c.trainer.recon.epsilon);
        detail::maybe(d, "low_depth", c.trainer.recon.low_depth);
        detail::maybe(d, "high_depth", c.trainer.recon.high_depth);
    }
    if (j.contains("trainer")) {
        const json& d = j.at("trainer");
        detail::maybe(d, "alpha", c.trainer.alpha);
        detail::maybe(d, "gamma", c.trainer.gamma);
        detail::maybe(d, "psi", c.trainer.psi);
        detail::maybe(d, "lambda", c.trainer.lambda);
        detail::maybe(d, "epochs", c.trainer.epochs);
        detail::maybe(d, "batch_size", c.trainer.batch_size);
        detail::maybe(d, "score_rounds", c.trainer.score_rounds);
        detail::maybe(d, "lr", c.trainer.adam.lr);
        detail::maybe(d, "beta1", c.trainer.adam.beta1);
        detail::maybe(d, "beta2", c.trainer.adam.beta2);
        detail::maybe(d, "adam_eps", c.trainer.adam.eps);
    }
    if (j.contains("eval")) {
        const json& d = j.at("eval");
        detail::maybe(d, "k_shot", c.k_shot);
        detail::maybe(d, "include_labeled", c.include_labeled);
    }
    detail::maybe(j, "seed", c.trainer.seed);
    detail::maybe(j, "out_dir", c.out_dir);
    c.inject.seed = c.trainer.seed;
    c.trainer.sampler.seed = c.trainer.seed;
    return c;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
    std::ifstream in = detail::open_text(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    return config_from_json(j, std::move(base));
}

/// FNV-1a 64-bit hash of the canonical config serialization; stamped into
/// metrics.json, scores.csv and checkpoints so artifacts can be traced back
/// to the exact configuration.
inline std::string config_fingerprint(const RunConfig& c) {
    std::string s = to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// ---- checkpoints -------------------------------------------------------------

constexpr int kCheckpointVersion = 1;

namespace detail {

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw DataError("checkpoint: expected nested array matrix");
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& row = j[i];
        if (row.size() != static_cast<std::size_t>(m.cols()))
            throw DataError("checkpoint: ragged matrix rows");
        for (std::size_t k = 0; k < row.size(); ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k].get<double>();
    }
    return m;
}

inline json matrices_to_json(const std::vector<Matrix>& ms) {
    json a = json::array();
    for (const Matrix& m : ms) a.push_back(matrix_to_json(m));
    return a;
}

inline std::vector<Matrix> matrices_from_json(const json& j) {
    std::vector<Matrix> ms;
    for (const json& m : j) ms.push_back(matrix_from_json(m));
    return ms;
}

}  // namespace detail

inline void save_checkpoint(const ModelParams& p, const std::string& fingerprint,
                            const std::string& path) {
    json j{
        {"format_version", kCheckpointVersion},
        {"config_fingerprint", fingerprint},
        {"input_dim", p.input_dim},
        {"hidden", p.hidden},
        {"contrast",
         {{"enc_weights", detail::matrices_to_json(p.contrast.enc_weights)},
          {"bilinear", detail::matrix_to_json(p.contrast.bilinear)}}},
        {"recon",
         {{"low_weights", detail::matrices_to_json(p.recon.low_weights)},
          {"high_weights", detail::matrices_to_json(p.recon.high_weights)},
          {"mlp_weight", detail::matrix_to_json(p.recon.mlp_weight)},
          {"mlp_bias", detail::matrix_to_json(p.recon.mlp_bias)}}},
    };
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(1) << '\n';
}

inline ModelParams load_checkpoint(const std::string& path, std::string* fingerprint = nullptr) {
    std::ifstream in = detail::open_text(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    try {
        int version = j.at("format_version").get<int>();
        if (version != kCheckpointVersion)
            throw DataError(path + ": checkpoint format version " + std::to_string(version) +
                            " unsupported (expected " + std::to_string(kCheckpointVersion) + ")");
        ModelParams p;
        p.input_dim = j.at("input_dim").get<Eigen::Index>();
        p.hidden = j.at("hidden").get<Eigen::Index>();
        p.contrast.enc_weights = detail::matrices_from_json(j.at("contrast").at("enc_weights"));
        p.contrast.bilinear = detail::matrix_from_json(j.at("contrast").at("bilinear"));
        p.recon.low_weights = detail::matrices_from_json(j.at("recon").at("low_weights"));
        p.recon.high_weights = detail::matrices_from_json(j.at("recon").at("high_weights"));
        p.recon.mlp_weight = detail::matrix_from_json(j.at("recon").at("mlp_weight"));
        p.recon.mlp_bias = detail::matrix_from_json(j.at("recon").at("mlp_bias"));
        if (fingerprint) *fingerprint = j.value("config_fingerprint", "");
        return p;
    } catch (const json::exception& e) {
        throw DataError(path + ": malformed checkpoint: " + e.what());
    }
}

// ---- run artifacts -----------------------------------------------------------

inline void write_scores_csv(const ScoreReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "node,score,contrast,recon\n";
    char buf[96];
    for (std::size_t i = 0; i < r.score.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, r.score[i], r.contrast[i],
                      r.recon[i]);
        out << buf;
    }
}

/// Reads back the score column (node order) from scores.csv.
inline std::vector<double> load_scores_csv(const std::string& path) {
    std::ifstream in = detail::open_text(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("node,score", 0) != 0)
        throw DataError(path + ": missing scores.csv header");
    std::vector<double> scores;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::is_comment_or_blank(line)) continue;
        const char* p = line.c_str();
        char* end = nullptr;
        std::strtol(p, &end, 10);
        if (end == p || *end != ',')
            throw DataError(detail::location(path, lineno) + ": expected node,score,... row");
        p = end + 1;
        double s = std::strtod(p, &end);
        if (end == p) throw DataError(detail::location(path, lineno) + ": bad score value");
        scores.push_back(s);
    }
    return scores;
}

inline void write_losses_csv(const std::vector<LossRecord>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "epoch,total,contrast,node_subgraph,subgraph_subgraph,reconstruction\n";
    char buf[160];
    for (std::size_t e = 0; e < history.size(); ++e) {
        const LossRecord& r = history[e];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", e, r.total, r.contrast,
                      r.node_subgraph, r.subgraph_subgraph, r.reconstruction);
        out << buf;
    }
}

inline void write_metrics_json(const EvalResult& r, int k_shot, std::uint64_t seed,
                               const std::string& fingerprint, const std::string& path) {
    json j{
        {"auc_roc", r.auc_roc},
        {"auc_pr", r.auc_pr},
        {"k_shot", k_shot},
        {"seed", seed},
        {"config_fingerprint", fingerprint},
        {"node_count", r.node_count},
        {"positive_count", r.positive_count},
        {"evaluated_set", r.evaluated_set},
    };
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(1) << '\n';
}

}  // namespace fsgad::io
