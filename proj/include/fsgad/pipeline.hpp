#pragma once

#include "fsgad/inject.hpp"
#include "fsgad/io.hpp"
#include "fsgad/metrics.hpp"
#include "fsgad/trainer.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsgad::io {

namespace detail {

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const DataError& e) {
        throw DataError(std::string(name) + " stage: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string(name) + " stage: " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + " stage: " + e.what());
    }
}

inline std::string join(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

/// Few-shot labeled set: from the bundle's fewshot file when given, else a
/// seeded uniform draw from the labeled anomalies.
inline NodeSet resolve_fewshot(const RunConfig& cfg, const Dataset& d) {
    if (!cfg.dataset.fewshot.empty())
        return load_fewshot(cfg.dataset.fewshot, d.graph.n);
    if (d.labels.empty())
        throw DataError("few-shot split needs labels (or an explicit fewshot file)");
    return make_few_shot_split(d.labels, cfg.k_shot, cfg.trainer.seed).first;
}

}  // namespace detail

/// Injection stage: plants anomalies and writes the labeled dataset into
/// out_dir (edges.tsv, features.csv or features.fmat, labels.txt).
inline InjectedDataset run_inject(const RunConfig& cfg) {
    return detail::stage("inject", [&] {
        if (cfg.inject_total <= 0) throw DataError("inject.total must be set");
        Dataset d = load_dataset(cfg.dataset);
        if (!d.labels.empty()) throw DataError("dataset already carries labels; refusing to inject");
        InjectionSpec spec = cfg.inject;
        spec.seed = cfg.trainer.seed;
        InjectedDataset injected = inject(d.graph, d.features, cfg.inject_total, spec);
        std::filesystem::create_directories(cfg.out_dir);
        save_edges(injected.graph, detail::join(cfg.out_dir, "edges.tsv"));
        if (injected.features.cols() > 256)
            save_features_fmat(injected.features, detail::join(cfg.out_dir, "features.fmat"));
        else
            save_features_csv(injected.features, detail::join(cfg.out_dir, "features.csv"));
        save_labels(injected.labels, detail::join(cfg.out_dir, "labels.txt"));
        return injected;
    });
}

/// Training stage: resolves the few-shot split, trains, writes
/// checkpoint.json, losses.csv and fewshot.txt.
inline TrainResult run_train(const RunConfig& cfg, const Dataset& d) {
    return detail::stage("train", [&] {
        NodeSet fewshot = detail::resolve_fewshot(cfg, d);
        TrainResult result = train(d.graph, d.features, fewshot, cfg.trainer);
        std::filesystem::create_directories(cfg.out_dir);
        std::string fp = config_fingerprint(cfg);
        save_checkpoint(result.params, fp, detail::join(cfg.out_dir, "checkpoint.json"));
        write_losses_csv(result.history, detail::join(cfg.out_dir, "losses.csv"));
        save_fewshot(fewshot, detail::join(cfg.out_dir, "fewshot.txt"));
        return result;
    });
}

/// Scoring stage: loads checkpoint.json from out_dir, scores every node and
/// writes scores.csv.
inline ScoreReport run_score(const RunConfig& cfg, const Dataset& d) {
    return detail::stage("score", [&] {
        std::string fp;
        ModelParams params = load_checkpoint(detail::join(cfg.out_dir, "checkpoint.json"), &fp);
        if (params.input_dim != d.features.cols())
            throw DataError("checkpoint input_dim " + std::to_string(params.input_dim) +
                            " does not match dataset feature dim " +
                            std::to_string(d.features.cols()));
        NodeSet fewshot = detail::resolve_fewshot(cfg, d);
        ScoreReport report = anomaly_scores(params, d.graph, d.features, fewshot, cfg.trainer);
        report.config_fingerprint = fp;
        write_scores_csv(report, detail::join(cfg.out_dir, "scores.csv"));
        return report;
    });
}

/// Evaluation stage: reads scores.csv, computes AUC-ROC/AUC-PR over V^U (or
/// all nodes) and writes metrics.json.
inline EvalResult run_eval(const RunConfig& cfg, const Dataset& d) {
    return detail::stage("eval", [&] {
        if (d.labels.empty()) throw DataError("eval needs labels");
        std::vector<double> scores = load_scores_csv(detail::join(cfg.out_dir, "scores.csv"));
        if (scores.size() != static_cast<std::size_t>(d.graph.n))
            throw DataError("scores.csv has " + std::to_string(scores.size()) + " rows for " +
                            std::to_string(d.graph.n) + " nodes");
        NodeSet fewshot = detail::resolve_fewshot(cfg, d);
        EvalResult r = evaluate_scores(scores, d.labels, fewshot, cfg.include_labeled);
        std::filesystem::create_directories(cfg.out_dir);
        write_metrics_json(r, cfg.k_shot, cfg.trainer.seed, config_fingerprint(cfg),
                           detail::join(cfg.out_dir, "metrics.json"));
        return r;
    });
}

struct PipelineOutcome {
    EvalResult eval;
    std::vector<LossRecord> history;
};

/// Full workflow: (optional) inject -> split -> train -> score -> eval, all
/// in memory, writing scores.csv, metrics.json, losses.csv and
/// checkpoint.json under out_dir.
inline PipelineOutcome run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    Dataset d;
    if (cfg.inject_total > 0) {
        InjectedDataset injected = run_inject(cfg);
        d.graph = std::move(injected.graph);
        d.features = std::move(injected.features);
        d.labels = std::move(injected.labels);
    } else {
        d = detail::stage("load", [&] { return load_dataset(cfg.dataset); });
    }
    TrainResult trained = run_train(cfg, d);
    detail::stage("score", [&] {
        NodeSet fewshot = detail::resolve_fewshot(cfg, d);
        ScoreReport report = anomaly_scores(trained.params, d.graph, d.features, fewshot, cfg.trainer);
        report.config_fingerprint = config_fingerprint(cfg);
        write_scores_csv(report, detail::join(cfg.out_dir, "scores.csv"));
        return 0;
    });
    PipelineOutcome out;
    out.eval = run_eval(cfg, d);
    out.history = std::move(trained.history);
    return out;
}

/// Grid sweep over one parameter; each setting runs the full pipeline into
/// out_dir/<param>=<value>/ and contributes one row to out_dir/sweep.csv.
inline void apply_override(RunConfig& cfg, const std::string& param, double value) {
    auto as_int = [&] { return static_cast<int>(value); };
    if (param == "K")
        cfg.trainer.sampler.K = as_int();
    else if (param == "restart_p")
        cfg.trainer.sampler.restart_p = value;
    else if (param == "max_steps")
        cfg.trainer.sampler.max_steps = as_int();
    else if (param == "hidden")
        cfg.trainer.hidden = as_int();
    else if (param == "contrast_layers")
        cfg.trainer.contrast_layers = as_int();
    else if (param == "M")
        cfg.trainer.recon.M = as_int();
    else if (param == "epsilon")
        cfg.trainer.recon.epsilon = value;
    else if (param == "low_depth")
        cfg.trainer.recon.low_depth = as_int();
    else if (param == "high_depth")
        cfg.trainer.recon.high_depth = as_int();
    else if (param == "alpha")
        cfg.trainer.alpha = value;
    else if (param == "gamma")
        cfg.trainer.gamma = value;
    else if (param == "psi")
        cfg.trainer.psi = value;
    else if (param == "lambda")
        cfg.trainer.lambda = value;
    else if (param == "epochs")
        cfg.trainer.epochs = as_int();
    else if (param == "batch_size")
        cfg.trainer.batch_size = as_int();
    else if (param == "score_rounds")
        cfg.trainer.score_rounds = as_int();
    else if (param == "lr")
        cfg.trainer.adam.lr = value;
    else if (param == "k_shot")
        cfg.k_shot = as_int();
    else if (param == "seed")
        cfg.trainer.seed = static_cast<std::uint64_t>(value);
    else
        throw std::invalid_argument("sweep: unknown parameter \"" + param + "\"");
    cfg.inject.seed = cfg.trainer.seed;
    cfg.trainer.sampler.seed = cfg.trainer.seed;
}

inline void run_sweep(const RunConfig& base, const std::string& param,
                      const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("sweep: no values given");
    std::filesystem::create_directories(base.out_dir);
    std::ofstream out(detail::join(base.out_dir, "sweep.csv"));
    if (!out) throw DataError("cannot write sweep.csv");
    out << "param,value,auc_roc,auc_pr,k_shot,seed\n";
    char buf[160];
    for (double v : values) {
        RunConfig cfg = base;
        apply_override(cfg, param, v);
        std::snprintf(buf, sizeof buf, "%s=%.17g", param.c_str(), v);
        cfg.out_dir = detail::join(base.out_dir, buf);
        PipelineOutcome res = run_pipeline(cfg);
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%d,%llu\n", param.c_str(), v,
                      res.eval.auc_roc, res.eval.auc_pr, cfg.k_shot,
                      static_cast<unsigned long long>(cfg.trainer.seed));
        out << buf;
    }
}

}  // namespace fsgad::io
