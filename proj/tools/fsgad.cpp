// fsgad command line: inject / train / score / eval / run / sweep.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.

#include "fsgad/fsgad.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct CommonFlags {
    std::string config_path;
};

void add_config_options(CLI::App* cmd, CommonFlags& common, fsgad::io::RunConfig& cfg) {
    cmd->add_option("--config", common.config_path, "JSON config file (flags override it)");

    cmd->add_option("--edges", cfg.dataset.edges, "edge list file (u<TAB>v per line)");
    cmd->add_option("--features", cfg.dataset.features, "feature matrix (CSV or FMAT binary)");
    cmd->add_option("--labels", cfg.dataset.labels, "label file (n lines of 0/1)");
    cmd->add_option("--fewshot", cfg.dataset.fewshot, "few-shot node id file");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--seed", cfg.trainer.seed, "global seed");

    cmd->add_option("--inject-total", cfg.inject_total, "number of anomalies to inject");
    cmd->add_option("--clique-size", cfg.inject.clique_size, "structural clique size m");
    cmd->add_option("--candidate-pool", cfg.inject.candidate_pool, "attribute candidate pool");

    cmd->add_option("--k", cfg.trainer.sampler.K, "subgraph node budget K");
    cmd->add_option("--restart-p", cfg.trainer.sampler.restart_p, "RWR restart probability");
    cmd->add_option("--max-steps", cfg.trainer.sampler.max_steps, "RWR step cap");

    cmd->add_option("--hidden", cfg.trainer.hidden, "hidden width");
    cmd->add_option("--contrast-layers", cfg.trainer.contrast_layers, "encoder depth");
    cmd->add_option("--m-order", cfg.trainer.recon.M, "environment neighborhood order M");
    cmd->add_option("--epsilon", cfg.trainer.recon.epsilon, "high-pass epsilon");
    cmd->add_option("--low-depth", cfg.trainer.recon.low_depth, "low-pass encoder depth");
    cmd->add_option("--high-depth", cfg.trainer.recon.high_depth, "high-pass encoder depth");

    cmd->add_option("--alpha", cfg.trainer.alpha, "view trade-off alpha");
    cmd->add_option("--gamma", cfg.trainer.gamma, "contrast mode trade-off gamma");
    cmd->add_option("--psi", cfg.trainer.psi, "reconstruction weight psi");
    cmd->add_option("--lambda", cfg.trainer.lambda, "score mix lambda");
    cmd->add_option("--epochs", cfg.trainer.epochs, "training epochs");
    cmd->add_option("--batch-size", cfg.trainer.batch_size, "contrast batch size");
    cmd->add_option("--rounds", cfg.trainer.score_rounds, "scoring rounds R");
    cmd->add_option("--lr", cfg.trainer.adam.lr, "Adam learning rate");

    cmd->add_option("--k-shot", cfg.k_shot, "revealed anomaly count k");
    cmd->add_flag("--include-labeled", cfg.include_labeled, "evaluate V^L too");
}

// Flags set on the command line override config-file values: parse flags into
// a scratch config first, load the file, then re-parse flags on top.
fsgad::io::RunConfig resolve_config(CLI::App* cmd, const CommonFlags& common,
                                    fsgad::io::RunConfig& flag_cfg) {
    if (common.config_path.empty()) return flag_cfg;
    fsgad::io::RunConfig cfg = fsgad::io::load_config(common.config_path);
    // CLI11 already filled flag_cfg; merge: any option the user passed wins.
    auto pick = [&](auto& dst, const auto& src, const char* flag) {
        if (cmd->count(flag) > 0) dst = src;
    };
    pick(cfg.dataset.edges, flag_cfg.dataset.edges, "--edges");
    pick(cfg.dataset.features, flag_cfg.dataset.features, "--features");
    pick(cfg.dataset.labels, flag_cfg.dataset.labels, "--labels");
    pick(cfg.dataset.fewshot, flag_cfg.dataset.fewshot, "--fewshot");
    pick(cfg.out_dir, flag_cfg.out_dir, "--out");
    pick(cfg.trainer.seed, flag_cfg.trainer.seed, "--seed");
    pick(cfg.inject_total, flag_cfg.inject_total, "--inject-total");
    pick(cfg.inject.clique_size, flag_cfg.inject.clique_size, "--clique-size");
    pick(cfg.inject.candidate_pool, flag_cfg.inject.candidate_pool, "--candidate-pool");
    pick(cfg.trainer.sampler.K, flag_cfg.trainer.sampler.K, "--k");
    pick(cfg.trainer.sampler.restart_p, flag_cfg.trainer.sampler.restart_p, "--restart-p");
    pick(cfg.trainer.sampler.max_steps, flag_cfg.trainer.sampler.max_steps, "--max-steps");
    pick(cfg.trainer.hidden, flag_cfg.trainer.hidden, "--hidden");
    pick(cfg.trainer.contrast_layers, flag_cfg.trainer.contrast_layers, "--contrast-layers");
    pick(cfg.trainer.recon.M, flag_cfg.trainer.recon.M, "--m-order");
    pick(cfg.trainer.recon.epsilon, flag_cfg.trainer.recon.epsilon, "--epsilon");
    pick(cfg.trainer.recon.low_depth, flag_cfg.trainer.recon.low_depth, "--low-depth");
    pick(cfg.trainer.recon.high_depth, flag_cfg.trainer.recon.high_depth, "--high-depth");
    pick(cfg.trainer.alpha, flag_cfg.trainer.alpha, "--alpha");
    pick(cfg.trainer.gamma, flag_cfg.trainer.gamma, "--gamma");
    pick(cfg.trainer.psi, flag_cfg.trainer.psi, "--psi");
    pick(cfg.trainer.lambda, flag_cfg.trainer.lambda, "--lambda");
    pick(cfg.trainer.epochs, flag_cfg.trainer.epochs, "--epochs");
    pick(cfg.trainer.batch_size, flag_cfg.trainer.batch_size, "--batch-size");
    pick(cfg.trainer.score_rounds, flag_cfg.trainer.score_rounds, "--rounds");
    pick(cfg.trainer.adam.lr, flag_cfg.trainer.adam.lr, "--lr");
    pick(cfg.k_shot, flag_cfg.k_shot, "--k-shot");
    pick(cfg.include_labeled, flag_cfg.include_labeled, "--include-labeled");
    cfg.inject.seed = cfg.trainer.seed;
    cfg.trainer.sampler.seed = cfg.trainer.seed;
    return cfg;
}

void print_eval(const fsgad::EvalResult& r) {
    std::printf("auc_roc=%.6f auc_pr=%.6f nodes=%zu positives=%zu set=%s\n", r.auc_roc, r.auc_pr,
                r.node_count, r.positive_count, r.evaluated_set.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"few-shot graph anomaly detection"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* cmd;
        CommonFlags common;
        fsgad::io::RunConfig cfg;
    };
    Sub inject{app.add_subcommand("inject", "plant structural + attribute anomalies")};
    Sub train{app.add_subcommand("train", "train a model on a labeled dataset")};
    Sub score{app.add_subcommand("score", "score nodes with a trained checkpoint")};
    Sub eval{app.add_subcommand("eval", "compute AUC-ROC / AUC-PR from scores.csv")};
    Sub run{app.add_subcommand("run", "inject (optional) + train + score + eval")};
    Sub sweep{app.add_subcommand("sweep", "grid over one parameter, full run per value")};

    for (Sub* s : {&inject, &train, &score, &eval, &run, &sweep})
        add_config_options(s->cmd, s->common, s->cfg);

    std::string sweep_param;
    std::vector<double> sweep_values;
    sweep.cmd->add_option("--param", sweep_param, "parameter to sweep")->required();
    sweep.cmd->add_option("--values", sweep_values, "values to try")->required()->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    Sub* active = nullptr;
    for (Sub* s : {&inject, &train, &score, &eval, &run, &sweep})
        if (s->cmd->parsed()) active = s;

    try {
        fsgad::io::RunConfig cfg = resolve_config(active->cmd, active->common, active->cfg);
        cfg.inject.seed = cfg.trainer.seed;
        cfg.trainer.sampler.seed = cfg.trainer.seed;
        cfg.validate();

        if (active == &inject) {
            fsgad::InjectedDataset d = fsgad::io::run_inject(cfg);
            std::printf("injected %zu structural + %zu attribute anomalies into %s\n",
                        d.structural.size(), d.attribute.size(), cfg.out_dir.c_str());
        } else if (active == &train) {
            fsgad::io::Dataset d = fsgad::io::load_dataset(cfg.dataset);
            fsgad::TrainResult r = fsgad::io::run_train(cfg, d);
            std::printf("trained %d epochs; final loss %.6f; checkpoint in %s\n",
                        static_cast<int>(r.history.size()), r.history.back().total,
                        cfg.out_dir.c_str());
        } else if (active == &score) {
            fsgad::io::Dataset d = fsgad::io::load_dataset(cfg.dataset);
            fsgad::io::run_score(cfg, d);
            std::printf("scores written to %s/scores.csv\n", cfg.out_dir.c_str());
        } else if (active == &eval) {
            fsgad::io::Dataset d = fsgad::io::load_dataset(cfg.dataset);
            print_eval(fsgad::io::run_eval(cfg, d));
        } else if (active == &run) {
            fsgad::io::PipelineOutcome r = fsgad::io::run_pipeline(cfg);
            print_eval(r.eval);
        } else if (active == &sweep) {
            fsgad::io::run_sweep(cfg, sweep_param, sweep_values);
            std::printf("sweep results in %s/sweep.csv\n", cfg.out_dir.c_str());
        }
        return 0;
    } catch (const fsgad::io::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
