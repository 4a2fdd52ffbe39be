#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "iclab/channel.hpp"
#include "iclab/encoder.hpp"
#include "iclab/harness.hpp"
#include "iclab/maxsinr.hpp"
#include "iclab/rng.hpp"

namespace {

struct CommonOpts {
    std::string config;
    uint64_t seed = 0;
    bool seed_given = false;
};

iclab::ExperimentConfig load_cfg(const CommonOpts& opts) {
    iclab::ExperimentConfig cfg = iclab::load_experiment_config(opts.config);
    if (opts.seed_given) cfg.seed = opts.seed;
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config, "experiment config JSON")
        ->required();
    cmd->add_option("--seed", opts.seed, "override the config seed")
        ->each([&](const std::string&) { opts.seed_given = true; });
}

iclab::ChannelSet build_channel(const iclab::ExperimentConfig& cfg) {
    return iclab::build_channel_set(cfg.channel,
                                    iclab::derive_seed(cfg.seed, "channel"));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"interference-channel link laboratory"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string out, checkpoint, channel_file, history, svg_dir;
    double epsilon = -1.0;

    CLI::App* cmd_maxsinr =
        app.add_subcommand("maxsinr", "compute beamformers for a channel");
    add_common(cmd_maxsinr, opts);
    cmd_maxsinr->add_option("--channel", channel_file,
                            "channel fixture JSON overriding the config");
    cmd_maxsinr->add_option("--out", out, "beamformer JSON")->required();

    CLI::App* cmd_eval =
        app.add_subcommand("eval", "per-user rates for stored encoders");
    add_common(cmd_eval, opts);
    cmd_eval->add_option("--checkpoint", checkpoint, "encoder checkpoint JSON")
        ->required();
    cmd_eval->add_option("--out", out, "rates CSV")->required();

    CLI::App* cmd_train =
        app.add_subcommand("train", "train encoders on the config channel");
    add_common(cmd_train, opts);
    cmd_train->add_option("--out", out, "checkpoint JSON")->required();
    cmd_train->add_option("--history", history, "training history CSV");

    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "symmetric phase sweep CSV");
    add_common(cmd_sweep, opts);
    cmd_sweep->add_option("--out", out, "sweep CSV")->required();

    CLI::App* cmd_cdf =
        app.add_subcommand("cdf", "asymmetric-channel sumrate CDF CSV");
    add_common(cmd_cdf, opts);
    cmd_cdf->add_option("--out", out, "cdf CSV")->required();

    CLI::App* cmd_ablate = app.add_subcommand("ablate", "ablation studies");
    cmd_ablate->require_subcommand(1);
    CLI::App* ab_uniform = cmd_ablate->add_subcommand(
        "uniform", "snap a checkpoint's constellations to uniform grids");
    add_common(ab_uniform, opts);
    ab_uniform->add_option("--checkpoint", checkpoint)->required();
    ab_uniform->add_option("--epsilon", epsilon, "cluster gap tolerance");
    ab_uniform->add_option("--out", out, "transformed checkpoint JSON")
        ->required();
    CLI::App* ab_fixedpam = cmd_ablate->add_subcommand(
        "fixedpam", "replace a checkpoint's constellations with PAM");
    add_common(ab_fixedpam, opts);
    ab_fixedpam->add_option("--checkpoint", checkpoint)->required();
    ab_fixedpam->add_option("--out", out, "transformed checkpoint JSON")
        ->required();
    CLI::App* ab_pretrain = cmd_ablate->add_subcommand(
        "pretrain", "warm-start versus random-init paired comparison");
    add_common(ab_pretrain, opts);
    ab_pretrain->add_option("--out", out, "paired table CSV")->required();

    CLI::App* cmd_export = app.add_subcommand(
        "export-constellation", "noise-free receive-side scatter data");
    add_common(cmd_export, opts);
    cmd_export->add_option("--checkpoint", checkpoint)->required();
    cmd_export->add_option("--out", out, "points JSON")->required();
    cmd_export->add_option("--svg", svg_dir, "also write SVG scatters here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_maxsinr->parsed()) {
            iclab::ExperimentConfig cfg = load_cfg(opts);
            if (!channel_file.empty())
                cfg.channel = iclab::load_channel_fixture(channel_file);
            const iclab::ChannelSet ch = build_channel(cfg);
            iclab::MaxSinrConfig mcfg = cfg.maxsinr;
            mcfg.rng_seed = iclab::derive_seed(cfg.seed, "maxsinr");
            iclab::save_beamformers(iclab::run_maxsinr(ch, mcfg), out);
        } else if (cmd_eval->parsed()) {
            const iclab::ExperimentConfig cfg = load_cfg(opts);
            const iclab::ChannelSet ch = build_channel(cfg);
            const auto params = iclab::load_checkpoint(checkpoint);
            const iclab::ResultRow row = iclab::eval_hard_ml(
                ch, iclab::to_system_encoders(params),
                iclab::Algorithm::DiscMaxSinrPlus, cfg.eval_samples,
                iclab::derive_seed(cfg.seed, "eval"));
            iclab::write_eval_csv(row, out);
        } else if (cmd_train->parsed()) {
            const iclab::ExperimentConfig cfg = load_cfg(opts);
            const iclab::ChannelSet ch = build_channel(cfg);
            iclab::TrainConfig tcfg = cfg.train;
            tcfg.alphabet = cfg.alphabet;
            tcfg.maxsinr = cfg.maxsinr;
            tcfg.maxsinr.rng_seed = iclab::derive_seed(cfg.seed, "maxsinr");
            tcfg.rng_seed = iclab::derive_seed(cfg.seed, "train");
            const iclab::TrainResult res = iclab::train(ch, tcfg);
            iclab::save_checkpoint(res.params, out);
            if (!history.empty()) iclab::save_history_csv(res.history, history);
        } else if (cmd_sweep->parsed()) {
            const iclab::ExperimentConfig cfg = load_cfg(opts);
            iclab::write_sweep_csv(iclab::sweep_symmetric(cfg, cfg.theta_grid),
                                   out);
        } else if (cmd_cdf->parsed()) {
            const iclab::ExperimentConfig cfg = load_cfg(opts);
            iclab::write_cdf_csv(iclab::run_asymmetric_cdf(cfg).cdf, out);
        } else if (ab_uniform->parsed()) {
            const iclab::ExperimentConfig cfg = load_cfg(opts);
            const double eps =
                epsilon > 0.0 ? epsilon : cfg.uniformize_epsilon;
            iclab::save_checkpoint(
                iclab::ablation_uniformize(iclab::load_checkpoint(checkpoint),
                                           eps),
                out);
        } else if (ab_fixedpam->parsed()) {
            load_cfg(opts);  // validates the config
            iclab::save_checkpoint(
                iclab::ablation_fixed_pam(iclab::load_checkpoint(checkpoint)),
                out);
        } else if (ab_pretrain->parsed()) {
            const iclab::ExperimentConfig cfg = load_cfg(opts);
            iclab::write_pretrain_csv(iclab::pretrain_ablation(cfg), out);
        } else if (cmd_export->parsed()) {
            const iclab::ExperimentConfig cfg = load_cfg(opts);
            const iclab::ChannelSet ch = build_channel(cfg);
            const iclab::SystemEncoders enc =
                iclab::to_system_encoders(iclab::load_checkpoint(checkpoint));
            iclab::export_constellation(enc, ch, out);
            if (!svg_dir.empty())
                iclab::export_constellation_svg(enc, ch, svg_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
