#include "svt/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "svt/common.hpp"
#include "svt/evalkit.hpp"
#include "svt/gradcheck.hpp"
#include "svt/trainer.hpp"

namespace fs = std::filesystem;

namespace svt {

namespace {

struct ExpertFlags {
    std::string kind = "ncc";
    double eta = 0.1;
    double drift_prob = 0.05;
    double search_dilation = 2.0;
    std::string scales = "0.96;1;1.04";
    double template_update = 0.0;
    int template_size = 24;
    uint64_t seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--expert", kind, "expert kind: ncc | oracle | none")
            ->check(CLI::IsMember({"ncc", "oracle", "oracle_noise", "none"}));
        cmd->add_option("--eta", eta, "oracle jitter amplitude");
        cmd->add_option("--drift-prob", drift_prob, "oracle drift probability per frame");
        cmd->add_option("--search-dilation", search_dilation, "ncc search window dilation");
        cmd->add_option("--scales", scales, "ncc scale set, ';' separated");
        cmd->add_option("--template-update", template_update, "ncc template blending rate");
        cmd->add_option("--template-size", template_size, "ncc template resolution");
        cmd->add_option("--expert-seed", seed, "expert RNG seed");
    }

    ExpertParams params() const {
        ExpertParams p;
        if (kind == "ncc") p.kind = ExpertParams::Kind::ncc;
        else if (kind == "none") p.kind = ExpertParams::Kind::none;
        else p.kind = ExpertParams::Kind::oracle_noise;
        p.eta = eta;
        p.drift_prob = drift_prob;
        p.search_dilation = search_dilation;
        p.scales.clear();
        for (const auto& s : split(scales, ';')) p.scales.push_back(parse_double(s));
        p.template_update = template_update;
        p.template_size = template_size;
        p.seed = seed;
        return p;
    }
};

int cmd_gen(const std::string& out, int count, uint64_t seed, const std::string& config_path,
            const WorldConfig& flags_cfg, const std::vector<std::string>& given) {
    WorldConfig cfg;
    if (!config_path.empty()) {
        try {
            cfg = parse_world_config(read_text_file(config_path));
        } catch (const std::invalid_argument& e) {
            throw CLI::ValidationError("gen", e.what());
        }
    }
    // explicitly passed flags win over the config file
    for (const auto& name : given) {
        if (name == "--width") cfg.width = flags_cfg.width;
        else if (name == "--height") cfg.height = flags_cfg.height;
        else if (name == "--channels") cfg.channels = flags_cfg.channels;
        else if (name == "--min-frames") cfg.min_frames = flags_cfg.min_frames;
        else if (name == "--max-frames") cfg.max_frames = flags_cfg.max_frames;
        else if (name == "--max-speed") cfg.max_speed = flags_cfg.max_speed;
        else if (name == "--scale-std") cfg.scale_std = flags_cfg.scale_std;
        else if (name == "--distractors") cfg.max_distractors = flags_cfg.max_distractors;
        else if (name == "--occluder-prob") cfg.occluder_prob = flags_cfg.occluder_prob;
        else if (name == "--noise-amp") cfg.noise_amp = flags_cfg.noise_amp;
        else if (name == "--texture-seed") cfg.texture_seed = flags_cfg.texture_seed;
        else if (name == "--shape") cfg.shape = flags_cfg.shape;
    }
    DatasetManifest manifest = generate_dataset(count, seed, cfg, out);
    std::cout << "wrote " << manifest.entries.size() << " sequences to " << out
              << " (dataset digest " << dataset_digest(out) << ")\n";
    return 0;
}

int cmd_demos(const std::string& dataset, const std::string& out, const ExpertFlags& flags) {
    ExpertParams params = flags.params();
    if (params.kind == ExpertParams::Kind::none)
        throw std::runtime_error("demos: the 'none' expert produces no demonstrations");
    fs::create_directories(out);
    auto sequences = load_dataset(dataset);
    int positive = 0;
    std::string index;
    for (const auto& seq : sequences) {
        Demonstration demo = run_expert(params, seq);
        save_demo(demo, (fs::path(out) / (seq.id + ".txt")).string());
        if (demo.positive) {
            ++positive;
            index += seq.id + "\n";
        }
    }
    write_text_file((fs::path(out) / "positive.txt").string(), index);
    std::cout << "wrote " << sequences.size() << " demonstrations to " << out << ", " << positive
              << " positive\n";
    return 0;
}

int cmd_train(const std::string& dataset, const std::string& demos, const std::string& out,
              std::string log_path, const TrainConfig& cfg) {
    if (log_path.empty()) log_path = out + ".log";
    TrainOutcome outcome = train(cfg, dataset, demos, out, log_path);
    std::cout << "trained " << outcome.episodes << " episodes (" << outcome.imitation_updates
              << " imitation updates, " << outcome.rl_updates << " rl updates, "
              << outcome.testing_episodes << " testing episodes), final horizon "
              << outcome.final_horizon << "\n"
              << "checkpoint: " << outcome.checkpoint_path << "\nlog: " << outcome.log_path << "\n";
    return 0;
}

int cmd_track(const std::string& checkpoint, const std::string& dataset, const std::string& out,
              const std::string& mode, const ExpertFlags& flags) {
    CheckpointBundle bundle = load_checkpoint(checkpoint);
    EpisodeConfig ecfg = episode_config_of(bundle.net, bundle.meta);
    std::string ckpt_digest = checkpoint_digest(checkpoint);
    std::string data_digest = dataset_digest(dataset);
    fs::create_directories(out);
    auto sequences = load_dataset(dataset);
    for (const auto& seq : sequences) {
        TrajectoryRecord rec;
        BBox init = seq.groundtruth.at(0);
        if (mode == "a3ct") rec = track_a3ct(bundle.net, ecfg, seq, init);
        else rec = track_a3ctd(bundle.net, bundle.meta, ecfg, flags.params(), seq, init);
        rec.checkpoint_digest = ckpt_digest;
        rec.dataset_digest = data_digest;
        save_trajectory(rec, (fs::path(out) / (seq.id + ".txt")).string());
    }
    std::cout << "tracked " << sequences.size() << " sequences (" << mode << ") into " << out << "\n";
    return 0;
}

int cmd_eval(const std::string& dataset, const std::string& out, const std::string& checkpoint,
             const std::string& mode, const std::string& trajectories, const ExpertFlags& flags) {
    EvalReport report;
    bool mismatch = false;
    if (!trajectories.empty()) {
        report = evaluate_trajectory_dir(trajectories, dataset, &mismatch);
    } else {
        OpeOptions opts;
        opts.mode = mode;
        opts.checkpoint_path = checkpoint;
        opts.expert = flags.params();
        if ((mode == "a3ct" || mode == "a3ctd") && checkpoint.empty())
            throw CLI::ValidationError("eval", "--checkpoint is required for mode " + mode);
        report = ope_run(opts, dataset);
    }
    save_report(report, out);
    std::cout << "ao=" << format_double(report.aggregate.ao)
              << " sr50=" << format_double(report.aggregate.sr50)
              << " sr75=" << format_double(report.aggregate.sr75)
              << " ss=" << format_double(report.aggregate.ss)
              << " ps=" << format_double(report.aggregate.ps) << "\nreport: " << out << "\n";
    if (mismatch) {
        std::cerr << "warning: trajectory files carry a different dataset digest than " << dataset
                  << "\n";
        return 3;
    }
    return 0;
}

int cmd_plot(const std::vector<std::string>& report_paths, std::vector<std::string> labels,
             const std::string& out) {
    std::vector<EvalReport> reports;
    for (const auto& p : report_paths) reports.push_back(load_report(p));
    if (labels.empty())
        for (const auto& r : reports) labels.push_back(r.mode.empty() ? "tracker" : r.mode);
    if (labels.size() != reports.size())
        throw CLI::ValidationError("plot", "--label count must match --report count");
    emit_plots(reports, labels, out);
    std::cout << "wrote " << (fs::path(out) / "success.svg").string() << " and "
              << (fs::path(out) / "precision.svg").string() << "\n";
    return 0;
}

int cmd_gradcheck(uint64_t seed) {
    auto cases = run_gradcheck_suite(seed);
    for (const auto& c : cases)
        std::cout << c.name << ": max rel err " << format_double(c.max_rel_err) << " over "
                  << c.checked << " parameters\n";
    double worst = gradcheck_worst(cases);
    std::cout << "worst: " << format_double(worst) << "\n";
    return worst <= 1e-4 ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"svt: a desk-scale tracking agent trained from expert demonstrations"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic tracking dataset");
    std::string gen_out, gen_config;
    int gen_count = 10;
    uint64_t gen_seed = 0;
    WorldConfig wf;
    std::string gen_shape = "rectangle";
    gen->add_option("--out", gen_out, "output dataset directory")->required();
    gen->add_option("--count", gen_count, "number of sequences");
    gen->add_option("--seed", gen_seed, "dataset seed");
    gen->add_option("--config", gen_config, "world config file (key=value)");
    gen->add_option("--width", wf.width);
    gen->add_option("--height", wf.height);
    gen->add_option("--channels", wf.channels);
    gen->add_option("--min-frames", wf.min_frames);
    gen->add_option("--max-frames", wf.max_frames);
    gen->add_option("--max-speed", wf.max_speed);
    gen->add_option("--scale-std", wf.scale_std);
    gen->add_option("--distractors", wf.max_distractors);
    gen->add_option("--occluder-prob", wf.occluder_prob);
    gen->add_option("--noise-amp", wf.noise_amp);
    gen->add_option("--texture-seed", wf.texture_seed);
    gen->add_option("--shape", gen_shape)->check(CLI::IsMember({"rectangle", "ellipse"}));

    // demos
    auto* demos = app.add_subcommand("demos", "run an expert tracker over a dataset");
    std::string demos_dataset, demos_out;
    ExpertFlags demos_expert;
    demos->add_option("--dataset", demos_dataset, "dataset directory")->required();
    demos->add_option("--out", demos_out, "output demonstrations directory")->required();
    demos_expert.attach(demos);

    // train
    auto* train_cmd = app.add_subcommand("train", "train the tracking agent");
    std::string train_dataset, train_demos, train_out, train_log, train_config;
    TrainConfig tc;
    tc.workers = 2;  // desk-scale default; the full-size run uses 16
    bool flag_imitation_only = false, flag_rl_only = false, flag_no_curriculum = false,
         flag_deterministic = false;
    train_cmd->add_option("--dataset", train_dataset, "dataset directory")->required();
    train_cmd->add_option("--demos", train_demos, "demonstrations directory")->required();
    train_cmd->add_option("--out", train_out, "output checkpoint path")->required();
    train_cmd->add_option("--log", train_log, "training log path (default: <out>.log)");
    train_cmd->add_option("--config", train_config, "training config file (key=value)");
    auto* o_workers = train_cmd->add_option("--workers", tc.workers, "parallel training agents (P)");
    auto* o_episodes = train_cmd->add_option("--episodes", tc.episodes, "episode budget");
    auto* o_seed = train_cmd->add_option("--seed", tc.seed, "training seed");
    auto* o_lr = train_cmd->add_option("--lr", tc.learning_rate, "learning rate");
    auto* o_tmax = train_cmd->add_option("--t-max", tc.t_max, "rollout length");
    auto* o_tau = train_cmd->add_option("--tau", tc.tau, "curriculum threshold");
    auto* o_gamma = train_cmd->add_option("--gamma", tc.gamma, "discount factor");
    auto* o_smin = train_cmd->add_option("--sigma-min", tc.sigma_min, "exploration noise floor");
    auto* o_patch = train_cmd->add_option("--patch", tc.model.patch, "crop resolution");
    auto* o_k = train_cmd->add_option("--k", tc.episode.k, "crop dilation");
    auto* o_ckpt_every = train_cmd->add_option("--checkpoint-every", tc.checkpoint_every,
                                               "episodes between periodic checkpoints");
    auto* o_clip = train_cmd->add_option("--grad-clip", tc.grad_clip,
                                         "L2 cap per rollout gradient (0 = off)");
    train_cmd->add_flag("--imitation-only", flag_imitation_only, "ablation: all workers imitate");
    train_cmd->add_flag("--rl-only", flag_rl_only, "ablation: all workers do RL");
    train_cmd->add_flag("--no-curriculum", flag_no_curriculum, "ablation: full horizon from the start");
    train_cmd->add_flag("--deterministic", flag_deterministic,
                        "single-threaded scheduler, bit-reproducible");

    // track
    auto* track = app.add_subcommand("track", "run a tracker over a dataset");
    std::string track_ckpt, track_dataset, track_out, track_mode = "a3ct";
    ExpertFlags track_expert_flags;
    track->add_option("--checkpoint", track_ckpt, "checkpoint path")->required();
    track->add_option("--dataset", track_dataset, "dataset directory")->required();
    track->add_option("--out", track_out, "output trajectory directory")->required();
    track->add_option("--mode", track_mode, "a3ct | a3ctd")->check(CLI::IsMember({"a3ct", "a3ctd"}));
    track_expert_flags.attach(track);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "one-pass evaluation");
    std::string eval_dataset, eval_out, eval_ckpt, eval_mode = "a3ct", eval_traj;
    ExpertFlags eval_expert_flags;
    eval_cmd->add_option("--dataset", eval_dataset, "dataset directory")->required();
    eval_cmd->add_option("--out", eval_out, "output report path")->required();
    eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint path");
    eval_cmd->add_option("--mode", eval_mode, "a3ct | a3ctd | static | expert")
        ->check(CLI::IsMember({"a3ct", "a3ctd", "static", "expert"}));
    eval_cmd->add_option("--trajectories", eval_traj, "score pre-computed trajectory files instead");
    eval_expert_flags.attach(eval_cmd);

    // plot
    auto* plot = app.add_subcommand("plot", "render success/precision plots as SVG");
    std::vector<std::string> plot_reports, plot_labels;
    std::string plot_out;
    plot->add_option("--report", plot_reports, "report file (repeatable)")->required();
    plot->add_option("--label", plot_labels, "legend label per report");
    plot->add_option("--out", plot_out, "output directory")->required();

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the gradient engine");
    uint64_t gc_seed = 7;
    gradcheck->add_option("--seed", gc_seed, "fixture seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            if (gen_count < 1) throw std::runtime_error("gen: --count must be >= 1");
            wf.shape = gen_shape == "ellipse" ? TargetShape::ellipse : TargetShape::rectangle;
            std::vector<std::string> given;
            for (const auto* opt : gen->get_options())
                if (opt->count() > 0) given.push_back(opt->get_name());
            return cmd_gen(gen_out, gen_count, gen_seed, gen_config, wf, given);
        }
        if (demos->parsed()) return cmd_demos(demos_dataset, demos_out, demos_expert);
        if (train_cmd->parsed()) {
            TrainConfig cfg = tc;
            if (!train_config.empty()) {
                TrainConfig base;
                base.workers = 2;
                try {
                    cfg = parse_train_config(read_text_file(train_config), base);
                } catch (const std::invalid_argument& e) {
                    throw CLI::ValidationError("train", e.what());
                }
                // explicit flags win over the config file
                if (o_workers->count()) cfg.workers = tc.workers;
                if (o_episodes->count()) cfg.episodes = tc.episodes;
                if (o_seed->count()) cfg.seed = tc.seed;
                if (o_lr->count()) cfg.learning_rate = tc.learning_rate;
                if (o_tmax->count()) cfg.t_max = tc.t_max;
                if (o_tau->count()) cfg.tau = tc.tau;
                if (o_gamma->count()) cfg.gamma = tc.gamma;
                if (o_smin->count()) cfg.sigma_min = tc.sigma_min;
                if (o_patch->count()) { cfg.model.patch = tc.model.patch; }
                if (o_k->count()) cfg.episode.k = tc.episode.k;
                if (o_ckpt_every->count()) cfg.checkpoint_every = tc.checkpoint_every;
                if (o_clip->count()) cfg.grad_clip = tc.grad_clip;
            }
            cfg.episode.patch = cfg.model.patch;
            if (flag_imitation_only) cfg.imitation_only = true;
            if (flag_rl_only) cfg.rl_only = true;
            if (flag_no_curriculum) cfg.curriculum_disabled = true;
            if (flag_deterministic) cfg.deterministic = true;
            return cmd_train(train_dataset, train_demos, train_out, train_log, cfg);
        }
        if (track->parsed())
            return cmd_track(track_ckpt, track_dataset, track_out, track_mode, track_expert_flags);
        if (eval_cmd->parsed())
            return cmd_eval(eval_dataset, eval_out, eval_ckpt, eval_mode, eval_traj, eval_expert_flags);
        if (plot->parsed()) return cmd_plot(plot_reports, plot_labels, plot_out);
        if (gradcheck->parsed()) return cmd_gradcheck(gc_seed);
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace svt
