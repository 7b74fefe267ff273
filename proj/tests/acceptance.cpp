// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criteria 6-8 share one smoke-training recipe (30 training
// sequences, NCC expert demonstrations, 2000 episodes per seed).
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "svt/cli.hpp"
#include "svt/common.hpp"
#include "svt/evalkit.hpp"
#include "svt/gradcheck.hpp"
#include "svt/trainer.hpp"

using namespace svt;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path fresh_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("svt_accept_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// ---------------------------------------------------------------- criterion 1

void criterion_geometry() {
    auto t0 = Clock::now();
    bool ok = true;
    std::string why;

    Rng rng(1001);
    double worst_rt = 0;
    for (int i = 0; i < 100000; ++i) {
        ActionDelta a{rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9),
                      rng.uniform(-0.9, 0.9)};
        BBox b{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(0.5, 80),
               rng.uniform(0.5, 80)};
        auto round = box_delta(apply_action(a, b).box, b).delta.to_array();
        auto want = a.to_array();
        for (int j = 0; j < 4; ++j) worst_rt = std::max(worst_rt, std::abs(round[j] - want[j]));
    }
    if (worst_rt > 1e-9) {
        ok = false;
        why += " round-trip err " + format_double(worst_rt) + ";";
    }

    std::set<double> image;
    for (int i = 0; i <= 200000; ++i) image.insert(quantized_reward(i / 200000.0));
    std::set<double> expected{-1.0};
    for (int j = 0; j <= 10; ++j) expected.insert(j / 10.0);
    if (image != expected) {
        ok = false;
        why += " reward image mismatch;";
    }
    if (quantized_reward(0.5) != 0.0 || std::abs(quantized_reward(0.73) - 0.4) > 1e-15 ||
        quantized_reward(1.0) != 1.0) {
        ok = false;
        why += " reward spot values;";
    }

    double worst_iou = 0;
    for (int i = 0; i < 1000; ++i) {
        BBox a{double(rng.uniform_int(-20, 20)), double(rng.uniform_int(-20, 20)),
               double(rng.uniform_int(1, 30)), double(rng.uniform_int(1, 30))};
        BBox b{double(rng.uniform_int(-20, 20)), double(rng.uniform_int(-20, 20)),
               double(rng.uniform_int(1, 30)), double(rng.uniform_int(1, 30))};
        worst_iou = std::max(worst_iou, std::abs(iou(a, b) - oracle::rasterized_iou(a, b)));
    }
    if (worst_iou > 1e-3) {
        ok = false;
        why += " IoU vs rasterization err " + format_double(worst_iou) + ";";
    }

    double dt = seconds_since(t0);
    if (dt >= 10.0) {
        ok = false;
        why += " runtime " + format_double(dt) + "s >= 10s;";
    }
    char detail[160];
    snprintf(detail, sizeof(detail), "round-trip<=%.2e, IoU-oracle<=%.2e, %.1fs%s", worst_rt,
             worst_iou, dt, why.c_str());
    report(1, "geometry suite", ok, detail);
}

// ---------------------------------------------------------------- criterion 2

void criterion_gradcheck() {
    auto t0 = Clock::now();
    auto cases = run_gradcheck_suite(7);
    double worst = gradcheck_worst(cases);
    double dt = seconds_since(t0);
    bool ok = worst <= 1e-4 && dt < 60.0 && !cases.empty();
    char detail[120];
    snprintf(detail, sizeof(detail), "max rel err %.3e over %zu cases, %.1fs", worst, cases.size(),
             dt);
    report(2, "gradient checks", ok, detail);
}

// ---------------------------------------------------------------- criterion 3

SyntheticSequence sliding_fixture(double step) {
    SyntheticSequence seq;
    seq.id = "slide";
    for (int t = 0; t < 10; ++t) {
        Frame f;
        f.width = 48;
        f.height = 48;
        f.channels = 1;
        f.pixels.assign(48 * 48, 15);
        double bx = 6 + t * step;
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < 12; ++x)
                f.at(int(bx) + x, 18 + y, 0) = uint8_t(90 + 14 * ((x * 5 + y * 3) % 11));
        seq.frames.push_back(std::move(f));
        seq.groundtruth.push_back({bx, 18, 12, 12});
    }
    return seq;
}

Demonstration demo_from_boxes(const SyntheticSequence& seq, const std::vector<BBox>& boxes) {
    Demonstration d;
    d.sequence_id = seq.id;
    d.expert_desc = "fixture";
    d.boxes = boxes;
    d.ious.push_back(iou(boxes[0], seq.groundtruth[0]));
    d.positive = true;
    for (int t = 1; t < seq.length(); ++t) {
        auto delta = box_delta(boxes[t], boxes[t - 1]);
        double overlap = iou(boxes[t], seq.groundtruth[t]);
        d.actions.push_back(delta.delta);
        d.action_clipped.push_back(delta.clipped ? 1 : 0);
        d.ious.push_back(overlap);
        d.rewards.push_back(quantized_reward(overlap));
        if (!(overlap > 0.5)) d.positive = false;
    }
    return d;
}

void criterion_masked_imitation() {
    TrainConfig cfg;
    cfg.model.patch = 8;
    cfg.model.conv_filters = {2, 3};
    cfg.model.fc_widths = {8, 8};
    cfg.model.lstm_width = 6;
    cfg.episode.patch = 8;
    cfg.weight_decay = 0.0;  // decay disabled for the zero-gradient claim

    // the zero-parameter agent holds g_0 on a frozen scene: reward 1 always
    SyntheticSequence frozen = sliding_fixture(0.0);
    std::vector<BBox> bad(frozen.length(), BBox{-200, -200, 5, 5});
    bad[0] = frozen.groundtruth[0];
    Demonstration worse = demo_from_boxes(frozen, bad);

    PolicyValueNet master(cfg.model);
    ParameterStore store(master.params(), {cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
                                           cfg.adam_eps, cfg.weight_decay});
    PolicyValueNet local(cfg.model);
    ParamSet before = store.current();
    EpisodeStats st = run_imitation_episode(local, store, frozen, worse, cfg, 8);
    bool zero_grad = st.grad_linf == 0.0 && st.loss == 0.0;
    ParamSet after = store.current();
    for (size_t i = 0; i < before.tensors.size(); ++i)
        zero_grad = zero_grad && before.tensors[i].v == after.tensors[i].v;

    // flip: on a moving scene the demo wins the last step and the loss opens
    SyntheticSequence moving = sliding_fixture(3.0);
    std::vector<BBox> flip(moving.length(), BBox{-200, -200, 5, 5});
    flip[0] = moving.groundtruth[0];
    flip[moving.length() - 1] = moving.groundtruth[moving.length() - 1];
    Demonstration one_win = demo_from_boxes(moving, flip);
    PolicyValueNet local2(cfg.model);
    EpisodeStats st2 = run_imitation_episode(local2, store, moving, one_win, cfg, moving.steps());
    bool nonzero = st2.grad_linf > 0.0 && st2.loss > 0.0;

    char detail[120];
    snprintf(detail, sizeof(detail), "masked grad linf %.1e, unmasked grad linf %.3e", st.grad_linf,
             st2.grad_linf);
    report(3, "masked-imitation semantics", zero_grad && nonzero, detail);
}

// ---------------------------------------------------------------- criterion 4

void criterion_curriculum() {
    bool ok = true;
    std::string why;

    CurriculumController c24(8, 8, 100, 64, false);
    for (int i = 0; i < 24; ++i) c24.push_outcome(true);
    for (int i = 0; i < 76; ++i) c24.push_outcome(false);
    if (c24.maybe_advance(0.25).advanced || c24.horizon() != 8) {
        ok = false;
        why += " advanced at 24/100;";
    }

    CurriculumController c25(8, 8, 100, 64, false);
    for (int i = 0; i < 25; ++i) c25.push_outcome(true);
    for (int i = 0; i < 75; ++i) c25.push_outcome(false);
    if (!c25.maybe_advance(0.25).advanced || c25.horizon() != 16) {
        ok = false;
        why += " no advance at 25/100;";
    }

    Rng rng(4);
    CurriculumController mono(8, 8, 10, 64, false);
    int prev = mono.horizon();
    for (int i = 0; i < 400; ++i) {
        mono.push_outcome(rng.next_double() < 0.5);
        mono.maybe_advance(0.25);
        if (mono.horizon() < prev) {
            ok = false;
            why += " horizon decreased;";
            break;
        }
        prev = mono.horizon();
    }

    // Eq. 7 tie: equal reward sums count as a success
    SyntheticSequence frozen = sliding_fixture(0.0);
    Demonstration equal = demo_from_boxes(frozen, frozen.groundtruth);
    ModelConfig mc;
    mc.patch = 8;
    mc.conv_filters = {2, 3};
    mc.fc_widths = {8, 8};
    mc.lstm_width = 6;
    PolicyValueNet agent(mc);
    EpisodeConfig ecfg;
    ecfg.patch = 8;
    EpisodeStats st;
    bool tie_success = testing_episode(agent, frozen, equal, ecfg, 8, &st);
    if (!tie_success || st.sum_reward != st.sum_demo_reward) {
        ok = false;
        why += " tie not counted as success;";
    }

    report(4, "curriculum unit suite", ok,
           ok ? "threshold, tie and monotonicity hold" : why);
}

// ---------------------------------------------------------------- criterion 5

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"svt"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_main(int(argv.size()), argv.data());
}

bool run_pipeline(const fs::path& root, std::string* out_digest) {
    std::string data = (root / "data").string();
    std::string demos = (root / "demos").string();
    std::string ckpt = (root / "net.ckpt").string();
    std::string traj = (root / "traj").string();
    std::string rep = (root / "report.txt").string();
    if (run_cli({"gen", "--out", data, "--count", "6", "--seed", "77", "--width", "96", "--height",
                 "96", "--min-frames", "12", "--max-frames", "16"}) != 0)
        return false;
    if (run_cli({"demos", "--dataset", data, "--out", demos, "--expert", "ncc"}) != 0) return false;
    if (run_cli({"train", "--dataset", data, "--demos", demos, "--out", ckpt, "--episodes", "40",
                 "--workers", "2", "--deterministic", "--seed", "5", "--patch", "16", "--lr",
                 "0.0003"}) != 0)
        return false;
    if (run_cli({"track", "--checkpoint", ckpt, "--dataset", data, "--out", traj, "--mode",
                 "a3ct"}) != 0)
        return false;
    if (run_cli({"eval", "--dataset", data, "--trajectories", traj, "--out", rep}) != 0)
        return false;

    Fnv1a digest;
    for (const auto& entry : load_manifest(data).entries)
        digest.update(read_text_file((fs::path(traj) / (entry.id + ".txt")).string()));
    digest.update(read_text_file(rep));
    *out_digest = digest.hex();
    return true;
}

void criterion_determinism() {
    auto t0 = Clock::now();
    std::string d1, d2;
    bool ok1 = run_pipeline(fresh_dir("det1"), &d1);
    bool ok2 = run_pipeline(fresh_dir("det2"), &d2);
    bool ok = ok1 && ok2 && d1 == d2;
    char detail[160];
    snprintf(detail, sizeof(detail), "digests %s vs %s, %.1fs", d1.c_str(), d2.c_str(),
             seconds_since(t0));
    report(5, "pipeline determinism", ok, detail);
}

// ------------------------------------------------------- criteria 6, 7 and 8

struct SmokeRecipe {
    WorldConfig world;
    TrainConfig train;
    int train_sequences = 30;
    int eval_sequences = 10;
    uint64_t train_seed = 9000;
    uint64_t eval_seed = 9100;
    std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
};

// Desk-scale recipe. The deterministic scheduler makes every number below
// reproducible run to run. gamma, t_max, sigma_min and the gradient clip are
// recipe-level stability choices: with undiscounted returns the advantage
// scales with the curriculum horizon, and each horizon advance re-inflates
// it faster than the value head can follow within a 2000-episode budget.
SmokeRecipe smoke_recipe() {
    SmokeRecipe r;
    r.world.width = 128;
    r.world.height = 128;
    r.world.min_frames = 20;
    r.world.max_frames = 40;
    r.world.max_speed = 0.13;
    r.world.scale_std = 0.02;
    r.world.max_distractors = 2;
    r.world.occluder_prob = 0.035;
    r.world.noise_amp = 8.0;

    r.train.workers = 2;
    r.train.episodes = 2000;
    r.train.t_max = 20;
    r.train.gamma = 0.6;
    r.train.learning_rate = 3e-4;
    r.train.sigma_min = 0.1;
    r.train.value_coef = 0.5;
    r.train.grad_clip = 5.0;
    r.train.deterministic = true;
    r.train.curriculum_initial = 8;
    r.train.curriculum_increment = 8;
    r.train.curriculum_window = 100;
    r.train.model.patch = 24;
    r.train.model.conv_filters = {8, 16};
    r.train.model.fc_widths = {48, 48};
    r.train.model.lstm_width = 48;
    r.train.episode.patch = 24;
    return r;
}

struct SmokeArtifacts {
    fs::path root;
    std::string train_dir, eval_dir, demos_dir;
    std::vector<std::string> checkpoints;  // one per seed
    std::vector<double> ao_trained, ao_untrained;
    double ao_static = 0;
    int passing_seeds = 0;
    bool ran = false;
};

SmokeArtifacts g_smoke;

void criterion_smoke_training() {
    auto t0 = Clock::now();
    SmokeRecipe recipe = smoke_recipe();
    SmokeArtifacts& art = g_smoke;
    art.root = fresh_dir("smoke");
    art.train_dir = (art.root / "train_data").string();
    art.eval_dir = (art.root / "eval_data").string();
    art.demos_dir = (art.root / "demos").string();

    generate_dataset(recipe.train_sequences, recipe.train_seed, recipe.world, art.train_dir);
    generate_dataset(recipe.eval_sequences, recipe.eval_seed, recipe.world, art.eval_dir);

    // NCC demonstrations over the training set
    int positives = 0;
    {
        fs::create_directories(art.demos_dir);
        ExpertParams ncc;
        ncc.kind = ExpertParams::Kind::ncc;
        auto sequences = load_dataset(art.train_dir);
        for (const auto& seq : sequences) {
            Demonstration d = run_expert(ncc, seq);
            if (d.positive) ++positives;
            save_demo(d, (fs::path(art.demos_dir) / (seq.id + ".txt")).string());
        }
    }

    OpeOptions static_opts;
    static_opts.mode = "static";
    art.ao_static = ope_run(static_opts, art.eval_dir).aggregate.ao;

    int pass_a = 0, pass_b = 0;
    for (uint64_t seed : recipe.seeds) {
        TrainConfig cfg = recipe.train;
        cfg.seed = seed;
        std::string ckpt = (art.root / ("net_" + std::to_string(seed) + ".ckpt")).string();
        std::string log = ckpt + ".log";
        train(cfg, art.train_dir, art.demos_dir, ckpt, log);
        art.checkpoints.push_back(ckpt);

        OpeOptions opts;
        opts.mode = "a3ct";
        opts.checkpoint_path = ckpt;
        double ao_trained = ope_run(opts, art.eval_dir).aggregate.ao;
        art.ao_trained.push_back(ao_trained);

        // untrained baseline: the same architecture at its initial weights
        PolicyValueNet fresh = PolicyValueNet::init(cfg.model, seed);
        CheckpointMeta meta;
        meta.episode_k = cfg.episode.k;
        meta.rl_updates = 1;  // structural placeholder; only a3ct is run here
        std::string fresh_ckpt = (art.root / ("untrained_" + std::to_string(seed) + ".ckpt")).string();
        save_checkpoint(fresh_ckpt, fresh, meta);
        OpeOptions uopts;
        uopts.mode = "a3ct";
        uopts.checkpoint_path = fresh_ckpt;
        double ao_untrained = ope_run(uopts, art.eval_dir).aggregate.ao;
        art.ao_untrained.push_back(ao_untrained);

        bool a = ao_trained - art.ao_static >= 0.10;
        bool b = ao_trained - ao_untrained >= 0.10;
        if (a) ++pass_a;
        if (b) ++pass_b;
        if (a && b) ++art.passing_seeds;
        printf("  seed %llu: AO trained %.3f, untrained %.3f, static %.3f%s\n",
               (unsigned long long)seed, ao_trained, ao_untrained, art.ao_static,
               a && b ? "" : "  <-- below margin");
        fflush(stdout);
    }
    art.ran = true;

    // supplementary example: a trained tracker holds a frozen-dynamics
    // target almost perfectly
    {
        WorldConfig frozen = recipe.world;
        frozen.max_speed = 0.0;
        frozen.scale_std = 0.0;
        frozen.occluder_prob = 0.0;
        frozen.max_distractors = 0;
        SyntheticSequence seq = generate_sequence(4242, frozen);
        seq.id = "frozen";
        size_t best = 0;
        for (size_t i = 1; i < art.ao_trained.size(); ++i)
            if (art.ao_trained[i] > art.ao_trained[best]) best = i;
        CheckpointBundle bundle = load_checkpoint(art.checkpoints[best]);
        EpisodeConfig ecfg = episode_config_of(bundle.net, bundle.meta);
        TrajectoryRecord rec = track_a3ct(bundle.net, ecfg, seq, seq.groundtruth[0]);
        double frozen_ao = ao(rec.boxes, seq.groundtruth);
        printf("  frozen-dynamics AO with the best checkpoint: %.3f (want >= 0.8)\n", frozen_ao);
        if (frozen_ao < 0.8) ++g_failures;
    }

    bool ok = art.passing_seeds >= 4;
    char detail[200];
    snprintf(detail, sizeof(detail),
             "%d/%zu seeds pass both margins (static AO %.3f, %d/%d positive demos), %.0fs",
             art.passing_seeds, recipe.seeds.size(), art.ao_static, positives,
             recipe.train_sequences, seconds_since(t0));
    report(6, "smoke training better than baselines", ok, detail);
}

void criterion_arbitration() {
    auto t0 = Clock::now();
    if (!g_smoke.ran || g_smoke.checkpoints.empty()) {
        report(7, "value arbitration direction", false, "smoke training unavailable");
        return;
    }
    // arbitrate with the best-performing smoke checkpoint
    size_t best = 0;
    for (size_t i = 1; i < g_smoke.ao_trained.size(); ++i)
        if (g_smoke.ao_trained[i] > g_smoke.ao_trained[best]) best = i;
    const std::string& ckpt = g_smoke.checkpoints[best];
    double ao_a3ct = g_smoke.ao_trained[best];

    OpeOptions ncc_opts;
    ncc_opts.mode = "a3ctd";
    ncc_opts.checkpoint_path = ckpt;
    ncc_opts.expert.kind = ExpertParams::Kind::ncc;
    double ao_a3ctd_ncc = ope_run(ncc_opts, g_smoke.eval_dir).aggregate.ao;

    OpeOptions oracle_opts = ncc_opts;
    oracle_opts.expert.kind = ExpertParams::Kind::oracle_noise;
    oracle_opts.expert.eta = 0.0;
    double ao_a3ctd_oracle = ope_run(oracle_opts, g_smoke.eval_dir).aggregate.ao;

    OpeOptions expert_opts;
    expert_opts.mode = "expert";
    expert_opts.expert.kind = ExpertParams::Kind::oracle_noise;
    expert_opts.expert.eta = 0.0;
    double ao_expert = ope_run(expert_opts, g_smoke.eval_dir).aggregate.ao;

    bool keeps_up = ao_a3ctd_ncc >= ao_a3ct - 0.02;
    bool defers = ao_a3ctd_oracle >= 0.9 * ao_expert;
    char detail[220];
    snprintf(detail, sizeof(detail),
             "AO a3ct %.3f, a3ctd+ncc %.3f (>= %.3f), a3ctd+oracle %.3f (>= %.3f), %.0fs", ao_a3ct,
             ao_a3ctd_ncc, ao_a3ct - 0.02, ao_a3ctd_oracle, 0.9 * ao_expert, seconds_since(t0));
    report(7, "value arbitration direction", keeps_up && defers, detail);
}

void criterion_ablation() {
    auto t0 = Clock::now();
    if (!g_smoke.ran || g_smoke.checkpoints.empty()) {
        report(8, "imitation-only ablation direction", false, "smoke training unavailable");
        return;
    }
    // paired ablation at the first recipe seed, both arms under the same
    // deterministic recipe (one run per arm, as in the original study)
    SmokeRecipe recipe = smoke_recipe();
    TrainConfig cfg = recipe.train;
    cfg.seed = recipe.seeds[0];
    cfg.imitation_only = true;
    std::string ckpt = (g_smoke.root / "net_sl.ckpt").string();
    train(cfg, g_smoke.train_dir, g_smoke.demos_dir, ckpt, ckpt + ".log");

    OpeOptions opts;
    opts.mode = "a3ct";
    opts.checkpoint_path = ckpt;
    double ao_sl = ope_run(opts, g_smoke.eval_dir).aggregate.ao;
    double ao_full = g_smoke.ao_trained[0];  // same seed, full A3C

    bool ok = ao_sl <= ao_full + 0.02;
    char detail[160];
    snprintf(detail, sizeof(detail),
             "AO imitation-only %.3f vs full %.3f (+0.02 margin, paired at seed %llu), %.0fs",
             ao_sl, ao_full, (unsigned long long)recipe.seeds[0], seconds_since(t0));
    report(8, "imitation-only ablation direction", ok, detail);
}

// ---------------------------------------------------------------- criterion 9

void criterion_metric_oracles() {
    Rng rng(31);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        int frames = rng.uniform_int(20, 120);
        std::vector<BBox> gt, traj;
        for (int t = 0; t <= frames; ++t) {
            gt.push_back(
                {rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(5, 30), rng.uniform(5, 30)});
            traj.push_back(
                {rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(5, 30), rng.uniform(5, 30)});
        }
        traj[0] = gt[0];
        std::vector<double> ious, errors;
        for (int t = 1; t <= frames; ++t) {
            ious.push_back(iou(traj[t], gt[t]));
            double dx = traj[t].cx() - gt[t].cx();
            double dy = traj[t].cy() - gt[t].cy();
            errors.push_back(std::sqrt(dx * dx + dy * dy));
        }
        double sum = 0;
        for (double v : ious) sum += v;
        worst = std::max(worst, std::abs(ao(traj, gt) - sum / ious.size()));
        worst = std::max(worst, std::abs(ss(traj, gt) - oracle::brute_ss(ious)));
        worst = std::max(worst, std::abs(ps(traj, gt) - oracle::brute_ps(errors)));
        worst = std::max(worst, std::abs(sr(traj, gt, 0.5) - oracle::brute_success_rate(ious, 0.5)));
        worst = std::max(worst,
                         std::abs(sr(traj, gt, 0.75) - oracle::brute_success_rate(ious, 0.75)));
    }
    char detail[80];
    snprintf(detail, sizeof(detail), "max |metric - oracle| = %.2e over 100 fixtures", worst);
    report(9, "metric oracles", worst <= 1e-12, detail);
}

// --------------------------------------------------------------- criterion 10

void criterion_store_integrity() {
    auto t0 = Clock::now();
    ModelConfig mc;
    mc.patch = 8;
    mc.conv_filters = {2, 3};
    mc.fc_widths = {8, 8};
    mc.lstm_width = 6;
    PolicyValueNet net = PolicyValueNet::init(mc, 77);

    bool ok = true;
    std::string why;

    // torn-snapshot test: writers stamp every block with one value, a reader
    // keeps verifying that each snapshot is uniform
    {
        ParameterStore store(net.params(), {});
        const int writers = 8;
        const int writes_each = 10000 / writers;
        std::atomic<bool> stop{false};
        std::atomic<long> torn{0};
        std::vector<std::thread> threads;
        for (int w = 0; w < writers; ++w)
            threads.emplace_back([&store, w, writes_each]() {
                for (int i = 0; i < writes_each; ++i) {
                    double stamp = w * 1000000.0 + i;
                    store.with_exclusive([stamp](ParamSet& p) {
                        for (auto& t : p.tensors)
                            for (double& x : t.v) x = stamp;
                    });
                }
            });
        std::thread reader([&]() {
            ParamSet snap = store.current();
            while (!stop.load()) {
                store.snapshot(snap);
                double first = snap.tensors[0].v[0];
                for (const auto& t : snap.tensors)
                    for (double x : t.v)
                        if (x != first) torn.fetch_add(1);
            }
        });
        for (auto& t : threads) t.join();
        stop.store(true);
        reader.join();
        if (torn.load() != 0) {
            ok = false;
            why += " torn snapshots: " + std::to_string(torn.load()) + ";";
        }
        if (store.version() != 10000 / writers * writers) {
            ok = false;
            why += " version drift;";
        }
    }

    // counting test: every accepted apply bumps the count; rejected ones do not
    {
        ParameterStore store(net.params(), {});
        const int writers = 8;
        const int applies_each = 1250;
        std::atomic<long> accepted{0}, rejected{0};
        std::vector<std::thread> threads;
        for (int w = 0; w < writers; ++w)
            threads.emplace_back([&, w]() {
                Rng rng(500 + w);
                ParamSet grads = net.params().zeros_like();
                for (int i = 0; i < applies_each; ++i) {
                    for (auto& t : grads.tensors)
                        for (double& x : t.v) x = rng.uniform(-1e-3, 1e-3);
                    bool poison = i % 100 == 50;  // sprinkle rejects
                    if (poison) grads.tensors[0].v[0] = std::nan("");
                    if (store.apply_gradients(grads, w % 2 == 0 ? UpdateKind::imitation
                                                                : UpdateKind::rl))
                        accepted.fetch_add(1);
                    else
                        rejected.fetch_add(1);
                }
            });
        for (auto& t : threads) t.join();
        if (store.update_count() != uint64_t(accepted.load())) {
            ok = false;
            why += " update count " + std::to_string(store.update_count()) + " != accepted " +
                   std::to_string(accepted.load()) + ";";
        }
        if (store.rejected_count() != uint64_t(rejected.load()) || rejected.load() == 0) {
            ok = false;
            why += " rejected count mismatch;";
        }
        if (!store.current().all_finite()) {
            ok = false;
            why += " non-finite parameters;";
        }
    }

    char detail[160];
    snprintf(detail, sizeof(detail), "8 writers, 10^4 stamps + 10^4 applies, %.1fs%s",
             seconds_since(t0), why.c_str());
    report(10, "store integrity", ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    auto want = [&](int id) { return only.empty() || only.count(id) > 0; };

    if (want(1)) criterion_geometry();
    if (want(2)) criterion_gradcheck();
    if (want(3)) criterion_masked_imitation();
    if (want(4)) criterion_curriculum();
    if (want(5)) criterion_determinism();
    if (want(9)) criterion_metric_oracles();
    if (want(10)) criterion_store_integrity();
    if (want(6) || want(7) || want(8)) {
        criterion_smoke_training();  // criteria 7 and 8 reuse its artifacts
        if (want(7)) criterion_arbitration();
        if (want(8)) criterion_ablation();
    }

    if (g_failures == 0) printf("all criteria passed\n");
    else printf("%d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
