#include "svt/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "svt/common.hpp"

namespace fs = std::filesystem;

namespace svt {

std::string TrainConfig::text() const {
    std::ostringstream os;
    os << "workers=" << workers << "\n"
       << "t_max=" << t_max << "\n"
       << "gamma=" << format_double(gamma) << "\n"
       << "tau=" << format_double(tau) << "\n"
       << "learning_rate=" << format_double(learning_rate) << "\n"
       << "weight_decay=" << format_double(weight_decay) << "\n"
       << "episodes=" << episodes << "\n"
       << "sigma_min=" << format_double(sigma_min) << "\n"
       << "value_coef=" << format_double(value_coef) << "\n"
       << "entropy_coef=" << format_double(entropy_coef) << "\n"
       << "curriculum_window=" << curriculum_window << "\n"
       << "curriculum_initial=" << curriculum_initial << "\n"
       << "curriculum_increment=" << curriculum_increment << "\n"
       << "imitation_only=" << (imitation_only ? 1 : 0) << "\n"
       << "rl_only=" << (rl_only ? 1 : 0) << "\n"
       << "curriculum_disabled=" << (curriculum_disabled ? 1 : 0) << "\n"
       << "deterministic=" << (deterministic ? 1 : 0) << "\n"
       << "seed=" << seed << "\n"
       << "checkpoint_every=" << checkpoint_every << "\n"
       << "grad_clip=" << format_double(grad_clip) << "\n"
       << "adam_beta1=" << format_double(adam_beta1) << "\n"
       << "adam_beta2=" << format_double(adam_beta2) << "\n"
       << "adam_eps=" << format_double(adam_eps) << "\n"
       << "episode_k=" << format_double(episode.k) << "\n"
       << model.text();
    return os.str();
}

void validate(const TrainConfig& cfg) {
    validate(cfg.model);
    validate(cfg.episode);
    if (cfg.episode.patch != cfg.model.patch)
        throw std::invalid_argument("train: episode patch and model patch differ");
    if (cfg.workers < 1) throw std::invalid_argument("train: need at least one worker");
    if (cfg.imitation_only && cfg.rl_only)
        throw std::invalid_argument("train: imitation_only and rl_only are mutually exclusive");
    if (!cfg.imitation_only && !cfg.rl_only && cfg.workers % 2 != 0)
        throw std::invalid_argument("train: worker count must be even when both kinds run");
    if (cfg.t_max < 1) throw std::invalid_argument("train: t_max must be >= 1");
    if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) throw std::invalid_argument("train: tau must be in (0,1)");
    if (cfg.episodes < 1) throw std::invalid_argument("train: episode budget must be >= 1");
    if (cfg.sigma_min <= 0) throw std::invalid_argument("train: sigma_min must be > 0");
    if (cfg.curriculum_window < 1 || cfg.curriculum_initial < 1 || cfg.curriculum_increment < 1)
        throw std::invalid_argument("train: bad curriculum parameters");
    if (cfg.learning_rate <= 0) throw std::invalid_argument("train: learning rate must be > 0");
}

TrainConfig parse_train_config(const std::string& text, TrainConfig base) {
    TrainConfig cfg = base;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("train config: bad line '" + line + "'");
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "workers") cfg.workers = std::stoi(val);
        else if (key == "t_max") cfg.t_max = std::stoi(val);
        else if (key == "gamma") cfg.gamma = parse_double(val);
        else if (key == "tau") cfg.tau = parse_double(val);
        else if (key == "learning_rate") cfg.learning_rate = parse_double(val);
        else if (key == "weight_decay") cfg.weight_decay = parse_double(val);
        else if (key == "episodes") cfg.episodes = std::stoi(val);
        else if (key == "sigma_min") cfg.sigma_min = parse_double(val);
        else if (key == "value_coef") cfg.value_coef = parse_double(val);
        else if (key == "entropy_coef") cfg.entropy_coef = parse_double(val);
        else if (key == "curriculum_window") cfg.curriculum_window = std::stoi(val);
        else if (key == "curriculum_initial") cfg.curriculum_initial = std::stoi(val);
        else if (key == "curriculum_increment") cfg.curriculum_increment = std::stoi(val);
        else if (key == "imitation_only") cfg.imitation_only = val == "1";
        else if (key == "rl_only") cfg.rl_only = val == "1";
        else if (key == "curriculum_disabled") cfg.curriculum_disabled = val == "1";
        else if (key == "deterministic") cfg.deterministic = val == "1";
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "checkpoint_every") cfg.checkpoint_every = std::stoi(val);
        else if (key == "grad_clip") cfg.grad_clip = parse_double(val);
        else if (key == "adam_beta1") cfg.adam_beta1 = parse_double(val);
        else if (key == "adam_beta2") cfg.adam_beta2 = parse_double(val);
        else if (key == "adam_eps") cfg.adam_eps = parse_double(val);
        else if (key == "episode_k") cfg.episode.k = parse_double(val);
        else if (key == "patch") { cfg.model.patch = std::stoi(val); cfg.episode.patch = cfg.model.patch; }
        else if (key == "channels") cfg.model.channels = std::stoi(val);
        else if (key == "conv_filters") {
            cfg.model.conv_filters.clear();
            for (const auto& part : split(val, ';')) cfg.model.conv_filters.push_back(std::stoi(part));
        }
        else if (key == "fc_widths") {
            cfg.model.fc_widths.clear();
            for (const auto& part : split(val, ';')) cfg.model.fc_widths.push_back(std::stoi(part));
        }
        else if (key == "lstm_width") cfg.model.lstm_width = std::stoi(val);
        else if (key == "shared_encoder") cfg.model.shared_encoder = val == "1";
        else throw std::invalid_argument("train config: unknown key '" + key + "'");
    }
    return cfg;
}

// --- parameter store ---------------------------------------------------------

ParameterStore::ParameterStore(ParamSet initial, AdamConfig adam)
    : params_(std::move(initial)), m_(params_.zeros_like()), v_(params_.zeros_like()), adam_(adam) {}

uint64_t ParameterStore::snapshot(ParamSet& out) const {
    std::lock_guard<std::mutex> lock(mutex_);
    out = params_;
    return version_;
}

ParamSet ParameterStore::current() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return params_;
}

std::optional<uint64_t> ParameterStore::apply_gradients(const ParamSet& grads, UpdateKind kind) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (grads.names.size() != params_.names.size())
        throw std::invalid_argument("apply_gradients: layout mismatch");
    if (!grads.all_finite()) {
        ++rejected_;
        return std::nullopt;
    }
    ++adam_t_;
    const double bc1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(adam_t_));
    const double bc2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(adam_t_));
    const bool decay = kind == UpdateKind::imitation && adam_.weight_decay != 0.0;
    for (size_t i = 0; i < params_.tensors.size(); ++i) {
        auto& p = params_.tensors[i].v;
        auto& m = m_.tensors[i].v;
        auto& v = v_.tensors[i].v;
        const auto& g0 = grads.tensors[i].v;
        if (g0.size() != p.size()) throw std::invalid_argument("apply_gradients: shape mismatch");
        for (size_t j = 0; j < p.size(); ++j) {
            double g = g0[j] + (decay ? adam_.weight_decay * p[j] : 0.0);
            m[j] = adam_.beta1 * m[j] + (1.0 - adam_.beta1) * g;
            v[j] = adam_.beta2 * v[j] + (1.0 - adam_.beta2) * g * g;
            p[j] -= adam_.lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + adam_.eps);
        }
    }
    ++updates_;
    ++version_;
    if (kind == UpdateKind::imitation) ++imitation_updates_;
    else ++rl_updates_;
    return version_;
}

void ParameterStore::with_exclusive(const std::function<void(ParamSet&)>& fn) {
    std::lock_guard<std::mutex> lock(mutex_);
    fn(params_);
    ++version_;
}

uint64_t ParameterStore::version() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return version_;
}

uint64_t ParameterStore::update_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return updates_;
}

uint64_t ParameterStore::rejected_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return rejected_;
}

uint64_t ParameterStore::updates_of(UpdateKind kind) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return kind == UpdateKind::imitation ? imitation_updates_ : rl_updates_;
}

// --- curriculum ----------------------------------------------------------------

CurriculumController::CurriculumController(int initial, int increment, int window, int max_horizon,
                                           bool disabled)
    : horizon_(std::min(initial, max_horizon)),
      increment_(increment),
      window_(window),
      max_(max_horizon),
      disabled_(disabled),
      ring_(window, 0) {
    if (initial < 1 || increment < 1 || window < 1 || max_horizon < 1)
        throw std::invalid_argument("curriculum: bad parameters");
    if (disabled_) horizon_ = max_;
}

int CurriculumController::horizon() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return horizon_;
}

void CurriculumController::push_outcome(bool success) {
    std::lock_guard<std::mutex> lock(mutex_);
    ++total_;
    if (success) ++total_succ_;
    if (count_ == window_) {
        successes_ -= ring_[head_];
    } else {
        ++count_;
    }
    ring_[head_] = success ? 1 : 0;
    successes_ += ring_[head_];
    head_ = (head_ + 1) % window_;
}

CurriculumController::Advance CurriculumController::maybe_advance(double tau) {
    std::lock_guard<std::mutex> lock(mutex_);
    Advance adv{false, horizon_};
    if (disabled_) return adv;
    if (count_ < window_) return adv;
    double ratio = static_cast<double>(successes_) / static_cast<double>(window_);
    if (ratio >= tau) {
        int next = std::min(horizon_ + increment_, max_);
        adv.advanced = next != horizon_;
        horizon_ = next;
        adv.horizon = next;
        std::fill(ring_.begin(), ring_.end(), 0);
        head_ = 0;
        count_ = 0;
        successes_ = 0;
    }
    return adv;
}

int CurriculumController::window_count() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return count_;
}

int CurriculumController::window_successes() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return successes_;
}

int64_t CurriculumController::total_outcomes() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return total_;
}

int64_t CurriculumController::total_successes() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return total_succ_;
}

// --- rollout pieces --------------------------------------------------------------

std::vector<double> n_step_returns(const std::vector<double>& rewards, double gamma, double bootstrap) {
    std::vector<double> out(rewards.size());
    double acc = bootstrap;
    for (int i = static_cast<int>(rewards.size()) - 1; i >= 0; --i) {
        acc = rewards[i] + gamma * acc;
        out[i] = acc;
    }
    return out;
}

std::array<double, 4> sigma_from_error(const std::array<double, 4>& mu,
                                       const std::array<double, 4>& target, double sigma_min) {
    std::array<double, 4> s;
    for (int j = 0; j < 4; ++j) s[j] = std::max(std::abs(mu[j] - target[j]), sigma_min);
    return s;
}

namespace {

void check_demo_alignment(const SyntheticSequence& seq, const Demonstration& demo) {
    if (demo.sequence_id != seq.id || demo.steps() != seq.steps())
        throw std::invalid_argument("demonstration does not match the sequence");
}

void clip_gradients(ParamSet& grads, double clip) {
    if (clip <= 0.0) return;
    double norm = grads.l2_norm();
    if (norm > clip) grads.scale(clip / norm);
}

}  // namespace

EpisodeStats run_imitation_episode(PolicyValueNet& local, ParameterStore& store,
                                   const SyntheticSequence& seq, const Demonstration& demo,
                                   const TrainConfig& cfg, int horizon) {
    check_demo_alignment(seq, demo);
    EpisodeConfig ecfg = cfg.episode;
    ecfg.horizon = horizon;
    Env env(seq, ecfg);
    Observation obs = env.reset();
    RecurrentState rs = RecurrentState::zero(cfg.model.lstm_width);

    EpisodeStats stats;
    store.snapshot(local.params());
    while (!env.done()) {
        std::vector<StepCache> caches;
        std::vector<std::array<double, 4>> dmus;
        caches.reserve(cfg.t_max);
        double window_loss = 0;
        for (int i = 0; i < cfg.t_max && !env.done(); ++i) {
            int t = env.t();
            BBox prev_box = env.reference_box();
            StepCache cache;
            RecurrentState rs_next;
            auto out = local.forward_cached(obs, rs, rs_next, cache);
            // the action the expert would take from the agent's own box
            ActionDelta target = box_delta(demo.boxes[t], prev_box).delta;
            auto step = env.step(out.mu);
            double demo_reward = demo.rewards[t - 1];
            double mask = step.reward < demo_reward ? 1.0 : 0.0;
            std::array<double, 4> dmu;
            window_loss += l1_masked_loss(target.to_array(), cache.mu, mask, dmu);
            caches.push_back(std::move(cache));
            dmus.push_back(dmu);
            stats.sum_reward += step.reward;
            stats.sum_demo_reward += demo_reward;
            ++stats.steps;
            rs = std::move(rs_next);
            if (!step.done) obs = std::move(*step.obs);
        }
        ParamSet grads = local.params().zeros_like();
        std::vector<double> dh, dc;
        for (int i = static_cast<int>(caches.size()) - 1; i >= 0; --i)
            local.backward_step(caches[i], dmus[i], 0.0, dh, dc, grads);
        clip_gradients(grads, cfg.grad_clip);
        stats.grad_linf = std::max(stats.grad_linf, grads.linf());
        if (auto version = store.apply_gradients(grads, UpdateKind::imitation)) {
            stats.version = *version;
            ++stats.updates;
        }
        stats.loss += window_loss;
        store.snapshot(local.params());
    }
    return stats;
}

EpisodeStats run_rl_episode(PolicyValueNet& local, ParameterStore& store,
                            const SyntheticSequence& seq, const Demonstration& demo,
                            const TrainConfig& cfg, int horizon, Rng& rng) {
    check_demo_alignment(seq, demo);
    EpisodeConfig ecfg = cfg.episode;
    ecfg.horizon = horizon;
    Env env(seq, ecfg);
    Observation obs = env.reset();
    RecurrentState rs = RecurrentState::zero(cfg.model.lstm_width);

    EpisodeStats stats;
    store.snapshot(local.params());
    while (!env.done()) {
        std::vector<StepCache> caches;
        std::vector<std::array<double, 4>> actions, sigmas;
        std::vector<double> rewards, values;
        caches.reserve(cfg.t_max);
        for (int i = 0; i < cfg.t_max && !env.done(); ++i) {
            int t = env.t();
            BBox prev_box = env.reference_box();
            StepCache cache;
            RecurrentState rs_next;
            auto out = local.forward_cached(obs, rs, rs_next, cache);
            ActionDelta gt_action = box_delta(seq.groundtruth[t], prev_box).delta;
            std::array<double, 4> sigma =
                sigma_from_error(cache.mu, gt_action.to_array(), cfg.sigma_min);
            std::array<double, 4> a;
            for (int j = 0; j < 4; ++j)
                a[j] = std::clamp(rng.normal(cache.mu[j], sigma[j]), -1.0, 1.0);
            auto step = env.step(ActionDelta::from_array(a));
            caches.push_back(std::move(cache));
            actions.push_back(a);
            sigmas.push_back(sigma);
            rewards.push_back(step.reward);
            values.push_back(out.value);
            stats.sum_reward += step.reward;
            stats.sum_demo_reward += demo.rewards[t - 1];
            ++stats.steps;
            rs = std::move(rs_next);
            if (!step.done) obs = std::move(*step.obs);
        }
        // bootstrap only when the rollout window was cut mid-episode
        double bootstrap = 0.0;
        if (!env.done()) {
            RecurrentState rs_copy = rs;
            bootstrap = local.forward(obs, rs_copy).value;
        }
        std::vector<double> returns = n_step_returns(rewards, cfg.gamma, bootstrap);

        ParamSet grads = local.params().zeros_like();
        std::vector<double> dh, dc;
        double window_loss = 0;
        for (int i = static_cast<int>(caches.size()) - 1; i >= 0; --i) {
            double advantage = returns[i] - values[i];  // constant w.r.t. theta
            double logp = gaussian_logpdf(actions[i], caches[i].mu, sigmas[i]);
            window_loss += -logp * advantage +
                           cfg.value_coef * (returns[i] - values[i]) * (returns[i] - values[i]);
            if (cfg.entropy_coef != 0.0) {
                double entropy = 0;
                for (int j = 0; j < 4; ++j)
                    entropy += 0.5 * std::log(2.0 * M_PI * M_E * sigmas[i][j] * sigmas[i][j]);
                window_loss -= cfg.entropy_coef * entropy;  // sigma is data: no gradient
            }
            std::array<double, 4> dlogp = gaussian_logpdf_dmu(actions[i], caches[i].mu, sigmas[i]);
            std::array<double, 4> dmu;
            for (int j = 0; j < 4; ++j) dmu[j] = -advantage * dlogp[j];
            double dvalue = -2.0 * cfg.value_coef * (returns[i] - values[i]);
            local.backward_step(caches[i], dmu, dvalue, dh, dc, grads);
        }
        clip_gradients(grads, cfg.grad_clip);
        stats.grad_linf = std::max(stats.grad_linf, grads.linf());
        if (auto version = store.apply_gradients(grads, UpdateKind::rl)) {
            stats.version = *version;
            ++stats.updates;
        }
        stats.loss += window_loss;
        store.snapshot(local.params());
    }
    return stats;
}

bool testing_episode(PolicyValueNet& local, const SyntheticSequence& seq, const Demonstration& demo,
                     const EpisodeConfig& episode_cfg, int horizon, EpisodeStats* stats) {
    check_demo_alignment(seq, demo);
    EpisodeConfig ecfg = episode_cfg;
    ecfg.horizon = horizon;
    Env env(seq, ecfg);
    Observation obs = env.reset();
    RecurrentState rs = RecurrentState::zero(local.config().lstm_width);
    double sum_reward = 0, sum_demo = 0;
    int steps = 0;
    while (!env.done()) {
        int t = env.t();
        auto out = local.forward(obs, rs);
        auto step = env.step(out.mu);
        sum_reward += step.reward;
        sum_demo += demo.rewards[t - 1];
        ++steps;
        if (!step.done) obs = std::move(*step.obs);
    }
    if (stats) {
        stats->sum_reward = sum_reward;
        stats->sum_demo_reward = sum_demo;
        stats->steps = steps;
    }
    return sum_reward >= sum_demo;
}

// --- full training run -------------------------------------------------------------

namespace {

struct PoolItem {
    const SyntheticSequence* seq;
    Demonstration demo;
};

std::string episode_line(int64_t episode, const char* kind, bool has_loss, double loss,
                         double sum_reward, double sum_demo, int horizon, uint64_t version) {
    std::ostringstream os;
    os << episode << ',' << kind << ',';
    if (has_loss) os << format_double(loss);
    os << ',' << format_double(sum_reward) << ',' << format_double(sum_demo) << ',' << horizon << ','
       << version << '\n';
    return os.str();
}

}  // namespace

TrainOutcome train(const TrainConfig& cfg, const std::string& dataset_dir,
                   const std::string& demos_dir, const std::string& checkpoint_out,
                   const std::string& log_out) {
    validate(cfg);
    std::vector<SyntheticSequence> sequences = load_dataset(dataset_dir);

    std::vector<PoolItem> pool;
    for (const auto& seq : sequences) {
        fs::path demo_path = fs::path(demos_dir) / (seq.id + ".txt");
        if (!fs::exists(demo_path)) continue;
        Demonstration demo = load_demo(demo_path.string());
        if (demo.sequence_id != seq.id || demo.steps() != seq.steps())
            throw std::runtime_error("train: demonstration/sequence mismatch for " + seq.id);
        if (demo.positive) pool.push_back({&seq, std::move(demo)});
    }
    if (pool.empty())
        throw std::runtime_error("train: no positive demonstrations found in " + demos_dir);

    int max_horizon = 1;
    for (const auto& item : pool) max_horizon = std::max(max_horizon, item.seq->steps());

    CurriculumController curriculum(cfg.curriculum_initial, cfg.curriculum_increment,
                                    cfg.curriculum_window, max_horizon, cfg.curriculum_disabled);

    PolicyValueNet master = PolicyValueNet::init(cfg.model, cfg.seed);
    AdamConfig adam{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps,
                    cfg.weight_decay};
    ParameterStore store(master.params(), adam);

    {
        fs::path parent = fs::path(log_out).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
    }
    std::ofstream log(log_out, std::ios::trunc);
    if (!log) throw std::runtime_error("train: cannot write log " + log_out);
    log << "# svt training log v1\n";
    {
        std::istringstream cfg_lines(cfg.text());
        std::string line;
        while (std::getline(cfg_lines, line)) log << "# " << line << "\n";
    }
    log << "# pool=" << pool.size() << " max_horizon=" << max_horizon << "\n";
    if (cfg.imitation_only)
        log << "# note: imitation_only run, value head untrained, a3ctd ineligible\n";
    log << "# columns: episode,worker_kind,loss,sum_reward,sum_demo_reward,That,version\n";

    const int P = cfg.workers;
    std::vector<UpdateKind> kinds(P);
    for (int w = 0; w < P; ++w) {
        if (cfg.imitation_only) kinds[w] = UpdateKind::imitation;
        else if (cfg.rl_only) kinds[w] = UpdateKind::rl;
        else kinds[w] = w < P / 2 ? UpdateKind::imitation : UpdateKind::rl;
    }

    int64_t testing_count = 0;
    std::mutex log_mutex;

    auto write_line = [&](const std::string& s) {
        std::lock_guard<std::mutex> lk(log_mutex);
        log << s;
    };

    auto run_one = [&](PolicyValueNet& local, Rng& rng, UpdateKind kind, int64_t episode_no) {
        const PoolItem& item = pool[rng.uniform_int(0, static_cast<int>(pool.size()) - 1)];
        int horizon = curriculum.horizon();
        EpisodeStats st = kind == UpdateKind::imitation
                              ? run_imitation_episode(local, store, *item.seq, item.demo, cfg, horizon)
                              : run_rl_episode(local, store, *item.seq, item.demo, cfg, horizon, rng);
        write_line(episode_line(episode_no, kind == UpdateKind::imitation ? "imitation" : "rl", true,
                                st.loss, st.sum_reward, st.sum_demo_reward, horizon, st.version));
    };

    auto run_test = [&](PolicyValueNet& local, Rng& rng, int64_t episode_no) {
        const PoolItem& item = pool[rng.uniform_int(0, static_cast<int>(pool.size()) - 1)];
        int horizon = curriculum.horizon();
        store.snapshot(local.params());
        EpisodeStats st;
        bool success = testing_episode(local, *item.seq, item.demo, cfg.episode, horizon, &st);
        curriculum.push_outcome(success);
        curriculum.maybe_advance(cfg.tau);
        write_line(episode_line(episode_no, "testing", false, 0.0, st.sum_reward, st.sum_demo_reward,
                                horizon, store.version()));
    };

    auto maybe_checkpoint = [&](int64_t episode_no) {
        if (cfg.checkpoint_every <= 0) return;
        if (episode_no % cfg.checkpoint_every != 0) return;
        PolicyValueNet snap(cfg.model);
        store.snapshot(snap.params());
        CheckpointMeta meta{cfg.episode.k, episode_no, curriculum.horizon(),
                            static_cast<int64_t>(store.updates_of(UpdateKind::rl)),
                            static_cast<int64_t>(store.updates_of(UpdateKind::imitation)), cfg.seed};
        save_checkpoint(checkpoint_out + ".ep" + std::to_string(episode_no), snap, meta);
    };

    if (cfg.deterministic) {
        // Round-robin scheduler: training workers take turns, with one
        // testing episode after every training episode (testing rollouts are
        // forward-only, which is roughly what a free-running testing thread
        // achieves). Fully sequential, so runs are bit reproducible.
        std::vector<PolicyValueNet> locals;
        std::vector<Rng> rngs;
        for (int w = 0; w < P; ++w) {
            locals.emplace_back(cfg.model);
            rngs.emplace_back(mix_seed(cfg.seed, 100 + static_cast<uint64_t>(w)));
        }
        PolicyValueNet tester(cfg.model);
        Rng tester_rng(mix_seed(cfg.seed, 999));
        int64_t ep = 0;
        while (ep < cfg.episodes) {
            for (int w = 0; w < P && ep < cfg.episodes; ++w) {
                ++ep;
                run_one(locals[w], rngs[w], kinds[w], ep);
                maybe_checkpoint(ep);
                run_test(tester, tester_rng, ep);
                ++testing_count;
            }
        }
    } else {
        std::atomic<int64_t> counter{0};
        std::atomic<bool> done{false};
        std::vector<std::thread> threads;
        for (int w = 0; w < P; ++w) {
            threads.emplace_back([&, w]() {
                PolicyValueNet local(cfg.model);
                Rng rng(mix_seed(cfg.seed, 100 + static_cast<uint64_t>(w)));
                while (true) {
                    int64_t ep = counter.fetch_add(1) + 1;
                    if (ep > cfg.episodes) break;
                    run_one(local, rng, kinds[w], ep);
                    maybe_checkpoint(ep);
                }
            });
        }
        std::atomic<int64_t> tests{0};
        std::thread tester([&]() {
            PolicyValueNet local(cfg.model);
            Rng rng(mix_seed(cfg.seed, 999));
            while (!done.load()) {
                run_test(local, rng, std::min<int64_t>(counter.load(), cfg.episodes));
                tests.fetch_add(1);
            }
        });
        for (auto& t : threads) t.join();
        done.store(true);
        tester.join();
        testing_count = tests.load();
    }

    PolicyValueNet final_net(cfg.model);
    store.snapshot(final_net.params());
    CheckpointMeta meta{cfg.episode.k,
                        cfg.episodes,
                        curriculum.horizon(),
                        static_cast<int64_t>(store.updates_of(UpdateKind::rl)),
                        static_cast<int64_t>(store.updates_of(UpdateKind::imitation)),
                        cfg.seed};
    save_checkpoint(checkpoint_out, final_net, meta);

    TrainOutcome out;
    out.checkpoint_path = checkpoint_out;
    out.log_path = log_out;
    out.episodes = cfg.episodes;
    out.testing_episodes = testing_count;
    out.rl_updates = static_cast<int64_t>(store.updates_of(UpdateKind::rl));
    out.imitation_updates = static_cast<int64_t>(store.updates_of(UpdateKind::imitation));
    out.final_horizon = curriculum.horizon();
    return out;
}

}  // namespace svt
