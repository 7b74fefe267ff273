#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "svt/common.hpp"
#include "svt/expert.hpp"
#include "svt/mdp.hpp"
#include "svt/neuralnet.hpp"

namespace svt {

struct TrainConfig {
    int workers = 16;              // P; half imitate, half do RL
    int t_max = 5;                 // rollout length between updates
    double gamma = 1.0;
    double tau = 0.25;             // curriculum advancement threshold
    double learning_rate = 1e-4;   // 1e-6 pairs with the full-size setup
    double weight_decay = 1e-4;    // imitation updates only
    int episodes = 3000;
    double sigma_min = 1e-3;
    double value_coef = 0.5;
    double entropy_coef = 0.0;     // sigma is data, so this term has no gradient
    int curriculum_window = 100;   // W
    int curriculum_initial = 8;    // starting horizon
    int curriculum_increment = 8;
    bool imitation_only = false;
    bool rl_only = false;
    bool curriculum_disabled = false;
    bool deterministic = false;    // single-threaded round-robin scheduler
    uint64_t seed = 0;
    int checkpoint_every = 0;      // episodes between periodic checkpoints, 0 = off
    // Global L2 cap on each rollout's gradient before it is applied (0 = off).
    // With gamma=1 the advantage scales with the horizon, and near sigma_min
    // the Gaussian term turns that into unbounded per-component noise; the
    // usual asynchronous actor-critic remedy is a hard norm clip.
    double grad_clip = 0.0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    EpisodeConfig episode;  // k and the crop resolution (must match model.patch)
    ModelConfig model;

    std::string text() const;  // key=value echo for logs/config files
};

void validate(const TrainConfig& cfg);

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // applied for imitation-kind updates only
};

enum class UpdateKind { imitation, rl };

// Shared master weights plus shared Adam moments. A coarse lock guarantees
// no torn snapshot and no lost update; workers pull consistent copies and
// push whole gradient sets.
class ParameterStore {
public:
    ParameterStore(ParamSet initial, AdamConfig adam);

    uint64_t snapshot(ParamSet& out) const;  // returns the version copied
    ParamSet current() const;

    // Adam step under the lock. Non-finite gradients are rejected (counted,
    // parameters untouched). Returns the new version on success.
    std::optional<uint64_t> apply_gradients(const ParamSet& grads, UpdateKind kind);

    // Arbitrary exclusive mutation; bumps the version. Exists for tests that
    // need to stamp recognizable patterns through the same lock.
    void with_exclusive(const std::function<void(ParamSet&)>& fn);

    uint64_t version() const;
    uint64_t update_count() const;
    uint64_t rejected_count() const;
    uint64_t updates_of(UpdateKind kind) const;

private:
    mutable std::mutex mutex_;
    ParamSet params_, m_, v_;
    AdamConfig adam_;
    uint64_t version_ = 0;
    uint64_t updates_ = 0;
    uint64_t rejected_ = 0;
    uint64_t imitation_updates_ = 0;
    uint64_t rl_updates_ = 0;
    int64_t adam_t_ = 0;
};

// Horizon controller: a sliding window over the most recent testing
// outcomes; when the window is full and the success ratio reaches tau, the
// horizon grows by the increment (capped) and the window resets. The
// horizon never decreases.
class CurriculumController {
public:
    CurriculumController(int initial, int increment, int window, int max_horizon, bool disabled);

    int horizon() const;
    void push_outcome(bool success);

    struct Advance {
        bool advanced = false;
        int horizon = 0;
    };
    Advance maybe_advance(double tau);

    int window_count() const;
    int window_successes() const;
    int64_t total_outcomes() const;
    int64_t total_successes() const;

private:
    mutable std::mutex mutex_;
    int horizon_;
    int increment_;
    int window_;
    int max_;
    bool disabled_;
    std::vector<uint8_t> ring_;
    int head_ = 0;
    int count_ = 0;
    int successes_ = 0;
    int64_t total_ = 0;
    int64_t total_succ_ = 0;
};

// n-step returns: R_i = sum_{j>=i} gamma^{j-i} r_j + gamma^{n-i} * bootstrap.
std::vector<double> n_step_returns(const std::vector<double>& rewards, double gamma, double bootstrap);

// sigma_c = max(|mu_c - target_c|, sigma_min): exploration shrinks as the
// policy approaches the ground-truth action.
std::array<double, 4> sigma_from_error(const std::array<double, 4>& mu,
                                       const std::array<double, 4>& target, double sigma_min);

struct EpisodeStats {
    double loss = 0.0;
    double sum_reward = 0.0;
    double sum_demo_reward = 0.0;
    int steps = 0;
    int updates = 0;
    uint64_t version = 0;     // store version after the episode's last update
    double grad_linf = 0.0;   // largest gradient magnitude seen (diagnostics)
};

// One full imitation episode: act greedily, compare each step's reward with
// the demonstrator's, regress masked L1 toward the action that would reach
// the expert box, update the store every t_max steps.
EpisodeStats run_imitation_episode(PolicyValueNet& local, ParameterStore& store,
                                   const SyntheticSequence& seq, const Demonstration& demo,
                                   const TrainConfig& cfg, int horizon);

// One full RL episode: Gaussian exploration around mu with the
// ground-truth-scaled sigma, advantage-weighted log-density loss plus value
// regression, update every t_max steps.
EpisodeStats run_rl_episode(PolicyValueNet& local, ParameterStore& store,
                            const SyntheticSequence& seq, const Demonstration& demo,
                            const TrainConfig& cfg, int horizon, Rng& rng);

// Greedy episode for the curriculum: success iff the agent's reward sum over
// min(horizon, sequence length) steps reaches the demonstrator's.
bool testing_episode(PolicyValueNet& local, const SyntheticSequence& seq, const Demonstration& demo,
                     const EpisodeConfig& episode_cfg, int horizon, EpisodeStats* stats = nullptr);

struct TrainOutcome {
    std::string checkpoint_path;
    std::string log_path;
    int64_t episodes = 0;
    int64_t testing_episodes = 0;
    int64_t rl_updates = 0;
    int64_t imitation_updates = 0;
    int final_horizon = 0;
};

// Full training run over a dataset directory plus a demonstrations
// directory. Writes the final checkpoint and a line-oriented log.
TrainOutcome train(const TrainConfig& cfg, const std::string& dataset_dir,
                   const std::string& demos_dir, const std::string& checkpoint_out,
                   const std::string& log_out);

// Parses key=value lines ('#' comments) into a TrainConfig; unknown keys
// throw std::invalid_argument.
TrainConfig parse_train_config(const std::string& text, TrainConfig base = {});

}  // namespace svt
