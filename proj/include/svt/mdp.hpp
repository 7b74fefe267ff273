#pragma once

#include <optional>
#include <vector>

#include "svt/geometry.hpp"
#include "svt/synthworld.hpp"

namespace svt {

// MDP state: two standardized patches cropped from consecutive frames around
// the same (dilated) reference box. Layout is channel-major, row-major
// within a channel.
struct Observation {
    int channels = 0;
    int size = 0;  // m: patches are size x size
    std::vector<double> prev;
    std::vector<double> cur;
    BBox ref_box;  // the un-dilated reference box, kept for debugging
    BBox region;   // the dilated crop region
};

struct EpisodeConfig {
    double k = 1.5;        // context dilation, > 1
    int patch = 32;        // m, crop resolution
    int horizon = 0;       // 0 means run to the end of the sequence
    // standardization: value = pixel * scale + shift (then 0 pads outside
    // the frame, i.e. mid-gray)
    double pixel_scale = 1.0 / 255.0;
    double pixel_shift = -0.5;
};

void validate(const EpisodeConfig& cfg);

// Crops both frames within dilate_box(b, k), resizes to patch x patch with
// half-pixel-centered bilinear sampling, standardize. Out-of-frame pixels
// read as 0 in standardized space. Pure function of its inputs.
Observation crop_state(const Frame& prev, const Frame& cur, const BBox& b, const EpisodeConfig& cfg);

// Raw-intensity variant of the same sampler (no standardization, pad 0);
// shared with the template-matching expert.
std::vector<double> sample_patch_raw(const Frame& f, const BBox& b, int out_w, int out_h);

// One episode over one sequence. Holds the reference box b_{t-1}, the frame
// cursor and the reward sum; single-owner, not thread-safe.
class Env {
public:
    Env(const SyntheticSequence& seq, const EpisodeConfig& cfg);

    // b_0 := g_0; returns s_1. Throws if the sequence has fewer than 2 frames.
    Observation reset();

    struct StepResult {
        std::optional<Observation> obs;  // empty when the episode just ended
        double reward = 0.0;
        bool done = false;
        BBox box;  // b_t actually taken (degenerate sizes clamped)
    };

    // Applies the action, scores it against ground truth, advances. Throws
    // std::logic_error when called on a finished (or never reset) episode.
    StepResult step(const ActionDelta& a);

    int t() const { return t_; }  // frame index the next action predicts
    bool done() const { return done_; }
    const BBox& reference_box() const { return ref_; }
    double total_reward() const { return total_reward_; }
    int horizon() const { return horizon_; }  // capped by the sequence length
    const SyntheticSequence& sequence() const { return *seq_; }
    const EpisodeConfig& config() const { return cfg_; }

private:
    const SyntheticSequence* seq_;
    EpisodeConfig cfg_;
    BBox ref_;
    int t_ = 1;
    bool done_ = true;  // must reset() first
    bool started_ = false;
    double total_reward_ = 0.0;
    int horizon_ = 0;
};

}  // namespace svt
