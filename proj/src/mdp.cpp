#include "svt/mdp.hpp"

#include <cmath>
#include <stdexcept>

namespace svt {

namespace {

// Bilinear fetch at continuous position (sx, sy) in frame pixel coordinates
// (pixel centers at integer+0.5). Out-of-frame neighbors contribute `pad`.
inline double bilinear(const Frame& f, int c, double sx, double sy, double scale, double shift,
                       double pad) {
    double u = sx - 0.5;
    double v = sy - 0.5;
    double fx0 = std::floor(u);
    double fy0 = std::floor(v);
    int x0 = static_cast<int>(fx0);
    int y0 = static_cast<int>(fy0);
    double ax = u - fx0;
    double ay = v - fy0;
    auto val = [&](int X, int Y) -> double {
        if (X < 0 || Y < 0 || X >= f.width || Y >= f.height) return pad;
        return static_cast<double>(f.at(X, Y, c)) * scale + shift;
    };
    return (1 - ax) * (1 - ay) * val(x0, y0) + ax * (1 - ay) * val(x0 + 1, y0) +
           (1 - ax) * ay * val(x0, y0 + 1) + ax * ay * val(x0 + 1, y0 + 1);
}

void sample_region(const Frame& f, const BBox& region, int out_w, int out_h, double scale,
                   double shift, double pad, std::vector<double>& out) {
    out.resize(static_cast<size_t>(f.channels) * out_w * out_h);
    for (int c = 0; c < f.channels; ++c)
        for (int i = 0; i < out_h; ++i) {
            double sy = region.y + (i + 0.5) * region.h / out_h;
            for (int j = 0; j < out_w; ++j) {
                double sx = region.x + (j + 0.5) * region.w / out_w;
                out[(static_cast<size_t>(c) * out_h + i) * out_w + j] =
                    bilinear(f, c, sx, sy, scale, shift, pad);
            }
        }
}

}  // namespace

void validate(const EpisodeConfig& cfg) {
    if (cfg.k <= 1.0) throw std::invalid_argument("episode: dilation k must be > 1");
    if (cfg.patch < 8) throw std::invalid_argument("episode: patch size must be >= 8");
    if (cfg.horizon < 0) throw std::invalid_argument("episode: horizon must be >= 0");
}

Observation crop_state(const Frame& prev, const Frame& cur, const BBox& b, const EpisodeConfig& cfg) {
    if (!b.valid()) throw std::invalid_argument("crop_state: degenerate reference box");
    if (prev.width != cur.width || prev.height != cur.height || prev.channels != cur.channels)
        throw std::invalid_argument("crop_state: frame shape mismatch");
    Observation obs;
    obs.channels = prev.channels;
    obs.size = cfg.patch;
    obs.ref_box = b;
    obs.region = dilate_box(b, cfg.k);
    sample_region(prev, obs.region, cfg.patch, cfg.patch, cfg.pixel_scale, cfg.pixel_shift, 0.0, obs.prev);
    sample_region(cur, obs.region, cfg.patch, cfg.patch, cfg.pixel_scale, cfg.pixel_shift, 0.0, obs.cur);
    return obs;
}

std::vector<double> sample_patch_raw(const Frame& f, const BBox& b, int out_w, int out_h) {
    if (!b.valid()) throw std::invalid_argument("sample_patch_raw: degenerate box");
    std::vector<double> out;
    sample_region(f, b, out_w, out_h, 1.0, 0.0, 0.0, out);
    return out;
}

Env::Env(const SyntheticSequence& seq, const EpisodeConfig& cfg) : seq_(&seq), cfg_(cfg) {
    validate(cfg_);
    int steps = seq.steps();
    horizon_ = (cfg_.horizon == 0) ? steps : std::min(cfg_.horizon, steps);
}

Observation Env::reset() {
    if (seq_->length() < 2) throw std::invalid_argument("reset: sequence needs at least 2 frames");
    ref_ = seq_->groundtruth.at(0);
    t_ = 1;
    done_ = false;
    started_ = true;
    total_reward_ = 0.0;
    return crop_state(seq_->frames[0], seq_->frames[1], ref_, cfg_);
}

Env::StepResult Env::step(const ActionDelta& a) {
    if (!started_ || done_) throw std::logic_error("step: episode is not running");
    const int t = t_;
    AppliedBox applied = apply_action(a, ref_);
    BBox b = applied.degenerate ? clamp_box_size(applied.box) : applied.box;
    double r = quantized_reward(iou(b, seq_->groundtruth[t]));
    ref_ = b;
    total_reward_ += r;
    if (t == horizon_) {
        done_ = true;
        return {std::nullopt, r, true, b};
    }
    Observation obs = crop_state(seq_->frames[t], seq_->frames[t + 1], b, cfg_);
    t_ = t + 1;
    return {std::move(obs), r, false, b};
}

}  // namespace svt
