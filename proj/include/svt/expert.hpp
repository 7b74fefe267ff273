#pragma once

#include <memory>
#include <string>
#include <vector>

#include "svt/geometry.hpp"
#include "svt/mdp.hpp"
#include "svt/synthworld.hpp"

namespace svt {

// Scripted expert trackers. `oracle_noise` perturbs ground truth with a
// controllable amplitude (test fixtures, quality sweeps); `ncc` is a real
// template matcher with real failure modes; `none` is the disabled-expert
// fixture used to exercise the tracker arbitration path.
struct ExpertParams {
    enum class Kind { oracle_noise, ncc, none };
    Kind kind = Kind::ncc;

    // oracle_noise
    double eta = 0.0;         // jitter amplitude, fraction of box size
    double drift_prob = 0.05; // chance per frame of a persistent offset bump

    // ncc
    double search_dilation = 2.0;
    std::vector<double> scales{0.96, 1.0, 1.04};
    double template_update = 0.0;  // 0 keeps the initial template
    int template_size = 24;

    uint64_t seed = 0;

    std::string describe() const;  // "kind key=value ..." one-line form
    static ExpertParams parse(const std::string& text);
};

// Expert trajectory over one sequence, plus everything derived from it.
// Boxes are the single source of truth: actions and rewards are recomputed
// from them (and the stored IoU values) on load.
struct Demonstration {
    std::string sequence_id;
    std::vector<BBox> boxes;             // b(d)_0..T, b(d)_0 = g_0
    std::vector<ActionDelta> actions;    // length T, actions[i] moves box i -> i+1
    std::vector<uint8_t> action_clipped; // length T
    std::vector<double> rewards;         // length T
    std::vector<double> ious;            // length T+1, ious[0] == 1
    bool positive = false;               // IoU > 0.5 at every t >= 1
    std::string expert_desc;
    uint64_t seed = 0;

    int steps() const { return static_cast<int>(boxes.size()) - 1; }
};

// Stateful expert bound to one sequence: advance() yields b(d)_t for
// t = 1, 2, ... Used live by the arbitrating tracker.
class LiveExpert {
public:
    virtual ~LiveExpert() = default;
    virtual BBox advance() = 0;
    virtual const BBox& current_box() const = 0;
};

std::unique_ptr<LiveExpert> make_expert(const ExpertParams& params, const SyntheticSequence& seq);

// Runs the expert over the whole sequence and assembles the demonstration.
// Deterministic in (params, params.seed, sequence).
Demonstration run_expert(const ExpertParams& params, const SyntheticSequence& seq);

struct NccSearchConfig {
    double search_dilation = 2.0;
    std::vector<double> scales{0.96, 1.0, 1.04};
};

// One matching step: exhaustive normalized cross-correlation of `templ`
// (tw x th raw intensities) over the previous box dilated by the search
// factor, at each scale. Ties go to the smallest displacement, then the
// smallest scale change. Degenerate correlation (flat window/template) or a
// search window fully outside the frame returns `prev` unchanged.
BBox ncc_step(const Frame& cur, const std::vector<double>& templ, int tw, int th, const BBox& prev,
              const NccSearchConfig& cfg);

// Keeps exactly the demonstrations with IoU > 0.5 at every step; order
// preserved; idempotent.
std::vector<Demonstration> filter_positive(const std::vector<Demonstration>& demos);

void save_demo(const Demonstration& demo, const std::string& path);
Demonstration load_demo(const std::string& path);

}  // namespace svt
