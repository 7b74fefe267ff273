#pragma once

#include <string>
#include <vector>

#include "svt/expert.hpp"
#include "svt/neuralnet.hpp"

namespace svt {

// One tracking run over one sequence. source/rhat/rhat_d are filled by the
// arbitrated mode only; frame_ms is in-memory diagnostics and never
// serialized.
struct TrajectoryRecord {
    std::string sequence_id;
    std::string mode;  // "a3ct" | "a3ctd" | "static" | "expert"
    std::string checkpoint_digest;
    std::string expert_desc;
    std::string dataset_digest;
    std::vector<BBox> boxes;        // b_0..T, b_0 = init
    std::vector<char> source;       // per frame t>=1: 'a' agent, 'e' expert, 0 n/a
    std::vector<double> rhat;       // value of the agent stream state
    std::vector<double> rhat_d;     // value of the expert stream state
    std::vector<double> frame_ms;
};

// Autonomous rollout: greedy policy, recurrent state carried across frames,
// weights never touched.
TrajectoryRecord track_a3ct(const PolicyValueNet& net, const EpisodeConfig& ecfg,
                            const SyntheticSequence& seq, const BBox& init);

// Value arbitration: the expert tracks on its own stream; each frame the
// value head scores the agent state against the expert state and the better
// box is emitted. Requires a checkpoint whose value head was trained by RL
// workers. ExpertParams::Kind::none disables the expert (every frame falls
// to the agent), which reduces the run to track_a3ct exactly.
TrajectoryRecord track_a3ctd(const PolicyValueNet& net, const CheckpointMeta& meta,
                             const EpisodeConfig& ecfg, const ExpertParams& expert,
                             const SyntheticSequence& seq, const BBox& init);

// Frozen-box baseline: b_t = init for every frame.
TrajectoryRecord track_static(const SyntheticSequence& seq, const BBox& init);

// The expert alone (its demonstration trajectory, scored as a tracker).
TrajectoryRecord track_expert(const ExpertParams& expert, const SyntheticSequence& seq);

void save_trajectory(const TrajectoryRecord& rec, const std::string& path);
TrajectoryRecord load_trajectory(const std::string& path);

// EpisodeConfig reconstructed from a checkpoint (its patch size and the
// crop dilation it was trained with).
EpisodeConfig episode_config_of(const PolicyValueNet& net, const CheckpointMeta& meta);

}  // namespace svt
