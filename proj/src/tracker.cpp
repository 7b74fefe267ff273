#include "svt/tracker.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "svt/common.hpp"

namespace svt {

namespace {
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

BBox propose(const ActionDelta& a, const BBox& prev) {
    AppliedBox applied = apply_action(a, prev);
    return applied.degenerate ? clamp_box_size(applied.box) : applied.box;
}
}  // namespace

EpisodeConfig episode_config_of(const PolicyValueNet& net, const CheckpointMeta& meta) {
    EpisodeConfig ecfg;
    ecfg.k = meta.episode_k;
    ecfg.patch = net.config().patch;
    return ecfg;
}

TrajectoryRecord track_a3ct(const PolicyValueNet& net, const EpisodeConfig& ecfg,
                            const SyntheticSequence& seq, const BBox& init) {
    if (seq.length() < 2) throw std::invalid_argument("track: sequence needs at least 2 frames");
    if (!init.valid()) throw std::invalid_argument("track: degenerate init box");
    TrajectoryRecord rec;
    rec.sequence_id = seq.id;
    rec.mode = "a3ct";
    rec.boxes.push_back(init);
    RecurrentState rs = RecurrentState::zero(net.config().lstm_width);
    BBox b = init;
    for (int t = 1; t < seq.length(); ++t) {
        auto start = Clock::now();
        Observation obs = crop_state(seq.frames[t - 1], seq.frames[t], b, ecfg);
        auto out = net.forward(obs, rs);
        b = propose(out.mu, b);
        rec.boxes.push_back(b);
        rec.frame_ms.push_back(ms_since(start));
    }
    return rec;
}

TrajectoryRecord track_a3ctd(const PolicyValueNet& net, const CheckpointMeta& meta,
                             const EpisodeConfig& ecfg, const ExpertParams& expert,
                             const SyntheticSequence& seq, const BBox& init) {
    if (meta.rl_updates == 0)
        throw std::runtime_error(
            "a3ctd: checkpoint was trained without RL workers; the value head is untrained");
    if (seq.length() < 2) throw std::invalid_argument("track: sequence needs at least 2 frames");
    if (!init.valid()) throw std::invalid_argument("track: degenerate init box");

    const bool no_expert = expert.kind == ExpertParams::Kind::none;
    std::unique_ptr<LiveExpert> live;
    if (!no_expert) live = make_expert(expert, seq);

    TrajectoryRecord rec;
    rec.sequence_id = seq.id;
    rec.mode = "a3ctd";
    rec.expert_desc = expert.describe();
    rec.boxes.push_back(init);
    RecurrentState rs_agent = RecurrentState::zero(net.config().lstm_width);
    RecurrentState rs_expert = RecurrentState::zero(net.config().lstm_width);
    BBox b = init;           // arbitrated output, the agent's reference
    BBox expert_prev = init; // the expert's own reference
    for (int t = 1; t < seq.length(); ++t) {
        auto start = Clock::now();
        Observation obs_agent = crop_state(seq.frames[t - 1], seq.frames[t], b, ecfg);
        auto out_agent = net.forward(obs_agent, rs_agent);
        BBox agent_box = propose(out_agent.mu, b);

        double rhat = out_agent.value;
        double rhat_d = -std::numeric_limits<double>::infinity();
        BBox expert_box = expert_prev;
        if (!no_expert) {
            expert_box = live->advance();
            Observation obs_expert = crop_state(seq.frames[t - 1], seq.frames[t], expert_prev, ecfg);
            rhat_d = net.forward(obs_expert, rs_expert).value;
        }

        bool pick_agent = rhat >= rhat_d;  // tie favors the agent
        b = pick_agent ? agent_box : expert_box;
        expert_prev = expert_box;

        rec.boxes.push_back(b);
        rec.source.push_back(pick_agent ? 'a' : 'e');
        rec.rhat.push_back(rhat);
        rec.rhat_d.push_back(rhat_d);
        rec.frame_ms.push_back(ms_since(start));
    }
    return rec;
}

TrajectoryRecord track_static(const SyntheticSequence& seq, const BBox& init) {
    if (seq.length() < 2) throw std::invalid_argument("track: sequence needs at least 2 frames");
    TrajectoryRecord rec;
    rec.sequence_id = seq.id;
    rec.mode = "static";
    rec.boxes.assign(static_cast<size_t>(seq.length()), init);
    rec.frame_ms.assign(static_cast<size_t>(seq.length()) - 1, 0.0);
    return rec;
}

TrajectoryRecord track_expert(const ExpertParams& expert, const SyntheticSequence& seq) {
    Demonstration demo = run_expert(expert, seq);
    TrajectoryRecord rec;
    rec.sequence_id = seq.id;
    rec.mode = "expert";
    rec.expert_desc = expert.describe();
    rec.boxes = demo.boxes;
    rec.frame_ms.assign(demo.boxes.size() - 1, 0.0);
    return rec;
}

void save_trajectory(const TrajectoryRecord& rec, const std::string& path) {
    std::ostringstream os;
    os << "# mode=" << rec.mode << "\n"
       << "# checkpoint=" << rec.checkpoint_digest << "\n"
       << "# expert=" << rec.expert_desc << "\n"
       << "# sequence=" << rec.sequence_id << "\n"
       << "# dataset_digest=" << rec.dataset_digest << "\n";
    for (size_t t = 0; t < rec.boxes.size(); ++t) {
        const BBox& b = rec.boxes[t];
        os << t << ',' << format_double(b.x) << ',' << format_double(b.y) << ','
           << format_double(b.w) << ',' << format_double(b.h) << ',';
        bool annotated = t >= 1 && t - 1 < rec.source.size();
        if (annotated) os << rec.source[t - 1];
        os << ',';
        if (annotated && std::isfinite(rec.rhat[t - 1])) os << format_double(rec.rhat[t - 1]);
        os << ',';
        if (annotated && std::isfinite(rec.rhat_d[t - 1])) os << format_double(rec.rhat_d[t - 1]);
        os << '\n';
    }
    write_text_file(path, os.str());
}

TrajectoryRecord load_trajectory(const std::string& path) {
    TrajectoryRecord rec;
    std::istringstream is(read_text_file(path));
    std::string line;
    size_t expected_t = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# mode=", 0) == 0) rec.mode = line.substr(7);
            else if (line.rfind("# checkpoint=", 0) == 0) rec.checkpoint_digest = line.substr(13);
            else if (line.rfind("# expert=", 0) == 0) rec.expert_desc = line.substr(9);
            else if (line.rfind("# sequence=", 0) == 0) rec.sequence_id = line.substr(11);
            else if (line.rfind("# dataset_digest=", 0) == 0) rec.dataset_digest = line.substr(17);
            continue;
        }
        auto parts = split(line, ',');
        if (parts.size() != 8) throw std::runtime_error("trajectory: bad line in " + path);
        if (std::stoul(parts[0]) != expected_t)
            throw std::runtime_error("trajectory: frame indices out of order in " + path);
        rec.boxes.push_back({parse_double(parts[1]), parse_double(parts[2]), parse_double(parts[3]),
                             parse_double(parts[4])});
        if (expected_t >= 1) {
            rec.source.push_back(parts[5].empty() ? 0 : parts[5][0]);
            rec.rhat.push_back(parts[6].empty() ? -std::numeric_limits<double>::infinity()
                                                : parse_double(parts[6]));
            rec.rhat_d.push_back(parts[7].empty() ? -std::numeric_limits<double>::infinity()
                                                  : parse_double(parts[7]));
        }
        ++expected_t;
    }
    if (rec.boxes.size() < 2) throw std::runtime_error("trajectory: too few frames in " + path);
    return rec;
}

}  // namespace svt
