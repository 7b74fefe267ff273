#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "svt/evalkit.hpp"
#include "svt/gradcheck.hpp"
#include "svt/trainer.hpp"

namespace py = pybind11;
using namespace svt;

namespace {

py::array_t<uint8_t> frame_to_numpy(const Frame& f) {
    py::array_t<uint8_t> arr({f.height, f.width, f.channels});
    std::memcpy(arr.mutable_data(), f.pixels.data(), f.pixels.size());
    return arr;
}

py::array_t<double> patch_to_numpy(const Observation& obs, bool prev) {
    const std::vector<double>& src = prev ? obs.prev : obs.cur;
    py::array_t<double> arr({obs.channels, obs.size, obs.size});
    std::memcpy(arr.mutable_data(), src.data(), src.size() * sizeof(double));
    return arr;
}

}  // namespace

PYBIND11_MODULE(svtpy, m) {
    m.doc() = "tracking agent trained from expert demonstrations: core operations";

    // geometry
    py::class_<BBox>(m, "BBox")
        .def(py::init<>())
        .def(py::init<double, double, double, double>(), py::arg("x"), py::arg("y"), py::arg("w"),
             py::arg("h"))
        .def_readwrite("x", &BBox::x)
        .def_readwrite("y", &BBox::y)
        .def_readwrite("w", &BBox::w)
        .def_readwrite("h", &BBox::h)
        .def("cx", &BBox::cx)
        .def("cy", &BBox::cy)
        .def("area", &BBox::area)
        .def("__eq__", [](const BBox& a, const BBox& b) { return a == b; })
        .def("__repr__", [](const BBox& b) {
            return "BBox(" + format_double(b.x) + ", " + format_double(b.y) + ", " +
                   format_double(b.w) + ", " + format_double(b.h) + ")";
        });

    py::class_<ActionDelta>(m, "ActionDelta")
        .def(py::init<>())
        .def(py::init<double, double, double, double>(), py::arg("dx"), py::arg("dy"),
             py::arg("dw"), py::arg("dh"))
        .def_readwrite("dx", &ActionDelta::dx)
        .def_readwrite("dy", &ActionDelta::dy)
        .def_readwrite("dw", &ActionDelta::dw)
        .def_readwrite("dh", &ActionDelta::dh)
        .def("__repr__", [](const ActionDelta& a) {
            return "ActionDelta(" + format_double(a.dx) + ", " + format_double(a.dy) + ", " +
                   format_double(a.dw) + ", " + format_double(a.dh) + ")";
        });

    m.def("iou", &iou);
    m.def("apply_action", [](const ActionDelta& a, const BBox& prev) {
        AppliedBox r = apply_action(a, prev);
        return py::make_tuple(r.box, r.degenerate);
    });
    m.def("box_delta", [](const BBox& cur, const BBox& prev) {
        BoxDeltaResult r = box_delta(cur, prev);
        return py::make_tuple(r.delta, r.clipped);
    });
    m.def("quantized_reward", &quantized_reward);
    m.def("dilate_box", &dilate_box);

    // synthworld
    py::class_<Frame>(m, "Frame")
        .def_readonly("width", &Frame::width)
        .def_readonly("height", &Frame::height)
        .def_readonly("channels", &Frame::channels)
        .def("to_numpy", &frame_to_numpy);

    py::enum_<TargetShape>(m, "TargetShape")
        .value("rectangle", TargetShape::rectangle)
        .value("ellipse", TargetShape::ellipse);

    py::class_<WorldConfig>(m, "WorldConfig")
        .def(py::init<>())
        .def_readwrite("width", &WorldConfig::width)
        .def_readwrite("height", &WorldConfig::height)
        .def_readwrite("channels", &WorldConfig::channels)
        .def_readwrite("min_frames", &WorldConfig::min_frames)
        .def_readwrite("max_frames", &WorldConfig::max_frames)
        .def_readwrite("shape", &WorldConfig::shape)
        .def_readwrite("texture_seed", &WorldConfig::texture_seed)
        .def_readwrite("max_speed", &WorldConfig::max_speed)
        .def_readwrite("scale_std", &WorldConfig::scale_std)
        .def_readwrite("max_distractors", &WorldConfig::max_distractors)
        .def_readwrite("occluder_prob", &WorldConfig::occluder_prob)
        .def_readwrite("noise_amp", &WorldConfig::noise_amp)
        .def_readwrite("target_min_frac", &WorldConfig::target_min_frac)
        .def_readwrite("target_max_frac", &WorldConfig::target_max_frac);

    py::class_<SyntheticSequence>(m, "SyntheticSequence")
        .def_readwrite("id", &SyntheticSequence::id)
        .def_readonly("frames", &SyntheticSequence::frames)
        .def_readonly("groundtruth", &SyntheticSequence::groundtruth)
        .def_readonly("seed", &SyntheticSequence::seed)
        .def_readonly("config_digest", &SyntheticSequence::config_digest)
        .def("length", &SyntheticSequence::length)
        .def("steps", &SyntheticSequence::steps);

    m.def("generate_sequence", &generate_sequence);
    m.def("save_sequence", &save_sequence);
    m.def("load_sequence", &load_sequence);
    m.def("generate_dataset",
          [](int count, uint64_t seed, const WorldConfig& cfg, const std::string& dir) {
              generate_dataset(count, seed, cfg, dir);
          });
    m.def("dataset_digest", &dataset_digest);

    // mdp
    py::class_<EpisodeConfig>(m, "EpisodeConfig")
        .def(py::init<>())
        .def_readwrite("k", &EpisodeConfig::k)
        .def_readwrite("patch", &EpisodeConfig::patch)
        .def_readwrite("horizon", &EpisodeConfig::horizon);

    py::class_<Observation>(m, "Observation")
        .def_readonly("channels", &Observation::channels)
        .def_readonly("size", &Observation::size)
        .def_readonly("ref_box", &Observation::ref_box)
        .def_readonly("region", &Observation::region)
        .def("prev_numpy", [](const Observation& o) { return patch_to_numpy(o, true); })
        .def("cur_numpy", [](const Observation& o) { return patch_to_numpy(o, false); });

    m.def("crop_state", &crop_state);

    py::class_<Env>(m, "Env")
        .def(py::init<const SyntheticSequence&, const EpisodeConfig&>(), py::keep_alive<1, 2>())
        .def("reset", &Env::reset)
        .def("step",
             [](Env& env, const ActionDelta& a) {
                 Env::StepResult r = env.step(a);
                 return py::make_tuple(r.obs ? py::cast(*r.obs) : py::none(), r.reward, r.done, r.box);
             })
        .def("t", &Env::t)
        .def("done", &Env::done)
        .def("reference_box", &Env::reference_box)
        .def("total_reward", &Env::total_reward)
        .def("horizon", &Env::horizon);

    // expert
    py::class_<ExpertParams> expert_params(m, "ExpertParams");
    py::enum_<ExpertParams::Kind>(expert_params, "Kind")
        .value("oracle_noise", ExpertParams::Kind::oracle_noise)
        .value("ncc", ExpertParams::Kind::ncc)
        .value("none", ExpertParams::Kind::none);
    expert_params.def(py::init<>())
        .def_readwrite("kind", &ExpertParams::kind)
        .def_readwrite("eta", &ExpertParams::eta)
        .def_readwrite("drift_prob", &ExpertParams::drift_prob)
        .def_readwrite("search_dilation", &ExpertParams::search_dilation)
        .def_readwrite("scales", &ExpertParams::scales)
        .def_readwrite("template_update", &ExpertParams::template_update)
        .def_readwrite("template_size", &ExpertParams::template_size)
        .def_readwrite("seed", &ExpertParams::seed)
        .def("describe", &ExpertParams::describe);

    py::class_<Demonstration>(m, "Demonstration")
        .def_readonly("sequence_id", &Demonstration::sequence_id)
        .def_readonly("boxes", &Demonstration::boxes)
        .def_readonly("actions", &Demonstration::actions)
        .def_readonly("rewards", &Demonstration::rewards)
        .def_readonly("ious", &Demonstration::ious)
        .def_readonly("positive", &Demonstration::positive)
        .def("steps", &Demonstration::steps);

    m.def("run_expert", &run_expert);
    m.def("filter_positive", &filter_positive);
    m.def("save_demo", &save_demo);
    m.def("load_demo", &load_demo);

    // neural net
    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("patch", &ModelConfig::patch)
        .def_readwrite("channels", &ModelConfig::channels)
        .def_readwrite("conv_filters", &ModelConfig::conv_filters)
        .def_readwrite("fc_widths", &ModelConfig::fc_widths)
        .def_readwrite("lstm_width", &ModelConfig::lstm_width)
        .def_readwrite("shared_encoder", &ModelConfig::shared_encoder);

    py::class_<RecurrentState>(m, "RecurrentState")
        .def_static("zero", &RecurrentState::zero)
        .def_readwrite("h", &RecurrentState::h)
        .def_readwrite("c", &RecurrentState::c);

    py::class_<PolicyValueNet>(m, "PolicyValueNet")
        .def_static("init", &PolicyValueNet::init)
        .def("config", &PolicyValueNet::config)
        .def("forward", [](const PolicyValueNet& net, const Observation& obs, RecurrentState& rs) {
            auto out = net.forward(obs, rs);
            return py::make_tuple(out.mu, out.value);
        });

    py::class_<CheckpointMeta>(m, "CheckpointMeta")
        .def(py::init<>())
        .def_readwrite("episode_k", &CheckpointMeta::episode_k)
        .def_readwrite("episodes_seen", &CheckpointMeta::episodes_seen)
        .def_readwrite("curriculum_horizon", &CheckpointMeta::curriculum_horizon)
        .def_readwrite("rl_updates", &CheckpointMeta::rl_updates)
        .def_readwrite("imitation_updates", &CheckpointMeta::imitation_updates);

    m.def("save_checkpoint", &save_checkpoint);
    m.def("checkpoint_digest", &checkpoint_digest);

    // trainer
    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("workers", &TrainConfig::workers)
        .def_readwrite("t_max", &TrainConfig::t_max)
        .def_readwrite("gamma", &TrainConfig::gamma)
        .def_readwrite("tau", &TrainConfig::tau)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("weight_decay", &TrainConfig::weight_decay)
        .def_readwrite("episodes", &TrainConfig::episodes)
        .def_readwrite("sigma_min", &TrainConfig::sigma_min)
        .def_readwrite("value_coef", &TrainConfig::value_coef)
        .def_readwrite("curriculum_window", &TrainConfig::curriculum_window)
        .def_readwrite("curriculum_initial", &TrainConfig::curriculum_initial)
        .def_readwrite("curriculum_increment", &TrainConfig::curriculum_increment)
        .def_readwrite("imitation_only", &TrainConfig::imitation_only)
        .def_readwrite("rl_only", &TrainConfig::rl_only)
        .def_readwrite("curriculum_disabled", &TrainConfig::curriculum_disabled)
        .def_readwrite("deterministic", &TrainConfig::deterministic)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("episode", &TrainConfig::episode)
        .def_readwrite("model", &TrainConfig::model);

    py::class_<TrainOutcome>(m, "TrainOutcome")
        .def_readonly("checkpoint_path", &TrainOutcome::checkpoint_path)
        .def_readonly("log_path", &TrainOutcome::log_path)
        .def_readonly("episodes", &TrainOutcome::episodes)
        .def_readonly("testing_episodes", &TrainOutcome::testing_episodes)
        .def_readonly("rl_updates", &TrainOutcome::rl_updates)
        .def_readonly("imitation_updates", &TrainOutcome::imitation_updates)
        .def_readonly("final_horizon", &TrainOutcome::final_horizon);

    m.def("train", &train, py::call_guard<py::gil_scoped_release>());

    // tracker
    py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
        .def_readonly("sequence_id", &TrajectoryRecord::sequence_id)
        .def_readonly("mode", &TrajectoryRecord::mode)
        .def_readonly("boxes", &TrajectoryRecord::boxes)
        .def_readonly("rhat", &TrajectoryRecord::rhat)
        .def_readonly("rhat_d", &TrajectoryRecord::rhat_d)
        .def("sources", [](const TrajectoryRecord& r) {
            std::vector<std::string> out;
            for (char c : r.source) out.push_back(c ? std::string(1, c) : std::string());
            return out;
        });

    py::class_<CheckpointBundle>(m, "CheckpointBundle")
        .def_readonly("meta", &CheckpointBundle::meta)
        .def("net", [](CheckpointBundle& b) -> PolicyValueNet& { return b.net; },
             py::return_value_policy::reference_internal);

    m.def("load_checkpoint", &load_checkpoint);
    m.def("track_a3ct", &track_a3ct);
    m.def("track_a3ctd", &track_a3ctd);
    m.def("track_static", &track_static);
    m.def("track_expert", &track_expert);
    m.def("save_trajectory", &save_trajectory);
    m.def("load_trajectory", &load_trajectory);
    m.def("episode_config_of", &episode_config_of);

    // evalkit
    py::class_<SequenceMetrics>(m, "SequenceMetrics")
        .def_readonly("ao", &SequenceMetrics::ao)
        .def_readonly("sr50", &SequenceMetrics::sr50)
        .def_readonly("sr75", &SequenceMetrics::sr75)
        .def_readonly("ss", &SequenceMetrics::ss)
        .def_readonly("ps", &SequenceMetrics::ps)
        .def_readonly("frames", &SequenceMetrics::frames)
        .def_property_readonly("success_curve",
                               [](const SequenceMetrics& m) {
                                   return std::vector<double>(m.success_curve.begin(),
                                                              m.success_curve.end());
                               })
        .def_property_readonly("precision_curve", [](const SequenceMetrics& m) {
            return std::vector<double>(m.precision_curve.begin(), m.precision_curve.end());
        });

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("dataset_digest", &EvalReport::dataset_digest)
        .def_readonly("checkpoint_digest", &EvalReport::checkpoint_digest)
        .def_readonly("mode", &EvalReport::mode)
        .def_readonly("aggregate", &EvalReport::aggregate)
        .def_readonly("per_sequence", &EvalReport::per_sequence);

    py::class_<OpeOptions>(m, "OpeOptions")
        .def(py::init<>())
        .def_readwrite("mode", &OpeOptions::mode)
        .def_readwrite("checkpoint_path", &OpeOptions::checkpoint_path)
        .def_readwrite("expert", &OpeOptions::expert);

    m.def("ao", &ao);
    m.def("sr", &sr);
    m.def("ss", &ss);
    m.def("ps", &ps);
    m.def("evaluate_sequence", &evaluate_sequence);
    m.def("ope_run", [](const OpeOptions& opts, const std::string& dir) { return ope_run(opts, dir); },
          py::call_guard<py::gil_scoped_release>());
    m.def("save_report", &save_report);
    m.def("load_report", &load_report);
    m.def("emit_plots", &emit_plots);

    // gradcheck
    m.def("gradcheck_worst",
          [](uint64_t seed) { return gradcheck_worst(run_gradcheck_suite(seed)); },
          py::call_guard<py::gil_scoped_release>());
}
