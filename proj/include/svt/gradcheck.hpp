#pragma once

#include <string>
#include <vector>

#include "svt/common.hpp"
#include "svt/neuralnet.hpp"

namespace svt {

struct GradCheckCase {
    std::string name;
    double max_rel_err = 0.0;
    size_t checked = 0;
};

// Central finite differences over every parameter of a tiny model, for both
// training losses (masked L1 and Gaussian-advantage + value regression) on a
// 2-step rollout, with shared and split encoders. Relative error is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-4).
std::vector<GradCheckCase> run_gradcheck_suite(uint64_t seed);

double gradcheck_worst(const std::vector<GradCheckCase>& cases);

// Fixture pieces, exposed for the unit tests.
Observation random_observation(const ModelConfig& cfg, Rng& rng);

// Fan-in init plus random biases. Zero biases would leave ReLU units whose
// inputs are all gated off sitting exactly on the kink, where a central
// difference measures the half-slope; a generic point avoids that.
PolicyValueNet random_net(const ModelConfig& cfg, uint64_t seed);

struct RolloutFixture {
    std::vector<Observation> observations;
    // imitation loss
    std::vector<std::array<double, 4>> targets;
    std::vector<double> masks;
    // rl loss (advantages and returns are detached constants)
    std::vector<std::array<double, 4>> actions;
    std::vector<std::array<double, 4>> sigmas;
    std::vector<double> advantages;
    std::vector<double> returns;
    double value_coef = 0.5;
};

RolloutFixture random_fixture(const ModelConfig& cfg, int steps, uint64_t seed);

double imitation_loss_value(const PolicyValueNet& net, const RolloutFixture& fx);
ParamSet imitation_loss_grads(const PolicyValueNet& net, const RolloutFixture& fx);
double rl_loss_value(const PolicyValueNet& net, const RolloutFixture& fx);
ParamSet rl_loss_grads(const PolicyValueNet& net, const RolloutFixture& fx);

}  // namespace svt
