#include "svt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "svt/common.hpp"

namespace svt {

Observation random_observation(const ModelConfig& cfg, Rng& rng) {
    Observation obs;
    obs.channels = cfg.channels;
    obs.size = cfg.patch;
    size_t n = static_cast<size_t>(cfg.channels) * cfg.patch * cfg.patch;
    obs.prev.resize(n);
    obs.cur.resize(n);
    for (double& v : obs.prev) v = rng.uniform(-0.5, 0.5);
    for (double& v : obs.cur) v = rng.uniform(-0.5, 0.5);
    obs.ref_box = {0, 0, 10, 10};
    obs.region = {-2.5, -2.5, 15, 15};
    return obs;
}

PolicyValueNet random_net(const ModelConfig& cfg, uint64_t seed) {
    PolicyValueNet net = PolicyValueNet::init(cfg, seed);
    Rng rng(mix_seed(seed, 33));
    for (auto& t : net.params().tensors) {
        if (t.shape.size() != 1) continue;
        for (double& x : t.v) x += rng.uniform(-0.2, 0.2);
    }
    return net;
}

RolloutFixture random_fixture(const ModelConfig& cfg, int steps, uint64_t seed) {
    Rng rng(mix_seed(seed, 21));
    RolloutFixture fx;
    for (int i = 0; i < steps; ++i) {
        fx.observations.push_back(random_observation(cfg, rng));
        std::array<double, 4> target, action, sigma;
        for (int j = 0; j < 4; ++j) {
            target[j] = rng.uniform(-0.8, 0.8);
            action[j] = rng.uniform(-0.9, 0.9);
            sigma[j] = rng.uniform(0.1, 0.6);
        }
        fx.targets.push_back(target);
        fx.masks.push_back(1.0);
        fx.actions.push_back(action);
        fx.sigmas.push_back(sigma);
        fx.advantages.push_back(rng.uniform(-1.5, 1.5));
        fx.returns.push_back(rng.uniform(-2.0, 2.0));
    }
    return fx;
}

double imitation_loss_value(const PolicyValueNet& net, const RolloutFixture& fx) {
    RecurrentState rs = RecurrentState::zero(net.config().lstm_width);
    double loss = 0;
    for (size_t i = 0; i < fx.observations.size(); ++i) {
        auto out = net.forward(fx.observations[i], rs);
        auto mu = out.mu.to_array();
        for (int j = 0; j < 4; ++j) loss += std::abs(fx.targets[i][j] - mu[j]) * fx.masks[i];
    }
    return loss;
}

ParamSet imitation_loss_grads(const PolicyValueNet& net, const RolloutFixture& fx) {
    RecurrentState rs = RecurrentState::zero(net.config().lstm_width);
    std::vector<StepCache> caches(fx.observations.size());
    std::vector<std::array<double, 4>> dmus(fx.observations.size());
    for (size_t i = 0; i < fx.observations.size(); ++i) {
        RecurrentState next;
        net.forward_cached(fx.observations[i], rs, next, caches[i]);
        l1_masked_loss(fx.targets[i], caches[i].mu, fx.masks[i], dmus[i]);
        rs = std::move(next);
    }
    ParamSet grads = net.params().zeros_like();
    std::vector<double> dh, dc;
    for (int i = static_cast<int>(caches.size()) - 1; i >= 0; --i)
        net.backward_step(caches[i], dmus[i], 0.0, dh, dc, grads);
    return grads;
}

double rl_loss_value(const PolicyValueNet& net, const RolloutFixture& fx) {
    RecurrentState rs = RecurrentState::zero(net.config().lstm_width);
    double loss = 0;
    for (size_t i = 0; i < fx.observations.size(); ++i) {
        auto out = net.forward(fx.observations[i], rs);
        double logp = gaussian_logpdf(fx.actions[i], out.mu.to_array(), fx.sigmas[i]);
        double verr = fx.returns[i] - out.value;
        loss += -logp * fx.advantages[i] + fx.value_coef * verr * verr;
    }
    return loss;
}

ParamSet rl_loss_grads(const PolicyValueNet& net, const RolloutFixture& fx) {
    RecurrentState rs = RecurrentState::zero(net.config().lstm_width);
    std::vector<StepCache> caches(fx.observations.size());
    for (size_t i = 0; i < fx.observations.size(); ++i) {
        RecurrentState next;
        net.forward_cached(fx.observations[i], rs, next, caches[i]);
        rs = std::move(next);
    }
    ParamSet grads = net.params().zeros_like();
    std::vector<double> dh, dc;
    for (int i = static_cast<int>(caches.size()) - 1; i >= 0; --i) {
        auto dlogp = gaussian_logpdf_dmu(fx.actions[i], caches[i].mu, fx.sigmas[i]);
        std::array<double, 4> dmu;
        for (int j = 0; j < 4; ++j) dmu[j] = -fx.advantages[i] * dlogp[j];
        double dvalue = -2.0 * fx.value_coef * (fx.returns[i] - caches[i].value);
        net.backward_step(caches[i], dmu, dvalue, dh, dc, grads);
    }
    return grads;
}

namespace {

GradCheckCase finite_diff_case(const std::string& name, PolicyValueNet& net,
                               const std::function<double()>& loss,
                               const ParamSet& analytic) {
    constexpr double h = 1e-5;
    GradCheckCase result{name, 0.0, 0};
    ParamSet& p = net.params();
    for (size_t ti = 0; ti < p.tensors.size(); ++ti) {
        auto& values = p.tensors[ti].v;
        const auto& grad = analytic.tensors[ti].v;
        for (size_t j = 0; j < values.size(); ++j) {
            double saved = values[j];
            values[j] = saved + h;
            double lp = loss();
            values[j] = saved - h;
            double lm = loss();
            values[j] = saved;
            double numeric = (lp - lm) / (2 * h);
            double a = grad[j];
            double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-4});
            result.max_rel_err = std::max(result.max_rel_err, rel);
            ++result.checked;
        }
    }
    return result;
}

ModelConfig tiny_config(bool shared) {
    ModelConfig cfg;
    cfg.patch = 8;
    cfg.channels = 1;
    cfg.conv_filters = {2, 3};
    cfg.fc_widths = {6, 5};
    cfg.lstm_width = 4;
    cfg.shared_encoder = shared;
    return cfg;
}

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite(uint64_t seed) {
    std::vector<GradCheckCase> cases;
    for (bool shared : {true, false}) {
        ModelConfig cfg = tiny_config(shared);
        PolicyValueNet net = random_net(cfg, seed);
        RolloutFixture fx = random_fixture(cfg, 2, seed);
        std::string suffix = shared ? "/shared-encoder" : "/split-encoder";
        {
            ParamSet analytic = imitation_loss_grads(net, fx);
            cases.push_back(finite_diff_case("masked-l1" + suffix, net,
                                             [&]() { return imitation_loss_value(net, fx); },
                                             analytic));
        }
        {
            ParamSet analytic = rl_loss_grads(net, fx);
            cases.push_back(finite_diff_case("gaussian-advantage+value" + suffix, net,
                                             [&]() { return rl_loss_value(net, fx); }, analytic));
        }
    }
    return cases;
}

double gradcheck_worst(const std::vector<GradCheckCase>& cases) {
    double worst = 0;
    for (const auto& c : cases) worst = std::max(worst, c.max_rel_err);
    return worst;
}

}  // namespace svt
