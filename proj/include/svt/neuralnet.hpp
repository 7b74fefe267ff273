#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "svt/geometry.hpp"
#include "svt/mdp.hpp"

namespace svt {

// Dense row-major tensor of doubles. Double precision throughout: the
// gradient checks demand it and the nets here are small enough not to care.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;

    static Tensor zeros(std::vector<int> shape);
    size_t size() const { return v.size(); }
    double& operator[](size_t i) { return v[i]; }
    double operator[](size_t i) const { return v[i]; }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// Architecture of the policy/value net: a small convolutional encoder
// applied to both patches (shared weights by default), two fully connected
// ReLU layers, an LSTM, then a tanh action head and a linear value head.
struct ModelConfig {
    int patch = 32;
    int channels = 1;
    std::vector<int> conv_filters{8, 16};  // 3x3, stride 2, pad 1, ReLU
    std::vector<int> fc_widths{64, 64};
    int lstm_width = 64;
    bool shared_encoder = true;

    int conv_out_spatial() const;  // side of the final feature map
    int encoder_dim() const;       // flattened single-branch feature size

    std::string text() const;  // canonical key=value form
    static ModelConfig parse_text(const std::string& text);
    bool operator==(const ModelConfig& o) const;
};

void validate(const ModelConfig& cfg);

// Named parameter (or gradient) collection with a fixed canonical order.
struct ParamSet {
    std::vector<std::string> names;
    std::vector<Tensor> tensors;

    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    ParamSet zeros_like() const;
    void fill(double value);
    size_t total_size() const;
    bool all_finite() const;
    double linf() const;
    double l2_norm() const;
    void scale(double factor);
};

struct RecurrentState {
    std::vector<double> h;
    std::vector<double> c;

    static RecurrentState zero(int width) { return {std::vector<double>(width, 0.0), std::vector<double>(width, 0.0)}; }
};

// Everything the backward pass of one time step needs.
struct StepCache {
    std::vector<double> in_prev, in_cur;         // standardized inputs
    std::vector<std::vector<double>> conv_prev;  // post-ReLU per conv layer
    std::vector<std::vector<double>> conv_cur;
    std::vector<double> concat;
    std::vector<std::vector<double>> fc;         // post-ReLU per fc layer
    std::vector<double> h_prev, c_prev;
    std::vector<double> gi, gf, gg, go;          // gate activations
    std::vector<double> c_new, tanh_c, h_new;
    std::array<double, 4> mu_pre{}, mu{};
    double value = 0.0;
};

class PolicyValueNet {
public:
    explicit PolicyValueNet(const ModelConfig& cfg);  // zero parameters

    // Deterministic fan-in-scaled uniform init; LSTM forget-gate bias 1.
    static PolicyValueNet init(const ModelConfig& cfg, uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }

    struct Output {
        ActionDelta mu;  // tanh-squashed, each component in [-1, 1]
        double value = 0.0;
    };

    // Inference: advances rs in place.
    Output forward(const Observation& obs, RecurrentState& rs) const;

    // Training: same computation, all intermediates recorded for backward.
    Output forward_cached(const Observation& obs, const RecurrentState& rs_in,
                          RecurrentState& rs_out, StepCache& cache) const;

    // Reverse-mode step: consumes the gradient w.r.t. mu and value for this
    // step plus (dh, dc) flowing back from the future; accumulates parameter
    // gradients into `grads`; rewrites (dh, dc) to flow further back.
    // Propagating them across a rollout is backpropagation through time.
    void backward_step(const StepCache& cache, const std::array<double, 4>& dmu, double dvalue,
                       std::vector<double>& dh, std::vector<double>& dc, ParamSet& grads) const;

private:
    ModelConfig cfg_;
    ParamSet params_;

    void encode(const std::vector<double>& input, std::vector<std::vector<double>>& cache,
                const std::string& prefix) const;
    void encode_backward(const std::vector<double>& input,
                         const std::vector<std::vector<double>>& cache, std::vector<double>& dout,
                         const std::string& prefix, ParamSet& grads) const;
};

ParamSet make_param_set(const ModelConfig& cfg);

// --- loss pieces -----------------------------------------------------------

// Masked L1 imitation loss for one step: sum_c |target_c - mu_c| * mask.
// d/dmu is -sign(target - mu) * mask.
double l1_masked_loss(const std::array<double, 4>& target, const std::array<double, 4>& mu,
                      double mask, std::array<double, 4>& dmu);

// Diagonal Gaussian log density of an action (sum over components) and its
// gradient w.r.t. the mean. Sigma is data, not a parameter.
double gaussian_logpdf(const std::array<double, 4>& a, const std::array<double, 4>& mu,
                       const std::array<double, 4>& sigma);
std::array<double, 4> gaussian_logpdf_dmu(const std::array<double, 4>& a,
                                          const std::array<double, 4>& mu,
                                          const std::array<double, 4>& sigma);

// --- checkpoints ------------------------------------------------------------

struct CheckpointMeta {
    double episode_k = 1.5;        // crop dilation the net was trained with
    int64_t episodes_seen = 0;
    int curriculum_horizon = 0;    // horizon reached by the curriculum
    int64_t rl_updates = 0;
    int64_t imitation_updates = 0;
    uint64_t train_seed = 0;
};

void save_checkpoint(const std::string& path, const PolicyValueNet& net, const CheckpointMeta& meta);

struct CheckpointBundle {
    PolicyValueNet net;
    CheckpointMeta meta;
};

CheckpointBundle load_checkpoint(const std::string& path);

// Loads parameters into an existing net; the stored config must match.
CheckpointMeta load_checkpoint_into(const std::string& path, PolicyValueNet& net);

std::string checkpoint_digest(const std::string& path);  // FNV-1a of the file bytes

}  // namespace svt
