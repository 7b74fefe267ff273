#include "svt/neuralnet.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "svt/common.hpp"

namespace svt {

namespace {
constexpr char kCheckpointMagic[4] = {'S', 'V', 'T', 'C'};
constexpr uint32_t kCheckpointVersion = 1;
constexpr int kKernel = 3;
constexpr int kStride = 2;
constexpr int kPad = 1;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

int conv_out_side(int in_side) { return (in_side + 2 * kPad - kKernel) / kStride + 1; }

std::string join_ints(const std::vector<int>& v) {
    std::ostringstream os;
    for (size_t i = 0; i < v.size(); ++i) os << (i ? ";" : "") << v[i];
    return os.str();
}

std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> out;
    for (const auto& part : split(s, ';')) out.push_back(std::stoi(part));
    return out;
}
}  // namespace

Tensor Tensor::zeros(std::vector<int> shape) {
    Tensor t;
    t.shape = std::move(shape);
    size_t n = 1;
    for (int d : t.shape) n *= static_cast<size_t>(d);
    t.v.assign(n, 0.0);
    return t;
}

int ModelConfig::conv_out_spatial() const {
    int s = patch;
    for (size_t i = 0; i < conv_filters.size(); ++i) s = conv_out_side(s);
    return s;
}

int ModelConfig::encoder_dim() const {
    int s = conv_out_spatial();
    return conv_filters.back() * s * s;
}

std::string ModelConfig::text() const {
    std::ostringstream os;
    os << "patch=" << patch << "\n"
       << "channels=" << channels << "\n"
       << "conv_filters=" << join_ints(conv_filters) << "\n"
       << "fc_widths=" << join_ints(fc_widths) << "\n"
       << "lstm_width=" << lstm_width << "\n"
       << "shared_encoder=" << (shared_encoder ? 1 : 0) << "\n";
    return os.str();
}

ModelConfig ModelConfig::parse_text(const std::string& text) {
    ModelConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("model config: bad line '" + line + "'");
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "patch") cfg.patch = std::stoi(val);
        else if (key == "channels") cfg.channels = std::stoi(val);
        else if (key == "conv_filters") cfg.conv_filters = parse_ints(val);
        else if (key == "fc_widths") cfg.fc_widths = parse_ints(val);
        else if (key == "lstm_width") cfg.lstm_width = std::stoi(val);
        else if (key == "shared_encoder") cfg.shared_encoder = val == "1";
        else throw std::invalid_argument("model config: unknown key '" + key + "'");
    }
    return cfg;
}

bool ModelConfig::operator==(const ModelConfig& o) const {
    return patch == o.patch && channels == o.channels && conv_filters == o.conv_filters &&
           fc_widths == o.fc_widths && lstm_width == o.lstm_width && shared_encoder == o.shared_encoder;
}

void validate(const ModelConfig& cfg) {
    if (cfg.patch < 8) throw std::invalid_argument("model: patch must be >= 8");
    if (cfg.channels != 1 && cfg.channels != 3) throw std::invalid_argument("model: channels must be 1 or 3");
    if (cfg.conv_filters.empty()) throw std::invalid_argument("model: need at least one conv layer");
    for (int f : cfg.conv_filters)
        if (f < 1) throw std::invalid_argument("model: conv filter counts must be >= 1");
    if (cfg.fc_widths.empty()) throw std::invalid_argument("model: need at least one fc layer");
    for (int w : cfg.fc_widths)
        if (w < 1) throw std::invalid_argument("model: fc widths must be >= 1");
    if (cfg.lstm_width < 1) throw std::invalid_argument("model: lstm width must be >= 1");
    if (cfg.conv_out_spatial() < 1) throw std::invalid_argument("model: conv stack collapses the patch");
}

Tensor& ParamSet::at(const std::string& name) {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return tensors[i];
    throw std::invalid_argument("params: no tensor named '" + name + "'");
}

const Tensor& ParamSet::at(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return tensors[i];
    throw std::invalid_argument("params: no tensor named '" + name + "'");
}

ParamSet ParamSet::zeros_like() const {
    ParamSet out;
    out.names = names;
    out.tensors.reserve(tensors.size());
    for (const auto& t : tensors) out.tensors.push_back(Tensor::zeros(t.shape));
    return out;
}

void ParamSet::fill(double value) {
    for (auto& t : tensors)
        for (double& x : t.v) x = value;
}

size_t ParamSet::total_size() const {
    size_t n = 0;
    for (const auto& t : tensors) n += t.size();
    return n;
}

bool ParamSet::all_finite() const {
    for (const auto& t : tensors)
        for (double x : t.v)
            if (!std::isfinite(x)) return false;
    return true;
}

double ParamSet::linf() const {
    double m = 0;
    for (const auto& t : tensors)
        for (double x : t.v) m = std::max(m, std::abs(x));
    return m;
}

double ParamSet::l2_norm() const {
    double sq = 0;
    for (const auto& t : tensors)
        for (double x : t.v) sq += x * x;
    return std::sqrt(sq);
}

void ParamSet::scale(double factor) {
    for (auto& t : tensors)
        for (double& x : t.v) x *= factor;
}

ParamSet make_param_set(const ModelConfig& cfg) {
    validate(cfg);
    ParamSet p;
    auto add = [&](const std::string& name, std::vector<int> shape) {
        p.names.push_back(name);
        p.tensors.push_back(Tensor::zeros(std::move(shape)));
    };
    auto add_encoder = [&](const std::string& prefix) {
        int in_ch = cfg.channels;
        for (size_t i = 0; i < cfg.conv_filters.size(); ++i) {
            int out_ch = cfg.conv_filters[i];
            add(prefix + "conv" + std::to_string(i) + ".W", {out_ch, in_ch, kKernel, kKernel});
            add(prefix + "conv" + std::to_string(i) + ".b", {out_ch});
            in_ch = out_ch;
        }
    };
    add_encoder("enc.");
    if (!cfg.shared_encoder) add_encoder("enc2.");
    int in_dim = 2 * cfg.encoder_dim();
    for (size_t i = 0; i < cfg.fc_widths.size(); ++i) {
        add("fc" + std::to_string(i) + ".W", {cfg.fc_widths[i], in_dim});
        add("fc" + std::to_string(i) + ".b", {cfg.fc_widths[i]});
        in_dim = cfg.fc_widths[i];
    }
    int H = cfg.lstm_width;
    add("lstm.Wx", {4 * H, in_dim});
    add("lstm.Wh", {4 * H, H});
    add("lstm.b", {4 * H});
    add("head.mu.W", {4, H});
    add("head.mu.b", {4});
    add("head.v.W", {1, H});
    add("head.v.b", {1});
    return p;
}

PolicyValueNet::PolicyValueNet(const ModelConfig& cfg) : cfg_(cfg), params_(make_param_set(cfg)) {}

PolicyValueNet PolicyValueNet::init(const ModelConfig& cfg, uint64_t seed) {
    PolicyValueNet net(cfg);
    Rng rng(mix_seed(seed, 11));
    for (size_t i = 0; i < net.params_.names.size(); ++i) {
        Tensor& t = net.params_.tensors[i];
        const std::string& name = net.params_.names[i];
        if (t.shape.size() < 2) continue;  // biases stay zero
        size_t fan_in = t.size() / static_cast<size_t>(t.shape[0]);
        double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& x : t.v) x = rng.uniform(-limit, limit);
        (void)name;
    }
    // forget-gate bias starts open so early BPTT gradients survive
    Tensor& lb = net.params_.at("lstm.b");
    int H = cfg.lstm_width;
    for (int i = H; i < 2 * H; ++i) lb.v[i] = 1.0;
    return net;
}

// --- forward ----------------------------------------------------------------

namespace {

// in: [in_ch, side, side] -> out (post-ReLU): [out_ch, oside, oside]
void conv_relu_forward(const Tensor& W, const Tensor& b, const std::vector<double>& in, int in_ch,
                       int side, std::vector<double>& out) {
    int oside = conv_out_side(side);
    int out_ch = W.shape[0];
    out.assign(static_cast<size_t>(out_ch) * oside * oside, 0.0);
    for (int oc = 0; oc < out_ch; ++oc) {
        for (int oy = 0; oy < oside; ++oy) {
            for (int ox = 0; ox < oside; ++ox) {
                double acc = b.v[oc];
                for (int ic = 0; ic < in_ch; ++ic) {
                    const double* wbase = &W.v[((static_cast<size_t>(oc) * in_ch + ic) * kKernel) * kKernel];
                    for (int ky = 0; ky < kKernel; ++ky) {
                        int iy = oy * kStride + ky - kPad;
                        if (iy < 0 || iy >= side) continue;
                        const double* irow = &in[(static_cast<size_t>(ic) * side + iy) * side];
                        for (int kx = 0; kx < kKernel; ++kx) {
                            int ix = ox * kStride + kx - kPad;
                            if (ix < 0 || ix >= side) continue;
                            acc += wbase[ky * kKernel + kx] * irow[ix];
                        }
                    }
                }
                out[(static_cast<size_t>(oc) * oside + oy) * oside + ox] = acc > 0.0 ? acc : 0.0;
            }
        }
    }
}

void conv_relu_backward(const Tensor& W, const std::vector<double>& in, int in_ch, int side,
                        const std::vector<double>& out, std::vector<double>& dout, Tensor& dW,
                        Tensor& db, std::vector<double>& din) {
    int oside = conv_out_side(side);
    int out_ch = W.shape[0];
    din.assign(in.size(), 0.0);
    for (int oc = 0; oc < out_ch; ++oc) {
        for (int oy = 0; oy < oside; ++oy) {
            for (int ox = 0; ox < oside; ++ox) {
                size_t oidx = (static_cast<size_t>(oc) * oside + oy) * oside + ox;
                if (out[oidx] <= 0.0) continue;  // ReLU gate
                double g = dout[oidx];
                if (g == 0.0) continue;
                db.v[oc] += g;
                for (int ic = 0; ic < in_ch; ++ic) {
                    double* dwbase = &dW.v[((static_cast<size_t>(oc) * in_ch + ic) * kKernel) * kKernel];
                    const double* wbase = &W.v[((static_cast<size_t>(oc) * in_ch + ic) * kKernel) * kKernel];
                    for (int ky = 0; ky < kKernel; ++ky) {
                        int iy = oy * kStride + ky - kPad;
                        if (iy < 0 || iy >= side) continue;
                        const double* irow = &in[(static_cast<size_t>(ic) * side + iy) * side];
                        double* drow = &din[(static_cast<size_t>(ic) * side + iy) * side];
                        for (int kx = 0; kx < kKernel; ++kx) {
                            int ix = ox * kStride + kx - kPad;
                            if (ix < 0 || ix >= side) continue;
                            dwbase[ky * kKernel + kx] += g * irow[ix];
                            drow[ix] += g * wbase[ky * kKernel + kx];
                        }
                    }
                }
            }
        }
    }
}

// y = W x + b
void linear_forward(const Tensor& W, const Tensor& b, const std::vector<double>& x,
                    std::vector<double>& y) {
    int rows = W.shape[0];
    int cols = W.shape[1];
    y.assign(rows, 0.0);
    for (int r = 0; r < rows; ++r) {
        const double* wrow = &W.v[static_cast<size_t>(r) * cols];
        double acc = b.v[r];
        for (int c = 0; c < cols; ++c) acc += wrow[c] * x[c];
        y[r] = acc;
    }
}

void linear_backward(const Tensor& W, const std::vector<double>& x, const std::vector<double>& dy,
                     Tensor& dW, Tensor& db, std::vector<double>& dx) {
    int rows = W.shape[0];
    int cols = W.shape[1];
    dx.assign(cols, 0.0);
    for (int r = 0; r < rows; ++r) {
        double g = dy[r];
        if (g == 0.0) continue;
        db.v[r] += g;
        const double* wrow = &W.v[static_cast<size_t>(r) * cols];
        double* dwrow = &dW.v[static_cast<size_t>(r) * cols];
        for (int c = 0; c < cols; ++c) {
            dwrow[c] += g * x[c];
            dx[c] += g * wrow[c];
        }
    }
}

}  // namespace

void PolicyValueNet::encode(const std::vector<double>& input,
                            std::vector<std::vector<double>>& cache,
                            const std::string& prefix) const {
    cache.clear();
    const std::vector<double>* cur = &input;
    int side = cfg_.patch;
    int in_ch = cfg_.channels;
    for (size_t i = 0; i < cfg_.conv_filters.size(); ++i) {
        std::vector<double> out;
        conv_relu_forward(params_.at(prefix + "conv" + std::to_string(i) + ".W"),
                          params_.at(prefix + "conv" + std::to_string(i) + ".b"), *cur, in_ch, side, out);
        cache.push_back(std::move(out));
        cur = &cache.back();
        side = conv_out_side(side);
        in_ch = cfg_.conv_filters[i];
    }
}

void PolicyValueNet::encode_backward(const std::vector<double>& input,
                                     const std::vector<std::vector<double>>& cache,
                                     std::vector<double>& dout, const std::string& prefix,
                                     ParamSet& grads) const {
    int layers = static_cast<int>(cfg_.conv_filters.size());
    std::vector<int> sides(layers + 1);
    sides[0] = cfg_.patch;
    for (int i = 0; i < layers; ++i) sides[i + 1] = conv_out_side(sides[i]);
    for (int i = layers - 1; i >= 0; --i) {
        const std::vector<double>& in = (i == 0) ? input : cache[i - 1];
        int in_ch = (i == 0) ? cfg_.channels : cfg_.conv_filters[i - 1];
        std::vector<double> din;
        conv_relu_backward(params_.at(prefix + "conv" + std::to_string(i) + ".W"), in, in_ch, sides[i],
                           cache[i], dout, grads.at(prefix + "conv" + std::to_string(i) + ".W"),
                           grads.at(prefix + "conv" + std::to_string(i) + ".b"), din);
        dout = std::move(din);
    }
}

PolicyValueNet::Output PolicyValueNet::forward(const Observation& obs, RecurrentState& rs) const {
    StepCache cache;
    RecurrentState next;
    Output out = forward_cached(obs, rs, next, cache);
    rs = std::move(next);
    return out;
}

PolicyValueNet::Output PolicyValueNet::forward_cached(const Observation& obs,
                                                      const RecurrentState& rs_in,
                                                      RecurrentState& rs_out, StepCache& cache) const {
    if (obs.size != cfg_.patch || obs.channels != cfg_.channels)
        throw std::invalid_argument("forward: observation shape does not match the model config");
    const int H = cfg_.lstm_width;
    if (static_cast<int>(rs_in.h.size()) != H || static_cast<int>(rs_in.c.size()) != H)
        throw std::invalid_argument("forward: recurrent state width mismatch");

    cache.in_prev = obs.prev;
    cache.in_cur = obs.cur;
    encode(cache.in_prev, cache.conv_prev, "enc.");
    encode(cache.in_cur, cache.conv_cur, cfg_.shared_encoder ? "enc." : "enc2.");

    const std::vector<double>& fp = cache.conv_prev.back();
    const std::vector<double>& fc_ = cache.conv_cur.back();
    cache.concat.clear();
    cache.concat.reserve(fp.size() + fc_.size());
    cache.concat.insert(cache.concat.end(), fp.begin(), fp.end());
    cache.concat.insert(cache.concat.end(), fc_.begin(), fc_.end());

    cache.fc.clear();
    const std::vector<double>* x = &cache.concat;
    for (size_t i = 0; i < cfg_.fc_widths.size(); ++i) {
        std::vector<double> y;
        linear_forward(params_.at("fc" + std::to_string(i) + ".W"),
                       params_.at("fc" + std::to_string(i) + ".b"), *x, y);
        for (double& v : y) v = v > 0.0 ? v : 0.0;
        cache.fc.push_back(std::move(y));
        x = &cache.fc.back();
    }

    cache.h_prev = rs_in.h;
    cache.c_prev = rs_in.c;
    std::vector<double> zx, zh;
    linear_forward(params_.at("lstm.Wx"), params_.at("lstm.b"), *x, zx);
    {
        const Tensor& Wh = params_.at("lstm.Wh");
        zh.assign(4 * H, 0.0);
        for (int r = 0; r < 4 * H; ++r) {
            const double* wrow = &Wh.v[static_cast<size_t>(r) * H];
            double acc = 0;
            for (int c = 0; c < H; ++c) acc += wrow[c] * cache.h_prev[c];
            zh[r] = acc;
        }
    }
    cache.gi.resize(H);
    cache.gf.resize(H);
    cache.gg.resize(H);
    cache.go.resize(H);
    cache.c_new.resize(H);
    cache.tanh_c.resize(H);
    cache.h_new.resize(H);
    for (int j = 0; j < H; ++j) {
        double zi = zx[j] + zh[j];
        double zf = zx[H + j] + zh[H + j];
        double zg = zx[2 * H + j] + zh[2 * H + j];
        double zo = zx[3 * H + j] + zh[3 * H + j];
        cache.gi[j] = sigmoid(zi);
        cache.gf[j] = sigmoid(zf);
        cache.gg[j] = std::tanh(zg);
        cache.go[j] = sigmoid(zo);
        cache.c_new[j] = cache.gf[j] * cache.c_prev[j] + cache.gi[j] * cache.gg[j];
        cache.tanh_c[j] = std::tanh(cache.c_new[j]);
        cache.h_new[j] = cache.go[j] * cache.tanh_c[j];
    }

    const Tensor& Wm = params_.at("head.mu.W");
    const Tensor& bm = params_.at("head.mu.b");
    for (int j = 0; j < 4; ++j) {
        double acc = bm.v[j];
        const double* wrow = &Wm.v[static_cast<size_t>(j) * H];
        for (int k = 0; k < H; ++k) acc += wrow[k] * cache.h_new[k];
        cache.mu_pre[j] = acc;
        cache.mu[j] = std::tanh(acc);
    }
    const Tensor& Wv = params_.at("head.v.W");
    {
        double acc = params_.at("head.v.b").v[0];
        for (int k = 0; k < H; ++k) acc += Wv.v[k] * cache.h_new[k];
        cache.value = acc;
    }

    rs_out.h = cache.h_new;
    rs_out.c = cache.c_new;
    Output out;
    out.mu = ActionDelta::from_array(cache.mu);
    out.value = cache.value;
    return out;
}

void PolicyValueNet::backward_step(const StepCache& cache, const std::array<double, 4>& dmu,
                                   double dvalue, std::vector<double>& dh, std::vector<double>& dc,
                                   ParamSet& grads) const {
    const int H = cfg_.lstm_width;
    if (dh.empty()) dh.assign(H, 0.0);
    if (dc.empty()) dc.assign(H, 0.0);

    // heads
    std::array<double, 4> dmu_pre;
    for (int j = 0; j < 4; ++j) dmu_pre[j] = dmu[j] * (1.0 - cache.mu[j] * cache.mu[j]);
    const Tensor& Wm = params_.at("head.mu.W");
    Tensor& dWm = grads.at("head.mu.W");
    Tensor& dbm = grads.at("head.mu.b");
    const Tensor& Wv = params_.at("head.v.W");
    Tensor& dWv = grads.at("head.v.W");
    Tensor& dbv = grads.at("head.v.b");
    std::vector<double> dh_total = dh;
    for (int j = 0; j < 4; ++j) {
        double g = dmu_pre[j];
        if (g != 0.0) {
            dbm.v[j] += g;
            const double* wrow = &Wm.v[static_cast<size_t>(j) * H];
            double* dwrow = &dWm.v[static_cast<size_t>(j) * H];
            for (int k = 0; k < H; ++k) {
                dwrow[k] += g * cache.h_new[k];
                dh_total[k] += g * wrow[k];
            }
        }
    }
    if (dvalue != 0.0) {
        dbv.v[0] += dvalue;
        for (int k = 0; k < H; ++k) {
            dWv.v[k] += dvalue * cache.h_new[k];
            dh_total[k] += dvalue * Wv.v[k];
        }
    }

    // LSTM cell
    std::vector<double> dz(4 * H);
    std::vector<double> dc_prev(H), dh_prev(H, 0.0);
    for (int j = 0; j < H; ++j) {
        double i = cache.gi[j], f = cache.gf[j], g = cache.gg[j], o = cache.go[j];
        double do_ = dh_total[j] * cache.tanh_c[j];
        double dtanh = dh_total[j] * o;
        double dct = dc[j] + dtanh * (1.0 - cache.tanh_c[j] * cache.tanh_c[j]);
        double di = dct * g;
        double df = dct * cache.c_prev[j];
        double dg = dct * i;
        dc_prev[j] = dct * f;
        dz[j] = di * i * (1.0 - i);
        dz[H + j] = df * f * (1.0 - f);
        dz[2 * H + j] = dg * (1.0 - g * g);
        dz[3 * H + j] = do_ * o * (1.0 - o);
    }
    const std::vector<double>& x = cache.fc.back();
    const Tensor& Wx = params_.at("lstm.Wx");
    const Tensor& Wh = params_.at("lstm.Wh");
    Tensor& dWx = grads.at("lstm.Wx");
    Tensor& dWh = grads.at("lstm.Wh");
    Tensor& dbl = grads.at("lstm.b");
    int D = Wx.shape[1];
    std::vector<double> dx(D, 0.0);
    for (int r = 0; r < 4 * H; ++r) {
        double g = dz[r];
        if (g == 0.0) continue;
        dbl.v[r] += g;
        const double* wxrow = &Wx.v[static_cast<size_t>(r) * D];
        double* dwxrow = &dWx.v[static_cast<size_t>(r) * D];
        for (int c = 0; c < D; ++c) {
            dwxrow[c] += g * x[c];
            dx[c] += g * wxrow[c];
        }
        const double* whrow = &Wh.v[static_cast<size_t>(r) * H];
        double* dwhrow = &dWh.v[static_cast<size_t>(r) * H];
        for (int c = 0; c < H; ++c) {
            dwhrow[c] += g * cache.h_prev[c];
            dh_prev[c] += g * whrow[c];
        }
    }

    // fc stack
    std::vector<double> grad = std::move(dx);
    for (int i = static_cast<int>(cfg_.fc_widths.size()) - 1; i >= 0; --i) {
        const std::vector<double>& out = cache.fc[i];
        for (size_t j = 0; j < grad.size(); ++j)
            if (out[j] <= 0.0) grad[j] = 0.0;
        const std::vector<double>& in = (i == 0) ? cache.concat : cache.fc[i - 1];
        std::vector<double> din;
        linear_backward(params_.at("fc" + std::to_string(i) + ".W"), in, grad,
                        grads.at("fc" + std::to_string(i) + ".W"),
                        grads.at("fc" + std::to_string(i) + ".b"), din);
        grad = std::move(din);
    }

    // split the concat gradient back into the two branches
    size_t half = cache.conv_prev.back().size();
    std::vector<double> d_prev(grad.begin(), grad.begin() + half);
    std::vector<double> d_cur(grad.begin() + half, grad.end());
    encode_backward(cache.in_prev, cache.conv_prev, d_prev, "enc.", grads);
    encode_backward(cache.in_cur, cache.conv_cur, d_cur, cfg_.shared_encoder ? "enc." : "enc2.", grads);

    dh = std::move(dh_prev);
    dc = std::move(dc_prev);
}

// --- losses -------------------------------------------------------------------

double l1_masked_loss(const std::array<double, 4>& target, const std::array<double, 4>& mu,
                      double mask, std::array<double, 4>& dmu) {
    double loss = 0;
    for (int j = 0; j < 4; ++j) {
        double diff = target[j] - mu[j];
        loss += std::abs(diff) * mask;
        double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        dmu[j] = -sign * mask;
    }
    return loss;
}

double gaussian_logpdf(const std::array<double, 4>& a, const std::array<double, 4>& mu,
                       const std::array<double, 4>& sigma) {
    double lp = 0;
    for (int j = 0; j < 4; ++j) {
        double z = (a[j] - mu[j]) / sigma[j];
        lp += -0.5 * z * z - std::log(sigma[j]) - 0.5 * std::log(2.0 * M_PI);
    }
    return lp;
}

std::array<double, 4> gaussian_logpdf_dmu(const std::array<double, 4>& a,
                                          const std::array<double, 4>& mu,
                                          const std::array<double, 4>& sigma) {
    std::array<double, 4> d;
    for (int j = 0; j < 4; ++j) d[j] = (a[j] - mu[j]) / (sigma[j] * sigma[j]);
    return d;
}

// --- checkpoints ----------------------------------------------------------------

namespace {
std::string meta_text(const CheckpointMeta& m) {
    std::ostringstream os;
    os << "episode_k=" << format_double(m.episode_k) << "\n"
       << "episodes_seen=" << m.episodes_seen << "\n"
       << "curriculum_horizon=" << m.curriculum_horizon << "\n"
       << "rl_updates=" << m.rl_updates << "\n"
       << "imitation_updates=" << m.imitation_updates << "\n"
       << "train_seed=" << m.train_seed << "\n";
    return os.str();
}

void parse_blob(const std::string& blob, ModelConfig& cfg, CheckpointMeta& meta) {
    std::istringstream is(blob);
    std::string line;
    std::string model_lines;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("checkpoint: bad config line '" + line + "'");
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "episode_k") meta.episode_k = parse_double(val);
        else if (key == "episodes_seen") meta.episodes_seen = std::stoll(val);
        else if (key == "curriculum_horizon") meta.curriculum_horizon = std::stoi(val);
        else if (key == "rl_updates") meta.rl_updates = std::stoll(val);
        else if (key == "imitation_updates") meta.imitation_updates = std::stoll(val);
        else if (key == "train_seed") meta.train_seed = std::stoull(val);
        else model_lines += line + "\n";
    }
    cfg = ModelConfig::parse_text(model_lines);
}
}  // namespace

void save_checkpoint(const std::string& path, const PolicyValueNet& net, const CheckpointMeta& meta) {
    std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write checkpoint " + path);
    f.write(kCheckpointMagic, 4);
    write_u32(f, kCheckpointVersion);
    std::string blob = net.config().text() + meta_text(meta);
    write_u32(f, static_cast<uint32_t>(blob.size()));
    f.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    const ParamSet& p = net.params();
    write_u32(f, static_cast<uint32_t>(p.names.size()));
    for (size_t i = 0; i < p.names.size(); ++i) {
        const std::string& name = p.names[i];
        const Tensor& t = p.tensors[i];
        write_u16(f, static_cast<uint16_t>(name.size()));
        f.write(name.data(), static_cast<std::streamsize>(name.size()));
        f.put(static_cast<char>(t.shape.size()));
        for (int d : t.shape) write_u32(f, static_cast<uint32_t>(d));
        for (double x : t.v) write_f64(f, x);
    }
    if (!f) throw std::runtime_error("write failed for checkpoint " + path);
}

namespace {
CheckpointMeta load_records(std::istream& f, const std::string& path, PolicyValueNet& net,
                            const ModelConfig& cfg, const CheckpointMeta& meta) {
    uint32_t count = read_u32(f);
    ParamSet& p = net.params();
    if (count != p.names.size()) throw std::runtime_error("checkpoint: record count mismatch in " + path);
    for (uint32_t i = 0; i < count; ++i) {
        uint16_t name_len = read_u16(f);
        std::string name(name_len, '\0');
        f.read(name.data(), name_len);
        int rank = f.get();
        if (rank < 0) throw std::runtime_error("checkpoint: truncated record in " + path);
        std::vector<int> shape(rank);
        for (int d = 0; d < rank; ++d) shape[d] = static_cast<int>(read_u32(f));
        Tensor& t = p.at(name);
        if (t.shape != shape) throw std::runtime_error("checkpoint: shape mismatch for " + name + " in " + path);
        for (double& x : t.v) x = read_f64(f);
        if (!f) throw std::runtime_error("checkpoint: truncated values in " + path);
    }
    (void)cfg;
    return meta;
}
}  // namespace

CheckpointBundle load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    uint32_t version = read_u32(f);
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version in " + path);
    uint32_t blob_len = read_u32(f);
    std::string blob(blob_len, '\0');
    f.read(blob.data(), blob_len);
    if (!f) throw std::runtime_error("checkpoint: truncated config in " + path);
    ModelConfig cfg;
    CheckpointMeta meta;
    parse_blob(blob, cfg, meta);
    CheckpointBundle bundle{PolicyValueNet(cfg), meta};
    load_records(f, path, bundle.net, cfg, meta);
    return bundle;
}

CheckpointMeta load_checkpoint_into(const std::string& path, PolicyValueNet& net) {
    CheckpointBundle b = load_checkpoint(path);
    if (!(b.net.config() == net.config()))
        throw std::runtime_error("checkpoint: config mismatch loading " + path);
    net.params() = b.net.params();
    return b.meta;
}

std::string checkpoint_digest(const std::string& path) { return fnv1a_hex(read_text_file(path)); }

}  // namespace svt
