#include "svt/expert.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "svt/common.hpp"

namespace svt {

std::string ExpertParams::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::oracle_noise:
            os << "oracle_noise eta=" << format_double(eta) << " drift_prob=" << format_double(drift_prob);
            break;
        case Kind::ncc: {
            os << "ncc search_dilation=" << format_double(search_dilation) << " scales=";
            for (size_t i = 0; i < scales.size(); ++i) os << (i ? ";" : "") << format_double(scales[i]);
            os << " template_update=" << format_double(template_update)
               << " template_size=" << template_size;
            break;
        }
        case Kind::none:
            os << "none";
            break;
    }
    return os.str();
}

ExpertParams ExpertParams::parse(const std::string& text) {
    ExpertParams p;
    std::istringstream is(text);
    std::string tok;
    if (!(is >> tok)) throw std::invalid_argument("expert: empty description");
    if (tok == "oracle_noise") p.kind = Kind::oracle_noise;
    else if (tok == "ncc") p.kind = Kind::ncc;
    else if (tok == "none") p.kind = Kind::none;
    else throw std::invalid_argument("expert: unknown kind '" + tok + "'");
    while (is >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("expert: bad token '" + tok + "'");
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "eta") p.eta = parse_double(val);
        else if (key == "drift_prob") p.drift_prob = parse_double(val);
        else if (key == "search_dilation") p.search_dilation = parse_double(val);
        else if (key == "template_update") p.template_update = parse_double(val);
        else if (key == "template_size") p.template_size = std::stoi(val);
        else if (key == "scales") {
            p.scales.clear();
            for (const auto& s : split(val, ';')) p.scales.push_back(parse_double(s));
        } else throw std::invalid_argument("expert: unknown key '" + key + "'");
    }
    if (p.kind == Kind::ncc && p.scales.empty()) throw std::invalid_argument("expert: empty scale set");
    return p;
}

namespace {

class OracleNoiseExpert : public LiveExpert {
public:
    OracleNoiseExpert(const ExpertParams& p, const SyntheticSequence& seq)
        : params_(p), seq_(&seq), rng_(mix_seed(p.seed, fnv1a(seq.id))) {
        box_ = seq.groundtruth.at(0);
    }

    BBox advance() override {
        ++t_;
        const BBox& g = seq_->groundtruth.at(t_);
        // Raw draws are consumed in a fixed order regardless of eta, so the
        // same seed probes a noise-amplitude sweep with common random
        // numbers (positivity is then monotone in eta).
        if (rng_.next_double() < params_.drift_prob) {
            drift_x_ += rng_.uniform(-1, 1) * params_.eta * g.w;
            drift_y_ += rng_.uniform(-1, 1) * params_.eta * g.h;
        }
        double jx = rng_.uniform(-1, 1) * params_.eta * g.w;
        double jy = rng_.uniform(-1, 1) * params_.eta * g.h;
        double jw = rng_.uniform(-1, 1) * params_.eta * 0.5;
        double jh = rng_.uniform(-1, 1) * params_.eta * 0.5;
        box_ = clamp_box_size({g.x + drift_x_ + jx, g.y + drift_y_ + jy,
                               g.w * (1.0 + jw), g.h * (1.0 + jh)});
        return box_;
    }

    const BBox& current_box() const override { return box_; }

private:
    ExpertParams params_;
    const SyntheticSequence* seq_;
    Rng rng_;
    int t_ = 0;
    double drift_x_ = 0, drift_y_ = 0;
    BBox box_;
};

class NccExpert : public LiveExpert {
public:
    NccExpert(const ExpertParams& p, const SyntheticSequence& seq) : params_(p), seq_(&seq) {
        box_ = seq.groundtruth.at(0);
        tw_ = th_ = p.template_size;
        templ_ = sample_patch_raw(seq.frames.at(0), box_, tw_, th_);
        search_.search_dilation = p.search_dilation;
        search_.scales = p.scales;
    }

    BBox advance() override {
        ++t_;
        box_ = ncc_step(seq_->frames.at(t_), templ_, tw_, th_, box_, search_);
        if (params_.template_update > 0.0) {
            std::vector<double> fresh = sample_patch_raw(seq_->frames.at(t_), box_, tw_, th_);
            double r = params_.template_update;
            for (size_t i = 0; i < templ_.size(); ++i) templ_[i] = (1 - r) * templ_[i] + r * fresh[i];
        }
        return box_;
    }

    const BBox& current_box() const override { return box_; }

private:
    ExpertParams params_;
    const SyntheticSequence* seq_;
    NccSearchConfig search_;
    std::vector<double> templ_;
    int tw_ = 0, th_ = 0;
    int t_ = 0;
    BBox box_;
};

struct Stats {
    double mean = 0, var = 0;
};

Stats stats_of(const std::vector<double>& v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    return {mean, var};
}

}  // namespace

BBox ncc_step(const Frame& cur, const std::vector<double>& templ, int tw, int th, const BBox& prev,
              const NccSearchConfig& cfg) {
    if (!prev.valid()) throw std::invalid_argument("ncc_step: degenerate previous box");
    BBox search = dilate_box(prev, cfg.search_dilation);
    // search window fully outside the frame: nothing to match against
    if (search.x + search.w <= 0 || search.y + search.h <= 0 || search.x >= cur.width ||
        search.y >= cur.height)
        return prev;

    Stats ts = stats_of(templ);
    if (ts.var <= 1e-12) return prev;

    const double n = static_cast<double>(templ.size());
    double best_score = -std::numeric_limits<double>::infinity();
    double best_disp2 = std::numeric_limits<double>::infinity();
    double best_dscale = std::numeric_limits<double>::infinity();
    BBox best = prev;
    bool found = false;
    constexpr double kTieEps = 1e-9;

    std::vector<double> patch;
    for (double s : cfg.scales) {
        double cw = prev.w * s;
        double ch = prev.h * s;
        if (cw <= 0 || ch <= 0) continue;
        int rx = std::max(0, static_cast<int>(std::floor((search.w - cw) / 2.0)));
        int ry = std::max(0, static_cast<int>(std::floor((search.h - ch) / 2.0)));
        double dscale = std::abs(s - 1.0);
        for (int dy = -ry; dy <= ry; ++dy) {
            for (int dx = -rx; dx <= rx; ++dx) {
                BBox cand{prev.cx() + dx - cw / 2.0, prev.cy() + dy - ch / 2.0, cw, ch};
                patch = sample_patch_raw(cur, cand, tw, th);
                Stats ps = stats_of(patch);
                if (ps.var <= 1e-12) continue;
                double corr = 0;
                for (size_t i = 0; i < patch.size(); ++i) corr += templ[i] * patch[i];
                corr -= n * ts.mean * ps.mean;
                double score = corr / std::sqrt(ts.var * ps.var);
                double disp2 = static_cast<double>(dx) * dx + static_cast<double>(dy) * dy;
                bool better = false;
                if (score > best_score + kTieEps) better = true;
                else if (score > best_score - kTieEps) {
                    if (disp2 < best_disp2) better = true;
                    else if (disp2 == best_disp2 && dscale < best_dscale) better = true;
                }
                if (better) {
                    best_score = score;
                    best_disp2 = disp2;
                    best_dscale = dscale;
                    best = cand;
                    found = true;
                }
            }
        }
    }
    return found ? best : prev;
}

std::unique_ptr<LiveExpert> make_expert(const ExpertParams& params, const SyntheticSequence& seq) {
    if (seq.length() < 2) throw std::invalid_argument("make_expert: sequence needs at least 2 frames");
    switch (params.kind) {
        case ExpertParams::Kind::oracle_noise:
            return std::make_unique<OracleNoiseExpert>(params, seq);
        case ExpertParams::Kind::ncc:
            return std::make_unique<NccExpert>(params, seq);
        case ExpertParams::Kind::none:
            throw std::invalid_argument("make_expert: 'none' has no trajectory");
    }
    throw std::invalid_argument("make_expert: bad kind");
}

Demonstration run_expert(const ExpertParams& params, const SyntheticSequence& seq) {
    auto expert = make_expert(params, seq);
    Demonstration d;
    d.sequence_id = seq.id;
    d.expert_desc = params.describe();
    d.seed = params.seed;
    d.boxes.push_back(expert->current_box());
    d.ious.push_back(iou(d.boxes[0], seq.groundtruth[0]));
    d.positive = true;
    for (int t = 1; t < seq.length(); ++t) {
        BBox b = expert->advance();
        auto delta = box_delta(b, d.boxes.back());
        double overlap = iou(b, seq.groundtruth[t]);
        d.boxes.push_back(b);
        d.actions.push_back(delta.delta);
        d.action_clipped.push_back(delta.clipped ? 1 : 0);
        d.ious.push_back(overlap);
        d.rewards.push_back(quantized_reward(overlap));
        if (!(overlap > 0.5)) d.positive = false;
    }
    return d;
}

std::vector<Demonstration> filter_positive(const std::vector<Demonstration>& demos) {
    std::vector<Demonstration> out;
    for (const auto& d : demos) {
        bool pos = true;
        for (size_t t = 1; t < d.ious.size(); ++t)
            if (!(d.ious[t] > 0.5)) { pos = false; break; }
        if (pos) out.push_back(d);
    }
    return out;
}

void save_demo(const Demonstration& demo, const std::string& path) {
    std::ostringstream os;
    os << "# expert=" << demo.expert_desc << "\n"
       << "# seed=" << demo.seed << "\n"
       << "# positive=" << (demo.positive ? 1 : 0) << "\n"
       << "# sequence=" << demo.sequence_id << "\n";
    for (size_t t = 0; t < demo.boxes.size(); ++t) {
        const BBox& b = demo.boxes[t];
        os << format_double(b.x) << ',' << format_double(b.y) << ',' << format_double(b.w) << ','
           << format_double(b.h) << ',';
        if (t > 0) os << format_double(demo.ious[t]);
        os << '\n';
    }
    write_text_file(path, os.str());
}

Demonstration load_demo(const std::string& path) {
    std::string text = read_text_file(path);
    Demonstration d;
    bool header_positive = false;
    bool saw_header = false;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            saw_header = true;
            if (line.rfind("# expert=", 0) == 0) d.expert_desc = line.substr(9);
            else if (line.rfind("# seed=", 0) == 0) d.seed = std::stoull(line.substr(7));
            else if (line.rfind("# positive=", 0) == 0) header_positive = line.substr(11) == "1";
            else if (line.rfind("# sequence=", 0) == 0) d.sequence_id = line.substr(11);
            continue;
        }
        auto parts = split(line, ',');
        if (parts.size() != 5) throw std::runtime_error("demo file: bad line in " + path);
        BBox b{parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2]),
               parse_double(parts[3])};
        if (d.boxes.empty()) {
            if (!parts[4].empty()) throw std::runtime_error("demo file: IoU on the init line in " + path);
            d.boxes.push_back(b);
            d.ious.push_back(1.0);  // b(d)_0 = g_0 by construction
        } else {
            if (parts[4].empty()) throw std::runtime_error("demo file: missing IoU in " + path);
            double overlap = parse_double(parts[4]);
            auto delta = box_delta(b, d.boxes.back());
            d.boxes.push_back(b);
            d.ious.push_back(overlap);
            d.actions.push_back(delta.delta);
            d.action_clipped.push_back(delta.clipped ? 1 : 0);
            d.rewards.push_back(quantized_reward(overlap));
        }
    }
    if (!saw_header || d.boxes.empty()) throw std::runtime_error("demo file: corrupt header in " + path);
    d.positive = true;
    for (size_t t = 1; t < d.ious.size(); ++t)
        if (!(d.ious[t] > 0.5)) { d.positive = false; break; }
    if (d.positive != header_positive)
        throw std::runtime_error("demo file: positive flag disagrees with stored IoU in " + path);
    return d;
}

}  // namespace svt
