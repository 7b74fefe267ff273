#include "svt/synthworld.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "svt/common.hpp"

namespace fs = std::filesystem;

namespace svt {

namespace {

constexpr char kFramesMagic[4] = {'S', 'V', 'T', 'F'};
constexpr uint32_t kFramesVersion = 1;

// Smooth random texture: an 8x8 value grid sampled bilinearly in
// object-local coordinates, so appearance translates and scales with the
// object.
struct Tile {
    static constexpr int N = 8;
    double v[N][N];

    static Tile random(Rng& rng) {
        Tile t;
        for (auto& row : t.v)
            for (double& x : row) x = rng.next_double();
        return t;
    }

    double sample(double u, double w) const {
        u = std::clamp(u, 0.0, 1.0) * (N - 1);
        w = std::clamp(w, 0.0, 1.0) * (N - 1);
        int i0 = std::min(static_cast<int>(u), N - 2);
        int j0 = std::min(static_cast<int>(w), N - 2);
        double fu = u - i0;
        double fw = w - j0;
        return (1 - fu) * (1 - fw) * v[j0][i0] + fu * (1 - fw) * v[j0][i0 + 1] +
               (1 - fu) * fw * v[j0 + 1][i0] + fu * fw * v[j0 + 1][i0 + 1];
    }
};

struct Mover {
    double cx, cy;      // center, sub-pixel
    double w, h;
    double vx = 0, vy = 0;
    double vmax_frac;   // of own size, per frame
    Tile tile;
    double lo, hi;      // intensity range
    double tint[3] = {1.0, 1.0, 1.0};
    bool ellipse = false;

    BBox box() const { return {cx - w / 2, cy - h / 2, w, h}; }
};

void keep_inside(Mover& m, int W, int H) {
    auto reflect = [](double& c, double& v, double lo, double hi) {
        if (lo >= hi) {
            c = (lo + hi) / 2;
            v = 0;
            return;
        }
        if (c < lo) { c = lo + (lo - c); v = -v; }
        if (c > hi) { c = hi - (c - hi); v = -v; }
        c = std::clamp(c, lo, hi);
    };
    reflect(m.cx, m.vx, m.w / 2, W - m.w / 2);
    reflect(m.cy, m.vy, m.h / 2, H - m.h / 2);
}

void advance(Mover& m, Rng& rng, const WorldConfig& cfg) {
    // velocity random walk, reflected at the frame border
    double ax = m.vmax_frac * m.w;
    double ay = m.vmax_frac * m.h;
    m.vx = std::clamp(m.vx + rng.uniform(-1, 1) * 0.5 * ax, -ax, ax);
    m.vy = std::clamp(m.vy + rng.uniform(-1, 1) * 0.5 * ay, -ay, ay);
    m.cx += m.vx;
    m.cy += m.vy;

    // clamped multiplicative scale walk; the 3-sigma clamp keeps consecutive
    // ground-truth boxes overlapping
    double sw = 1.0 + std::clamp(rng.normal(0.0, cfg.scale_std), -3 * cfg.scale_std, 3 * cfg.scale_std);
    double sh = 1.0 + std::clamp(rng.normal(0.0, cfg.scale_std), -3 * cfg.scale_std, 3 * cfg.scale_std);
    double min_side = 4.0;
    double max_w = 0.9 * cfg.width, max_h = 0.9 * cfg.height;
    m.w = std::clamp(m.w * sw, min_side, max_w);
    m.h = std::clamp(m.h * sh, min_side, max_h);
    keep_inside(m, cfg.width, cfg.height);
}

void paint(Frame& f, const Mover& m) {
    int x0 = std::max(0, static_cast<int>(std::floor(m.cx - m.w / 2)));
    int x1 = std::min(f.width - 1, static_cast<int>(std::ceil(m.cx + m.w / 2)));
    int y0 = std::max(0, static_cast<int>(std::floor(m.cy - m.h / 2)));
    int y1 = std::min(f.height - 1, static_cast<int>(std::ceil(m.cy + m.h / 2)));
    double bx = m.cx - m.w / 2, by = m.cy - m.h / 2;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            double u = (x + 0.5 - bx) / m.w;
            double v = (y + 0.5 - by) / m.h;
            if (u < 0 || u >= 1 || v < 0 || v >= 1) continue;
            if (m.ellipse) {
                double du = 2 * u - 1, dv = 2 * v - 1;
                if (du * du + dv * dv > 1.0) continue;
            }
            double val = m.lo + (m.hi - m.lo) * m.tile.sample(u, v);
            for (int c = 0; c < f.channels; ++c) {
                double ch = std::clamp(val * m.tint[c], 0.0, 255.0);
                f.at(x, y, c) = static_cast<uint8_t>(ch);
            }
        }
    }
}

Mover make_mover(Rng& rng, Rng& tex_rng, const WorldConfig& cfg, bool is_target) {
    Mover m;
    double side = std::min(cfg.width, cfg.height);
    m.w = std::max(8.0, rng.uniform(cfg.target_min_frac, cfg.target_max_frac) * side);
    m.h = std::max(8.0, rng.uniform(cfg.target_min_frac, cfg.target_max_frac) * side);
    m.cx = rng.uniform(m.w / 2, cfg.width - m.w / 2);
    m.cy = rng.uniform(m.h / 2, cfg.height - m.h / 2);
    m.vmax_frac = cfg.max_speed;
    m.vx = rng.uniform(-1, 1) * m.vmax_frac * m.w;
    m.vy = rng.uniform(-1, 1) * m.vmax_frac * m.h;
    m.tile = Tile::random(tex_rng);
    if (is_target) {
        m.lo = 120;
        m.hi = 255;
    } else {
        m.lo = 90;
        m.hi = 230;
    }
    if (cfg.channels == 3)
        for (double& t : m.tint) t = tex_rng.uniform(0.55, 1.0);
    m.ellipse = (cfg.shape == TargetShape::ellipse);
    return m;
}

}  // namespace

void validate(const WorldConfig& cfg) {
    if (cfg.width < 16 || cfg.height < 16) throw std::invalid_argument("world: frame too small");
    if (cfg.channels != 1 && cfg.channels != 3) throw std::invalid_argument("world: channels must be 1 or 3");
    if (cfg.min_frames < 2 || cfg.max_frames < cfg.min_frames)
        throw std::invalid_argument("world: bad frame count range");
    if (cfg.max_speed < 0 || cfg.max_speed >= 1) throw std::invalid_argument("world: max_speed in [0,1) required");
    if (cfg.scale_std < 0) throw std::invalid_argument("world: scale_std must be >= 0");
    if (cfg.max_distractors < 0) throw std::invalid_argument("world: max_distractors must be >= 0");
    if (cfg.occluder_prob < 0 || cfg.occluder_prob > 1)
        throw std::invalid_argument("world: occluder_prob in [0,1] required");
    if (cfg.noise_amp < 0) throw std::invalid_argument("world: noise_amp must be >= 0");
    if (cfg.target_min_frac <= 0 || cfg.target_max_frac < cfg.target_min_frac || cfg.target_max_frac > 0.8)
        throw std::invalid_argument("world: bad target size range");
}

std::string world_config_text(const WorldConfig& cfg) {
    std::ostringstream os;
    os << "width=" << cfg.width << "\n"
       << "height=" << cfg.height << "\n"
       << "channels=" << cfg.channels << "\n"
       << "min_frames=" << cfg.min_frames << "\n"
       << "max_frames=" << cfg.max_frames << "\n"
       << "shape=" << (cfg.shape == TargetShape::rectangle ? "rectangle" : "ellipse") << "\n"
       << "texture_seed=" << cfg.texture_seed << "\n"
       << "max_speed=" << format_double(cfg.max_speed) << "\n"
       << "scale_std=" << format_double(cfg.scale_std) << "\n"
       << "max_distractors=" << cfg.max_distractors << "\n"
       << "occluder_prob=" << format_double(cfg.occluder_prob) << "\n"
       << "noise_amp=" << format_double(cfg.noise_amp) << "\n"
       << "target_min_frac=" << format_double(cfg.target_min_frac) << "\n"
       << "target_max_frac=" << format_double(cfg.target_max_frac) << "\n";
    return os.str();
}

std::string world_config_digest(const WorldConfig& cfg) { return fnv1a_hex(world_config_text(cfg)); }

WorldConfig parse_world_config(const std::string& text) {
    WorldConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("world config: bad line '" + line + "'");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        if (key == "width") cfg.width = std::stoi(val);
        else if (key == "height") cfg.height = std::stoi(val);
        else if (key == "channels") cfg.channels = std::stoi(val);
        else if (key == "min_frames") cfg.min_frames = std::stoi(val);
        else if (key == "max_frames") cfg.max_frames = std::stoi(val);
        else if (key == "shape") {
            if (val == "rectangle") cfg.shape = TargetShape::rectangle;
            else if (val == "ellipse") cfg.shape = TargetShape::ellipse;
            else throw std::invalid_argument("world config: unknown shape '" + val + "'");
        }
        else if (key == "texture_seed") cfg.texture_seed = std::stoull(val);
        else if (key == "max_speed") cfg.max_speed = parse_double(val);
        else if (key == "scale_std") cfg.scale_std = parse_double(val);
        else if (key == "max_distractors") cfg.max_distractors = std::stoi(val);
        else if (key == "occluder_prob") cfg.occluder_prob = parse_double(val);
        else if (key == "noise_amp") cfg.noise_amp = parse_double(val);
        else if (key == "target_min_frac") cfg.target_min_frac = parse_double(val);
        else if (key == "target_max_frac") cfg.target_max_frac = parse_double(val);
        else throw std::invalid_argument("world config: unknown key '" + key + "'");
    }
    return cfg;
}

SyntheticSequence generate_sequence(uint64_t seed, const WorldConfig& cfg) {
    validate(cfg);
    Rng rng(mix_seed(seed, 1));                          // layout, motion, occluders
    Rng tex_rng(mix_seed(seed ^ cfg.texture_seed, 2));   // entity textures
    Rng noise_rng(mix_seed(seed, 3));                    // per-pixel background noise

    SyntheticSequence seq;
    seq.seed = seed;
    seq.config_digest = world_config_digest(cfg);

    int n_frames = rng.uniform_int(cfg.min_frames, cfg.max_frames);
    double bg = rng.uniform(20, 70);

    Mover target = make_mover(rng, tex_rng, cfg, true);
    int n_distractors = rng.uniform_int(0, cfg.max_distractors);
    std::vector<Mover> distractors;
    for (int i = 0; i < n_distractors; ++i) distractors.push_back(make_mover(rng, tex_rng, cfg, false));

    seq.frames.reserve(n_frames);
    seq.groundtruth.reserve(n_frames);
    for (int t = 0; t < n_frames; ++t) {
        if (t > 0) {
            for (auto& d : distractors) advance(d, rng, cfg);
            advance(target, rng, cfg);
        }

        bool occlude = rng.next_double() < cfg.occluder_prob;
        Mover occluder{};
        if (occlude) {
            occluder.w = target.w * rng.uniform(0.3, 0.6);
            occluder.h = target.h * rng.uniform(0.3, 0.6);
            occluder.cx = target.cx + rng.uniform(-0.5, 0.5) * target.w;
            occluder.cy = target.cy + rng.uniform(-0.5, 0.5) * target.h;
            double g = rng.uniform(0, 255);
            occluder.lo = occluder.hi = g;
            occluder.tile = target.tile;  // flat fill, tile unused at lo==hi
        }

        Frame f;
        f.width = cfg.width;
        f.height = cfg.height;
        f.channels = cfg.channels;
        f.pixels.resize(static_cast<size_t>(cfg.width) * cfg.height * cfg.channels);
        for (int y = 0; y < cfg.height; ++y)
            for (int x = 0; x < cfg.width; ++x) {
                for (int c = 0; c < cfg.channels; ++c) {
                    double v = bg + noise_rng.uniform(-cfg.noise_amp, cfg.noise_amp);
                    f.at(x, y, c) = static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
                }
            }
        for (const auto& d : distractors) paint(f, d);
        paint(f, target);
        if (occlude) paint(f, occluder);

        seq.frames.push_back(std::move(f));
        seq.groundtruth.push_back(target.box());
    }
    return seq;
}

void save_sequence(const SyntheticSequence& seq, const std::string& dir) {
    fs::create_directories(dir);
    {
        std::ofstream f(fs::path(dir) / "frames.bin", std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write frames.bin in " + dir);
        f.write(kFramesMagic, 4);
        write_u32(f, kFramesVersion);
        write_u32(f, static_cast<uint32_t>(seq.frames.size()));
        const Frame& f0 = seq.frames.at(0);
        write_u32(f, static_cast<uint32_t>(f0.height));
        write_u32(f, static_cast<uint32_t>(f0.width));
        write_u32(f, static_cast<uint32_t>(f0.channels));
        for (const auto& fr : seq.frames)
            f.write(reinterpret_cast<const char*>(fr.pixels.data()),
                    static_cast<std::streamsize>(fr.pixels.size()));
        if (!f) throw std::runtime_error("write failed for frames.bin in " + dir);
    }
    {
        std::ostringstream os;
        for (const auto& b : seq.groundtruth)
            os << format_double(b.x) << ',' << format_double(b.y) << ','
               << format_double(b.w) << ',' << format_double(b.h) << '\n';
        write_text_file((fs::path(dir) / "groundtruth.txt").string(), os.str());
    }
    {
        std::ostringstream os;
        os << "id=" << seq.id << "\nseed=" << seq.seed << "\nconfig_digest=" << seq.config_digest << "\n";
        write_text_file((fs::path(dir) / "meta.txt").string(), os.str());
    }
}

SyntheticSequence load_sequence(const std::string& dir) {
    SyntheticSequence seq;
    {
        std::ifstream f(fs::path(dir) / "frames.bin", std::ios::binary);
        if (!f) throw std::runtime_error("missing frames.bin in " + dir);
        char magic[4];
        f.read(magic, 4);
        if (!f || std::memcmp(magic, kFramesMagic, 4) != 0)
            throw std::runtime_error("frames.bin: bad magic in " + dir);
        uint32_t version = read_u32(f);
        if (version != kFramesVersion)
            throw std::runtime_error("frames.bin: unsupported version in " + dir);
        uint32_t count = read_u32(f);
        uint32_t height = read_u32(f);
        uint32_t width = read_u32(f);
        uint32_t channels = read_u32(f);
        if (count < 2 || width == 0 || height == 0 || (channels != 1 && channels != 3))
            throw std::runtime_error("frames.bin: corrupt header in " + dir);
        size_t frame_bytes = static_cast<size_t>(width) * height * channels;
        seq.frames.resize(count);
        for (auto& fr : seq.frames) {
            fr.width = static_cast<int>(width);
            fr.height = static_cast<int>(height);
            fr.channels = static_cast<int>(channels);
            fr.pixels.resize(frame_bytes);
            f.read(reinterpret_cast<char*>(fr.pixels.data()), static_cast<std::streamsize>(frame_bytes));
            if (!f) throw std::runtime_error("frames.bin: truncated pixel data in " + dir);
        }
    }
    {
        std::string text = read_text_file((fs::path(dir) / "groundtruth.txt").string());
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            auto parts = split(line, ',');
            if (parts.size() != 4) throw std::runtime_error("groundtruth.txt: bad line in " + dir);
            seq.groundtruth.push_back(
                {parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2]), parse_double(parts[3])});
        }
        if (seq.groundtruth.size() != seq.frames.size())
            throw std::runtime_error("groundtruth.txt: box count does not match frame count in " + dir);
    }
    {
        std::string text = read_text_file((fs::path(dir) / "meta.txt").string());
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line)) {
            if (line.rfind("id=", 0) == 0) seq.id = line.substr(3);
            else if (line.rfind("seed=", 0) == 0) seq.seed = std::stoull(line.substr(5));
            else if (line.rfind("config_digest=", 0) == 0) seq.config_digest = line.substr(14);
        }
    }
    return seq;
}

DatasetManifest generate_dataset(int count, uint64_t seed, const WorldConfig& cfg,
                                 const std::string& dir) {
    if (count < 1) throw std::invalid_argument("generate_dataset: count must be >= 1");
    validate(cfg);
    fs::create_directories(dir);

    DatasetManifest manifest;
    manifest.seed = seed;
    manifest.config_digest = world_config_digest(cfg);

    std::ostringstream os;
    os << "# seed=" << seed << " config_digest=" << manifest.config_digest << "\n";
    for (int i = 0; i < count; ++i) {
        SyntheticSequence seq = generate_sequence(seed + static_cast<uint64_t>(i), cfg);
        char name[32];
        snprintf(name, sizeof(name), "seq%04d", i);
        seq.id = name;
        save_sequence(seq, (fs::path(dir) / seq.id).string());
        manifest.entries.push_back({seq.id, seq.length(), cfg.width, cfg.height, cfg.channels});
        os << seq.id << ',' << seq.length() << ',' << cfg.width << ',' << cfg.height << ','
           << cfg.channels << '\n';
    }
    write_text_file((fs::path(dir) / "manifest.txt").string(), os.str());
    write_text_file((fs::path(dir) / "world_config.txt").string(), world_config_text(cfg));
    return manifest;
}

DatasetManifest load_manifest(const std::string& dir) {
    std::string text = read_text_file((fs::path(dir) / "manifest.txt").string());
    DatasetManifest m;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto spos = line.find("seed=");
            auto cpos = line.find("config_digest=");
            if (spos != std::string::npos) m.seed = std::stoull(line.substr(spos + 5));
            if (cpos != std::string::npos) {
                std::string rest = line.substr(cpos + 14);
                auto sp = rest.find(' ');
                m.config_digest = sp == std::string::npos ? rest : rest.substr(0, sp);
            }
            continue;
        }
        auto parts = split(line, ',');
        if (parts.size() != 5) throw std::runtime_error("manifest.txt: bad line '" + line + "'");
        m.entries.push_back({parts[0], std::stoi(parts[1]), std::stoi(parts[2]), std::stoi(parts[3]),
                             std::stoi(parts[4])});
    }
    if (m.entries.empty()) throw std::runtime_error("manifest.txt: no sequences listed");
    return m;
}

std::vector<SyntheticSequence> load_dataset(const std::string& dir) {
    DatasetManifest m = load_manifest(dir);
    std::vector<SyntheticSequence> out;
    out.reserve(m.entries.size());
    for (const auto& e : m.entries) {
        SyntheticSequence seq = load_sequence((fs::path(dir) / e.id).string());
        if (seq.length() != e.length)
            throw std::runtime_error("dataset: manifest length mismatch for " + e.id);
        out.push_back(std::move(seq));
    }
    return out;
}

std::string dataset_digest(const std::string& dir) {
    return fnv1a_hex(read_text_file((fs::path(dir) / "manifest.txt").string()));
}

}  // namespace svt
