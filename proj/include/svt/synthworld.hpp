#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svt/geometry.hpp"

namespace svt {

// One video frame, row-major, channel-interleaved bytes.
struct Frame {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<uint8_t> pixels;

    uint8_t at(int x, int y, int c) const {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    uint8_t& at(int x, int y, int c) {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
    }

    bool operator==(const Frame& o) const {
        return width == o.width && height == o.height && channels == o.channels && pixels == o.pixels;
    }
};

enum class TargetShape { rectangle, ellipse };

// Knobs of the synthetic video generator. Sequences are a deterministic
// function of (seed, config); the generator uses splitmix64 streams only, so
// regenerating a dataset on another machine reproduces it byte for byte.
struct WorldConfig {
    int width = 160;
    int height = 160;
    int channels = 1;            // 1 or 3
    int min_frames = 20;         // drawn uniformly per sequence
    int max_frames = 80;
    TargetShape shape = TargetShape::rectangle;
    uint64_t texture_seed = 0;
    double max_speed = 0.15;     // fraction of the box side per frame
    double scale_std = 0.02;     // per-frame multiplicative scale walk
    int max_distractors = 3;     // count drawn uniformly in [0, max]
    double occluder_prob = 0.02; // per-frame chance of a block over the target
    double noise_amp = 8.0;      // background noise, gray levels
    double target_min_frac = 0.12;  // target size as a fraction of min(frame side)
    double target_max_frac = 0.28;
};

void validate(const WorldConfig& cfg);           // throws std::invalid_argument
std::string world_config_text(const WorldConfig& cfg);  // canonical key=value form
std::string world_config_digest(const WorldConfig& cfg);
WorldConfig parse_world_config(const std::string& text);  // unknown keys throw

struct SyntheticSequence {
    std::string id;
    std::vector<Frame> frames;
    std::vector<BBox> groundtruth;  // one box per frame, frame 0 first
    uint64_t seed = 0;
    std::string config_digest;

    int length() const { return static_cast<int>(frames.size()); }
    // T_j: index of the last frame == number of prediction steps
    int steps() const { return static_cast<int>(frames.size()) - 1; }

    bool operator==(const SyntheticSequence& o) const {
        return id == o.id && frames == o.frames && groundtruth == o.groundtruth &&
               seed == o.seed && config_digest == o.config_digest;
    }
};

SyntheticSequence generate_sequence(uint64_t seed, const WorldConfig& cfg);

// Directory layout per sequence: frames.bin + groundtruth.txt + meta.txt.
void save_sequence(const SyntheticSequence& seq, const std::string& dir);
SyntheticSequence load_sequence(const std::string& dir);

struct ManifestEntry {
    std::string id;
    int length = 0;
    int width = 0;
    int height = 0;
    int channels = 0;
};

struct DatasetManifest {
    uint64_t seed = 0;
    std::string config_digest;
    std::vector<ManifestEntry> entries;
};

// Writes `count` sequences under dir/<id>/ with seeds seed+i plus a
// manifest.txt indexing them.
DatasetManifest generate_dataset(int count, uint64_t seed, const WorldConfig& cfg,
                                 const std::string& dir);

DatasetManifest load_manifest(const std::string& dir);
std::vector<SyntheticSequence> load_dataset(const std::string& dir);

// FNV-1a of manifest.txt; identifies a dataset in reports and trajectories.
std::string dataset_digest(const std::string& dir);

}  // namespace svt
