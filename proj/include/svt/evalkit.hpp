#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "svt/tracker.hpp"

namespace svt {

inline constexpr int kSuccessThresholds = 21;   // 0.00, 0.05, ..., 1.00
inline constexpr int kPrecisionThresholds = 51; // 0, 1, ..., 50 px
inline constexpr int kPrecisionScoreAt = 20;    // PS = precision curve at 20 px

// One-pass metrics for one trajectory (or an aggregate). Frame 0 is the
// initialization frame and never scored.
struct SequenceMetrics {
    double ao = 0.0;
    double sr50 = 0.0;
    double sr75 = 0.0;
    double ss = 0.0;
    double ps = 0.0;
    std::array<double, kSuccessThresholds> success_curve{};
    std::array<double, kPrecisionThresholds> precision_curve{};
    int frames = 0;  // scored frames (t >= 1)
};

double ao(const std::vector<BBox>& trajectory, const std::vector<BBox>& groundtruth);
// fraction of frames with IoU strictly above the threshold
double sr(const std::vector<BBox>& trajectory, const std::vector<BBox>& groundtruth, double threshold);
std::array<double, kSuccessThresholds> success_curve(const std::vector<BBox>& trajectory,
                                                     const std::vector<BBox>& groundtruth);
double ss(const std::vector<BBox>& trajectory, const std::vector<BBox>& groundtruth);
// center location error, counted at integer pixel thresholds 0..50 (<= d)
std::array<double, kPrecisionThresholds> precision_curve(const std::vector<BBox>& trajectory,
                                                         const std::vector<BBox>& groundtruth);
double ps(const std::vector<BBox>& trajectory, const std::vector<BBox>& groundtruth);

SequenceMetrics evaluate_sequence(const std::vector<BBox>& trajectory,
                                  const std::vector<BBox>& groundtruth);

struct EvalReport {
    std::string dataset_digest;
    std::string checkpoint_digest;
    std::string mode;
    SequenceMetrics aggregate;  // unweighted mean over sequences
    std::vector<std::pair<std::string, SequenceMetrics>> per_sequence;
};

struct OpeOptions {
    std::string mode = "a3ct";  // a3ct | a3ctd | static | expert
    std::string checkpoint_path;
    ExpertParams expert;  // a3ctd and expert modes
};

// Initializes every sequence from g_0, runs once to the end without resets,
// averages per-sequence metrics.
EvalReport ope_run(const OpeOptions& opts, const std::string& dataset_dir);

// Same run but also returning the trajectories (so eval + track share one
// pass).
EvalReport ope_run(const OpeOptions& opts, const std::string& dataset_dir,
                   std::vector<TrajectoryRecord>* trajectories_out);

// Scores pre-computed trajectory files (<id>.txt per sequence) against a
// dataset. `digest_mismatch` is set when trajectories carry a different
// dataset digest than the one on disk.
EvalReport evaluate_trajectory_dir(const std::string& trajectory_dir, const std::string& dataset_dir,
                                   bool* digest_mismatch = nullptr);

void save_report(const EvalReport& report, const std::string& path);
EvalReport load_report(const std::string& path);

// Success and precision curves as standalone SVG files (success.svg,
// precision.svg under dir), one polyline per report. Byte-deterministic.
void emit_plots(const std::vector<EvalReport>& reports, const std::vector<std::string>& labels,
                const std::string& dir);

}  // namespace svt
