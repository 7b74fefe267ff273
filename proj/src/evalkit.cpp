#include "svt/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "svt/common.hpp"

namespace fs = std::filesystem;

namespace svt {

namespace {

std::vector<double> overlaps(const std::vector<BBox>& trajectory, const std::vector<BBox>& gt) {
    if (trajectory.size() != gt.size())
        throw std::invalid_argument("metrics: trajectory and ground truth lengths differ");
    if (trajectory.size() < 2) throw std::invalid_argument("metrics: need at least 2 frames");
    std::vector<double> out;
    out.reserve(trajectory.size() - 1);
    for (size_t t = 1; t < trajectory.size(); ++t) out.push_back(iou(trajectory[t], gt[t]));
    return out;
}

std::vector<double> center_errors(const std::vector<BBox>& trajectory, const std::vector<BBox>& gt) {
    if (trajectory.size() != gt.size())
        throw std::invalid_argument("metrics: trajectory and ground truth lengths differ");
    if (trajectory.size() < 2) throw std::invalid_argument("metrics: need at least 2 frames");
    std::vector<double> out;
    out.reserve(trajectory.size() - 1);
    for (size_t t = 1; t < trajectory.size(); ++t) {
        double dx = trajectory[t].cx() - gt[t].cx();
        double dy = trajectory[t].cy() - gt[t].cy();
        out.push_back(std::sqrt(dx * dx + dy * dy));
    }
    return out;
}

}  // namespace

double ao(const std::vector<BBox>& trajectory, const std::vector<BBox>& groundtruth) {
    auto ious = overlaps(trajectory, groundtruth);
    double sum = 0;
    for (double v : ious) sum += v;
    return sum / static_cast<double>(ious.size());
}

double sr(const std::vector<BBox>& trajectory, const std::vector<BBox>& groundtruth, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("sr: threshold must be in (0,1)");
    auto ious = overlaps(trajectory, groundtruth);
    int hits = 0;
    for (double v : ious)
        if (v > threshold) ++hits;
    return static_cast<double>(hits) / static_cast<double>(ious.size());
}

std::array<double, kSuccessThresholds> success_curve(const std::vector<BBox>& trajectory,
                                                     const std::vector<BBox>& groundtruth) {
    auto ious = overlaps(trajectory, groundtruth);
    std::array<double, kSuccessThresholds> curve{};
    for (int i = 0; i < kSuccessThresholds; ++i) {
        double thr = static_cast<double>(i) * 0.05;
        int hits = 0;
        for (double v : ious)
            if (v > thr) ++hits;
        curve[i] = static_cast<double>(hits) / static_cast<double>(ious.size());
    }
    return curve;
}

double ss(const std::vector<BBox>& trajectory, const std::vector<BBox>& groundtruth) {
    auto curve = success_curve(trajectory, groundtruth);
    double sum = 0;
    for (double v : curve) sum += v;
    return sum / static_cast<double>(kSuccessThresholds);
}

std::array<double, kPrecisionThresholds> precision_curve(const std::vector<BBox>& trajectory,
                                                         const std::vector<BBox>& groundtruth) {
    auto errors = center_errors(trajectory, groundtruth);
    std::array<double, kPrecisionThresholds> curve{};
    for (int d = 0; d < kPrecisionThresholds; ++d) {
        int hits = 0;
        for (double e : errors)
            if (e <= static_cast<double>(d)) ++hits;
        curve[d] = static_cast<double>(hits) / static_cast<double>(errors.size());
    }
    return curve;
}

double ps(const std::vector<BBox>& trajectory, const std::vector<BBox>& groundtruth) {
    return precision_curve(trajectory, groundtruth)[kPrecisionScoreAt];
}

SequenceMetrics evaluate_sequence(const std::vector<BBox>& trajectory,
                                  const std::vector<BBox>& groundtruth) {
    SequenceMetrics m;
    m.ao = ao(trajectory, groundtruth);
    m.sr50 = sr(trajectory, groundtruth, 0.5);
    m.sr75 = sr(trajectory, groundtruth, 0.75);
    m.success_curve = success_curve(trajectory, groundtruth);
    m.precision_curve = precision_curve(trajectory, groundtruth);
    double sum = 0;
    for (double v : m.success_curve) sum += v;
    m.ss = sum / static_cast<double>(kSuccessThresholds);
    m.ps = m.precision_curve[kPrecisionScoreAt];
    m.frames = static_cast<int>(trajectory.size()) - 1;
    return m;
}

namespace {

SequenceMetrics aggregate_metrics(const std::vector<std::pair<std::string, SequenceMetrics>>& per) {
    SequenceMetrics agg;
    if (per.empty()) throw std::invalid_argument("aggregate: no sequences");
    for (const auto& [id, m] : per) {
        agg.ao += m.ao;
        agg.sr50 += m.sr50;
        agg.sr75 += m.sr75;
        agg.ss += m.ss;
        agg.ps += m.ps;
        for (int i = 0; i < kSuccessThresholds; ++i) agg.success_curve[i] += m.success_curve[i];
        for (int i = 0; i < kPrecisionThresholds; ++i) agg.precision_curve[i] += m.precision_curve[i];
        agg.frames += m.frames;
    }
    double n = static_cast<double>(per.size());
    agg.ao /= n;
    agg.sr50 /= n;
    agg.sr75 /= n;
    agg.ss /= n;
    agg.ps /= n;
    for (auto& v : agg.success_curve) v /= n;
    for (auto& v : agg.precision_curve) v /= n;
    return agg;
}

}  // namespace

EvalReport ope_run(const OpeOptions& opts, const std::string& dataset_dir) {
    return ope_run(opts, dataset_dir, nullptr);
}

EvalReport ope_run(const OpeOptions& opts, const std::string& dataset_dir,
                   std::vector<TrajectoryRecord>* trajectories_out) {
    EvalReport report;
    report.mode = opts.mode;
    report.dataset_digest = dataset_digest(dataset_dir);

    std::unique_ptr<CheckpointBundle> bundle;
    EpisodeConfig ecfg;
    if (opts.mode == "a3ct" || opts.mode == "a3ctd") {
        bundle = std::make_unique<CheckpointBundle>(load_checkpoint(opts.checkpoint_path));
        report.checkpoint_digest = checkpoint_digest(opts.checkpoint_path);
        ecfg = episode_config_of(bundle->net, bundle->meta);
    } else if (opts.mode != "static" && opts.mode != "expert") {
        throw std::invalid_argument("ope_run: unknown mode '" + opts.mode + "'");
    }

    std::vector<SyntheticSequence> sequences = load_dataset(dataset_dir);
    for (const auto& seq : sequences) {
        BBox init = seq.groundtruth.at(0);
        TrajectoryRecord rec;
        if (opts.mode == "a3ct") rec = track_a3ct(bundle->net, ecfg, seq, init);
        else if (opts.mode == "a3ctd") rec = track_a3ctd(bundle->net, bundle->meta, ecfg, opts.expert, seq, init);
        else if (opts.mode == "static") rec = track_static(seq, init);
        else rec = track_expert(opts.expert, seq);
        rec.checkpoint_digest = report.checkpoint_digest;
        rec.dataset_digest = report.dataset_digest;
        report.per_sequence.emplace_back(seq.id, evaluate_sequence(rec.boxes, seq.groundtruth));
        if (trajectories_out) trajectories_out->push_back(std::move(rec));
    }
    report.aggregate = aggregate_metrics(report.per_sequence);
    return report;
}

EvalReport evaluate_trajectory_dir(const std::string& trajectory_dir, const std::string& dataset_dir,
                                   bool* digest_mismatch) {
    EvalReport report;
    report.dataset_digest = dataset_digest(dataset_dir);
    if (digest_mismatch) *digest_mismatch = false;

    DatasetManifest manifest = load_manifest(dataset_dir);
    for (const auto& entry : manifest.entries) {
        fs::path traj_path = fs::path(trajectory_dir) / (entry.id + ".txt");
        if (!fs::exists(traj_path)) continue;
        TrajectoryRecord rec = load_trajectory(traj_path.string());
        if (report.mode.empty()) report.mode = rec.mode;
        if (report.checkpoint_digest.empty()) report.checkpoint_digest = rec.checkpoint_digest;
        if (!rec.dataset_digest.empty() && rec.dataset_digest != report.dataset_digest &&
            digest_mismatch)
            *digest_mismatch = true;
        SyntheticSequence seq = load_sequence((fs::path(dataset_dir) / entry.id).string());
        report.per_sequence.emplace_back(entry.id, evaluate_sequence(rec.boxes, seq.groundtruth));
    }
    if (report.per_sequence.empty())
        throw std::runtime_error("eval: no trajectories matched the dataset in " + trajectory_dir);
    report.aggregate = aggregate_metrics(report.per_sequence);
    return report;
}

namespace {

template <size_t N>
std::string curve_text(const std::array<double, N>& curve) {
    std::ostringstream os;
    for (size_t i = 0; i < N; ++i) os << (i ? ";" : "") << format_double(curve[i]);
    return os.str();
}

template <size_t N>
std::array<double, N> parse_curve(const std::string& text) {
    auto parts = split(text, ';');
    if (parts.size() != N) throw std::runtime_error("report: bad curve length");
    std::array<double, N> out{};
    for (size_t i = 0; i < N; ++i) out[i] = parse_double(parts[i]);
    return out;
}

}  // namespace

void save_report(const EvalReport& report, const std::string& path) {
    std::ostringstream os;
    os << "# svt eval report v1\n"
       << "# dataset=" << report.dataset_digest << "\n"
       << "# checkpoint=" << report.checkpoint_digest << "\n"
       << "# mode=" << report.mode << "\n"
       << "ao=" << format_double(report.aggregate.ao) << "\n"
       << "sr50=" << format_double(report.aggregate.sr50) << "\n"
       << "sr75=" << format_double(report.aggregate.sr75) << "\n"
       << "ss=" << format_double(report.aggregate.ss) << "\n"
       << "ps=" << format_double(report.aggregate.ps) << "\n"
       << "frames=" << report.aggregate.frames << "\n"
       << "sequences=" << report.per_sequence.size() << "\n"
       << "curve.success=" << curve_text(report.aggregate.success_curve) << "\n"
       << "curve.precision=" << curve_text(report.aggregate.precision_curve) << "\n";
    for (const auto& [id, m] : report.per_sequence) {
        os << "seq." << id << ".ao=" << format_double(m.ao) << "\n"
           << "seq." << id << ".sr50=" << format_double(m.sr50) << "\n"
           << "seq." << id << ".sr75=" << format_double(m.sr75) << "\n"
           << "seq." << id << ".ss=" << format_double(m.ss) << "\n"
           << "seq." << id << ".ps=" << format_double(m.ps) << "\n"
           << "seq." << id << ".frames=" << m.frames << "\n";
    }
    write_text_file(path, os.str());
}

EvalReport load_report(const std::string& path) {
    EvalReport report;
    std::istringstream is(read_text_file(path));
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# dataset=", 0) == 0) report.dataset_digest = line.substr(10);
            else if (line.rfind("# checkpoint=", 0) == 0) report.checkpoint_digest = line.substr(13);
            else if (line.rfind("# mode=", 0) == 0) report.mode = line.substr(7);
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("report: bad line in " + path);
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "ao") report.aggregate.ao = parse_double(val);
        else if (key == "sr50") report.aggregate.sr50 = parse_double(val);
        else if (key == "sr75") report.aggregate.sr75 = parse_double(val);
        else if (key == "ss") report.aggregate.ss = parse_double(val);
        else if (key == "ps") report.aggregate.ps = parse_double(val);
        else if (key == "frames") report.aggregate.frames = std::stoi(val);
        else if (key == "sequences") { /* implied by the seq.* lines */ }
        else if (key == "curve.success")
            report.aggregate.success_curve = parse_curve<kSuccessThresholds>(val);
        else if (key == "curve.precision")
            report.aggregate.precision_curve = parse_curve<kPrecisionThresholds>(val);
        else if (key.rfind("seq.", 0) == 0) {
            auto dot = key.rfind('.');
            std::string id = key.substr(4, dot - 4);
            std::string field = key.substr(dot + 1);
            if (report.per_sequence.empty() || report.per_sequence.back().first != id)
                report.per_sequence.emplace_back(id, SequenceMetrics{});
            SequenceMetrics& m = report.per_sequence.back().second;
            if (field == "ao") m.ao = parse_double(val);
            else if (field == "sr50") m.sr50 = parse_double(val);
            else if (field == "sr75") m.sr75 = parse_double(val);
            else if (field == "ss") m.ss = parse_double(val);
            else if (field == "ps") m.ps = parse_double(val);
            else if (field == "frames") m.frames = std::stoi(val);
            else throw std::runtime_error("report: unknown per-sequence field '" + field + "'");
        } else throw std::runtime_error("report: unknown key '" + key + "' in " + path);
    }
    return report;
}

// --- SVG ----------------------------------------------------------------------

namespace {

constexpr int kPlotW = 640;
constexpr int kPlotH = 480;
constexpr int kMarginL = 60;
constexpr int kMarginR = 20;
constexpr int kMarginT = 36;
constexpr int kMarginB = 48;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string svg_num(double v) {
    char buf[32];
    snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
}

template <size_t N>
void write_curve_svg(std::ostringstream& os, const std::string& title, const std::string& x_label,
                     double x_max, const std::vector<std::array<double, N>>& curves,
                     const std::vector<std::string>& labels) {
    const double plot_w = kPlotW - kMarginL - kMarginR;
    const double plot_h = kPlotH - kMarginT - kMarginB;
    auto px = [&](double x) { return kMarginL + x / x_max * plot_w; };
    auto py = [&](double y) { return kMarginT + (1.0 - y) * plot_h; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kPlotW << "\" height=\"" << kPlotH
       << "\" viewBox=\"0 0 " << kPlotW << " " << kPlotH << "\">\n";
    os << "<rect width=\"" << kPlotW << "\" height=\"" << kPlotH << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << kPlotW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"15\">" << title << "</text>\n";
    // axes
    os << "<line x1=\"" << kMarginL << "\" y1=\"" << py(0.0) << "\" x2=\"" << px(x_max) << "\" y2=\""
       << py(0.0) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kMarginL << "\" y1=\"" << py(0.0) << "\" x2=\"" << kMarginL << "\" y2=\""
       << py(1.0) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 10; ++i) {
        double fy = i / 10.0;
        os << "<line x1=\"" << kMarginL - 4 << "\" y1=\"" << py(fy) << "\" x2=\"" << kMarginL
           << "\" y2=\"" << py(fy) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << kMarginL - 8 << "\" y=\"" << py(fy) + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << svg_num(fy)
           << "</text>\n";
        double fx = x_max * i / 10.0;
        os << "<line x1=\"" << px(fx) << "\" y1=\"" << py(0.0) << "\" x2=\"" << px(fx) << "\" y2=\""
           << py(0.0) + 4 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << px(fx) << "\" y=\"" << py(0.0) + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << svg_num(fx)
           << "</text>\n";
    }
    os << "<text x=\"" << kMarginL + plot_w / 2 << "\" y=\"" << kPlotH - 10
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
       << "</text>\n";
    for (size_t c = 0; c < curves.size(); ++c) {
        os << "<polyline fill=\"none\" stroke=\"" << kPalette[c % 6] << "\" stroke-width=\"2\" points=\"";
        for (size_t i = 0; i < N; ++i) {
            double x = x_max * static_cast<double>(i) / static_cast<double>(N - 1);
            os << (i ? " " : "") << svg_num(px(x)) << ',' << svg_num(py(curves[c][i]));
        }
        os << "\"/>\n";
        os << "<text x=\"" << px(x_max) - 8 << "\" y=\"" << kMarginT + 16 + 16 * static_cast<int>(c)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
           << kPalette[c % 6] << "\">" << labels[c] << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace

void emit_plots(const std::vector<EvalReport>& reports, const std::vector<std::string>& labels,
                const std::string& dir) {
    if (reports.empty()) throw std::invalid_argument("emit_plots: no reports");
    if (labels.size() != reports.size()) throw std::invalid_argument("emit_plots: label count mismatch");
    fs::create_directories(dir);

    std::vector<std::array<double, kSuccessThresholds>> succ;
    std::vector<std::array<double, kPrecisionThresholds>> prec;
    std::vector<std::string> succ_labels, prec_labels;
    for (size_t i = 0; i < reports.size(); ++i) {
        succ.push_back(reports[i].aggregate.success_curve);
        prec.push_back(reports[i].aggregate.precision_curve);
        succ_labels.push_back(labels[i] + " [SS=" + svg_num(reports[i].aggregate.ss) + "]");
        prec_labels.push_back(labels[i] + " [PS=" + svg_num(reports[i].aggregate.ps) + "]");
    }
    {
        std::ostringstream os;
        write_curve_svg(os, "Success plot (one-pass evaluation)", "overlap threshold", 1.0, succ,
                        succ_labels);
        write_text_file((fs::path(dir) / "success.svg").string(), os.str());
    }
    {
        std::ostringstream os;
        write_curve_svg(os, "Precision plot (one-pass evaluation)", "center error threshold [px]",
                        50.0, prec, prec_labels);
        write_text_file((fs::path(dir) / "precision.svg").string(), os.str());
    }
}

}  // namespace svt
