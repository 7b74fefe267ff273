#include "svt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svt {

double iou(const BBox& a, const BBox& b) {
    if (!a.valid() || !b.valid()) throw std::invalid_argument("iou: box with non-positive size");
    if (a == b) return 1.0;
    double ix0 = std::max(a.x, b.x);
    double iy0 = std::max(a.y, b.y);
    double ix1 = std::min(a.x + a.w, b.x + b.w);
    double iy1 = std::min(a.y + a.h, b.y + b.h);
    double iw = ix1 - ix0;
    double ih = iy1 - iy0;
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    double inter = iw * ih;
    double uni = a.area() + b.area() - inter;
    // (x+w)-x can land one ulp past w; keep the ratio inside [0, 1]
    return std::clamp(inter / uni, 0.0, 1.0);
}

AppliedBox apply_action(const ActionDelta& a, const BBox& prev) {
    if (!prev.valid()) throw std::invalid_argument("apply_action: degenerate reference box");
    BBox out{prev.x + a.dx * prev.w, prev.y + a.dy * prev.h,
             prev.w * (1.0 + a.dw), prev.h * (1.0 + a.dh)};
    return {out, !out.valid()};
}

BoxDeltaResult box_delta(const BBox& cur, const BBox& prev) {
    if (!prev.valid()) throw std::invalid_argument("box_delta: degenerate reference box");
    auto clip = [](double v, bool& flag) {
        if (v > 1.0) { flag = true; return 1.0; }
        if (v < -1.0) { flag = true; return -1.0; }
        return v;
    };
    bool clipped = false;
    ActionDelta d;
    d.dx = clip((cur.x - prev.x) / prev.w, clipped);
    d.dy = clip((cur.y - prev.y) / prev.h, clipped);
    d.dw = clip((cur.w - prev.w) / prev.w, clipped);
    d.dh = clip((cur.h - prev.h) / prev.h, clipped);
    return {d, clipped};
}

double quantized_reward(double iou_value) {
    if (!(iou_value >= 0.0 && iou_value <= 1.0))
        throw std::invalid_argument("quantized_reward: IoU outside [0, 1]");
    if (iou_value < 0.5) return -1.0;
    // Floor on the exact 0.05 grid; the small bias keeps grid points (0.75,
    // 0.8, ...) from flooring one cell down due to binary representation.
    int cell = static_cast<int>(std::floor(iou_value * 20.0 + 1e-9));  // 10..20
    return static_cast<double>(cell - 10) / 10.0;
}

BBox dilate_box(const BBox& b, double k) {
    if (k <= 0.0) throw std::invalid_argument("dilate_box: k must be positive");
    if (!b.valid()) throw std::invalid_argument("dilate_box: degenerate box");
    double w = b.w * k;
    double h = b.h * k;
    return {b.cx() - w / 2.0, b.cy() - h / 2.0, w, h};
}

BBox clamp_box_size(const BBox& b, double min_size) {
    return {b.x, b.y, std::max(b.w, min_size), std::max(b.h, min_size)};
}

}  // namespace svt
