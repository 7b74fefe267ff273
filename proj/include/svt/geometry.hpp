#pragma once

#include <array>

namespace svt {

// Axis-aligned box, pixel units, (x, y) = top-left corner. Coordinates may
// leave the frame; width and height must stay positive wherever the box is
// used as a crop reference or metric argument.
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    double area() const { return w * h; }
    bool valid() const { return w > 0.0 && h > 0.0; }

    bool operator==(const BBox& o) const { return x == o.x && y == o.y && w == o.w && h == o.h; }
};

// Relative box motion [dx, dy, dw, dh], each component in [-1, 1].
// Translations are fractions of the reference box size, dw/dh are relative
// scale changes.
struct ActionDelta {
    double dx = 0.0;
    double dy = 0.0;
    double dw = 0.0;
    double dh = 0.0;

    std::array<double, 4> to_array() const { return {dx, dy, dw, dh}; }
    static ActionDelta from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }

    bool operator==(const ActionDelta& o) const {
        return dx == o.dx && dy == o.dy && dw == o.dw && dh == o.dh;
    }
};

// Minimum box side used when an extreme action collapses the box; a
// degenerate box is clamped to this instead of aborting the episode and the
// -1 reward does the punishing.
inline constexpr double kMinBoxSize = 1e-3;

// Intersection-over-union in [0, 1]. Throws std::invalid_argument if either
// box has a non-positive side.
double iou(const BBox& a, const BBox& b);

struct AppliedBox {
    BBox box;
    bool degenerate = false;  // w or h came out <= 0
};

// Moves/rescales `prev` by the relative action:
//   x' = x + dx*w,  y' = y + dy*h,  w' = w*(1+dw),  h' = h*(1+dh).
// No clamping to frame bounds. Throws on a degenerate reference box.
AppliedBox apply_action(const ActionDelta& a, const BBox& prev);

struct BoxDeltaResult {
    ActionDelta delta;
    bool clipped = false;  // some component exceeded [-1, 1] and was clipped
};

// Inverse of apply_action: the relative action that moves `prev` onto `cur`.
// Components are clipped to the action space [-1, 1]; the flag reports it.
BoxDeltaResult box_delta(const BBox& cur, const BBox& prev);

// Reward quantizer. IoU >= 0.5 is floored to the 0.05 grid and mapped from
// [0,1] to [-1,1]; anything below 0.5 earns -1. The image is exactly
// {-1} ∪ {0.0, 0.1, ..., 1.0}. Throws outside [0, 1].
double quantized_reward(double iou_value);

// Same center, sides scaled by k (> 0). Used to add context around a box
// before cropping.
BBox dilate_box(const BBox& b, double k);

// Enforces w, h >= min_size, keeping the top-left corner.
BBox clamp_box_size(const BBox& b, double min_size = kMinBoxSize);

}  // namespace svt
