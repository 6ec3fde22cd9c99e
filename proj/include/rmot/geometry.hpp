#pragma once

#include <algorithm>
#include <cmath>

#include "rmot/errors.hpp"

namespace rmot {

// Axis-aligned box, center + size, continuous pixel coordinates.
struct Box {
    double cx = 0, cy = 0, w = 0, h = 0;

    double left() const { return cx - w / 2.0; }
    double top() const { return cy - h / 2.0; }
    double right() const { return cx + w / 2.0; }
    double bottom() const { return cy + h / 2.0; }
    double area() const { return w * h; }

    bool operator==(const Box&) const = default;
};

inline Box box_from_ltwh(double left, double top, double w, double h) {
    return Box{left + w / 2.0, top + h / 2.0, w, h};
}

// Intersection over union of two boxes. Sizes must be positive.
inline double iou(const Box& a, const Box& b) {
    if (a.w <= 0 || a.h <= 0 || b.w <= 0 || b.h <= 0)
        throw DomainError("iou: boxes must have positive size");
    const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
    if (iw <= 0 || ih <= 0) return 0.0;
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

inline double center_distance(const Box& a, const Box& b) {
    return std::hypot(a.cx - b.cx, a.cy - b.cy);
}

} // namespace rmot
