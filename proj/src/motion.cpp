#include "rmot/motion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rmot {

int RoiPatch::valid_count() const {
    return static_cast<int>(std::count(valid.begin(), valid.end(), std::uint8_t(1)));
}

RoiPatch sample_roi(const FlowField& flow, int cx, int cy, int roi_size) {
    if (roi_size < 1) throw DomainError("sample_roi: roi_size must be >= 1");
    if (flow.empty() || cx < 0 || cx >= flow.width || cy < 0 || cy >= flow.height)
        throw DomainError("sample_roi: center outside flow field");

    RoiPatch patch;
    patch.side = roi_size;
    patch.cells.resize(static_cast<size_t>(roi_size) * roi_size);
    patch.valid.assign(patch.cells.size(), 0);

    const int x0 = cx - roi_size / 2;
    const int y0 = cy - roi_size / 2;
    for (int dy = 0; dy < roi_size; ++dy) {
        const int y = y0 + dy;
        if (y < 0 || y >= flow.height) continue;
        for (int dx = 0; dx < roi_size; ++dx) {
            const int x = x0 + dx;
            if (x < 0 || x >= flow.width) continue;
            const size_t i = static_cast<size_t>(dy) * roi_size + dx;
            patch.cells[i] = flow.at(x, y);
            patch.valid[i] = 1;
        }
    }
    return patch;
}

namespace {

// Lower median: element at index (n-1)/2 of the sorted values.
double lower_median(std::vector<double>& v) {
    const size_t k = (v.size() - 1) / 2;
    std::nth_element(v.begin(), v.begin() + k, v.end());
    return v[k];
}

} // namespace

Displacement aggregate_displacement(const RoiPatch& patch, bool fit_scale) {
    std::vector<double> us, vs;
    us.reserve(patch.cells.size());
    vs.reserve(patch.cells.size());
    for (size_t i = 0; i < patch.cells.size(); ++i) {
        if (!patch.valid[i]) continue;
        us.push_back(patch.cells[i].u);
        vs.push_back(patch.cells[i].v);
    }
    if (us.empty()) throw DomainError("aggregate_displacement: patch has no valid cells");

    Displacement d;
    d.dcx = lower_median(us);
    d.dcy = lower_median(vs);

    if (fit_scale && us.size() >= 2) {
        // Least-squares isotropic expansion: flow ~ t + rate * (p - mean(p)).
        double mx = 0, my = 0, mu = 0, mv = 0;
        int n = 0;
        for (size_t i = 0; i < patch.cells.size(); ++i) {
            if (!patch.valid[i]) continue;
            mx += static_cast<double>(i % patch.side);
            my += static_cast<double>(i / patch.side);
            mu += patch.cells[i].u;
            mv += patch.cells[i].v;
            ++n;
        }
        mx /= n; my /= n; mu /= n; mv /= n;
        double num = 0, den = 0;
        for (size_t i = 0; i < patch.cells.size(); ++i) {
            if (!patch.valid[i]) continue;
            const double px = static_cast<double>(i % patch.side) - mx;
            const double py = static_cast<double>(i / patch.side) - my;
            num += px * (patch.cells[i].u - mu) + py * (patch.cells[i].v - mv);
            den += px * px + py * py;
        }
        if (den > 0) {
            const double rate = num / den;
            d.dw = rate;
            d.dh = rate;
        }
    }
    return d;
}

Box predict_location(const Box& prev, const Displacement& d) {
    if (prev.w <= 0 || prev.h <= 0) throw DomainError("predict_location: box size must be positive");
    return Box{prev.cx + d.dcx, prev.cy + d.dcy, std::max(prev.w + d.dw, 1.0),
               std::max(prev.h + d.dh, 1.0)};
}

double smooth_l1(const Displacement& pred, const Displacement& gt) {
    const double diffs[4] = {pred.dcx - gt.dcx, pred.dcy - gt.dcy, pred.dw - gt.dw,
                             pred.dh - gt.dh};
    double total = 0;
    for (double x : diffs) {
        const double a = std::abs(x);
        total += a < 1.0 ? 0.5 * x * x : a - 0.5;
    }
    return total / 4.0;
}

} // namespace rmot
