#pragma once

#include <cstdint>
#include <vector>

#include "rmot/geometry.hpp"
#include "rmot/mot_io.hpp"

namespace rmot {

// Per-target motion between consecutive frames: center shift plus box-size
// rate of change, pixels/frame.
struct Displacement {
    double dcx = 0, dcy = 0, dw = 0, dh = 0;
    bool operator==(const Displacement&) const = default;
};

// side x side window of flow vectors around a response point. Cells that fell
// outside the field are masked invalid rather than clamped.
struct RoiPatch {
    int side = 0;
    std::vector<FlowVec> cells;       // side*side, row-major, zeros where invalid
    std::vector<std::uint8_t> valid;  // parallel mask

    int valid_count() const;
};

// Axis-aligned roi_size window centered at (cx, cy) with offset
// floor(roi_size/2). The center must lie inside the field.
RoiPatch sample_roi(const FlowField& flow, int cx, int cy, int roi_size);

// Robust displacement from a patch: per-component median of the valid cells
// (lower median for even counts), dw = dh = 0. With fit_scale, a least-squares
// similarity fit reports its per-frame relative scale rate as dw and dh.
Displacement aggregate_displacement(const RoiPatch& patch, bool fit_scale = false);

// prev advanced by d; sizes floored at 1 px.
Box predict_location(const Box& prev, const Displacement& d);

// Mean smooth-L1 over the four displacement components:
// f(x) = 0.5 x^2 for |x| < 1, |x| - 0.5 otherwise.
double smooth_l1(const Displacement& pred, const Displacement& gt);

} // namespace rmot
