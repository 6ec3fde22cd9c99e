#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "rmot/errors.hpp"

namespace rmot {

struct DetectionRow;

// Isotropic Gaussian splat geometry derived from a box size.
struct GaussianKernel {
    double r = 1.0;      // radius, px, clamped to >= 1
    double sigma = 1.0 / 3.0; // always r/3
    double alpha = 0.7;
};

// Computes the kernel for a w x h box: three candidate radii from the
// size/overlap quadratics, minimum taken, clamped to >= 1 px.
GaussianKernel gaussian_radius(double w, double h, double alpha = 0.7);

// Single-channel response grid, values in [0, 1], row-major.
struct ResponseMap {
    int width = 0, height = 0;
    std::vector<float> z;

    ResponseMap() = default;
    ResponseMap(int w, int h) : width(w), height(h), z(static_cast<size_t>(w) * h, 0.0f) {}

    float at(int x, int y) const { return z[static_cast<size_t>(y) * width + x]; }
    float& at(int x, int y) { return z[static_cast<size_t>(y) * width + x]; }
    const float* row(int y) const { return z.data() + static_cast<size_t>(y) * width; }
    float* row(int y) { return z.data() + static_cast<size_t>(y) * width; }
    bool same_dims(const ResponseMap& o) const { return width == o.width && height == o.height; }
};

// Local maximum above the detection threshold.
struct Peak {
    int cx = 0, cy = 0;
    float score = 0.0f;

    bool operator==(const Peak&) const = default;
};

// Local-NMS parameters: odd kernel size, detection threshold, peak budget.
struct NmsConfig {
    int kernel = 3;
    double score_min = 0.05;
    int max_peaks = 60;

    void validate() const;
};

struct SplatObject {
    int cx = 0, cy = 0;
    GaussianKernel kernel;
    int z = 1; // 0 contributes nothing
};

struct RenderResult {
    ResponseMap map;
    int skipped = 0; // objects with out-of-bounds centers
};

// Splats each z=1 object as exp(-(dx^2+dy^2)/(2 sigma^2)) over the disc of
// radius ceil(r); overlaps merge by elementwise max. Row-parallel.
RenderResult render(std::span<const SplatObject> objects, int width, int height);
RenderResult render_serial(std::span<const SplatObject> objects, int width, int height);

// A pixel is a peak iff it is >= every value in its kernel x kernel
// neighborhood (clipped at borders) and > score_min; plateau ties keep the
// lexicographically smallest (cy, cx). At most max_peaks results, descending
// score, ties by (cy, cx). Row-parallel.
std::vector<Peak> extract_peaks(const ResponseMap& map, const NmsConfig& cfg);
std::vector<Peak> extract_peaks_serial(const ResponseMap& map, const NmsConfig& cfg);

// Mean binary cross entropy between a probability map and a label map,
// natural log, predictions clamped to [1e-7, 1 - 1e-7]. Row-parallel with a
// fixed reduction order, so results are independent of thread count.
double bce_score(const ResponseMap& pred, const ResponseMap& label);
double bce_score_serial(const ResponseMap& pred, const ResponseMap& label);

// Sliding window of the last <= capacity binary observations, newest last.
class PresenceHistory {
public:
    PresenceHistory() = default;
    explicit PresenceHistory(int capacity) : capacity_(capacity) {}

    void push(int observed) {
        window_.push_back(observed ? 1 : 0);
        if (static_cast<int>(window_.size()) > capacity_) window_.erase(window_.begin());
    }
    std::span<const std::uint8_t> view() const { return window_; }
    bool empty() const { return window_.empty(); }
    int capacity() const { return capacity_; }

private:
    int capacity_ = 5;
    std::vector<std::uint8_t> window_;
};

// Presence rule over a window of past binary states: present iff the newest
// entry is 1 or the window sum reaches beta * l. Short windows keep l as the
// denominator (missing entries count as absent).
int infer_state(std::span<const std::uint8_t> history, int l, double beta);

// One labelled object center for a frame.
struct LabelPoint {
    int id = 0;
    int cx = 0, cy = 0;  // rounded box center
    double w = 0, h = 0; // box size, for kernel construction downstream
    int z = 0;           // inferred presence
};

// Ground-truth rows -> per-frame label points. A track's raw observation is
// visibility >= vis_min; z applies the presence rule to the raw states of the
// preceding l frames (first observed frame uses its own raw state). Frames
// missing from the track's rows count as absent in the window.
std::map<int, std::vector<LabelPoint>> generate_labels(std::span<const DetectionRow> gt_rows,
                                                       int l, double beta, double vis_min);

} // namespace rmot
