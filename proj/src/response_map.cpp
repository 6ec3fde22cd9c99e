#include "rmot/response_map.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rmot/mot_io.hpp"

namespace rmot {

GaussianKernel gaussian_radius(double w, double h, double alpha) {
    if (w <= 0 || h <= 0) throw DomainError("gaussian_radius: box size must be positive");
    if (alpha <= 0 || alpha >= 1) throw DomainError("gaussian_radius: alpha must be in (0, 1)");

    const double s = h + w;
    const double p = h * w;
    const double a[3] = {s, 2.0 * s, -2.0 * s};
    const double b[3] = {4.0 * p * (1.0 - alpha) / (1.0 + alpha),
                         16.0 * p * (1.0 - alpha),
                         16.0 * p * alpha * (alpha - 1.0)};
    double r = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        // discriminant is nonnegative for alpha in (0,1); clamp guards rounding
        const double disc = std::max(a[i] * a[i] - b[i], 0.0);
        r = std::min(r, std::abs((a[i] + std::sqrt(disc)) / 2.0));
    }
    GaussianKernel k;
    k.r = std::max(r, 1.0); // tiny boxes stay detectable
    k.sigma = k.r / 3.0;
    k.alpha = alpha;
    return k;
}

void NmsConfig::validate() const {
    if (kernel < 1 || kernel % 2 == 0) throw DomainError("nms: kernel size must be odd and >= 1");
    if (score_min <= 0 || score_min >= 1) throw DomainError("nms: score_min must be in (0, 1)");
    if (max_peaks < 1) throw DomainError("nms: max_peaks must be >= 1");
}

namespace {

// Splats every object whose disc intersects row y. Writing row by row keeps
// the serial and parallel paths bit-identical.
void render_row(std::span<const SplatObject> objects, ResponseMap& map, int y) {
    float* row = map.row(y);
    for (const auto& o : objects) {
        if (o.z == 0) continue;
        const int radius = static_cast<int>(std::ceil(o.kernel.r));
        const int dy = y - o.cy;
        if (dy < -radius || dy > radius) continue;
        const double inv = 1.0 / (2.0 * o.kernel.sigma * o.kernel.sigma);
        const int x0 = std::max(o.cx - radius, 0);
        const int x1 = std::min(o.cx + radius, map.width - 1);
        for (int x = x0; x <= x1; ++x) {
            const int dx = x - o.cx;
            const int d2 = dx * dx + dy * dy;
            if (d2 > radius * radius) continue;
            const float g = static_cast<float>(std::exp(-d2 * inv));
            row[x] = std::max(row[x], g);
        }
    }
}

RenderResult render_impl(std::span<const SplatObject> objects, int width, int height, bool parallel) {
    if (width < 1 || height < 1) throw DomainError("render: map dimensions must be >= 1");
    RenderResult out;
    out.map = ResponseMap(width, height);

    std::vector<SplatObject> inside;
    inside.reserve(objects.size());
    for (const auto& o : objects) {
        if (o.cx < 0 || o.cx >= width || o.cy < 0 || o.cy >= height)
            ++out.skipped;
        else
            inside.push_back(o);
    }

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int y = 0; y < height; ++y) render_row(inside, out.map, y);
    } else {
        for (int y = 0; y < height; ++y) render_row(inside, out.map, y);
    }
    return out;
}

// Peak test for one pixel: value must beat every neighbor in the window,
// where equal-valued neighbors lose to the lexicographically smaller (y, x).
bool is_peak(const ResponseMap& map, int x, int y, int half, float v) {
    const int y0 = std::max(y - half, 0), y1 = std::min(y + half, map.height - 1);
    const int x0 = std::max(x - half, 0), x1 = std::min(x + half, map.width - 1);
    for (int ny = y0; ny <= y1; ++ny) {
        const float* row = map.row(ny);
        for (int nx = x0; nx <= x1; ++nx) {
            if (ny == y && nx == x) continue;
            const float n = row[nx];
            if (n > v) return false;
            if (n == v && (ny < y || (ny == y && nx < x))) return false;
        }
    }
    return true;
}

void scan_row(const ResponseMap& map, const NmsConfig& cfg, int y, std::vector<Peak>& out) {
    const int half = cfg.kernel / 2;
    const float* row = map.row(y);
    for (int x = 0; x < map.width; ++x) {
        const float v = row[x];
        if (!(v > cfg.score_min)) continue;
        if (is_peak(map, x, y, half, v)) out.push_back(Peak{x, y, v});
    }
}

std::vector<Peak> extract_impl(const ResponseMap& map, const NmsConfig& cfg, bool parallel) {
    cfg.validate();
    std::vector<std::vector<Peak>> by_row(map.height);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int y = 0; y < map.height; ++y) scan_row(map, cfg, y, by_row[y]);
    } else {
        for (int y = 0; y < map.height; ++y) scan_row(map, cfg, y, by_row[y]);
    }

    std::vector<Peak> peaks;
    for (auto& r : by_row) peaks.insert(peaks.end(), r.begin(), r.end());
    std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.cy != b.cy) return a.cy < b.cy;
        return a.cx < b.cx;
    });
    if (static_cast<int>(peaks.size()) > cfg.max_peaks) peaks.resize(cfg.max_peaks);
    return peaks;
}

double bce_row(const ResponseMap& pred, const ResponseMap& label, int y) {
    constexpr double eps = 1e-7;
    const float* p = pred.row(y);
    const float* l = label.row(y);
    double acc = 0;
    for (int x = 0; x < pred.width; ++x) {
        const double pc = std::clamp(static_cast<double>(p[x]), eps, 1.0 - eps);
        const double yv = l[x];
        acc -= yv * std::log(pc) + (1.0 - yv) * std::log(1.0 - pc);
    }
    return acc;
}

double bce_impl(const ResponseMap& pred, const ResponseMap& label, bool parallel) {
    if (!pred.same_dims(label)) throw DomainError("bce_score: dimension mismatch");
    std::vector<double> partial(pred.height, 0.0);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int y = 0; y < pred.height; ++y) partial[y] = bce_row(pred, label, y);
    } else {
        for (int y = 0; y < pred.height; ++y) partial[y] = bce_row(pred, label, y);
    }
    double total = 0;
    for (double v : partial) total += v; // fixed order, thread-count independent
    return total / (static_cast<double>(pred.width) * pred.height);
}

} // namespace

RenderResult render(std::span<const SplatObject> objects, int width, int height) {
    return render_impl(objects, width, height, true);
}

RenderResult render_serial(std::span<const SplatObject> objects, int width, int height) {
    return render_impl(objects, width, height, false);
}

std::vector<Peak> extract_peaks(const ResponseMap& map, const NmsConfig& cfg) {
    return extract_impl(map, cfg, true);
}

std::vector<Peak> extract_peaks_serial(const ResponseMap& map, const NmsConfig& cfg) {
    return extract_impl(map, cfg, false);
}

double bce_score(const ResponseMap& pred, const ResponseMap& label) {
    return bce_impl(pred, label, true);
}

double bce_score_serial(const ResponseMap& pred, const ResponseMap& label) {
    return bce_impl(pred, label, false);
}

int infer_state(std::span<const std::uint8_t> history, int l, double beta) {
    if (history.empty()) throw DomainError("infer_state: history must not be empty");
    if (static_cast<int>(history.size()) > l)
        throw DomainError("infer_state: history longer than window length");
    if (beta <= 0 || beta > 1) throw DomainError("infer_state: beta must be in (0, 1]");
    for (auto e : history)
        if (e > 1) throw DomainError("infer_state: history entries must be 0 or 1");

    if (history.back() == 1) return 1;
    const int sum = std::accumulate(history.begin(), history.end(), 0);
    return (static_cast<double>(sum) / l >= beta) ? 1 : 0;
}

std::map<int, std::vector<LabelPoint>> generate_labels(std::span<const DetectionRow> gt_rows,
                                                       int l, double beta, double vis_min) {
    if (l < 1) throw DomainError("generate_labels: window length must be >= 1");

    std::map<int, std::map<int, DetectionRow>> by_track; // id -> frame -> row
    for (const auto& r : gt_rows) by_track[r.id][r.frame] = r;

    std::map<int, std::vector<LabelPoint>> labels;
    for (const auto& [id, frames] : by_track) {
        const int first = frames.begin()->first;
        auto raw_at = [&](int f) -> int {
            auto it = frames.find(f);
            return (it != frames.end() && it->second.visibility >= vis_min) ? 1 : 0;
        };
        for (const auto& [frame, row] : frames) {
            int z;
            if (frame == first) {
                z = raw_at(frame);
            } else {
                std::vector<std::uint8_t> window;
                for (int f = std::max(first, frame - l); f < frame; ++f)
                    window.push_back(static_cast<std::uint8_t>(raw_at(f)));
                z = infer_state(window, l, beta);
            }
            const Box b = row.box();
            labels[frame].push_back(LabelPoint{id, static_cast<int>(std::lround(b.cx)),
                                               static_cast<int>(std::lround(b.cy)), row.bb_width,
                                               row.bb_height, z});
        }
    }
    return labels;
}

} // namespace rmot
