#include "rmot/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rmot/rng.hpp"

namespace rmot {
namespace {

constexpr double kTau = 6.283185307179586;

Box object_box_at(const ObjectSpec& o, int frame) {
    const double t = static_cast<double>(frame - o.birth);
    double cx = o.cx + o.vx * t;
    double cy = o.cy + o.vy * t;
    if (o.sway_amp != 0 && o.sway_period > 0) {
        const double speed = std::hypot(o.vx, o.vy);
        double px = 0, py = 1; // sway axis defaults to vertical for static objects
        if (speed > 0) {
            px = -o.vy / speed;
            py = o.vx / speed;
        }
        const double off = o.sway_amp * std::sin(kTau * t / o.sway_period);
        cx += off * px;
        cy += off * py;
    }
    return Box{cx, cy, o.w, o.h};
}

// Area of box covered by the union of occluders, exact rectangle sweep.
double covered_area(const Box& box, const std::vector<Occluder>& occluders) {
    struct Rect {
        double l, t, r, b;
    };
    std::vector<Rect> clipped;
    for (const auto& o : occluders) {
        const double l = std::max(box.left(), o.left);
        const double r = std::min(box.right(), o.left + o.w);
        const double t = std::max(box.top(), o.top);
        const double b = std::min(box.bottom(), o.top + o.h);
        if (l < r && t < b) clipped.push_back({l, t, r, b});
    }
    if (clipped.empty()) return 0.0;

    std::vector<double> xs;
    for (const auto& c : clipped) {
        xs.push_back(c.l);
        xs.push_back(c.r);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    double area = 0;
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
        const double x0 = xs[i], x1 = xs[i + 1];
        std::vector<std::pair<double, double>> spans;
        for (const auto& c : clipped)
            if (c.l <= x0 && c.r >= x1) spans.emplace_back(c.t, c.b);
        if (spans.empty()) continue;
        std::sort(spans.begin(), spans.end());
        double merged = 0, cur_t = spans[0].first, cur_b = spans[0].second;
        for (size_t k = 1; k < spans.size(); ++k) {
            if (spans[k].first > cur_b) {
                merged += cur_b - cur_t;
                cur_t = spans[k].first;
                cur_b = spans[k].second;
            } else {
                cur_b = std::max(cur_b, spans[k].second);
            }
        }
        merged += cur_b - cur_t;
        area += merged * (x1 - x0);
    }
    return area;
}

void paint_flow(FlowField& flow, const Box& box, float du, float dv) {
    const int x0 = std::max(static_cast<int>(std::lround(box.left())), 0);
    const int x1 = std::min(static_cast<int>(std::lround(box.right())), flow.width);
    const int y0 = std::max(static_cast<int>(std::lround(box.top())), 0);
    const int y1 = std::min(static_cast<int>(std::lround(box.bottom())), flow.height);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) flow.at(x, y) = FlowVec{du, dv};
}

} // namespace

void SceneSpec::validate() const {
    if (width < 1 || height < 1) throw ConfigError("scene: image dimensions must be >= 1");
    if (frames < 1) throw ConfigError("scene: frame count must be >= 1");
    if (noise.drop_prob < 0 || noise.drop_prob > 1)
        throw ConfigError("scene: drop probability must be in [0, 1]");
    if (noise.spurious_rate < 0) throw ConfigError("scene: spurious rate must be >= 0");
    if (noise.flow_sigma < 0) throw ConfigError("scene: flow sigma must be >= 0");
    for (size_t i = 0; i < objects.size(); ++i) {
        const auto& o = objects[i];
        const std::string tag = "scene object " + std::to_string(i) + ": ";
        if (o.birth < 1) throw ConfigError(tag + "birth must be >= 1");
        if (o.birth >= o.death) throw ConfigError(tag + "birth must precede death");
        if (o.death > frames) throw ConfigError(tag + "death beyond sequence length");
        if (o.w <= 0 || o.h <= 0) throw ConfigError(tag + "box size must be positive");
        const Box b = object_box_at(o, o.birth);
        if (b.left() < 0 || b.top() < 0 || b.right() > width || b.bottom() > height)
            throw ConfigError(tag + "box must be inside bounds at birth");
        if (o.sway_amp != 0 && o.sway_period <= 0)
            throw ConfigError(tag + "sway period must be positive");
    }
    for (size_t i = 0; i < occluders.size(); ++i)
        if (occluders[i].w <= 0 || occluders[i].h <= 0)
            throw ConfigError("scene occluder " + std::to_string(i) + ": size must be positive");
}

std::vector<DetectionRow> SceneTruth::all_gt_rows() const {
    std::vector<DetectionRow> rows;
    for (const auto& frame : gt) rows.insert(rows.end(), frame.begin(), frame.end());
    return rows;
}

Box SceneTruth::object_box(int object_index, int frame) const {
    return object_box_at(spec.objects.at(object_index), frame);
}

SceneTruth generate_scene_light(const SceneSpec& spec) {
    spec.validate();
    SceneTruth truth;
    truth.spec = spec;
    truth.info = SequenceInfo{spec.name, 30.0, spec.frames, spec.width, spec.height};
    truth.gt.resize(spec.frames);

    for (int f = 1; f <= spec.frames; ++f) {
        for (size_t i = 0; i < spec.objects.size(); ++i) {
            const auto& o = spec.objects[i];
            if (f < o.birth || f > o.death) continue;
            const Box b = object_box_at(o, f);
            DetectionRow r;
            r.frame = f;
            r.id = static_cast<int>(i) + 1;
            r.bb_left = b.left();
            r.bb_top = b.top();
            r.bb_width = b.w;
            r.bb_height = b.h;
            r.conf = 1.0;
            r.visibility = std::clamp(1.0 - covered_area(b, spec.occluders) / b.area(), 0.0, 1.0);
            truth.gt[f - 1].push_back(r);
        }
        std::sort(truth.gt[f - 1].begin(), truth.gt[f - 1].end(), mot_row_order);
    }
    return truth;
}

FlowField render_scene_flow(const SceneSpec& spec, int frame) {
    if (frame < 1 || frame >= spec.frames) throw DomainError("render_scene_flow: bad frame");
    // Paint order: earlier-born first so later-born objects end up on top.
    std::vector<int> order(spec.objects.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return spec.objects[a].birth < spec.objects[b].birth;
    });

    FlowField flow(spec.width, spec.height);
    for (int i : order) {
        const auto& o = spec.objects[i];
        if (frame < o.birth || frame + 1 > o.death) continue; // needs both endpoints alive
        const Box now = object_box_at(o, frame);
        const Box next = object_box_at(o, frame + 1);
        paint_flow(flow, now, static_cast<float>(next.cx - now.cx),
                   static_cast<float>(next.cy - now.cy));
    }
    return flow;
}

ResponseMap render_label_map(const SceneTruth& truth, int frame, double alpha) {
    std::vector<SplatObject> objects;
    auto it = truth.label_points.find(frame);
    if (it != truth.label_points.end()) {
        for (const auto& p : it->second)
            objects.push_back(SplatObject{p.cx, p.cy, gaussian_radius(p.w, p.h, alpha), p.z});
    }
    return render(objects, truth.spec.width, truth.spec.height).map;
}

void compute_label_points(SceneTruth& truth, int l, double beta, double vis_min) {
    truth.label_points = generate_labels(truth.all_gt_rows(), l, beta, vis_min);
}

SceneTruth generate_scene(const SceneSpec& spec) {
    SceneTruth truth = generate_scene_light(spec);
    truth.flow.reserve(std::max(spec.frames - 1, 0));
    for (int f = 1; f < spec.frames; ++f) truth.flow.push_back(render_scene_flow(spec, f));
    return truth;
}

void emit_labels(SceneTruth& truth, int l, double beta, double vis_min, double alpha) {
    compute_label_points(truth, l, beta, vis_min);
    truth.labels.assign(truth.spec.frames, ResponseMap());
    for (int f = 1; f <= truth.spec.frames; ++f)
        truth.labels[f - 1] = render_label_map(truth, f, alpha);
}

std::vector<Peak> perturb_peaks(const SceneTruth& truth, const NoiseSpec& noise,
                                std::uint64_t seed, int frame, double score_min) {
    if (noise.drop_prob < 0 || noise.drop_prob > 1)
        throw DomainError("perturb: drop probability must be in [0, 1]");
    SplitMix64 rng = SplitMix64(seed).substream(static_cast<std::uint64_t>(frame));

    std::vector<Peak> peaks;
    auto it = truth.label_points.find(frame);
    if (it != truth.label_points.end()) {
        for (const auto& p : it->second) {
            if (p.z != 1) continue;
            if (rng.uniform() < noise.drop_prob) continue;
            peaks.push_back(Peak{p.cx, p.cy, 1.0f});
        }
    }
    const int spurious = rng.poisson(noise.spurious_rate);
    for (int s = 0; s < spurious; ++s) {
        const int x = rng.uniform_int(0, truth.spec.width - 1);
        const int y = rng.uniform_int(0, truth.spec.height - 1);
        const float score = static_cast<float>(score_min + (1.0 - score_min) * rng.uniform_open());
        peaks.push_back(Peak{x, y, score});
    }
    return peaks;
}

FlowField perturb_flow(FlowField flow, const NoiseSpec& noise, std::uint64_t seed,
                       int flow_index) {
    if (noise.flow_sigma <= 0) return flow;
    SplitMix64 rng =
        SplitMix64(seed).substream(0x100000ull + static_cast<std::uint64_t>(flow_index));
    for (auto& c : flow.data) {
        c.u += static_cast<float>(rng.normal(noise.flow_sigma));
        c.v += static_cast<float>(rng.normal(noise.flow_sigma));
    }
    return flow;
}

Observations perturb_observations(const SceneTruth& truth, const NoiseSpec& noise,
                                  std::uint64_t seed, double score_min) {
    Observations obs;
    obs.peaks.resize(truth.spec.frames);
    for (int f = 1; f <= truth.spec.frames; ++f)
        obs.peaks[f - 1] = perturb_peaks(truth, noise, seed, f, score_min);

    obs.flow.resize(truth.flow.size());
#pragma omp parallel for schedule(dynamic)
    for (size_t i = 0; i < truth.flow.size(); ++i)
        obs.flow[i] = perturb_flow(truth.flow[i], noise, seed, static_cast<int>(i));
    return obs;
}

std::filesystem::path map_path(const std::filesystem::path& dir, int frame) {
    char name[32];
    std::snprintf(name, sizeof(name), "map_%06d.rmp", frame);
    return dir / "maps" / name;
}

std::filesystem::path flow_path(const std::filesystem::path& dir, int frame) {
    char name[32];
    std::snprintf(name, sizeof(name), "flow_%06d.flo", frame);
    return dir / "flow" / name;
}

void export_scene(const SceneTruth& truth, const std::filesystem::path& dir) {
    if (static_cast<int>(truth.labels.size()) != truth.spec.frames)
        throw ConfigError("export: labels not emitted");
    std::filesystem::create_directories(dir / "maps");
    std::filesystem::create_directories(dir / "flow");
    write_mot_file(dir / "gt.txt", truth.all_gt_rows());
    write_seqinfo_file(dir / "seqinfo.ini", truth.info);
    for (int f = 1; f <= truth.spec.frames; ++f) write_map(map_path(dir, f), truth.labels[f - 1]);
    for (int f = 1; f < truth.spec.frames; ++f) write_flow(flow_path(dir, f), truth.flow[f - 1]);
}

SceneTruth import_scene(const std::filesystem::path& dir) {
    SceneTruth truth;
    truth.info = read_seqinfo_file(dir / "seqinfo.ini");
    truth.spec.width = truth.info.im_width;
    truth.spec.height = truth.info.im_height;
    truth.spec.frames = truth.info.seq_length;
    truth.spec.name = truth.info.name;

    truth.gt.resize(truth.spec.frames);
    for (const auto& r : read_mot_file(dir / "gt.txt").rows) {
        if (r.frame > truth.spec.frames) throw FormatError("gt row beyond sequence length");
        truth.gt[r.frame - 1].push_back(r);
    }
    for (int f = 1; f <= truth.spec.frames; ++f) truth.labels.push_back(read_map(map_path(dir, f)));
    for (int f = 1; f < truth.spec.frames; ++f) truth.flow.push_back(read_flow(flow_path(dir, f)));
    return truth;
}

namespace {

std::vector<double> parse_number_list(const std::string& text, const std::string& tag) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
        double v = 0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            throw ConfigError(tag + ": malformed number '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

} // namespace

SceneSpec parse_scene_spec(std::istream& in) {
    SceneSpec spec;
    std::string line;
    bool have_dims = false;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty()) continue;

        if (key == "width" || key == "height" || key == "frames" || key == "seed" ||
            key == "drop_prob" || key == "spurious_rate" || key == "flow_sigma") {
            const auto nums = parse_number_list(value, key);
            if (nums.size() != 1) throw ConfigError(key + ": expected one number");
            if (key == "width") spec.width = static_cast<int>(nums[0]);
            else if (key == "height") spec.height = static_cast<int>(nums[0]);
            else if (key == "frames") spec.frames = static_cast<int>(nums[0]);
            else if (key == "seed") spec.seed = static_cast<std::uint64_t>(nums[0]);
            else if (key == "drop_prob") spec.noise.drop_prob = nums[0];
            else if (key == "spurious_rate") spec.noise.spurious_rate = nums[0];
            else spec.noise.flow_sigma = nums[0];
            if (key == "width" || key == "height") have_dims = true;
        } else if (key == "name") {
            spec.name = value;
        } else if (key == "object") {
            const std::string tag = "scene object " + std::to_string(spec.objects.size());
            const auto nums = parse_number_list(value, tag);
            if (nums.size() != 8 && nums.size() != 10)
                throw ConfigError(tag + ": expected 'birth death cx cy w h vx vy [amp period]'");
            ObjectSpec o;
            o.birth = static_cast<int>(nums[0]);
            o.death = static_cast<int>(nums[1]);
            o.cx = nums[2];
            o.cy = nums[3];
            o.w = nums[4];
            o.h = nums[5];
            o.vx = nums[6];
            o.vy = nums[7];
            if (nums.size() == 10) {
                o.sway_amp = nums[8];
                o.sway_period = nums[9];
            }
            spec.objects.push_back(o);
        } else if (key == "occluder") {
            const std::string tag = "scene occluder " + std::to_string(spec.occluders.size());
            const auto nums = parse_number_list(value, tag);
            if (nums.size() != 4) throw ConfigError(tag + ": expected 'left top w h'");
            spec.occluders.push_back(Occluder{nums[0], nums[1], nums[2], nums[3]});
        }
        // unknown keys ignored
    }
    if (!have_dims) throw ConfigError("scene: width/height missing");
    spec.validate();
    return spec;
}

SceneSpec read_scene_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scene spec " + path.string());
    return parse_scene_spec(in);
}

} // namespace rmot
