#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <vector>

#include "rmot/mot_io.hpp"
#include "rmot/response_map.hpp"

namespace rmot {

// One scripted object: closed-form motion from birth to death (inclusive),
// constant box size, optional sinusoidal sway perpendicular to the velocity.
struct ObjectSpec {
    int birth = 1, death = 1;
    double cx = 0, cy = 0, w = 0, h = 0;
    double vx = 0, vy = 0;
    double sway_amp = 0, sway_period = 0;
};

struct Occluder {
    double left = 0, top = 0, w = 0, h = 0;
};

struct NoiseSpec {
    double drop_prob = 0;     // per true peak
    double spurious_rate = 0; // expected spurious peaks per frame
    double flow_sigma = 0;    // px, per flow component
};

struct SceneSpec {
    int width = 0, height = 0, frames = 0;
    std::vector<ObjectSpec> objects;
    std::vector<Occluder> occluders;
    NoiseSpec noise;
    std::uint64_t seed = 0;
    std::string name = "synth";

    void validate() const; // ConfigError naming the offending object index
};

// Analytic ground truth: per-frame rows with geometric visibility, exact flow
// fields (object pixels carry the object's displacement, later-born on top,
// background zero), and label maps once emit_labels has run.
struct SceneTruth {
    SceneSpec spec;
    SequenceInfo info;
    std::vector<std::vector<DetectionRow>> gt;  // index f-1 = frame f
    std::vector<FlowField> flow;                // index t-1 = flow frame t -> t+1
    std::vector<ResponseMap> labels;            // filled by emit_labels
    std::map<int, std::vector<LabelPoint>> label_points;

    std::vector<DetectionRow> all_gt_rows() const;
    Box object_box(int object_index, int frame) const; // closed-form location
};

SceneTruth generate_scene(const SceneSpec& spec);

// Ground truth rows and metadata only; flow fields and label maps can then be
// produced frame by frame, which keeps long sequences out of memory.
SceneTruth generate_scene_light(const SceneSpec& spec);
FlowField render_scene_flow(const SceneSpec& spec, int frame); // frame -> frame + 1
ResponseMap render_label_map(const SceneTruth& truth, int frame, double alpha = 0.7);
void compute_label_points(SceneTruth& truth, int l, double beta, double vis_min);

// Renders per-frame label maps from the presence-rule labels; objects judged
// present while occluded still splat.
void emit_labels(SceneTruth& truth, int l, double beta, double vis_min, double alpha = 0.7);

// Observation corruption for robustness runs: peaks dropped/injected and flow
// perturbed with seeded per-frame substreams.
struct Observations {
    std::vector<std::vector<Peak>> peaks; // index f-1 = frame f
    std::vector<FlowField> flow;          // same layout as SceneTruth::flow
};

Observations perturb_observations(const SceneTruth& truth, const NoiseSpec& noise,
                                  std::uint64_t seed, double score_min = 0.05);

// Streaming equivalents; the whole-scene form above composes these.
std::vector<Peak> perturb_peaks(const SceneTruth& truth, const NoiseSpec& noise,
                                std::uint64_t seed, int frame, double score_min = 0.05);
FlowField perturb_flow(FlowField flow, const NoiseSpec& noise, std::uint64_t seed,
                       int flow_index);

// Corpus layout: gt.txt, seqinfo.ini, maps/map_NNNNNN.rmp, flow/flow_NNNNNN.flo
// (flow file t covers t -> t+1). Labels must have been emitted.
void export_scene(const SceneTruth& truth, const std::filesystem::path& dir);
SceneTruth import_scene(const std::filesystem::path& dir);

std::filesystem::path map_path(const std::filesystem::path& dir, int frame);
std::filesystem::path flow_path(const std::filesystem::path& dir, int frame);

// Plain-text scene description, key=value with repeatable object/occluder
// lines (see README for the field order).
SceneSpec parse_scene_spec(std::istream& in);
SceneSpec read_scene_spec(const std::filesystem::path& path);

} // namespace rmot
