#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rmot/mot_io.hpp"

namespace rmot {

struct FrameMatch {
    int gt_id = 0, hyp_id = 0;
    double iou = 0;
};

// Per-frame one-to-one correspondences between ground-truth and hypothesis ids.
using FrameMatching = std::map<int, std::vector<FrameMatch>>;

struct ClearResult {
    double mota = 0, motp = 0;
    long fp = 0, fn = 0, idsw = 0, frag = 0;
    long gt_count = 0;
    FrameMatching matching;
};

// CLEAR protocol: correspondences persist from the previous frame while their
// IOU stays at or above iou_match, the remainder re-matches by gated Hungarian
// on 1 - IOU. idsw counts changes of a ground-truth id's matched hypothesis
// between its consecutive matched frames; frag counts interruptions of matched
// runs. mota = 1 - (fp + fn + idsw) / gt_count, motp = mean matched IOU.
ClearResult clear_mot(std::span<const DetectionRow> gt, std::span<const DetectionRow> hyp,
                      double iou_match = 0.5);

struct IdentityResult {
    double idf1 = 0, idp = 0, idr = 0;
    long idtp = 0;
};

// Trajectory-level identity scores: optimal one-to-one pairing of whole
// trajectories maximizing per-frame gated overlap; IDTP is the overlap of the
// optimal pairing.
IdentityResult identity_metrics(std::span<const DetectionRow> gt, std::span<const DetectionRow> hyp,
                                double iou_match = 0.5);

struct TrajectoryStats {
    double mt = 0, ml = 0; // fractions of ground-truth trajectories
};

// Coverage = matched frames / trajectory length; MT at >= 0.8, ML below 0.2.
TrajectoryStats trajectory_stats(const FrameMatching& matching, std::span<const DetectionRow> gt);

struct MetricsReport {
    double mota = 0, motp = 0, idf1 = 0, idp = 0, idr = 0;
    double mt = 0, ml = 0;
    long fp = 0, fn = 0, idsw = 0, frag = 0;
    long gt_count = 0;
};

struct EvalOptions {
    double iou_match = 0.5;
    double gt_min_visibility = -1; // keep all by default
};

MetricsReport evaluate(std::span<const DetectionRow> gt, std::span<const DetectionRow> hyp,
                       const EvalOptions& opts = {});
MetricsReport evaluate_files(const std::filesystem::path& gt_path,
                             const std::filesystem::path& result_path,
                             const EvalOptions& opts = {});

std::string format_report_line(const MetricsReport& r);
std::string format_report_table(const MetricsReport& r);

} // namespace rmot
