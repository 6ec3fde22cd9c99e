#include "rmot/linker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace rmot {
namespace {

Box peak_box(const Peak& p, double w, double h) {
    return Box{static_cast<double>(p.cx), static_cast<double>(p.cy), w, h};
}

} // namespace

FrameAssignment associate_frame(std::span<const TrackState> tracks, std::span<const Peak> peaks,
                                const TrackerConfig& cfg) {
    FrameAssignment out;
    if (tracks.empty() || peaks.empty()) {
        for (int i = 0; i < static_cast<int>(tracks.size()); ++i) out.unmatched_tracks.push_back(i);
        for (int j = 0; j < static_cast<int>(peaks.size()); ++j) out.unmatched_peaks.push_back(j);
        return out;
    }

    // Stage 1: every track tests only its nearest peak; passing the gate with
    // the predicted box makes that peak a candidate for the global stage.
    std::vector<char> is_candidate(peaks.size(), 0);
    for (const auto& t : tracks) {
        int nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < static_cast<int>(peaks.size()); ++j) {
            const double d = std::hypot(t.predicted.cx - peaks[j].cx, t.predicted.cy - peaks[j].cy);
            if (d < best) {
                best = d;
                nearest = j;
            }
        }
        if (iou(t.predicted, peak_box(peaks[nearest], t.predicted.w, t.predicted.h)) > cfg.iou_min)
            is_candidate[nearest] = 1;
    }

    std::vector<int> candidates;
    for (int j = 0; j < static_cast<int>(peaks.size()); ++j)
        if (is_candidate[j]) candidates.push_back(j);

    // Stage 2: gated Hungarian between all tracks and the candidate peaks,
    // cost on the box held at t-1.
    CostMatrix costs(static_cast<int>(tracks.size()), static_cast<int>(candidates.size()),
                     kForbiddenCost);
    for (int i = 0; i < costs.rows; ++i) {
        for (int j = 0; j < costs.cols; ++j) {
            const Box cand = peak_box(peaks[candidates[j]], tracks[i].predicted.w,
                                      tracks[i].predicted.h);
            const double overlap = iou(tracks[i].box, cand);
            if (overlap > cfg.iou_min) costs.at(i, j) = 1.0 - overlap;
        }
    }
    const AssignmentResult sol = solve_assignment(costs);

    std::vector<char> track_matched(tracks.size(), 0), peak_matched(peaks.size(), 0);
    for (const auto& [i, j] : sol.pairs) {
        out.pairs.emplace_back(i, candidates[j]);
        track_matched[i] = 1;
        peak_matched[candidates[j]] = 1;
    }
    for (int i = 0; i < static_cast<int>(tracks.size()); ++i)
        if (!track_matched[i]) out.unmatched_tracks.push_back(i);
    for (int j = 0; j < static_cast<int>(peaks.size()); ++j)
        if (!peak_matched[j]) out.unmatched_peaks.push_back(j);
    return out;
}

std::vector<std::pair<int, int>> matching_cascade(std::span<const TrackState> tracks,
                                                  std::span<const Peak> peaks,
                                                  std::span<const CascadeEntry> entries,
                                                  std::span<const int> unmatched_peaks,
                                                  const TrackerConfig& cfg) {
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> free_peaks(unmatched_peaks.begin(), unmatched_peaks.end());

    for (int age = 1; age <= cfg.max_age && !free_peaks.empty(); ++age) {
        std::vector<int> group;
        for (const auto& e : entries)
            if (e.age == age) group.push_back(e.track_index);
        if (group.empty()) continue;

        CostMatrix costs(static_cast<int>(group.size()), static_cast<int>(free_peaks.size()),
                         kForbiddenCost);
        for (int i = 0; i < costs.rows; ++i) {
            const TrackState& t = tracks[group[i]];
            for (int j = 0; j < costs.cols; ++j) {
                // The track's box has been coasted forward while unmatched, so
                // the gate compares the coasted location with the peak.
                const double overlap =
                    iou(t.predicted, peak_box(peaks[free_peaks[j]], t.predicted.w, t.predicted.h));
                if (overlap > cfg.iou_min) costs.at(i, j) = 1.0 - overlap;
            }
        }
        const AssignmentResult sol = solve_assignment(costs);
        std::vector<int> taken;
        for (const auto& [i, j] : sol.pairs) {
            pairs.emplace_back(group[i], free_peaks[j]);
            taken.push_back(free_peaks[j]);
        }
        std::erase_if(free_peaks, [&](int p) {
            return std::find(taken.begin(), taken.end(), p) != taken.end();
        });
    }
    return pairs;
}

AttachResult attach_detections(std::span<const Box> responses,
                               std::span<const DetectionRow> detections, double gate_px) {
    if (gate_px <= 0) throw DomainError("attach_detections: gate must be positive");
    AttachResult out;
    CostMatrix costs(static_cast<int>(responses.size()), static_cast<int>(detections.size()),
                     kForbiddenCost);
    for (int i = 0; i < costs.rows; ++i) {
        for (int j = 0; j < costs.cols; ++j) {
            const double d = center_distance(responses[i], detections[j].box());
            if (d <= gate_px) costs.at(i, j) = d;
        }
    }
    const AssignmentResult sol = solve_assignment(costs);
    out.pairs = sol.pairs;
    out.unmatched_responses = sol.unmatched_rows;
    out.false_alarms = sol.unmatched_cols;
    return out;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
}

std::vector<DetectionRow> Tracker::step(std::span<const Peak> peaks, const FlowField& flow,
                                        int frame) {
    if (frame <= last_frame_) throw DomainError("tracker: frames must advance monotonically");
    last_frame_ = frame;

    // 1. Advance every retained track by its local flow displacement. Tracks
    // outside the field coast on a zero displacement.
    std::vector<Displacement> disp(tracks_.size());
    for (size_t i = 0; i < tracks_.size(); ++i) {
        TrackState& t = tracks_[i];
        const int icx = static_cast<int>(std::lround(t.box.cx));
        const int icy = static_cast<int>(std::lround(t.box.cy));
        if (!flow.empty() && icx >= 0 && icx < flow.width && icy >= 0 && icy < flow.height)
            disp[i] = aggregate_displacement(sample_roi(flow, icx, icy, cfg_.roi_size));
        t.predicted = predict_location(t.box, disp[i]);
    }

    // 2. Two-stage association over live tracks.
    std::vector<int> live;
    for (size_t i = 0; i < tracks_.size(); ++i)
        if (tracks_[i].status != TrackStatus::Terminated) live.push_back(static_cast<int>(i));
    std::vector<TrackState> live_view;
    live_view.reserve(live.size());
    for (int i : live) live_view.push_back(tracks_[i]);
    const FrameAssignment assoc = associate_frame(live_view, peaks, cfg_);

    std::vector<char> track_matched(tracks_.size(), 0), peak_matched(peaks.size(), 0);
    std::vector<std::pair<int, int>> matches; // (track storage index, peak index)
    for (const auto& [li, pj] : assoc.pairs) {
        matches.emplace_back(live[li], pj);
        track_matched[live[li]] = 1;
        peak_matched[pj] = 1;
    }

    // 3. Cascade over every still-unmatched track within the age horizon.
    std::vector<CascadeEntry> entries;
    for (size_t i = 0; i < tracks_.size(); ++i) {
        if (track_matched[i]) continue;
        const int age = tracks_[i].age(frame);
        if (age >= 1 && age <= cfg_.max_age) entries.push_back({static_cast<int>(i), age});
    }
    std::vector<int> free_peaks;
    for (int j = 0; j < static_cast<int>(peaks.size()); ++j)
        if (!peak_matched[j]) free_peaks.push_back(j);
    for (const auto& [ti, pj] : matching_cascade(tracks_, peaks, entries, free_peaks, cfg_)) {
        matches.emplace_back(ti, pj);
        track_matched[ti] = 1;
        peak_matched[pj] = 1;
    }

    // 4. Matched tracks recenter on the measured peak; size follows the
    // regressed rate of change.
    for (const auto& [ti, pj] : matches) {
        TrackState& t = tracks_[ti];
        t.box = Box{static_cast<double>(peaks[pj].cx), static_cast<double>(peaks[pj].cy),
                    std::max(t.box.w + disp[ti].dw, 1.0), std::max(t.box.h + disp[ti].dh, 1.0)};
        t.history.push(1);
        t.z = 1;
        t.last_match_frame = frame;
        t.status = TrackStatus::Active;
    }

    // 5. Unmatched tracks record a miss and either coast or terminate.
    for (size_t i = 0; i < tracks_.size(); ++i) {
        if (track_matched[i]) continue;
        TrackState& t = tracks_[i];
        t.history.push(0);
        t.z = infer_state(t.history.view(), cfg_.window_len, cfg_.beta);
        t.box = t.predicted;
        if (t.status != TrackStatus::Terminated)
            t.status = (t.z == 1) ? TrackStatus::Coasting : TrackStatus::Terminated;
    }
    std::erase_if(tracks_, [&](const TrackState& t) { return t.age(frame) > cfg_.max_age; });

    // 6. Leftover peaks seed new tracks with the configured initial scale.
    for (int j = 0; j < static_cast<int>(peaks.size()); ++j) {
        if (peak_matched[j]) continue;
        TrackState t;
        t.id = next_id_++;
        t.box = Box{static_cast<double>(peaks[j].cx), static_cast<double>(peaks[j].cy), cfg_.init_w,
                    cfg_.init_h};
        t.predicted = t.box;
        t.history = PresenceHistory(cfg_.window_len);
        t.history.push(1);
        t.z = 1;
        t.last_match_frame = frame;
        t.status = TrackStatus::Active;
        tracks_.push_back(std::move(t));
    }

    // 7. One output row per visible-or-inferred track.
    std::vector<DetectionRow> rows;
    for (const auto& t : tracks_) {
        if (t.status == TrackStatus::Terminated) continue;
        DetectionRow r;
        r.frame = frame;
        r.id = t.id;
        r.bb_left = t.box.left();
        r.bb_top = t.box.top();
        r.bb_width = t.box.w;
        r.bb_height = t.box.h;
        r.conf = 1.0;
        rows.push_back(r);
    }
    std::sort(rows.begin(), rows.end(), mot_row_order);
    return rows;
}

} // namespace rmot
