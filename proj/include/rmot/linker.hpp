#pragma once

#include <span>
#include <vector>

#include "rmot/assignment.hpp"
#include "rmot/config.hpp"
#include "rmot/geometry.hpp"
#include "rmot/motion.hpp"
#include "rmot/mot_io.hpp"
#include "rmot/response_map.hpp"

namespace rmot {

enum class TrackStatus { Active, Coasting, Terminated };

struct TrackState {
    int id = 0;
    Box box;                 // last committed location (measurement or coast)
    Box predicted;           // box advanced by this frame's displacement
    PresenceHistory history; // observed peak presence, newest last
    int z = 1;               // inferred presence
    int last_match_frame = 0;
    TrackStatus status = TrackStatus::Active;

    int age(int frame) const { return frame - last_match_frame; }
};

struct FrameAssignment {
    std::vector<std::pair<int, int>> pairs; // (track index, peak index)
    std::vector<int> unmatched_tracks, unmatched_peaks;
};

// Two-stage association. Stage 1: each track tests its nearest peak (center
// distance, predicted position); IOU(predicted box, peak box) > iou_min makes
// that peak a candidate. Stage 2: gated Hungarian between all tracks and the
// candidate set on 1 - IOU(track box at t-1, candidate box). Peaks have no
// extent of their own and borrow the paired track's predicted size.
FrameAssignment associate_frame(std::span<const TrackState> tracks,
                                std::span<const Peak> peaks, const TrackerConfig& cfg);

struct CascadeEntry {
    int track_index = 0;
    int age = 0; // frames since last match, 1..max_age
};

// Age-ordered re-matching of leftover peaks against unmatched tracks: for each
// age 1..max_age runs the gated Hungarian (cost on the coasted box) over
// tracks of exactly that age. Returns (track index, peak index) pairs.
std::vector<std::pair<int, int>> matching_cascade(std::span<const TrackState> tracks,
                                                  std::span<const Peak> peaks,
                                                  std::span<const CascadeEntry> entries,
                                                  std::span<const int> unmatched_peaks,
                                                  const TrackerConfig& cfg);

struct AttachResult {
    std::vector<std::pair<int, int>> pairs;  // (response index, detection index)
    std::vector<int> false_alarms;           // detections matched to nothing
    std::vector<int> unmatched_responses;    // responses that keep their track box
};

// Maps response boxes to provided detections by center distance, pairs beyond
// gate_px forbidden.
AttachResult attach_detections(std::span<const Box> responses,
                               std::span<const DetectionRow> detections, double gate_px);

// Single-writer tracking state machine, advanced frame by frame. Terminated
// tracks stay coasting internally until max_age so the cascade can revive
// them; they produce no output.
class Tracker {
public:
    explicit Tracker(TrackerConfig cfg);

    // Consumes the peaks of frame `frame` and the flow from frame-1 to frame
    // (empty on the first frame). Returns the result rows for this frame.
    std::vector<DetectionRow> step(std::span<const Peak> peaks, const FlowField& flow, int frame);

    const std::vector<TrackState>& tracks() const { return tracks_; }
    int next_id() const { return next_id_; }

private:
    TrackerConfig cfg_;
    std::vector<TrackState> tracks_;
    int next_id_ = 0;
    int last_frame_ = 0;
};

} // namespace rmot
