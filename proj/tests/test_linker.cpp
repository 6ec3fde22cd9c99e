#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "rmot/linker.hpp"
#include "rmot/rng.hpp"

using namespace rmot;

namespace {

TrackState make_track(int id, Box box, int window_len = 5) {
    TrackState t;
    t.id = id;
    t.box = box;
    t.predicted = box;
    t.history = PresenceHistory(window_len);
    t.history.push(1);
    t.z = 1;
    t.last_match_frame = 0;
    t.status = TrackStatus::Active;
    return t;
}

FlowField constant_flow(int w, int h, float u, float v) {
    FlowField f(w, h);
    for (auto& c : f.data) c = FlowVec{u, v};
    return f;
}

TrackerConfig small_config() {
    TrackerConfig cfg;
    cfg.init_w = 20;
    cfg.init_h = 40;
    cfg.roi_size = 5;
    return cfg;
}

} // namespace

TEST_CASE("iou examples") {
    CHECK(iou(Box{5, 5, 10, 10}, Box{5, 5, 10, 10}) == 1.0);
    CHECK(iou(Box{5, 5, 10, 10}, Box{50, 50, 10, 10}) == 0.0);
    CHECK(iou(Box{5, 5, 10, 10}, Box{10, 5, 10, 10}) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(iou(Box{0, 0, 0, 1}, Box{0, 0, 1, 1}), DomainError);
}

TEST_CASE("associate_frame matches an exact peak") {
    const auto t = make_track(0, Box{50, 50, 20, 40});
    const Peak p{50, 50, 1.0f};
    const auto res = associate_frame(std::span(&t, 1), std::span(&p, 1), TrackerConfig{});
    CHECK(res.pairs == std::vector<std::pair<int, int>>{{0, 0}});
    CHECK(res.unmatched_tracks.empty());
    CHECK(res.unmatched_peaks.empty());
}

TEST_CASE("associate_frame rejects pairs below the gate") {
    // 30x30 boxes offset by 10 px: IOU = 600/1200 = 0.5 < 0.7
    const auto t = make_track(0, Box{20, 20, 30, 30});
    const Peak p{30, 20, 1.0f};
    const auto res = associate_frame(std::span(&t, 1), std::span(&p, 1), TrackerConfig{});
    CHECK(res.pairs.empty());
    CHECK(res.unmatched_tracks == std::vector<int>{0});
    CHECK(res.unmatched_peaks == std::vector<int>{0});
}

TEST_CASE("associate_frame keeps crossing tracks on their nearest peaks") {
    std::vector<TrackState> tracks;
    tracks.push_back(make_track(0, Box{50, 50, 20, 20}));
    tracks.push_back(make_track(1, Box{53, 50, 20, 20}));
    tracks[0].predicted = Box{51, 50, 20, 20};
    tracks[1].predicted = Box{54, 50, 20, 20};
    const Peak peaks[2] = {{51, 50, 1.0f}, {54, 50, 1.0f}};
    const auto res = associate_frame(tracks, peaks, TrackerConfig{});
    CHECK(res.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});

    // cross-check against the exhaustive optimum on the same gated costs
    CostMatrix costs(2, 2, kForbiddenCost);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const Box cand{static_cast<double>(peaks[j].cx), static_cast<double>(peaks[j].cy), 20, 20};
            const double v = iou(tracks[i].box, cand);
            if (v > 0.7) costs.at(i, j) = 1.0 - v;
        }
    const auto brute = oracle::brute_force_assignment(costs);
    std::vector<std::pair<int, int>> kept;
    for (const auto& [i, j] : brute.pairs)
        if (costs.at(i, j) < kForbiddenCost) kept.emplace_back(i, j);
    CHECK(res.pairs == kept);
}

TEST_CASE("matching_cascade prefers the youngest age") {
    std::vector<TrackState> tracks;
    tracks.push_back(make_track(0, Box{50, 50, 20, 40}));
    tracks.push_back(make_track(1, Box{50, 50, 20, 40}));
    const Peak p{50, 50, 1.0f};
    const int free_peaks[1] = {0};

    CHECK(matching_cascade(tracks, std::span(&p, 1), {}, free_peaks, TrackerConfig{}).empty());

    const CascadeEntry both[2] = {{0, 9}, {1, 2}};
    const auto pairs = matching_cascade(tracks, std::span(&p, 1), both, free_peaks, TrackerConfig{});
    CHECK(pairs == std::vector<std::pair<int, int>>{{1, 0}});

    const CascadeEntry stale[1] = {{0, 31}}; // beyond the age horizon
    CHECK(matching_cascade(tracks, std::span(&p, 1), stale, free_peaks, TrackerConfig{}).empty());
}

TEST_CASE("tracker seeds new tracks from peaks") {
    Tracker tracker(small_config());
    const Peak peaks[3] = {{20, 20, 1.0f}, {60, 20, 0.9f}, {100, 20, 0.8f}};
    const auto rows = tracker.step(peaks, FlowField(), 1);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].id == 0);
    CHECK(rows[1].id == 1);
    CHECK(rows[2].id == 2);
    CHECK(rows[0].frame == 1);
    CHECK(rows[0].bb_left == 10.0);  // 20 - init_w/2
    CHECK(rows[0].bb_width == 20.0);
    CHECK(rows[0].conf == 1.0);
}

TEST_CASE("tracker coasts through missing peaks on flow") {
    Tracker tracker(small_config());
    const auto flow = constant_flow(200, 100, 2.0f, 0.0f);

    int frame = 1;
    for (int x = 50; x <= 58; x += 2, ++frame) {
        const Peak p{x, 50, 1.0f};
        const auto rows = tracker.step(std::span(&p, 1), frame == 1 ? FlowField() : flow, frame);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].id == 0);
    }
    // two frames with the peak missing: the track coasts on predicted motion
    for (int miss = 0; miss < 2; ++miss, ++frame) {
        const auto rows = tracker.step({}, flow, frame);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].id == 0);
        CHECK(rows[0].bb_left + rows[0].bb_width / 2 == doctest::Approx(60.0 + 2.0 * miss));
        CHECK(tracker.tracks()[0].status == TrackStatus::Coasting);
    }
    // third miss drops the inferred state to 0 and terminates
    const auto rows = tracker.step({}, flow, frame);
    CHECK(rows.empty());
    CHECK(tracker.tracks()[0].status == TrackStatus::Terminated);
}

TEST_CASE("tracker revives a terminated track through the cascade") {
    Tracker tracker(small_config());
    const auto flow = constant_flow(400, 100, 3.0f, 0.0f);

    int frame = 1;
    int x = 50;
    for (; frame <= 6; ++frame, x += 3) {
        const Peak p{x, 50, 1.0f};
        tracker.step(std::span(&p, 1), frame == 1 ? FlowField() : flow, frame);
    }
    for (int miss = 0; miss < 8; ++miss, ++frame, x += 3) tracker.step({}, flow, frame);
    CHECK(tracker.tracks()[0].status == TrackStatus::Terminated);

    const Peak back{x, 50, 1.0f};
    const auto rows = tracker.step(std::span(&back, 1), flow, frame);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].id == 0); // same identity, no new track
    CHECK(tracker.tracks().size() == 1);
    CHECK(tracker.tracks()[0].status == TrackStatus::Active);
}

TEST_CASE("tracker drops tracks beyond the age horizon") {
    auto cfg = small_config();
    cfg.max_age = 4;
    Tracker tracker(cfg);
    const Peak p{50, 50, 1.0f};
    tracker.step(std::span(&p, 1), FlowField(), 1);
    int frame = 2;
    for (; frame <= 6; ++frame) tracker.step({}, FlowField(), frame);
    CHECK(tracker.tracks().empty());

    // a returning peak becomes a fresh identity
    const auto rows = tracker.step(std::span(&p, 1), FlowField(), frame);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].id == 1);
}

TEST_CASE("tracker is deterministic and never reuses ids") {
    SplitMix64 rng(77);
    std::vector<std::vector<Peak>> scenario(40);
    for (auto& frame_peaks : scenario) {
        const int n = rng.uniform_int(0, 5);
        for (int i = 0; i < n; ++i)
            frame_peaks.push_back(
                Peak{rng.uniform_int(10, 190), rng.uniform_int(10, 90), 1.0f});
    }

    auto run = [&]() {
        Tracker tracker(small_config());
        std::vector<DetectionRow> all;
        for (size_t f = 0; f < scenario.size(); ++f) {
            const auto rows = tracker.step(scenario[f], FlowField(), static_cast<int>(f) + 1);
            all.insert(all.end(), rows.begin(), rows.end());
        }
        return std::pair(all, tracker.next_id());
    };
    const auto [rows_a, ids_a] = run();
    const auto [rows_b, ids_b] = run();
    CHECK(rows_a == rows_b);
    CHECK(ids_a == ids_b);

    std::set<int> seen;
    for (const auto& r : rows_a) seen.insert(r.id);
    // every birth outputs at least once and ids are never reused
    CHECK(static_cast<int>(seen.size()) == ids_a);
    CHECK(seen.empty() == false);
    CHECK(*seen.rbegin() == ids_a - 1);
}

TEST_CASE("attach_detections maps responses to detections") {
    const Box responses[1] = {Box{50, 50, 20, 40}};
    DetectionRow det;
    det.frame = 1;
    det.id = 1;
    det.bb_left = 40;
    det.bb_top = 30;
    det.bb_width = 20;
    det.bb_height = 40;
    det.conf = 1;
    const auto res = attach_detections(responses, std::span(&det, 1), 20.0);
    CHECK(res.pairs == std::vector<std::pair<int, int>>{{0, 0}});
    CHECK(res.false_alarms.empty());
}

TEST_CASE("attach_detections flags far detections as false alarms") {
    const Box responses[1] = {Box{50, 50, 20, 40}};
    DetectionRow det;
    det.frame = 1;
    det.bb_left = 540;
    det.bb_top = 530;
    det.bb_width = 20;
    det.bb_height = 40;
    det.conf = 1;
    const auto res = attach_detections(responses, std::span(&det, 1), 20.0);
    CHECK(res.pairs.empty());
    CHECK(res.false_alarms == std::vector<int>{0});
    CHECK(res.unmatched_responses == std::vector<int>{0});
}

TEST_CASE("attach_detections equals the exhaustive optimum") {
    const Box responses[3] = {Box{10, 10, 10, 10}, Box{60, 10, 10, 10}, Box{110, 10, 10, 10}};
    std::vector<DetectionRow> dets;
    for (double cx : {112.0, 11.0, 59.0}) {
        DetectionRow d;
        d.frame = 1;
        d.bb_left = cx - 5;
        d.bb_top = 5;
        d.bb_width = 10;
        d.bb_height = 10;
        d.conf = 1;
        dets.push_back(d);
    }
    const auto res = attach_detections(responses, dets, 30.0);

    CostMatrix costs(3, 3, kForbiddenCost);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double d = center_distance(responses[i], dets[j].box());
            if (d <= 30.0) costs.at(i, j) = d;
        }
    CHECK(res.pairs == oracle::brute_force_assignment(costs).pairs);
    CHECK(res.pairs == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 0}});
}
