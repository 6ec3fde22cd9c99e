#include "rmot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "rmot/assignment.hpp"
#include "rmot/geometry.hpp"

namespace rmot {
namespace {

using FrameIndex = std::map<int, std::map<int, Box>>; // frame -> id -> box

FrameIndex index_rows(std::span<const DetectionRow> rows) {
    FrameIndex idx;
    for (const auto& r : rows) idx[r.frame][r.id] = r.box();
    return idx;
}

} // namespace

ClearResult clear_mot(std::span<const DetectionRow> gt, std::span<const DetectionRow> hyp,
                      double iou_match) {
    if (gt.empty()) throw DomainError("clear_mot: ground truth must not be empty");

    const FrameIndex gt_idx = index_rows(gt);
    const FrameIndex hyp_idx = index_rows(hyp);

    std::set<int> frames;
    for (const auto& [f, _] : gt_idx) frames.insert(f);
    for (const auto& [f, _] : hyp_idx) frames.insert(f);

    ClearResult res;
    res.gt_count = static_cast<long>(gt.size());

    std::map<int, int> carry;       // gt id -> hyp id, persisted correspondences
    std::map<int, int> last_match;  // gt id -> hyp id at its last matched frame
    double iou_sum = 0;
    long match_count = 0;
    static const std::map<int, Box> kNoBoxes;

    for (int f : frames) {
        auto git = gt_idx.find(f);
        auto hit = hyp_idx.find(f);
        const auto& gts = git != gt_idx.end() ? git->second : kNoBoxes;
        const auto& hyps = hit != hyp_idx.end() ? hit->second : kNoBoxes;

        std::vector<FrameMatch> matches;
        std::set<int> used_gt, used_hyp;

        // Carry over yesterday's pairs while they still overlap enough.
        for (const auto& [g, h] : carry) {
            auto gb = gts.find(g);
            auto hb = hyps.find(h);
            if (gb == gts.end() || hb == hyps.end()) continue;
            const double v = iou(gb->second, hb->second);
            if (v >= iou_match) {
                matches.push_back({g, h, v});
                used_gt.insert(g);
                used_hyp.insert(h);
            }
        }

        // Re-match the remainder.
        std::vector<int> g_ids, h_ids;
        for (const auto& [g, _] : gts)
            if (!used_gt.count(g)) g_ids.push_back(g);
        for (const auto& [h, _] : hyps)
            if (!used_hyp.count(h)) h_ids.push_back(h);
        if (!g_ids.empty() && !h_ids.empty()) {
            CostMatrix costs(static_cast<int>(g_ids.size()), static_cast<int>(h_ids.size()),
                             kForbiddenCost);
            for (int i = 0; i < costs.rows; ++i)
                for (int j = 0; j < costs.cols; ++j) {
                    const double v = iou(gts.at(g_ids[i]), hyps.at(h_ids[j]));
                    if (v >= iou_match) costs.at(i, j) = 1.0 - v;
                }
            for (const auto& [i, j] : solve_assignment(costs).pairs)
                matches.push_back({g_ids[i], h_ids[j], iou(gts.at(g_ids[i]), hyps.at(h_ids[j]))});
        }

        res.fp += static_cast<long>(hyps.size()) - static_cast<long>(matches.size());
        res.fn += static_cast<long>(gts.size()) - static_cast<long>(matches.size());

        carry.clear();
        std::sort(matches.begin(), matches.end(),
                  [](const FrameMatch& a, const FrameMatch& b) { return a.gt_id < b.gt_id; });
        for (const auto& m : matches) {
            auto it = last_match.find(m.gt_id);
            if (it != last_match.end() && it->second != m.hyp_id) ++res.idsw;
            last_match[m.gt_id] = m.hyp_id;
            carry[m.gt_id] = m.hyp_id;
            iou_sum += m.iou;
            ++match_count;
        }
        if (!matches.empty()) res.matching[f] = std::move(matches);
    }

    // Fragmentations: interruptions of a trajectory's matched runs.
    std::map<int, std::vector<int>> gt_frames;
    for (const auto& r : gt) gt_frames[r.id].push_back(r.frame);
    for (auto& [id, fs] : gt_frames) {
        std::sort(fs.begin(), fs.end());
        int runs = 0;
        bool in_run = false;
        for (int f : fs) {
            bool matched = false;
            auto it = res.matching.find(f);
            if (it != res.matching.end())
                for (const auto& m : it->second)
                    if (m.gt_id == id) {
                        matched = true;
                        break;
                    }
            if (matched && !in_run) ++runs;
            in_run = matched;
        }
        if (runs > 1) res.frag += runs - 1;
    }

    res.mota = 1.0 - static_cast<double>(res.fp + res.fn + res.idsw) / res.gt_count;
    res.motp = match_count > 0 ? iou_sum / match_count : 0.0;
    return res;
}

IdentityResult identity_metrics(std::span<const DetectionRow> gt, std::span<const DetectionRow> hyp,
                                double iou_match) {
    if (gt.empty()) throw DomainError("identity_metrics: ground truth must not be empty");

    std::vector<int> gt_ids, hyp_ids;
    std::map<int, long> gt_len, hyp_len;
    for (const auto& r : gt)
        if (++gt_len[r.id] == 1) gt_ids.push_back(r.id);
    for (const auto& r : hyp)
        if (++hyp_len[r.id] == 1) hyp_ids.push_back(r.id);

    IdentityResult res;
    const long gt_total = static_cast<long>(gt.size());
    const long hyp_total = static_cast<long>(hyp.size());
    if (hyp_ids.empty()) {
        res.idf1 = res.idp = res.idr = 0;
        return res;
    }

    // Frame-gated overlap counts between every trajectory pair.
    std::map<int, int> gpos, hpos;
    for (size_t i = 0; i < gt_ids.size(); ++i) gpos[gt_ids[i]] = static_cast<int>(i);
    for (size_t j = 0; j < hyp_ids.size(); ++j) hpos[hyp_ids[j]] = static_cast<int>(j);
    std::vector<long> overlap(gt_ids.size() * hyp_ids.size(), 0);

    const FrameIndex gt_idx = index_rows(gt);
    const FrameIndex hyp_idx = index_rows(hyp);
    for (const auto& [f, gts] : gt_idx) {
        auto hit = hyp_idx.find(f);
        if (hit == hyp_idx.end()) continue;
        for (const auto& [g, gb] : gts)
            for (const auto& [h, hb] : hit->second)
                if (iou(gb, hb) >= iou_match)
                    ++overlap[gpos[g] * hyp_ids.size() + hpos[h]];
    }

    // Maximize total overlap over one-to-one trajectory pairings.
    CostMatrix costs(static_cast<int>(gt_ids.size()), static_cast<int>(hyp_ids.size()));
    for (int i = 0; i < costs.rows; ++i)
        for (int j = 0; j < costs.cols; ++j)
            costs.at(i, j) = -static_cast<double>(overlap[i * hyp_ids.size() + j]);
    long idtp = 0;
    for (const auto& [i, j] : solve_assignment(costs).pairs)
        idtp += overlap[i * hyp_ids.size() + j];

    res.idtp = idtp;
    res.idp = hyp_total > 0 ? static_cast<double>(idtp) / hyp_total : 0.0;
    res.idr = static_cast<double>(idtp) / gt_total;
    res.idf1 = 2.0 * static_cast<double>(idtp) / (gt_total + hyp_total);
    return res;
}

TrajectoryStats trajectory_stats(const FrameMatching& matching, std::span<const DetectionRow> gt) {
    std::map<int, long> length, covered;
    for (const auto& r : gt) ++length[r.id];
    for (const auto& [f, matches] : matching)
        for (const auto& m : matches) ++covered[m.gt_id];

    TrajectoryStats s;
    if (length.empty()) return s;
    long mt = 0, ml = 0;
    for (const auto& [id, len] : length) {
        const double cov = static_cast<double>(covered.count(id) ? covered[id] : 0) / len;
        if (cov >= 0.8) ++mt;
        if (cov < 0.2) ++ml;
    }
    s.mt = static_cast<double>(mt) / length.size();
    s.ml = static_cast<double>(ml) / length.size();
    return s;
}

MetricsReport evaluate(std::span<const DetectionRow> gt, std::span<const DetectionRow> hyp,
                       const EvalOptions& opts) {
    std::vector<DetectionRow> filtered;
    if (opts.gt_min_visibility >= 0) {
        for (const auto& r : gt)
            if (r.visibility >= opts.gt_min_visibility) filtered.push_back(r);
        gt = filtered;
    }

    const ClearResult clear = clear_mot(gt, hyp, opts.iou_match);
    const IdentityResult ident = identity_metrics(gt, hyp, opts.iou_match);
    const TrajectoryStats traj = trajectory_stats(clear.matching, gt);

    MetricsReport r;
    r.mota = clear.mota;
    r.motp = clear.motp;
    r.fp = clear.fp;
    r.fn = clear.fn;
    r.idsw = clear.idsw;
    r.frag = clear.frag;
    r.gt_count = clear.gt_count;
    r.idf1 = ident.idf1;
    r.idp = ident.idp;
    r.idr = ident.idr;
    r.mt = traj.mt;
    r.ml = traj.ml;
    return r;
}

MetricsReport evaluate_files(const std::filesystem::path& gt_path,
                             const std::filesystem::path& result_path, const EvalOptions& opts) {
    const auto gt = read_mot_file(gt_path);
    const auto hyp = read_mot_file(result_path);
    return evaluate(gt.rows, hyp.rows, opts);
}

std::string format_report_line(const MetricsReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "mota=%.4f motp=%.4f idf1=%.4f idp=%.4f idr=%.4f mt=%.4f ml=%.4f "
                  "fp=%ld fn=%ld idsw=%ld frag=%ld gt=%ld",
                  r.mota, r.motp, r.idf1, r.idp, r.idr, r.mt, r.ml, r.fp, r.fn, r.idsw, r.frag,
                  r.gt_count);
    return buf;
}

std::string format_report_table(const MetricsReport& r) {
    std::ostringstream out;
    char line[256];
    out << "metric      value\n";
    auto row = [&](const char* name, double v) {
        std::snprintf(line, sizeof(line), "%-10s %8.4f\n", name, v);
        out << line;
    };
    auto irow = [&](const char* name, long v) {
        std::snprintf(line, sizeof(line), "%-10s %8ld\n", name, v);
        out << line;
    };
    row("MOTA", r.mota);
    row("MOTP", r.motp);
    row("IDF1", r.idf1);
    row("IDP", r.idp);
    row("IDR", r.idr);
    row("MT", r.mt);
    row("ML", r.ml);
    irow("FP", r.fp);
    irow("FN", r.fn);
    irow("IDsw", r.idsw);
    irow("Frag", r.frag);
    irow("GT", r.gt_count);
    return out.str();
}

} // namespace rmot
