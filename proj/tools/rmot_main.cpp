#include <CLI11.hpp>

#include <atomic>
#include <functional>
#include <map>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "rmot/config.hpp"
#include "rmot/linker.hpp"
#include "rmot/metrics.hpp"
#include "rmot/mot_io.hpp"
#include "rmot/response_map.hpp"
#include "rmot/synth.hpp"

namespace fs = std::filesystem;
using namespace rmot;

namespace {

struct CliOptions {
    TrackerConfig cfg;
    std::uint64_t seed = 0;
    int jobs = 1;
    fs::path config_file;
    std::map<std::string, CLI::Option*> flags;

    // Precedence is defaults < config file < command-line flags: file values
    // only land where no flag was given.
    void apply_config_file() {
        if (config_file.empty()) return;
        std::ifstream in(config_file);
        if (!in) throw ConfigError("cannot open config file " + config_file.string());
        const std::map<std::string, std::function<void(double)>> setters = {
            {"l", [&](double v) { cfg.window_len = static_cast<int>(v); }},
            {"beta", [&](double v) { cfg.beta = v; }},
            {"nms-kernel", [&](double v) { cfg.nms_kernel = static_cast<int>(v); }},
            {"score-min", [&](double v) { cfg.score_min = v; }},
            {"max-peaks", [&](double v) { cfg.max_peaks = static_cast<int>(v); }},
            {"roi-size", [&](double v) { cfg.roi_size = static_cast<int>(v); }},
            {"iou-min", [&](double v) { cfg.iou_min = v; }},
            {"max-age", [&](double v) { cfg.max_age = static_cast<int>(v); }},
            {"alpha", [&](double v) { cfg.alpha = v; }},
            {"init-w", [&](double v) { cfg.init_w = v; }},
            {"init-h", [&](double v) { cfg.init_h = v; }},
            {"vis-min", [&](double v) { cfg.vis_min = v; }},
            {"seed", [&](double v) { seed = static_cast<std::uint64_t>(v); }},
            {"jobs", [&](double v) { jobs = static_cast<int>(v); }},
        };
        std::string line;
        long lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
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
            auto it = setters.find(key);
            if (it == setters.end())
                throw ConfigError("config file: unknown key '" + key + "'");
            auto flag = flags.find(key);
            if (flag != flags.end() && flag->second->count() > 0) continue; // flag wins
            try {
                it->second(std::stod(value));
            } catch (const std::exception&) {
                throw ParseError("config file: malformed value for '" + key + "'", lineno);
            }
        }
    }
};

void add_config_flags(CLI::App& app, CliOptions& opt) {
    opt.flags["l"] = app.add_option("--l", opt.cfg.window_len, "presence window length");
    opt.flags["beta"] = app.add_option("--beta", opt.cfg.beta, "positive-state proportion");
    opt.flags["nms-kernel"] =
        app.add_option("--nms-kernel", opt.cfg.nms_kernel, "local NMS kernel size (odd)");
    opt.flags["score-min"] =
        app.add_option("--score-min", opt.cfg.score_min, "peak detection threshold");
    opt.flags["max-peaks"] =
        app.add_option("--max-peaks", opt.cfg.max_peaks, "peak budget per frame");
    opt.flags["roi-size"] = app.add_option("--roi-size", opt.cfg.roi_size, "flow ROI side in px");
    opt.flags["iou-min"] = app.add_option("--iou-min", opt.cfg.iou_min, "association IOU gate");
    opt.flags["max-age"] =
        app.add_option("--max-age", opt.cfg.max_age, "cascade age horizon in frames");
    opt.flags["alpha"] = app.add_option("--alpha", opt.cfg.alpha, "kernel shape parameter");
    opt.flags["init-w"] = app.add_option("--init-w", opt.cfg.init_w, "newborn track width");
    opt.flags["init-h"] = app.add_option("--init-h", opt.cfg.init_h, "newborn track height");
    opt.flags["vis-min"] = app.add_option("--vis-min", opt.cfg.vis_min, "visibility cut for labels");
    opt.flags["seed"] = app.add_option("--seed", opt.seed, "random seed override");
    opt.flags["jobs"] = app.add_option("--jobs", opt.jobs, "worker threads for multi-sequence runs");
    app.add_option("--config", opt.config_file, "key=value config file (defaults < file < flags)");
}

// Sequence directories may be given relative to a corpus root.
fs::path resolve_dir(const fs::path& given) {
    if (fs::exists(given)) return given;
    if (const char* root = std::getenv("RMOT_CORPUS_ROOT")) {
        const fs::path alt = fs::path(root) / given;
        if (fs::exists(alt)) return alt;
    }
    return given;
}

struct SequenceLayout {
    fs::path maps, flow;
    int frames = 0;
    std::string name;
};

SequenceLayout locate_sequence(const fs::path& dir, const fs::path& flow_override) {
    SequenceLayout seq;
    const fs::path base = resolve_dir(dir);
    seq.maps = fs::exists(base / "maps") ? base / "maps" : base;
    seq.flow = flow_override.empty() ? (fs::exists(base / "flow") ? base / "flow" : seq.maps)
                                     : flow_override;
    seq.name = base.filename().string();

    if (fs::exists(base / "seqinfo.ini")) {
        const auto info = read_seqinfo_file(base / "seqinfo.ini");
        seq.frames = info.seq_length;
        seq.name = info.name;
    } else {
        int f = 0;
        while (fs::exists(seq.maps / map_path(".", f + 1).filename())) ++f;
        seq.frames = f;
    }
    if (seq.frames < 1) throw ConfigError("track: no frames found under " + base.string());
    return seq;
}

void track_sequence(const SequenceLayout& seq, const TrackerConfig& cfg, const fs::path& out) {
    std::ofstream os(out);
    if (!os) throw FormatError("cannot open " + out.string() + " for writing");

    Tracker tracker(cfg);
    const NmsConfig nms = cfg.nms();
    for (int f = 1; f <= seq.frames; ++f) {
        const fs::path mp = seq.maps / map_path(".", f).filename();
        if (!fs::exists(mp)) throw FormatError("track: missing map for frame " + std::to_string(f));
        const ResponseMap map = read_map(mp);
        const auto peaks = extract_peaks(map, nms);

        FlowField flow;
        if (f > 1) {
            const fs::path fp = seq.flow / flow_path(".", f - 1).filename();
            if (!fs::exists(fp))
                throw FormatError("track: missing flow for frame " + std::to_string(f));
            flow = read_flow(fp);
        }
        const auto rows = tracker.step(peaks, flow, f);
        write_mot_table(os, rows);
        os.flush(); // frame t is on disk before frame t+1 is read
    }
}

int cmd_synth(const fs::path& spec_path, const fs::path& out_dir, const CliOptions& opt) {
    SceneSpec spec = read_scene_spec(spec_path);
    if (opt.seed != 0) spec.seed = opt.seed;
    SceneTruth truth = generate_scene(spec);
    emit_labels(truth, opt.cfg.window_len, opt.cfg.beta, opt.cfg.vis_min, opt.cfg.alpha);
    export_scene(truth, out_dir);
    std::cout << "scene '" << spec.name << "': " << spec.objects.size() << " objects, "
              << spec.frames << " frames -> " << out_dir.string() << " (gt + " << spec.frames
              << " maps + " << spec.frames - 1 << " flow files)\n";
    return 0;
}

int cmd_track(const std::vector<fs::path>& dirs, const fs::path& flow_dir, const fs::path& out,
              const CliOptions& opt) {
    opt.cfg.validate();
    if (dirs.size() == 1) {
        const auto seq = locate_sequence(dirs[0], flow_dir);
        const fs::path target = fs::is_directory(out) ? out / (seq.name + ".txt") : out;
        track_sequence(seq, opt.cfg, target);
        return 0;
    }

    // several sequences fan out across workers, one tracker instance each
    if (!fs::is_directory(out))
        throw ConfigError("track: --out must be a directory for multiple sequences");
    std::vector<SequenceLayout> seqs;
    for (const auto& d : dirs) seqs.push_back(locate_sequence(d, flow_dir));

    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (size_t i = next++; i < seqs.size(); i = next++) {
            try {
                track_sequence(seqs[i], opt.cfg, out / (seqs[i].name + ".txt"));
            } catch (const std::exception& e) {
                std::scoped_lock lock(error_mutex);
                failed = true;
                error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::max(1, std::min<int>(opt.jobs, static_cast<int>(seqs.size())));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed) throw FormatError(error);
    return 0;
}

int cmd_eval(const fs::path& gt, const fs::path& result, double iou_match, double gt_min_vis) {
    EvalOptions opts;
    opts.iou_match = iou_match;
    opts.gt_min_visibility = gt_min_vis;
    const auto report = evaluate_files(gt, result, opts);
    std::cout << format_report_line(report) << '\n';
    std::cout << format_report_table(report);
    return 0;
}

int cmd_render(const fs::path& input, const fs::path& out, const fs::path& seqinfo, int frame) {
    if (input.extension() == ".rmp") {
        write_map_pgm(out, read_map(input));
        return 0;
    }
    if (seqinfo.empty())
        throw ConfigError("render: result tables need --seqinfo for the canvas size");
    const auto info = read_seqinfo_file(seqinfo);
    ResponseMap canvas(info.im_width, info.im_height);

    for (const auto& r : read_mot_file(input).rows) {
        if (r.frame != frame) continue;
        const float gray = static_cast<float>(64 + (r.id * 47) % 192) / 255.0f;
        const int x0 = std::max(static_cast<int>(std::lround(r.bb_left)), 0);
        const int y0 = std::max(static_cast<int>(std::lround(r.bb_top)), 0);
        const int x1 =
            std::min(static_cast<int>(std::lround(r.bb_left + r.bb_width)), info.im_width - 1);
        const int y1 =
            std::min(static_cast<int>(std::lround(r.bb_top + r.bb_height)), info.im_height - 1);
        if (x0 > x1 || y0 > y1) continue;
        for (int x = x0; x <= x1; ++x) {
            canvas.at(x, y0) = gray;
            canvas.at(x, y1) = gray;
        }
        for (int y = y0; y <= y1; ++y) {
            canvas.at(x0, y) = gray;
            canvas.at(x1, y) = gray;
        }
    }
    write_map_pgm(out, canvas);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"response-map multi-object tracking toolkit"};
    app.require_subcommand(1);

    CliOptions opt;

    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus from a scene spec");
    fs::path synth_spec, synth_out;
    synth->add_option("spec", synth_spec, "scene spec file")->required();
    synth->add_option("out", synth_out, "output corpus directory")->required();
    add_config_flags(*synth, opt);

    auto* track = app.add_subcommand("track", "run the tracker over map + flow files");
    std::vector<fs::path> track_dirs;
    fs::path track_flow, track_out;
    track->add_option("corpus", track_dirs, "corpus directory (or map directory)")->required();
    track->add_option("--flow", track_flow, "flow directory override");
    track->add_option("--out", track_out, "result file (directory for multiple sequences)")
        ->required();
    add_config_flags(*track, opt);

    auto* eval = app.add_subcommand("eval", "score a result file against ground truth");
    fs::path eval_gt, eval_result;
    double eval_iou = 0.5, eval_vis = -1;
    eval->add_option("gt", eval_gt, "ground-truth table")->required();
    eval->add_option("result", eval_result, "tracker result table")->required();
    eval->add_option("--iou-match", eval_iou, "matching threshold");
    eval->add_option("--gt-min-vis", eval_vis, "drop ground truth below this visibility");

    auto* render = app.add_subcommand("render", "render a map or result boxes to a PGM image");
    fs::path render_in, render_out, render_seqinfo;
    int render_frame = 1;
    render->add_option("input", render_in, "map (.rmp) or result table")->required();
    render->add_option("--out", render_out, "output image (binary PGM)")->required();
    render->add_option("--seqinfo", render_seqinfo, "sequence metadata for table rendering");
    render->add_option("--frame", render_frame, "frame to draw from a result table");

    try {
        app.parse(argc, argv);
        opt.apply_config_file();
        if (*synth) return cmd_synth(synth_spec, synth_out, opt);
        if (*track) return cmd_track(track_dirs, track_flow, track_out, opt);
        if (*eval) return cmd_eval(eval_gt, eval_result, eval_iou, eval_vis);
        if (*render) return cmd_render(render_in, render_out, render_seqinfo, render_frame);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
