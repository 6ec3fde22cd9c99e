// Drives the rmot binary end to end: synth -> track -> eval -> render, plus
// error paths and the on-line prefix property.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rmot/mot_io.hpp"
#include "rmot/synth.hpp"

namespace fs = std::filesystem;
using namespace rmot;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    std::printf("  [%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
    if (!ok) ++failures;
}

int run(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

double parse_metric(const std::string& line, const std::string& key) {
    const auto pos = line.find(key + "=");
    if (pos == std::string::npos) return -1e9;
    return std::atof(line.c_str() + pos + key.size() + 1);
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: rmot_cli_test <rmot-binary> <demo-scene>\n");
        return 1;
    }
    const std::string rmot = argv[1];
    const std::string scene = argv[2];
    const fs::path work = fs::temp_directory_path() / "rmot_cli_test";
    fs::remove_all(work);
    fs::create_directories(work);
    const std::string tracker_flags = " --init-w 30 --init-h 50";

    std::printf("synth:\n");
    const fs::path corpus = work / "corpus";
    check(run(rmot + " synth " + scene + " " + corpus.string() + " > " +
              (work / "synth.log").string()) == 0,
          "synth exits 0");
    check(fs::exists(corpus / "gt.txt"), "gt.txt written");
    check(fs::exists(corpus / "seqinfo.ini"), "seqinfo.ini written");
    check(fs::exists(map_path(corpus, 60)), "maps written");
    check(fs::exists(flow_path(corpus, 59)), "flow written");

    const fs::path corpus2 = work / "corpus2";
    run(rmot + " synth " + scene + " " + corpus2.string() + " > /dev/null");
    check(slurp(corpus / "gt.txt") == slurp(corpus2 / "gt.txt"), "synth is deterministic (gt)");
    check(slurp(map_path(corpus, 30)) == slurp(map_path(corpus2, 30)),
          "synth is deterministic (maps)");

    std::printf("track + eval:\n");
    const fs::path result = work / "result.txt";
    check(run(rmot + " track " + corpus.string() + " --out " + result.string() + tracker_flags) ==
              0,
          "track exits 0");
    check(run(rmot + " eval " + (corpus / "gt.txt").string() + " " + result.string() + " > " +
              (work / "eval.log").string()) == 0,
          "eval exits 0");
    std::ifstream eval_log(work / "eval.log");
    std::string line;
    std::getline(eval_log, line);
    const double mota = parse_metric(line, "mota");
    const double idsw = parse_metric(line, "idsw");
    check(mota >= 0.99, "demo corpus tracks at mota >= 0.99 (got " + line + ")");
    check(idsw == 0, "no identity switches on the demo corpus");

    std::printf("on-line prefix property:\n");
    {
        const fs::path prefix = work / "prefix";
        fs::create_directories(prefix / "maps");
        fs::create_directories(prefix / "flow");
        const int cut = 20;
        for (int f = 1; f <= cut; ++f) fs::copy_file(map_path(corpus, f), map_path(prefix, f));
        for (int f = 1; f < cut; ++f) fs::copy_file(flow_path(corpus, f), flow_path(prefix, f));
        auto info = read_seqinfo_file(corpus / "seqinfo.ini");
        info.seq_length = cut;
        write_seqinfo_file(prefix / "seqinfo.ini", info);

        const fs::path prefix_result = work / "prefix_result.txt";
        check(run(rmot + " track " + prefix.string() + " --out " + prefix_result.string() +
                  tracker_flags) == 0,
              "truncated corpus tracks");
        const auto full = read_mot_file(result).rows;
        const auto part = read_mot_file(prefix_result).rows;
        std::vector<DetectionRow> full_cut;
        for (const auto& r : full)
            if (r.frame <= cut) full_cut.push_back(r);
        check(full_cut == part, "result prefix is independent of later frames");
    }

    std::printf("render:\n");
    const fs::path img = work / "map.pgm";
    check(run(rmot + " render " + map_path(corpus, 1).string() + " --out " + img.string()) == 0,
          "render map exits 0");
    const std::string pgm = slurp(img);
    check(pgm.substr(0, 2) == "P5", "PGM header");
    check(pgm.find(static_cast<char>(255)) != std::string::npos, "unit peak renders to 255");
    const fs::path img2 = work / "map2.pgm";
    run(rmot + " render " + map_path(corpus, 1).string() + " --out " + img2.string());
    check(slurp(img) == slurp(img2), "render is deterministic");

    const fs::path overlay = work / "boxes.pgm";
    check(run(rmot + " render " + result.string() + " --out " + overlay.string() + " --seqinfo " +
              (corpus / "seqinfo.ini").string() + " --frame 10") == 0,
          "render boxes exits 0");

    std::printf("error paths:\n");
    check(run(rmot + " eval " + (work / "missing.txt").string() + " " + result.string() +
              " 2> /dev/null") == 2,
          "missing file exits 2");
    {
        const fs::path bad = work / "bad.scene";
        std::ofstream out(bad);
        out << "width=64\nheight=64\nframes=5\nobject = 4 4 10 10 4 4 0 0\n";
        out.close();
        check(run(rmot + " synth " + bad.string() + " " + (work / "badout").string() + " 2> " +
                  (work / "bad.log").string()) == 2,
              "invalid scene exits 2");
        const std::string log = slurp(work / "bad.log");
        check(log.find("object 0") != std::string::npos, "error names the object index");
    }
    {
        // a corpus of all-zero maps yields an empty result file and exit 0
        const fs::path empty_scene = work / "empty.scene";
        std::ofstream out(empty_scene);
        out << "name=empty\nwidth=64\nheight=64\nframes=4\n";
        out.close();
        const fs::path empty_corpus = work / "empty_corpus";
        check(run(rmot + " synth " + empty_scene.string() + " " + empty_corpus.string() +
                  " > /dev/null") == 0,
              "empty scene synth exits 0");
        const fs::path empty_result = work / "empty_result.txt";
        check(run(rmot + " track " + empty_corpus.string() + " --out " + empty_result.string()) ==
                  0,
              "empty maps track exits 0");
        check(slurp(empty_result).empty(), "empty maps produce an empty result");
    }

    std::printf("config file precedence:\n");
    {
        const fs::path cfg = work / "tracker.cfg";
        std::ofstream out(cfg);
        out << "init-w=30\ninit-h=50\n";
        out.close();
        const fs::path result_cfg = work / "result_cfg.txt";
        check(run(rmot + " track " + corpus.string() + " --out " + result_cfg.string() +
                  " --config " + cfg.string()) == 0,
              "config file accepted");
        check(slurp(result_cfg) == slurp(result), "config file matches equivalent flags");

        const fs::path bad_cfg = work / "tracker_bad.cfg";
        std::ofstream bad(bad_cfg);
        bad << "init-w=999\ninit-h=999\n";
        bad.close();
        const fs::path result_override = work / "result_override.txt";
        check(run(rmot + " track " + corpus.string() + " --out " + result_override.string() +
                  " --config " + bad_cfg.string() + tracker_flags) == 0,
              "flags alongside config accepted");
        check(slurp(result_override) == slurp(result), "command-line flags override the file");
    }

    std::printf("corpus root + multi-sequence:\n");
    {
        // a bare sequence name resolves under RMOT_CORPUS_ROOT
        const fs::path env_result = work / "result_env.txt";
        check(run("RMOT_CORPUS_ROOT=" + work.string() + " " + rmot +
                  " track corpus --out " + env_result.string() + tracker_flags) == 0,
              "corpus resolves under RMOT_CORPUS_ROOT");
        check(slurp(env_result) == slurp(result), "env-resolved run matches");

        const fs::path multi_out = work / "multi";
        fs::create_directories(multi_out);
        check(run(rmot + " track " + corpus.string() + " " + (work / "empty_corpus").string() +
                  " --out " + multi_out.string() + " --jobs 2" + tracker_flags) == 0,
              "multi-sequence track exits 0");
        check(slurp(multi_out / "demo.txt") == slurp(result), "fanned-out demo result matches");
        check(fs::exists(multi_out / "empty.txt") && slurp(multi_out / "empty.txt").empty(),
              "fanned-out empty result written");
    }

    if (failures == 0) std::printf("cli end-to-end: all checks passed\n");
    return failures == 0 ? 0 : 1;
}
