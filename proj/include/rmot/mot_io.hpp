#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rmot/errors.hpp"
#include "rmot/geometry.hpp"
#include "rmot/response_map.hpp"

namespace rmot {

// One row of a MOT-challenge table. Layout on disk:
//   frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z
// Ground-truth files carry visibility in column 9; detection/result files
// have -1 there, so the same parser serves both.
struct DetectionRow {
    int frame = 1;
    int id = -1;
    double bb_left = 0, bb_top = 0, bb_width = 0, bb_height = 0;
    double conf = -1;
    double visibility = -1;

    Box box() const { return box_from_ltwh(bb_left, bb_top, bb_width, bb_height); }
    bool operator==(const DetectionRow&) const = default;
};

struct SequenceInfo {
    std::string name;
    double frame_rate = 0;
    int seq_length = 0;
    int im_width = 0, im_height = 0;

    bool operator==(const SequenceInfo&) const = default;
};

// Dense per-pixel displacement grid, frame t-1 -> t, row-major.
struct FlowVec {
    float u = 0, v = 0;
    bool operator==(const FlowVec&) const = default;
};

struct FlowField {
    int width = 0, height = 0;
    std::vector<FlowVec> data;

    FlowField() = default;
    FlowField(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h) {}

    const FlowVec& at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    FlowVec& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    bool empty() const { return width == 0 || height == 0; }
    bool operator==(const FlowField&) const = default;
};

struct ParsedTable {
    std::vector<DetectionRow> rows; // sorted by (frame, id)
    int dropped = 0;                // rows rejected for non-positive box size
};

bool mot_row_order(const DetectionRow& a, const DetectionRow& b);

// Parses comma-separated rows (>= 7 fields). Missing trailing fields default
// to -1. Rows with non-positive box size are dropped and counted, malformed
// numerics raise ParseError with the line number.
ParsedTable parse_mot_table(std::istream& in);
ParsedTable parse_mot_table(const std::string& text);

// Emits rows in the fixed 10-column layout, reals with at least one decimal
// place, shortest round-tripping form. Validates invariants before writing.
void write_mot_table(std::ostream& out, std::span<const DetectionRow> rows);
std::string write_mot_table(std::span<const DetectionRow> rows);

ParsedTable read_mot_file(const std::filesystem::path& path);
void write_mot_file(const std::filesystem::path& path, std::span<const DetectionRow> rows);

std::map<int, std::vector<DetectionRow>> group_by_frame(std::span<const DetectionRow> rows);

// Middlebury .flo container: float magic 202021.25, int32 width/height, then
// width*height interleaved (u, v) float32, little-endian, row-major.
FlowField read_flow(const std::filesystem::path& path);
void write_flow(const std::filesystem::path& path, const FlowField& flow);

// Exact map container: "RMP1", uint32 width/height (LE), float32 values.
ResponseMap read_map(const std::filesystem::path& path);
void write_map(const std::filesystem::path& path, const ResponseMap& map);

// Lossy 8-bit visualization (binary PGM, sample = round(z * 255)).
void write_map_pgm(const std::filesystem::path& path, const ResponseMap& map);
std::vector<std::uint8_t> map_to_gray(const ResponseMap& map);

// INI-style key=value sequence metadata. Unknown keys and section headers are
// ignored; a missing required key raises ConfigError naming it.
SequenceInfo parse_seqinfo(std::istream& in);
SequenceInfo parse_seqinfo(const std::string& text);
std::string write_seqinfo(const SequenceInfo& info);
SequenceInfo read_seqinfo_file(const std::filesystem::path& path);
void write_seqinfo_file(const std::filesystem::path& path, const SequenceInfo& info);

} // namespace rmot
