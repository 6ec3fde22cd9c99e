#include "rmot/mot_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rmot {
namespace {

// Shortest decimal form that round-trips, with at least one decimal place so
// integral reals read back as reals.
std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double_field(const std::string& field, long line) {
    const std::string t = trim(field);
    if (t.empty()) throw ParseError("empty field", line);
    double value = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ParseError("malformed numeric field '" + t + "'", line);
    return value;
}

long parse_int_field(const std::string& field, long line) {
    const double v = parse_double_field(field, line);
    if (v != std::floor(v)) throw ParseError("expected integer field '" + trim(field) + "'", line);
    return static_cast<long>(v);
}

void validate_row(const DetectionRow& r) {
    if (r.frame < 1) throw DomainError("mot row: frame must be >= 1");
    if (r.bb_width <= 0 || r.bb_height <= 0) throw DomainError("mot row: box size must be positive");
    if (!(r.visibility == -1 || (r.visibility >= 0 && r.visibility <= 1)))
        throw DomainError("mot row: visibility must be in [0,1] or -1");
}

} // namespace

bool mot_row_order(const DetectionRow& a, const DetectionRow& b) {
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.id < b.id;
}

ParsedTable parse_mot_table(std::istream& in) {
    ParsedTable out;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;

        std::vector<std::string> fields;
        std::string cur;
        std::istringstream ls(t);
        while (std::getline(ls, cur, ',')) fields.push_back(cur);
        if (fields.size() < 7) throw ParseError("expected at least 7 fields", lineno);

        DetectionRow r;
        r.frame = static_cast<int>(parse_int_field(fields[0], lineno));
        r.id = static_cast<int>(parse_int_field(fields[1], lineno));
        r.bb_left = parse_double_field(fields[2], lineno);
        r.bb_top = parse_double_field(fields[3], lineno);
        r.bb_width = parse_double_field(fields[4], lineno);
        r.bb_height = parse_double_field(fields[5], lineno);
        r.conf = parse_double_field(fields[6], lineno);
        if (fields.size() >= 9) {
            const double vis = parse_double_field(fields[8], lineno);
            r.visibility = (vis >= 0 && vis <= 1) ? vis : -1;
        }
        if (fields.size() >= 8) parse_double_field(fields[7], lineno);  // layout check only
        if (fields.size() >= 10) parse_double_field(fields[9], lineno);

        if (r.frame < 1) throw ParseError("frame index must be >= 1", lineno);
        if (r.bb_width <= 0 || r.bb_height <= 0) {
            ++out.dropped;
            continue;
        }
        out.rows.push_back(r);
    }
    std::stable_sort(out.rows.begin(), out.rows.end(), mot_row_order);
    return out;
}

ParsedTable parse_mot_table(const std::string& text) {
    std::istringstream in(text);
    return parse_mot_table(in);
}

void write_mot_table(std::ostream& out, std::span<const DetectionRow> rows) {
    for (const auto& r : rows) validate_row(r);
    for (const auto& r : rows) {
        out << r.frame << ',' << r.id << ',' << format_real(r.bb_left) << ','
            << format_real(r.bb_top) << ',' << format_real(r.bb_width) << ','
            << format_real(r.bb_height) << ',' << format_real(r.conf) << ",-1,"
            << (r.visibility == -1 ? std::string("-1") : format_real(r.visibility)) << ",-1\n";
    }
}

std::string write_mot_table(std::span<const DetectionRow> rows) {
    std::ostringstream out;
    write_mot_table(out, rows);
    return out.str();
}

ParsedTable read_mot_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    return parse_mot_table(in);
}

void write_mot_file(const std::filesystem::path& path, std::span<const DetectionRow> rows) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    write_mot_table(out, rows);
}

std::map<int, std::vector<DetectionRow>> group_by_frame(std::span<const DetectionRow> rows) {
    std::map<int, std::vector<DetectionRow>> grouped;
    for (const auto& r : rows) grouped[r.frame].push_back(r);
    return grouped;
}

namespace {

constexpr float kFlowMagic = 202021.25f;
constexpr char kMapTag[4] = {'R', 'M', 'P', '1'};

template <typename T>
void read_raw(std::istream& in, T* dst, size_t count, const char* what) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count * sizeof(T)));
    if (static_cast<size_t>(in.gcount()) != count * sizeof(T))
        throw FormatError(std::string("truncated ") + what);
}

template <typename T>
void write_raw(std::ostream& out, const T* src, size_t count) {
    out.write(reinterpret_cast<const char*>(src), static_cast<std::streamsize>(count * sizeof(T)));
}

} // namespace

FlowField read_flow(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    float magic = 0;
    read_raw(in, &magic, 1, "flow header");
    if (magic != kFlowMagic) throw FormatError("bad flow magic in " + path.string());
    std::int32_t w = 0, h = 0;
    read_raw(in, &w, 1, "flow header");
    read_raw(in, &h, 1, "flow header");
    if (w <= 0 || h <= 0 || static_cast<std::int64_t>(w) * h > (1ll << 30))
        throw FormatError("bad flow dimensions in " + path.string());
    FlowField f(w, h);
    static_assert(sizeof(FlowVec) == 8);
    read_raw(in, f.data.data(), f.data.size(), "flow payload");
    return f;
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
    if (flow.width < 1 || flow.height < 1 ||
        flow.data.size() != static_cast<size_t>(flow.width) * flow.height)
        throw DomainError("flow field: inconsistent dimensions");
    for (const auto& c : flow.data)
        if (!std::isfinite(c.u) || !std::isfinite(c.v))
            throw DomainError("flow field: components must be finite");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    const float magic = kFlowMagic;
    const std::int32_t w = flow.width, h = flow.height;
    write_raw(out, &magic, 1);
    write_raw(out, &w, 1);
    write_raw(out, &h, 1);
    write_raw(out, flow.data.data(), flow.data.size());
}

ResponseMap read_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    char tag[4];
    read_raw(in, tag, 4, "map header");
    if (std::memcmp(tag, kMapTag, 4) != 0) throw FormatError("bad map tag in " + path.string());
    std::uint32_t w = 0, h = 0;
    read_raw(in, &w, 1, "map header");
    read_raw(in, &h, 1, "map header");
    if (w == 0 || h == 0 || static_cast<std::uint64_t>(w) * h > (1ull << 30))
        throw FormatError("bad map dimensions in " + path.string());
    ResponseMap m(static_cast<int>(w), static_cast<int>(h));
    read_raw(in, m.z.data(), m.z.size(), "map payload");
    return m;
}

void write_map(const std::filesystem::path& path, const ResponseMap& map) {
    if (map.width < 1 || map.height < 1 ||
        map.z.size() != static_cast<size_t>(map.width) * map.height)
        throw DomainError("response map: inconsistent dimensions");
    for (float v : map.z)
        if (!(v >= 0.0f && v <= 1.0f)) throw DomainError("response map: values must be in [0,1]");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    const std::uint32_t w = static_cast<std::uint32_t>(map.width);
    const std::uint32_t h = static_cast<std::uint32_t>(map.height);
    write_raw(out, kMapTag, 4);
    write_raw(out, &w, 1);
    write_raw(out, &h, 1);
    write_raw(out, map.z.data(), map.z.size());
}

std::vector<std::uint8_t> map_to_gray(const ResponseMap& map) {
    std::vector<std::uint8_t> gray(map.z.size());
    for (size_t i = 0; i < map.z.size(); ++i)
        gray[i] = static_cast<std::uint8_t>(std::lround(map.z[i] * 255.0f));
    return gray;
}

void write_map_pgm(const std::filesystem::path& path, const ResponseMap& map) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out << "P5\n" << map.width << ' ' << map.height << "\n255\n";
    const auto gray = map_to_gray(map);
    write_raw(out, gray.data(), gray.size());
}

namespace {

std::map<std::string, std::string> parse_kv(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '[' || t[0] == ';' || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) continue;
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

const std::string& require_key(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("seqinfo: missing required key '" + key + "'");
    return it->second;
}

} // namespace

SequenceInfo parse_seqinfo(std::istream& in) {
    const auto kv = parse_kv(in);
    SequenceInfo info;
    info.name = require_key(kv, "name");
    info.frame_rate = parse_double_field(require_key(kv, "frameRate"), 0);
    info.seq_length = static_cast<int>(parse_int_field(require_key(kv, "seqLength"), 0));
    info.im_width = static_cast<int>(parse_int_field(require_key(kv, "imWidth"), 0));
    info.im_height = static_cast<int>(parse_int_field(require_key(kv, "imHeight"), 0));
    if (info.seq_length < 1) throw ConfigError("seqinfo: seqLength must be >= 1");
    if (info.im_width < 1 || info.im_height < 1)
        throw ConfigError("seqinfo: image dimensions must be >= 1");
    return info;
}

SequenceInfo parse_seqinfo(const std::string& text) {
    std::istringstream in(text);
    return parse_seqinfo(in);
}

std::string write_seqinfo(const SequenceInfo& info) {
    std::ostringstream out;
    out << "[Sequence]\n";
    out << "name=" << info.name << '\n';
    out << "frameRate=" << format_real(info.frame_rate) << '\n';
    out << "seqLength=" << info.seq_length << '\n';
    out << "imWidth=" << info.im_width << '\n';
    out << "imHeight=" << info.im_height << '\n';
    return out.str();
}

SequenceInfo read_seqinfo_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    return parse_seqinfo(in);
}

void write_seqinfo_file(const std::filesystem::path& path, const SequenceInfo& info) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    out << write_seqinfo(info);
}

} // namespace rmot
