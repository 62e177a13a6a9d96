#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "jtrack/tracking.hpp"

namespace jtrack {

void CorruptionScript::validate() const {
    if (length < 1) throw std::invalid_argument("script: length must be >= 1");
    if (frame_size < 16) throw std::invalid_argument("script: frame_size must be >= 16");
    if (target_size < 4 || target_size >= frame_size / 2)
        throw std::invalid_argument("script: degenerate target size");
    for (const auto& o : occlusions) {
        if (o.start < 1 || o.end > length || o.start > o.end)
            throw std::invalid_argument("script: occlusion interval outside [1, length]");
        if (!(o.fraction >= 0.0 && o.fraction <= 1.0))
            throw std::invalid_argument("script: occlusion fraction outside [0, 1]");
    }
    if (jitter_std < 0 || drift_rate < 0 || drift_rate > 1 || noise_std < 0)
        throw std::invalid_argument("script: noise parameters out of range");
}

namespace {

Grid random_field(std::mt19937_64& rng, int rows, int cols, int blur_passes) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Grid g(rows, cols);
    for (double& v : g.v) v = uni(rng);
    // box blur smooths the texture; more passes -> lower contrast
    for (int pass = 0; pass < blur_passes; ++pass) {
        Grid out(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                double acc = 0.0;
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int rr = std::clamp(r + dr, 0, rows - 1);
                        const int cc = std::clamp(c + dc, 0, cols - 1);
                        acc += g.at(rr, cc);
                    }
                out.at(r, c) = acc / 9.0;
            }
        g = std::move(out);
    }
    return g;
}

void quantize(Grid& g) {
    for (double& v : g.v) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
}

}  // namespace

Sequence generate_sequence(const CorruptionScript& script, std::uint64_t seed) {
    script.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int fs = script.frame_size;
    const int ts = script.target_size;
    Grid background = random_field(rng, fs, fs, 3);
    Grid target = random_field(rng, ts, ts, 0);  // sharp texture, distinct autocorrelation peak

    // Random-walk motion with momentum, kept inside a margin so the target
    // (and most of the search region) stays in frame.
    const double margin = ts;
    const double lo = margin, hi = fs - ts - margin;
    double px = 0.5 * (lo + hi), py = 0.5 * (lo + hi);
    double vx = 0.0, vy = 0.0;

    Sequence seq;
    seq.corruption_labels.emplace();
    for (int t = 1; t <= script.length; ++t) {
        vx = 0.85 * vx + 0.9 * (uni(rng) - 0.5);
        vy = 0.85 * vy + 0.9 * (uni(rng) - 0.5);
        px = std::clamp(px + vx, lo, hi);
        py = std::clamp(py + vy, lo, hi);
        const int gx = static_cast<int>(std::lround(px));
        const int gy = static_cast<int>(std::lround(py));

        double jx = 0.0, jy = 0.0;
        if (script.jitter_std > 0.0) {
            jx = script.jitter_std * gauss(rng);
            jy = script.jitter_std * gauss(rng);
        }
        const int rx = std::clamp(gx + static_cast<int>(std::lround(jx)), 0, fs - ts);
        const int ry = std::clamp(gy + static_cast<int>(std::lround(jy)), 0, fs - ts);

        if (script.drift_rate > 0.0) {
            for (double& v : target.v)
                v = std::clamp((1.0 - script.drift_rate) * v + script.drift_rate * uni(rng), 0.0,
                               1.0);
        }

        Grid frame = background;
        for (int r = 0; r < ts; ++r)
            for (int c = 0; c < ts; ++c) frame.at(ry + r, rx + c) = target.at(r, c);

        bool occluded = false;
        for (const auto& o : script.occlusions) {
            if (t < o.start || t > o.end || o.fraction <= 0.0) continue;
            occluded = true;
            const int cover = static_cast<int>(std::ceil(o.fraction * ts));
            for (int r = 0; r < cover; ++r)
                for (int c = 0; c < ts; ++c) {
                    double v = 0.5;
                    if (o.mode == CorruptionScript::FillMode::background)
                        v = background.at(ry + r, rx + c);
                    else if (o.mode == CorruptionScript::FillMode::noise)
                        v = uni(rng);
                    frame.at(ry + r, rx + c) = v;
                }
        }

        if (script.noise_std > 0.0)
            for (double& v : frame.v) v = std::clamp(v + script.noise_std * gauss(rng), 0.0, 1.0);

        quantize(frame);
        seq.frames.push_back(std::move(frame));
        seq.ground_truth.push_back(
            Rect{static_cast<double>(gx), static_cast<double>(gy), double(ts), double(ts)});
        const bool jittered = std::max(std::abs(rx - gx), std::abs(ry - gy)) >
                              kJitterCorruptThreshold;
        seq.corruption_labels->push_back(occluded || jittered ? 1 : 0);
    }
    return seq;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed number '" + s + "' in " + what);
    }
}

int parse_int(const std::string& s, const std::string& what) {
    const double v = parse_double(s, what);
    if (v != std::floor(v)) throw std::invalid_argument("expected integer in " + what);
    return static_cast<int>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

CorruptionScript parse_script_text(const std::string& text, const std::string& origin) {
    CorruptionScript script;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string where = origin + ":" + std::to_string(lineno);

        if (key == "length") {
            script.length = parse_int(value, where);
        } else if (key == "frame_size") {
            script.frame_size = parse_int(value, where);
        } else if (key == "target_size") {
            script.target_size = parse_int(value, where);
        } else if (key == "jitter_std") {
            script.jitter_std = parse_double(value, where);
        } else if (key == "drift_rate") {
            script.drift_rate = parse_double(value, where);
        } else if (key == "noise_std") {
            script.noise_std = parse_double(value, where);
        } else if (key == "occlusion") {
            const auto parts = split(value, ':');
            if (parts.size() != 4)
                throw std::invalid_argument(where + ": occlusion wants start:end:fraction:mode");
            CorruptionScript::Occlusion o;
            o.start = parse_int(trim(parts[0]), where);
            o.end = parse_int(trim(parts[1]), where);
            o.fraction = parse_double(trim(parts[2]), where);
            const std::string mode = trim(parts[3]);
            if (mode == "background")
                o.mode = CorruptionScript::FillMode::background;
            else if (mode == "noise")
                o.mode = CorruptionScript::FillMode::noise;
            else if (mode == "gray")
                o.mode = CorruptionScript::FillMode::gray;
            else
                throw std::invalid_argument(where + ": unknown fill mode '" + mode + "'");
            script.occlusions.push_back(o);
        } else {
            throw std::invalid_argument(where + ": unknown key '" + key + "'");
        }
    }
    script.validate();
    return script;
}

CorruptionScript parse_script(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read script " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_script_text(buf.str(), path.string());
}

namespace {

void write_pgm(const Grid& g, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "P5\n" << g.cols << ' ' << g.rows << "\n255\n";
    std::vector<unsigned char> row(g.cols);
    for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c)
            row[c] = static_cast<unsigned char>(
                std::lround(std::clamp(g.at(r, c), 0.0, 1.0) * 255.0));
        os.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
}

int read_pnm_token(std::istream& is, const std::filesystem::path& path) {
    // skips whitespace and '#' comments per the PNM header grammar
    while (true) {
        int ch = is.peek();
        if (ch == '#') {
            std::string junk;
            std::getline(is, junk);
        } else if (std::isspace(ch)) {
            is.get();
        } else {
            break;
        }
    }
    int value = 0;
    if (!(is >> value)) throw std::runtime_error("unreadable image header: " + path.string());
    return value;
}

Grid read_pgm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read image " + path.string());
    std::string magic;
    is >> magic;
    if (magic != "P5" && magic != "P2")
        throw std::runtime_error("unsupported image format (want PGM P5/P2): " + path.string());
    const int cols = read_pnm_token(is, path);
    const int rows = read_pnm_token(is, path);
    const int maxval = read_pnm_token(is, path);
    if (cols < 1 || rows < 1 || maxval < 1 || maxval > 65535)
        throw std::runtime_error("unreadable image: " + path.string());

    Grid g(rows, cols);
    if (magic == "P2") {
        for (double& v : g.v) {
            int pix = 0;
            if (!(is >> pix)) throw std::runtime_error("truncated image: " + path.string());
            v = static_cast<double>(pix) / maxval;
        }
        return g;
    }
    is.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(static_cast<size_t>(rows) * cols * bytes);
    is.read(reinterpret_cast<char*>(raw.data()), raw.size());
    if (static_cast<size_t>(is.gcount()) != raw.size())
        throw std::runtime_error("truncated image: " + path.string());
    for (size_t i = 0; i < g.v.size(); ++i) {
        const int pix = bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
        g.v[i] = static_cast<double>(pix) / maxval;
    }
    return g;
}

std::string frame_name(int index1) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d.pgm", index1);
    return buf;
}

}  // namespace

void write_sequence(const Sequence& seq, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "img", ec);
    if (ec) throw std::runtime_error("cannot create " + (dir / "img").string());

    for (int i = 0; i < seq.size(); ++i) write_pgm(seq.frames[i], dir / "img" / frame_name(i + 1));

    std::ofstream gt(dir / "groundtruth_rect.txt");
    if (!gt) throw std::runtime_error("cannot write " + (dir / "groundtruth_rect.txt").string());
    char buf[160];
    for (const Rect& r : seq.ground_truth) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", r.x, r.y, r.w, r.h);
        gt << buf;
    }

    if (seq.corruption_labels) {
        std::ofstream lb(dir / "corruption_labels.txt");
        if (!lb)
            throw std::runtime_error("cannot write " + (dir / "corruption_labels.txt").string());
        for (unsigned char flag : *seq.corruption_labels) lb << int(flag) << '\n';
    }
}

Sequence load_sequence(const std::filesystem::path& dir) {
    const auto img_dir = dir / "img";
    if (!std::filesystem::is_directory(img_dir))
        throw std::runtime_error("sequence directory lacks img/: " + dir.string());

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(img_dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no image files in " + img_dir.string());

    Sequence seq;
    for (const auto& f : files) seq.frames.push_back(read_pgm(f));

    const auto gt_path = dir / "groundtruth_rect.txt";
    std::ifstream gt(gt_path);
    if (!gt) throw std::runtime_error("cannot read " + gt_path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(gt, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        // commas, tabs and spaces are interchangeable separators
        for (char& ch : line)
            if (ch == ',' || ch == '\t') ch = ' ';
        std::istringstream fields(line);
        Rect r;
        if (!(fields >> r.x >> r.y >> r.w >> r.h))
            throw std::runtime_error(gt_path.string() + ":" + std::to_string(lineno) +
                                     ": unparsable rectangle");
        std::string extra;
        if (fields >> extra)
            throw std::runtime_error(gt_path.string() + ":" + std::to_string(lineno) +
                                     ": trailing fields");
        if (!(r.w > 0 && r.h > 0))
            throw std::runtime_error(gt_path.string() + ":" + std::to_string(lineno) +
                                     ": non-positive extent");
        seq.ground_truth.push_back(r);
    }
    if (seq.ground_truth.size() != seq.frames.size())
        throw std::runtime_error(dir.string() + ": " + std::to_string(seq.frames.size()) +
                                 " images but " + std::to_string(seq.ground_truth.size()) +
                                 " ground-truth lines");
    return seq;
}

}  // namespace jtrack
