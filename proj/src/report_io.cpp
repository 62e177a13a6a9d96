#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "jtrack/eval.hpp"

namespace jtrack::eval {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);  // exact round trip
    return buf;
}

void require_writable(std::ofstream& os, const std::filesystem::path& p) {
    if (!os) throw std::runtime_error("cannot write " + p.string());
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

ordered_json metrics_json(const TrackReport& report) {
    ordered_json m;
    m["op_50"] = overlap_precision(report, 0.5);
    m["auc"] = auc(success_curve(report));
    m["mean_ms_per_frame"] = mean_ms_per_frame(report);
    ordered_json cfg = ordered_json::object();
    for (const auto& [k, v] : report.config_echo) cfg[k] = v;
    m["config"] = cfg;
    return m;
}

void write_csv_tables(const TrackReport& report, const std::filesystem::path& dir) {
    {
        std::ofstream os(dir / "report.csv");
        require_writable(os, dir / "report.csv");
        os << "frame,x,y,w,h,gt_x,gt_y,gt_w,gt_h,lost,ms\n";
        for (size_t i = 0; i < report.trajectory.size(); ++i) {
            const Rect& t = report.trajectory[i];
            const Rect& g = report.ground_truth[i];
            os << (i + 1) << ',' << fmt(t.x) << ',' << fmt(t.y) << ',' << fmt(t.w) << ','
               << fmt(t.h) << ',' << fmt(g.x) << ',' << fmt(g.y) << ',' << fmt(g.w) << ','
               << fmt(g.h) << ',' << int(i < report.lost.size() ? report.lost[i] : 0) << ','
               << fmt(i < report.frame_ms.size() ? report.frame_ms[i] : 0.0) << '\n';
        }
    }
    {
        std::ofstream os(dir / "weights.csv");
        require_writable(os, dir / "weights.csv");
        os << "update_index,frame_index,alpha,rho,loss\n";
        for (const auto& row : report.weight_log)
            os << row.update_index << ',' << row.frame_index << ',' << fmt(row.alpha) << ','
               << fmt(row.rho) << ',' << fmt(row.loss) << '\n';
    }
    {
        std::ofstream os(dir / "metrics.json");
        require_writable(os, dir / "metrics.json");
        os << metrics_json(report).dump(2) << '\n';
    }
}

ordered_json rect_json(const Rect& r) { return ordered_json{r.x, r.y, r.w, r.h}; }

Rect rect_from_json(const ordered_json& j) {
    return Rect{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
                j.at(3).get<double>()};
}

void write_json_report(const TrackReport& report, const std::filesystem::path& dir) {
    ordered_json doc;
    doc["trajectory"] = ordered_json::array();
    for (const Rect& r : report.trajectory) doc["trajectory"].push_back(rect_json(r));
    doc["ground_truth"] = ordered_json::array();
    for (const Rect& r : report.ground_truth) doc["ground_truth"].push_back(rect_json(r));
    doc["lost"] = report.lost;
    doc["frame_ms"] = report.frame_ms;
    doc["weight_log"] = ordered_json::array();
    for (const auto& row : report.weight_log)
        doc["weight_log"].push_back(
            ordered_json{row.update_index, row.frame_index, row.alpha, row.rho, row.loss});
    ordered_json cfg = ordered_json::object();
    for (const auto& [k, v] : report.config_echo) cfg[k] = v;
    doc["config"] = cfg;
    doc["metrics"] = metrics_json(report);

    std::ofstream os(dir / "report.json");
    require_writable(os, dir / "report.json");
    os << doc.dump(2) << '\n';
}

TrackReport import_csv(const std::filesystem::path& dir) {
    TrackReport report;
    {
        std::ifstream is(dir / "report.csv");
        if (!is) throw std::runtime_error("cannot read " + (dir / "report.csv").string());
        std::string line;
        std::getline(is, line);  // header
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto f = split_csv(line);
            if (f.size() != 11)
                throw std::runtime_error("report.csv: malformed row: " + line);
            report.trajectory.push_back(
                Rect{std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4])});
            report.ground_truth.push_back(
                Rect{std::stod(f[5]), std::stod(f[6]), std::stod(f[7]), std::stod(f[8])});
            report.lost.push_back(static_cast<unsigned char>(std::stoi(f[9])));
            report.frame_ms.push_back(std::stod(f[10]));
        }
    }
    {
        std::ifstream is(dir / "weights.csv");
        if (!is) throw std::runtime_error("cannot read " + (dir / "weights.csv").string());
        std::string line;
        std::getline(is, line);
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto f = split_csv(line);
            if (f.size() != 5)
                throw std::runtime_error("weights.csv: malformed row: " + line);
            report.weight_log.push_back(WeightLogRow{std::stol(f[0]), std::stol(f[1]),
                                                     std::stod(f[2]), std::stod(f[3]),
                                                     std::stod(f[4])});
        }
    }
    {
        std::ifstream is(dir / "metrics.json");
        if (!is) throw std::runtime_error("cannot read " + (dir / "metrics.json").string());
        ordered_json m = ordered_json::parse(is);
        for (const auto& [k, v] : m.at("config").items())
            report.config_echo.emplace_back(k, v.get<std::string>());
    }
    return report;
}

TrackReport import_json(const std::filesystem::path& dir) {
    std::ifstream is(dir / "report.json");
    if (!is) throw std::runtime_error("cannot read " + (dir / "report.json").string());
    ordered_json doc = ordered_json::parse(is);

    TrackReport report;
    for (const auto& j : doc.at("trajectory")) report.trajectory.push_back(rect_from_json(j));
    for (const auto& j : doc.at("ground_truth")) report.ground_truth.push_back(rect_from_json(j));
    report.lost = doc.at("lost").get<std::vector<unsigned char>>();
    report.frame_ms = doc.at("frame_ms").get<std::vector<double>>();
    for (const auto& j : doc.at("weight_log"))
        report.weight_log.push_back(WeightLogRow{j.at(0).get<long>(), j.at(1).get<long>(),
                                                 j.at(2).get<double>(), j.at(3).get<double>(),
                                                 j.at(4).get<double>()});
    for (const auto& [k, v] : doc.at("config").items())
        report.config_echo.emplace_back(k, v.get<std::string>());
    return report;
}

}  // namespace

void export_report(const TrackReport& report, ReportFormat format,
                   const std::filesystem::path& dir) {
    if (report.trajectory.size() != report.ground_truth.size())
        throw std::invalid_argument("export_report: trajectory/ground-truth length mismatch");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (format == ReportFormat::csv) {
        write_csv_tables(report, dir);
    } else {
        write_json_report(report, dir);
        std::ofstream os(dir / "metrics.json");
        require_writable(os, dir / "metrics.json");
        os << metrics_json(report).dump(2) << '\n';
    }
}

TrackReport import_report(const std::filesystem::path& dir, ReportFormat format) {
    return format == ReportFormat::csv ? import_csv(dir) : import_json(dir);
}

}  // namespace jtrack::eval
