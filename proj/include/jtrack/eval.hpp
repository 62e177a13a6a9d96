#ifndef JTRACK_EVAL_HPP
#define JTRACK_EVAL_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace jtrack {

struct Rect {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
    double center_x() const { return x + 0.5 * w; }
    double center_y() const { return y + 0.5 * h; }
    bool operator==(const Rect&) const = default;
};

struct WeightLogRow {
    long update_index = 0;  // frame at which the update ran
    long frame_index = 0;   // stored frame the row describes
    double alpha = 0.0;
    double rho = 0.0;
    double loss = 0.0;
};

// Everything a tracking run produces: trajectory, weight trajectories,
// timing, and the configuration needed to reproduce it.
struct TrackReport {
    std::vector<Rect> trajectory;
    std::vector<Rect> ground_truth;
    std::vector<unsigned char> lost;  // 1 when the estimate left the frame entirely
    std::vector<double> frame_ms;
    std::vector<WeightLogRow> weight_log;
    std::vector<std::pair<std::string, std::string>> config_echo;  // ordered key/value
};

namespace eval {

// area(a intersect b) / area(a union b); 0 for disjoint rectangles.
double iou(const Rect& a, const Rect& b);

// Percentage of frames whose IoU with ground truth strictly exceeds the
// threshold.
double overlap_precision(const TrackReport& report, double threshold);

// The canonical 21-point threshold grid 0.00, 0.05, ..., 1.00.
std::vector<double> success_thresholds();

// (threshold, OP) pairs over the canonical grid; non-increasing in threshold.
std::vector<std::pair<double, double>> success_curve(const TrackReport& report);

// Mean of the curve values with half-weight endpoints (trapezoid rule on the
// uniform grid). Result in [0, 100].
double auc(const std::vector<std::pair<double, double>>& curve);

double mean_ms_per_frame(const TrackReport& report);

enum class ReportFormat { csv, json };

// csv: report.csv + weights.csv + metrics.json in `dir`;
// json: a single report.json (metrics.json is emitted alongside for
// convenience). Reals survive a round trip to 1e-15 relative.
void export_report(const TrackReport& report, ReportFormat format,
                   const std::filesystem::path& dir);
TrackReport import_report(const std::filesystem::path& dir, ReportFormat format);

}  // namespace eval
}  // namespace jtrack

#endif
