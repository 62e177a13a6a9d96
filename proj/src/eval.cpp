#include "jtrack/eval.hpp"

#include <algorithm>
#include <stdexcept>

namespace jtrack::eval {

double iou(const Rect& a, const Rect& b) {
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

double overlap_precision(const TrackReport& report, double threshold) {
    if (report.trajectory.empty()) throw std::invalid_argument("overlap_precision: empty report");
    if (report.trajectory.size() != report.ground_truth.size())
        throw std::invalid_argument("overlap_precision: trajectory/ground-truth length mismatch");
    int hits = 0;
    for (size_t i = 0; i < report.trajectory.size(); ++i)
        if (iou(report.trajectory[i], report.ground_truth[i]) > threshold) ++hits;
    return 100.0 * hits / static_cast<double>(report.trajectory.size());
}

std::vector<double> success_thresholds() {
    std::vector<double> t(21);
    for (int i = 0; i <= 20; ++i) t[i] = 0.05 * i;
    return t;
}

std::vector<std::pair<double, double>> success_curve(const TrackReport& report) {
    std::vector<std::pair<double, double>> curve;
    for (double t : success_thresholds()) curve.emplace_back(t, overlap_precision(report, t));
    return curve;
}

double auc(const std::vector<std::pair<double, double>>& curve) {
    if (curve.size() < 2) throw std::invalid_argument("auc: need at least two curve points");
    double acc = 0.5 * (curve.front().second + curve.back().second);
    for (size_t i = 1; i + 1 < curve.size(); ++i) acc += curve[i].second;
    return acc / static_cast<double>(curve.size() - 1);
}

double mean_ms_per_frame(const TrackReport& report) {
    if (report.frame_ms.empty()) return 0.0;
    double acc = 0.0;
    for (double ms : report.frame_ms) acc += ms;
    return acc / static_cast<double>(report.frame_ms.size());
}

}  // namespace jtrack::eval
