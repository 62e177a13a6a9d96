#include "jtrack/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace jtrack::baselines {

std::vector<double> decay_weights(int frame_count, double gamma) {
    if (frame_count < 1) throw std::invalid_argument("decay_weights: frame_count must be >= 1");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("decay_weights: gamma must lie in [0, 1]");
    std::vector<double> alpha(static_cast<size_t>(frame_count));
    double total = 0.0;
    for (int k = 1; k <= frame_count; ++k) {
        // pow(0, 0) == 1 makes gamma == 1 a one-hot on the newest frame.
        alpha[k - 1] = std::pow(1.0 - gamma, static_cast<double>(frame_count - k));
        total += alpha[k - 1];
    }
    for (double& a : alpha) a /= total;
    return alpha;
}

void PsrConfig::validate() const {
    if (exclusion_radius < 0)
        throw std::invalid_argument("PsrConfig: exclusion_radius must be >= 0");
    if (std::isnan(threshold)) throw std::invalid_argument("PsrConfig: threshold is NaN");
}

namespace {

int wrapped_distance(int a, int b, int period) {
    int d = std::abs(a - b) % period;
    return std::min(d, period - d);
}

struct SidelobeStats {
    double peak = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    int count = 0;
};

SidelobeStats sidelobe_stats(const Grid& confidence, const PsrConfig& cfg) {
    cfg.validate();
    if (confidence.rows < 1 || confidence.cols < 1)
        throw std::invalid_argument("psr: empty confidence map");

    int pr = 0, pc = 0;
    double peak = confidence.at(0, 0);
    for (int r = 0; r < confidence.rows; ++r)
        for (int c = 0; c < confidence.cols; ++c)
            if (confidence.at(r, c) > peak) {
                peak = confidence.at(r, c);
                pr = r;
                pc = c;
            }

    std::vector<double> side;
    side.reserve(confidence.size());
    for (int r = 0; r < confidence.rows; ++r)
        for (int c = 0; c < confidence.cols; ++c) {
            const int dist = std::max(wrapped_distance(r, pr, confidence.rows),
                                      wrapped_distance(c, pc, confidence.cols));
            if (dist > cfg.exclusion_radius) side.push_back(confidence.at(r, c));
        }
    if (side.empty())
        throw std::invalid_argument("psr: exclusion radius leaves no sidelobe cells");

    SidelobeStats s;
    s.peak = peak;
    s.count = static_cast<int>(side.size());
    double sum = 0.0;
    for (double v : side) sum += v;
    s.mean = sum / s.count;
    double var = 0.0;  // two-pass population variance, stable under shifts
    for (double v : side) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / s.count);
    return s;
}

}  // namespace

double psr(const Grid& confidence, const PsrConfig& cfg) {
    const SidelobeStats s = sidelobe_stats(confidence, cfg);
    if (s.stddev == 0.0) throw std::domain_error("psr: zero-variance sidelobe");
    return (s.peak - s.mean) / s.stddev;
}

bool psr_accept(const Grid& confidence, const PsrConfig& cfg) {
    if (cfg.threshold == -std::numeric_limits<double>::infinity()) return true;
    const SidelobeStats s = sidelobe_stats(confidence, cfg);
    if (s.stddev == 0.0) return false;  // degenerate confidence
    return (s.peak - s.mean) / s.stddev >= cfg.threshold;
}

}  // namespace jtrack::baselines
