#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "jtrack/tracking.hpp"

namespace jtrack {

void FeatureConfig::validate() const {
    if (grid_size < 4) throw std::invalid_argument("FeatureConfig: grid_size must be >= 4");
    if (!(search_factor >= 1.0))
        throw std::invalid_argument("FeatureConfig: search_factor must be >= 1");
    if (!(label_sigma_factor > 0.0))
        throw std::invalid_argument("FeatureConfig: label_sigma_factor must be > 0");
}

double FeatureConfig::label_sigma() const {
    // The target spans grid_size / search_factor cells on the feature grid
    // in each dimension, independent of its pixel size.
    return label_sigma_factor * grid_size / search_factor;
}

namespace {

double sample_bilinear(const Grid& frame, double y, double x) {
    // edge-replicating bilinear lookup
    const int r0 = static_cast<int>(std::floor(y));
    const int c0 = static_cast<int>(std::floor(x));
    const double fy = y - r0;
    const double fx = x - c0;
    auto px = [&](int r, int c) {
        return frame.at(std::clamp(r, 0, frame.rows - 1), std::clamp(c, 0, frame.cols - 1));
    };
    return (1 - fy) * ((1 - fx) * px(r0, c0) + fx * px(r0, c0 + 1)) +
           fy * ((1 - fx) * px(r0 + 1, c0) + fx * px(r0 + 1, c0 + 1));
}

struct SearchRegion {
    double x0, y0, w, h;
};

SearchRegion search_region(const Rect& rect, const FeatureConfig& cfg) {
    SearchRegion sr;
    sr.w = rect.w * cfg.search_factor;
    sr.h = rect.h * cfg.search_factor;
    sr.x0 = rect.center_x() - 0.5 * sr.w;
    sr.y0 = rect.center_y() - 0.5 * sr.h;
    return sr;
}

}  // namespace

FeatureMap extract_features(const GrayFrame& frame, const Rect& rect, const FeatureConfig& cfg) {
    cfg.validate();
    if (!(rect.w > 0 && rect.h > 0)) throw std::invalid_argument("extract_features: empty rect");
    const SearchRegion sr = search_region(rect, cfg);
    if (sr.x0 + sr.w <= 0 || sr.y0 + sr.h <= 0 || sr.x0 >= frame.cols || sr.y0 >= frame.rows)
        throw std::invalid_argument("extract_features: search region misses the frame");

    const int s = cfg.grid_size;
    const double sy = sr.h / s;
    const double sx = sr.w / s;

    Grid patch(s, s);
    for (int r = 0; r < s; ++r)
        for (int c = 0; c < s; ++c)
            patch.at(r, c) =
                sample_bilinear(frame, sr.y0 + (r + 0.5) * sy - 0.5, sr.x0 + (c + 0.5) * sx - 0.5);

    double mean = 0.0;
    for (double v : patch.v) mean += v;
    mean /= static_cast<double>(patch.size());

    FeatureMap out(s, s, cfg.channel_count());
    auto clampc = [&](int i) { return std::clamp(i, 0, s - 1); };
    for (int r = 0; r < s; ++r)
        for (int c = 0; c < s; ++c) {
            const double gx =
                0.5 * (patch.at(r, clampc(c + 1)) - patch.at(r, clampc(c - 1)));
            const double gy =
                0.5 * (patch.at(clampc(r + 1), c) - patch.at(clampc(r - 1), c));
            out.at(0, r, c) = patch.at(r, c) - mean;
            out.at(1, r, c) = gx;
            out.at(2, r, c) = gy;
            if (cfg.orientation_channels) {
                const double mag = std::hypot(gx, gy);
                if (mag > 0.0) {
                    const double ang = std::atan2(gy, gx);  // (-pi, pi]
                    int bin = static_cast<int>(
                        std::floor((ang + std::numbers::pi) / (std::numbers::pi / 2.0)));
                    bin = std::clamp(bin, 0, 3);
                    out.at(3 + bin, r, c) = mag;
                }
            }
        }

    if (cfg.cosine_window) {
        std::vector<double> hann(s);
        for (int i = 0; i < s; ++i)
            hann[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (s - 1)));
        for (int l = 0; l < out.channels; ++l)
            for (int r = 0; r < s; ++r)
                for (int c = 0; c < s; ++c) out.at(l, r, c) *= hann[r] * hann[c];
    }
    return out;
}

LabelMap make_label(const FeatureConfig& cfg) {
    const int s = cfg.grid_size;
    return make_gaussian_label(s, s, s / 2, s / 2, cfg.label_sigma());
}

Rect localize(const CorrelationFilter& model, const GrayFrame& frame, const Rect& previous,
              const FeatureConfig& cfg, Grid* confidence_out) {
    const FeatureMap features = extract_features(frame, previous, cfg);
    Grid conf = filter_confidence(model, features);

    int pr = 0, pc = 0;
    double best = conf.at(0, 0);
    for (int r = 0; r < conf.rows; ++r)
        for (int c = 0; c < conf.cols; ++c)
            if (conf.at(r, c) > best) {
                best = conf.at(r, c);
                pr = r;
                pc = c;
            }

    // The label peak sits at (s/2, s/2); a peak at p means the target moved
    // by p - s/2 grid cells. Larger shifts alias circularly and cannot be
    // told apart, so the displacement lives in [-s/2, s/2).
    const int s = cfg.grid_size;
    const int dr = pr - s / 2;
    const int dc = pc - s / 2;

    const double cell_h = previous.h * cfg.search_factor / s;
    const double cell_w = previous.w * cfg.search_factor / s;

    if (confidence_out) *confidence_out = std::move(conf);
    return Rect{previous.x + dc * cell_w, previous.y + dr * cell_h, previous.w, previous.h};
}

Rect localize(const CorrelationFilter& model, const GrayFrame& frame, const Rect& previous,
              const FeatureConfig& cfg) {
    return localize(model, frame, previous, cfg, nullptr);
}

}  // namespace jtrack
