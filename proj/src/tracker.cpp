#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "jtrack/tracking.hpp"

namespace jtrack {

void TrackerConfig::validate() const {
    joint.validate();
    features.validate();
    psr.validate();
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("TrackerConfig: gamma must lie in [0, 1]");
}

namespace {

bool inside_frame(const Rect& r, const Grid& frame) {
    return r.x + r.w > 0 && r.y + r.h > 0 && r.x < frame.cols && r.y < frame.rows;
}

// Keeps the search region overlapping the frame so feature extraction stays
// valid after the estimate ran off the image.
Rect clamp_center(const Rect& r, const Grid& frame) {
    Rect out = r;
    out.x = std::clamp(r.x, -0.5 * r.w + 1.0, frame.cols - 0.5 * r.w - 1.0);
    out.y = std::clamp(r.y, -0.5 * r.h + 1.0, frame.rows - 0.5 * r.h - 1.0);
    return out;
}

TrainingSample make_sample(const Sequence& seq, int frame_idx0, const Rect& rect,
                           const FeatureConfig& fc, const LabelMap& label) {
    TrainingSample s;
    s.features = extract_features(seq.frames[frame_idx0], rect, fc);
    s.label = label;
    s.frame_index = frame_idx0 + 1;
    return s;
}

void log_weights(TrackReport& report, const TrainingMemory& memory,
                 const std::vector<double>& losses, long update_index) {
    for (int k = 0; k < memory.size(); ++k)
        report.weight_log.push_back(WeightLogRow{update_index, memory.frames[k].frame_index,
                                                 memory.alpha[k], memory.priors[k],
                                                 losses.empty() ? 0.0 : losses[k]});
}

}  // namespace

TrackReport track(const Sequence& seq, const TrackerConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (seq.size() < 2) throw std::invalid_argument("track: sequence needs at least 2 frames");
    if (seq.ground_truth.size() != seq.frames.size())
        throw std::invalid_argument("track: ground truth length mismatch");

    const FeatureConfig& fc = cfg.features;
    const LabelMap label = make_label(fc);

    TrainingMemory memory;
    memory.capacity = cfg.joint.capacity;
    memory.schedule = cfg.joint.schedule;
    RidgeFilterLearner learner(cfg.joint.lambda);

    TrackReport report;
    report.config_echo.emplace_back("seed", std::to_string(seed));

    // Frame 1: initialize from ground truth.
    Rect current = seq.ground_truth.front();
    auto t0 = std::chrono::steady_clock::now();
    add_frame(memory, FrameSamples{1, {make_sample(seq, 0, current, fc, label)}});
    memory.alpha = memory.priors;
    CorrelationFilter model = learner.train(memory.frames, memory.alpha);
    auto t1 = std::chrono::steady_clock::now();
    report.trajectory.push_back(current);
    report.ground_truth.push_back(seq.ground_truth.front());
    report.lost.push_back(0);
    report.frame_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    log_weights(report, memory, learner.frame_losses(model, memory.frames), 1);

    for (int t = 2; t <= seq.size(); ++t) {
        t0 = std::chrono::steady_clock::now();
        const Grid& frame = seq.frames[t - 1];

        Grid confidence;
        current = localize(model, frame, clamp_center(current, frame), fc, &confidence);
        const bool lost = !inside_frame(current, frame);

        bool accept = true;
        if (cfg.strategy == Strategy::psr_gated) accept = baselines::psr_accept(confidence, cfg.psr);

        if (accept) {
            const Rect sample_rect = clamp_center(current, frame);
            add_frame(memory, FrameSamples{t, {make_sample(seq, t - 1, sample_rect, fc, label)}});

            switch (cfg.strategy) {
                case Strategy::joint:
                    acs_update(memory, cfg.joint, learner, &model);
                    break;
                case Strategy::fixed_decay:
                case Strategy::psr_gated:
                    memory.alpha = baselines::decay_weights(memory.size(), cfg.gamma);
                    break;
            }
            model = learner.train(memory.frames, memory.alpha);
        }

        t1 = std::chrono::steady_clock::now();
        report.trajectory.push_back(current);
        report.ground_truth.push_back(seq.ground_truth[t - 1]);
        report.lost.push_back(lost ? 1 : 0);
        report.frame_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        log_weights(report, memory, learner.frame_losses(model, memory.frames), t);
    }
    return report;
}

}  // namespace jtrack
