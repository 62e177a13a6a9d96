#ifndef JTRACK_TRACKING_HPP
#define JTRACK_TRACKING_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "jtrack/baselines.hpp"
#include "jtrack/eval.hpp"
#include "jtrack/grid.hpp"
#include "jtrack/joint.hpp"
#include "jtrack/learners.hpp"

namespace jtrack {

using GrayFrame = Grid;  // values in [0, 1]

// Scripted synthetic corruption: a textured target moving over a textured
// background, with occlusion intervals, misalignment jitter, appearance
// drift and photometric noise.
struct CorruptionScript {
    enum class FillMode { background, noise, gray };
    struct Occlusion {
        int start = 0;  // 1-based, inclusive
        int end = 0;
        double fraction = 1.0;  // fraction of the target rows covered, top-down
        FillMode mode = FillMode::background;
    };

    int length = 0;
    int frame_size = 128;
    int target_size = 24;
    std::vector<Occlusion> occlusions;
    double jitter_std = 0.0;  // rendered-position noise (pixels)
    double drift_rate = 0.0;  // appearance morph per frame, in [0, 1]
    double noise_std = 0.0;   // photometric noise

    void validate() const;
};

// A rendered offset beyond this (inf-norm, pixels) marks the frame corrupted.
inline constexpr double kJitterCorruptThreshold = 1.5;

struct Sequence {
    std::vector<GrayFrame> frames;
    std::vector<Rect> ground_truth;
    std::optional<std::vector<unsigned char>> corruption_labels;

    int size() const { return static_cast<int>(frames.size()); }
};

// Deterministic for a fixed seed; frames come pre-quantized to 8-bit levels
// so that writing and reloading a sequence reproduces them exactly.
Sequence generate_sequence(const CorruptionScript& script, std::uint64_t seed);

// Key-value script parser (keys: length, frame_size, target_size,
// occlusion=start:end:fraction:mode, jitter_std, drift_rate, noise_std).
CorruptionScript parse_script(const std::filesystem::path& path);
CorruptionScript parse_script_text(const std::string& text, const std::string& origin);

// Directory layout: img/%04d.pgm plus groundtruth_rect.txt with one
// "x,y,w,h" line per frame (comma, tab or space separated). Loaded frames
// are grayscale in [0, 1]; corruption labels are not loaded.
Sequence load_sequence(const std::filesystem::path& dir);

// Writes a sequence in the loader's layout; emits corruption_labels.txt
// when labels are present.
void write_sequence(const Sequence& seq, const std::filesystem::path& dir);

struct FeatureConfig {
    int grid_size = 48;
    double search_factor = 2.0;
    bool cosine_window = true;
    bool orientation_channels = false;  // adds 4 signed orientation bins
    double label_sigma_factor = 0.1;    // sigma = factor * sqrt(target area on the grid)

    int channel_count() const { return orientation_channels ? 7 : 3; }
    double label_sigma() const;
    void validate() const;
};

// Resamples the search region (rect scaled about its center) to a fixed
// grid. Channels: mean-removed grayscale, horizontal and vertical gradient,
// optionally 4 signed orientation bins; all multiplied by a Hann window when
// enabled. Out-of-frame pixels replicate the nearest edge.
FeatureMap extract_features(const GrayFrame& frame, const Rect& rect, const FeatureConfig& cfg);

// Gaussian label for a training sample on the feature grid (peak at the
// grid center).
LabelMap make_label(const FeatureConfig& cfg);

// Argmax of the confidence map (ties: smallest row, then column), shifted
// back to pixel coordinates around the previous rectangle.
Rect localize(const CorrelationFilter& model, const GrayFrame& frame, const Rect& previous,
              const FeatureConfig& cfg);
Rect localize(const CorrelationFilter& model, const GrayFrame& frame, const Rect& previous,
              const FeatureConfig& cfg, Grid* confidence_out);

enum class Strategy { joint, fixed_decay, psr_gated };

struct TrackerConfig {
    JointConfig joint;
    Strategy strategy = Strategy::joint;
    double gamma = 0.035;  // decay rate for the fixed / psr-gated strategies
    baselines::PsrConfig psr;
    FeatureConfig features;

    void validate() const;
};

// Full tracking loop: initialize on the first ground-truth rectangle, then
// per frame localize -> add sample -> strategy-specific weight update ->
// retrain. Deterministic for fixed inputs.
TrackReport track(const Sequence& seq, const TrackerConfig& cfg, std::uint64_t seed);

}  // namespace jtrack

#endif
