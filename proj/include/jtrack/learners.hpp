#ifndef JTRACK_LEARNERS_HPP
#define JTRACK_LEARNERS_HPP

#include <complex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "jtrack/grid.hpp"

namespace jtrack {

// Multi-channel feature patch, channel-major ([ch][row][col]).
struct FeatureMap {
    int rows = 0;
    int cols = 0;
    int channels = 0;
    std::vector<double> v;

    FeatureMap() = default;
    FeatureMap(int r, int c, int d)
        : rows(r), cols(c), channels(d), v(static_cast<size_t>(r) * c * d, 0.0) {
        if (r < 1 || c < 1 || d < 1)
            throw std::invalid_argument("FeatureMap: dimensions must be positive");
    }

    double* channel(int l) { return v.data() + static_cast<size_t>(l) * rows * cols; }
    const double* channel(int l) const { return v.data() + static_cast<size_t>(l) * rows * cols; }
    double& at(int l, int r, int c) { return channel(l)[r * cols + c]; }
    double at(int l, int r, int c) const { return channel(l)[r * cols + c]; }
};

using LabelMap = Grid;

// One training sample: a feature map paired with either a desired
// confidence map (regression) or a +/-1 class label (classification).
struct TrainingSample {
    FeatureMap features;
    std::optional<LabelMap> label;
    std::optional<int> klass;
    long frame_index = 0;
};

// Multi-channel linear convolution filter trained in the Fourier domain.
struct CorrelationFilter {
    int rows = 0;
    int cols = 0;
    int channels = 0;
    std::vector<double> coeffs;  // channel-major, like FeatureMap
    double regularization_weight = 0.0;
    std::optional<Grid> spatial_penalty;

    bool empty() const { return coeffs.empty(); }
    double* channel(int l) { return coeffs.data() + static_cast<size_t>(l) * rows * cols; }
    const double* channel(int l) const {
        return coeffs.data() + static_cast<size_t>(l) * rows * cols;
    }
    double squared_norm() const;
};

struct LinearSvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    double regularization_weight = 0.0;
};

// Periodic Gaussian with peak value 1 at (center_row, center_col); distances
// wrap, matching circular convolution.
LabelMap make_gaussian_label(int rows, int cols, double center_row, double center_col,
                             double sigma);

// Minimizes sum_k alpha_k ||y_k - sum_l f^l (*) x_k^l||^2 + lambda sum_l ||f^l||^2
// exactly, one d x d complex system per frequency ((*) is circular
// convolution). All samples must be labeled and share dimensions. Throws
// std::domain_error when lambda == 0 and some frequency system is singular.
CorrelationFilter train_filter(const std::vector<TrainingSample>& samples,
                               const std::vector<double>& alpha, double lambda);

// Spatially penalized variant: regularizer sum_l ||penalty .* f^l||^2, solved
// by Gauss-Seidel sweeps on the dense real normal equations starting from
// warm_start (zero filter if null). Desk-scale only: rows*cols*channels <= 4096.
CorrelationFilter train_filter_spatial(const std::vector<TrainingSample>& samples,
                                       const std::vector<double>& alpha, const Grid& penalty,
                                       int sweeps,
                                       const CorrelationFilter* warm_start = nullptr);

// sum_l f^l (*) x^l, computed via the Fourier domain.
Grid filter_confidence(const CorrelationFilter& model, const FeatureMap& features);

// ||y - sum_l f^l (*) x^l||^2 via Parseval's formula.
double filter_frame_loss(const CorrelationFilter& model, const TrainingSample& sample);

// One frame's group of samples (n_k >= 1), chronological unit of the memory.
struct FrameSamples {
    long frame_index = 0;
    std::vector<TrainingSample> samples;
};

// Weighted linear SVM: minimizes
//   sum_k alpha_k sum_j max(0, 1 - y_jk (<theta, x_jk> + b)) + lambda ||theta||^2
// by deterministic full-batch subgradient descent with a 1/(lambda*iter)
// step schedule, step-halving on objective increase, and best-iterate return.
// Feature maps are treated as flat vectors.
LinearSvmModel train_svm(const std::vector<FrameSamples>& frames,
                         const std::vector<double>& alpha, double lambda, int budget);

// Sum of hinge losses over one frame's samples.
double svm_frame_loss(const LinearSvmModel& model, const FrameSamples& frame);

double svm_objective(const LinearSvmModel& model, const std::vector<FrameSamples>& frames,
                     const std::vector<double>& alpha, double lambda);

// Cached per-frame spectra of a labeled sample (bin-major: [bin*d + ch]).
struct SampleSpectrum {
    int rows = 0, cols = 0, channels = 0;
    std::vector<std::complex<double>> features;  // bins * channels
    std::vector<std::complex<double>> label;     // bins
};

SampleSpectrum compute_sample_spectrum(const TrainingSample& sample);

// Learner adapter for the alternating optimization driver: exact weighted
// ridge filter (train_filter) with per-frame FFTs cached across retrains.
class RidgeFilterLearner {
  public:
    using Model = CorrelationFilter;

    explicit RidgeFilterLearner(double lambda) : lambda_(lambda) {}

    Model train(const std::vector<FrameSamples>& frames, const std::vector<double>& alpha);
    std::vector<double> frame_losses(const Model& model, const std::vector<FrameSamples>& frames);
    double frame_loss(const Model& model, const FrameSamples& frame);
    double regularization(const Model& model) const {
        return lambda_ * model.squared_norm();
    }
    double lambda() const { return lambda_; }

  private:
    double lambda_;
    std::unordered_map<long, SampleSpectrum> cache_;

    const SampleSpectrum& spectrum_for(const FrameSamples& frame);
    void prune(const std::vector<FrameSamples>& frames);
};

// Learner adapter for the weighted hinge-loss classifier.
class HingeSvmLearner {
  public:
    using Model = LinearSvmModel;

    HingeSvmLearner(double lambda, int budget) : lambda_(lambda), budget_(budget) {}

    Model train(const std::vector<FrameSamples>& frames, const std::vector<double>& alpha) {
        return train_svm(frames, alpha, lambda_, budget_);
    }
    std::vector<double> frame_losses(const Model& model, const std::vector<FrameSamples>& frames);
    double frame_loss(const Model& model, const FrameSamples& frame) {
        return svm_frame_loss(model, frame);
    }
    double regularization(const Model& model) const;

  private:
    double lambda_;
    int budget_;
};

}  // namespace jtrack

#endif
