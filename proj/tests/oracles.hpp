// Reference implementations used only by the test suites. Each one takes an
// independent route (dense spatial-domain algebra, naive loops) to results
// the library computes via the Fourier domain or closed-form solvers.
#ifndef JTRACK_TESTS_ORACLES_HPP
#define JTRACK_TESTS_ORACLES_HPP

#include <vector>

#include "jtrack/learners.hpp"

namespace jtrack::oracles {

// Weighted ridge solution of the filter problem via explicit circulant
// convolution matrices and a dense normal-equations solve.
CorrelationFilter dense_train_filter(const std::vector<TrainingSample>& samples,
                                     const std::vector<double>& alpha, double lambda);

// Same dense construction with a per-pixel penalty instead of lambda,
// solved directly (no Gauss-Seidel).
CorrelationFilter dense_train_filter_spatial(const std::vector<TrainingSample>& samples,
                                             const std::vector<double>& alpha,
                                             const Grid& penalty);

// Direct O(N^2) circular convolution sum_l f^l (*) x^l.
Grid naive_confidence(const CorrelationFilter& model, const FeatureMap& features);

// ||y - sum_l f^l (*) x^l||^2 evaluated entirely in the spatial domain.
double naive_frame_loss(const CorrelationFilter& model, const TrainingSample& sample);

// Weighted objective sum_k alpha_k L_k + lambda ||f||^2, spatial domain.
double dense_objective(const CorrelationFilter& model,
                       const std::vector<TrainingSample>& samples,
                       const std::vector<double>& alpha, double lambda);

// Long-run hinge-loss minimizer with a fixed-step schedule and iterate
// averaging; structurally unrelated to the library's optimizer.
LinearSvmModel reference_svm(const std::vector<FrameSamples>& frames,
                             const std::vector<double>& alpha, double lambda, int iterations);

}  // namespace jtrack::oracles

#endif
