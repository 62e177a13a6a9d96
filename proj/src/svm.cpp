#include <cmath>
#include <stdexcept>

#include "jtrack/learners.hpp"

namespace jtrack {

namespace {

size_t feature_dim(const std::vector<FrameSamples>& frames) {
    for (const auto& fr : frames)
        for (const auto& s : fr.samples) return s.features.v.size();
    throw std::invalid_argument("train_svm: empty sample set");
}

double dot_score(const LinearSvmModel& m, const TrainingSample& s) {
    if (s.features.v.size() != m.weights.size())
        throw std::invalid_argument("svm: feature dimension mismatch");
    double acc = m.bias;
    for (size_t i = 0; i < m.weights.size(); ++i) acc += m.weights[i] * s.features.v[i];
    return acc;
}

void check_classified(const std::vector<FrameSamples>& frames) {
    for (const auto& fr : frames) {
        if (fr.samples.empty()) throw std::invalid_argument("train_svm: empty frame group");
        for (const auto& s : fr.samples)
            if (!s.klass || (*s.klass != 1 && *s.klass != -1))
                throw std::invalid_argument("train_svm: samples must carry class +/-1");
    }
}

}  // namespace

double svm_frame_loss(const LinearSvmModel& model, const FrameSamples& frame) {
    double acc = 0.0;
    for (const auto& s : frame.samples) {
        const double margin = static_cast<double>(*s.klass) * dot_score(model, s);
        acc += std::max(0.0, 1.0 - margin);
    }
    return acc;
}

double svm_objective(const LinearSvmModel& model, const std::vector<FrameSamples>& frames,
                     const std::vector<double>& alpha, double lambda) {
    double obj = 0.0;
    for (size_t k = 0; k < frames.size(); ++k) obj += alpha[k] * svm_frame_loss(model, frames[k]);
    for (double w : model.weights) obj += lambda * w * w;
    return obj;
}

LinearSvmModel train_svm(const std::vector<FrameSamples>& frames,
                         const std::vector<double>& alpha, double lambda, int budget) {
    if (frames.empty()) throw std::invalid_argument("train_svm: empty sample set");
    if (frames.size() != alpha.size())
        throw std::invalid_argument("train_svm: |frames| != |alpha|");
    if (!(lambda >= 0.0)) throw std::invalid_argument("train_svm: lambda must be >= 0");
    check_classified(frames);

    const size_t dim = feature_dim(frames);
    LinearSvmModel model;
    model.weights.assign(dim, 0.0);
    model.bias = 0.0;
    model.regularization_weight = lambda;

    double current = svm_objective(model, frames, alpha, lambda);
    std::vector<double> grad(dim);
    LinearSvmModel cand = model;

    for (int it = 1; it <= budget; ++it) {
        for (size_t i = 0; i < dim; ++i) grad[i] = 2.0 * lambda * model.weights[i];
        double grad_bias = 0.0;
        for (size_t k = 0; k < frames.size(); ++k) {
            if (alpha[k] == 0.0) continue;
            for (const auto& s : frames[k].samples) {
                const double y = static_cast<double>(*s.klass);
                if (y * dot_score(model, s) < 1.0) {
                    const double w = alpha[k] * y;
                    for (size_t i = 0; i < dim; ++i) grad[i] -= w * s.features.v[i];
                    grad_bias -= w;
                }
            }
        }

        // base step 1/(lambda*it), halved within the iteration until the
        // objective decreases; a step that still increases it is skipped
        double step = 1.0 / (std::max(lambda, 1e-12) * it);
        for (int halving = 0; halving <= 12; ++halving, step *= 0.5) {
            cand.weights = model.weights;
            cand.bias = model.bias;
            for (size_t i = 0; i < dim; ++i) cand.weights[i] -= step * grad[i];
            cand.bias -= step * grad_bias;
            const double cand_obj = svm_objective(cand, frames, alpha, lambda);
            if (cand_obj <= current) {
                model.weights.swap(cand.weights);
                std::swap(model.bias, cand.bias);
                current = cand_obj;
                break;
            }
        }
    }
    return model;
}

std::vector<double> HingeSvmLearner::frame_losses(const Model& model,
                                                  const std::vector<FrameSamples>& frames) {
    std::vector<double> losses(frames.size());
    for (size_t k = 0; k < frames.size(); ++k) losses[k] = svm_frame_loss(model, frames[k]);
    return losses;
}

double HingeSvmLearner::regularization(const Model& model) const {
    double acc = 0.0;
    for (double w : model.weights) acc += w * w;
    return lambda_ * acc;
}

}  // namespace jtrack
