#ifndef JTRACK_JOINT_HPP
#define JTRACK_JOINT_HPP

#include <concepts>
#include <stdexcept>
#include <vector>

#include "jtrack/learners.hpp"
#include "jtrack/weights.hpp"

namespace jtrack {

// Bounded chronological store of per-frame sample groups together with the
// current quality weights alpha and prior weights rho over the stored frames.
struct TrainingMemory {
    std::vector<FrameSamples> frames;
    std::vector<double> alpha;
    std::vector<double> priors;
    int capacity = 300;
    weights::PriorSchedule schedule;

    int size() const { return static_cast<int>(frames.size()); }
    long newest_index() const {
        return frames.empty() ? -1 : frames.back().frame_index;
    }
};

struct JointConfig {
    double mu = 5.0;
    int acs_iterations = 1;
    weights::PriorSchedule schedule;  // K = 50, eta = 0.035
    int capacity = 300;
    long activation_frame = 10;  // alpha is pinned to rho before this frame
    double lambda = 1e-2;

    void validate() const {
        if (!(mu > 0.0)) throw std::invalid_argument("JointConfig: mu must be > 0");
        if (acs_iterations < 1)
            throw std::invalid_argument("JointConfig: acs_iterations must be >= 1");
        if (activation_frame < 1)
            throw std::invalid_argument("JointConfig: activation_frame must be >= 1");
        if (capacity < 1) throw std::invalid_argument("JointConfig: capacity must be >= 1");
        schedule.validate();
    }
};

// Appends one frame's samples: priors are recomputed for the new frame
// count, the new frame starts at its prior weight, previous alphas are
// carried over as masses and the whole vector is renormalized. Evicts down
// to capacity afterwards. Throws on a non-increasing frame index.
void add_frame(TrainingMemory& memory, FrameSamples frame);

// Removes the stored frame with the smallest alpha among all frames except
// the newest (ties: smallest frame index); alpha and rho are renormalized.
void evict_smallest(TrainingMemory& memory);

template <typename L>
concept FrameLearner = requires(L l, const std::vector<FrameSamples>& fs,
                                const std::vector<double>& a, const typename L::Model& m) {
    { l.train(fs, a) } -> std::same_as<typename L::Model>;
    { l.frame_losses(m, fs) } -> std::same_as<std::vector<double>>;
    { l.regularization(m) } -> std::convertible_to<double>;
};

// J(theta, alpha) = sum_k alpha_k L_k(theta) + (1/mu) sum_k alpha_k^2/rho_k + lambda R(theta)
template <FrameLearner L>
double joint_loss(L& learner, const typename L::Model& model, const TrainingMemory& memory,
                  double mu) {
    const std::vector<double> losses = learner.frame_losses(model, memory.frames);
    double obj = learner.regularization(model);
    for (int k = 0; k < memory.size(); ++k) {
        obj += memory.alpha[k] * losses[k];
        obj += memory.alpha[k] * memory.alpha[k] / (mu * memory.priors[k]);
    }
    return obj;
}

template <typename Model>
struct AcsResult {
    Model model;
    std::vector<double> frame_losses;  // under the last trained model
    std::vector<double> joint_losses;  // objective after each iteration (warm value first if available)
};

// Alternating convex search on (model, alpha): each iteration trains the
// learner under the current alpha, evaluates per-frame losses, and solves
// the simplex subproblem for new alpha. Before the activation frame the
// alpha step is skipped and alpha stays pinned to the priors. The final
// alpha is written back into the memory.
template <FrameLearner L>
AcsResult<typename L::Model> acs_update(TrainingMemory& memory, const JointConfig& config,
                                        L& learner,
                                        const typename L::Model* warm_model = nullptr) {
    config.validate();
    if (memory.frames.empty()) throw std::invalid_argument("acs_update: empty memory");

    const bool active = memory.newest_index() >= config.activation_frame;
    if (!active) memory.alpha = memory.priors;

    AcsResult<typename L::Model> result;
    if (warm_model)
        result.joint_losses.push_back(joint_loss(learner, *warm_model, memory, config.mu));

    for (int i = 0; i < config.acs_iterations; ++i) {
        result.model = learner.train(memory.frames, memory.alpha);
        result.frame_losses = learner.frame_losses(result.model, memory.frames);
        if (active) {
            weights::AlphaSubproblem sub;
            sub.losses = result.frame_losses;
            sub.priors = memory.priors;
            sub.mu = config.mu;
            memory.alpha = weights::solve_alpha(sub).alpha;
        }
        double obj = learner.regularization(result.model);
        for (int k = 0; k < memory.size(); ++k) {
            obj += memory.alpha[k] * result.frame_losses[k];
            obj += memory.alpha[k] * memory.alpha[k] / (config.mu * memory.priors[k]);
        }
        result.joint_losses.push_back(obj);
    }
    return result;
}

}  // namespace jtrack

#endif
