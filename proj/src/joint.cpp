#include "jtrack/joint.hpp"

#include <algorithm>
#include <stdexcept>

namespace jtrack {

void add_frame(TrainingMemory& memory, FrameSamples frame) {
    if (frame.samples.empty()) throw std::invalid_argument("add_frame: frame has no samples");
    if (!memory.frames.empty() && frame.frame_index <= memory.newest_index())
        throw std::invalid_argument("add_frame: frame index must exceed all stored indices");

    memory.frames.push_back(std::move(frame));
    const int t = memory.size();
    memory.priors = weights::compute_priors(t, memory.schedule);

    // Previous alphas are carried over as masses; the new frame enters at
    // its prior weight; one joint renormalization restores the simplex.
    memory.alpha.push_back(memory.priors.back());
    double total = 0.0;
    for (double a : memory.alpha) total += a;
    for (double& a : memory.alpha) a /= total;

    while (memory.size() > memory.capacity) evict_smallest(memory);
}

void evict_smallest(TrainingMemory& memory) {
    if (memory.size() < 2)
        throw std::invalid_argument("evict_smallest: need at least two stored frames");

    // Smallest alpha among all but the newest; ties go to the oldest frame.
    int victim = 0;
    for (int k = 1; k + 1 < memory.size(); ++k)
        if (memory.alpha[k] < memory.alpha[victim]) victim = k;

    memory.frames.erase(memory.frames.begin() + victim);
    memory.alpha.erase(memory.alpha.begin() + victim);
    memory.priors.erase(memory.priors.begin() + victim);

    double alpha_sum = 0.0, prior_sum = 0.0;
    for (double a : memory.alpha) alpha_sum += a;
    for (double p : memory.priors) prior_sum += p;
    if (alpha_sum > 0.0)
        for (double& a : memory.alpha) a /= alpha_sum;
    for (double& p : memory.priors) p /= prior_sum;
}

}  // namespace jtrack
