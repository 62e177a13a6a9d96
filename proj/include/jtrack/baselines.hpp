#ifndef JTRACK_BASELINES_HPP
#define JTRACK_BASELINES_HPP

#include <vector>

#include "jtrack/grid.hpp"

namespace jtrack::baselines {

// Fixed exponential forgetting: alpha_k proportional to (1-gamma)^(t-k),
// normalized. gamma = 0 is uniform, gamma = 1 keeps only the newest frame.
std::vector<double> decay_weights(int frame_count, double gamma);

struct PsrConfig {
    int exclusion_radius = 2;  // Chebyshev radius around the peak, circular wrap
    double threshold = 5.0;    // -inf disables the gate

    void validate() const;
};

// Peak-to-sidelobe ratio (g_max - mean) / stddev of the confidence values
// outside the peak neighborhood (population standard deviation). Throws
// std::domain_error on a zero-variance sidelobe and std::invalid_argument
// when the exclusion radius leaves no sidelobe cells.
double psr(const Grid& confidence, const PsrConfig& cfg);

// Sample gate: accept iff psr >= threshold. A zero-variance (degenerate)
// confidence map is rejected rather than an error; threshold = -inf accepts
// everything without computing the ratio.
bool psr_accept(const Grid& confidence, const PsrConfig& cfg);

}  // namespace jtrack::baselines

#endif
