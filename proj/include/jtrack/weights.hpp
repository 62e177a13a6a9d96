#ifndef JTRACK_WEIGHTS_HPP
#define JTRACK_WEIGHTS_HPP

#include <vector>

namespace jtrack::weights {

// Temporal prior over per-frame sample weights. The last `window` frames
// decay geometrically towards the past with rate `decay`; all older frames
// share a constant weight. The resulting vector is normalized to sum 1.
struct PriorSchedule {
    int window = 50;       // K >= 1
    double decay = 0.035;  // eta in [0, 1)

    void validate() const;
};

// Prior weights rho_1..rho_t (chronological, newest last) for a memory of
// t frames. For t > window the closed form applies: a flat segment of
// height a followed by a geometric ramp; for t <= window the decay
// recursion rho_k = (1 - decay) * rho_{k+1} covers all frames.
std::vector<double> compute_priors(int frame_count, const PriorSchedule& schedule);

// Closed-form height a of the flat segment for frame_count > window and
// decay > 0: a = (t - K + ((1-eta)^{-K} - 1)/eta)^{-1}.
double prior_flat_level(int frame_count, const PriorSchedule& schedule);

// Diagonal quadratic program over the probability simplex:
//
//   min   sum_k losses_k * alpha_k + (1/mu) * sum_k alpha_k^2 / priors_k
//   s.t.  alpha_k >= 0,  sum_k alpha_k = 1
//
// priors_k > 0 and mu > 0 make the objective strictly convex, so the
// minimizer is unique.
struct AlphaSubproblem {
    std::vector<double> losses;
    std::vector<double> priors;
    double mu = 5.0;

    void validate() const;
};

struct AlphaSolution {
    std::vector<double> alpha;
    double nu = 0.0;           // multiplier of the sum constraint
    double kkt_residual = 0.0;
};

// Exact solver. KKT stationarity gives alpha_k = max(0, mu*priors_k*(nu - losses_k)/2);
// the multiplier nu is found by sorting frames by loss and scanning support
// prefixes, since nu -> sum_k alpha_k(nu) is piecewise linear and increasing.
// Falls back to bisection on nu in the (never observed) case the scan's
// KKT residual exceeds 1e-9. Throws std::invalid_argument on empty or
// non-finite input.
AlphaSolution solve_alpha(const AlphaSubproblem& problem);

// Bisection on the multiplier nu; independent route to the same solution,
// used as a cross-check of the scan.
AlphaSolution solve_alpha_bisection(const AlphaSubproblem& problem);

// Projected-gradient reference solver: steepest descent on the objective
// with Euclidean projection onto the simplex after every step. Deterministic.
// iterations == 0 picks a budget from the conditioning of the problem;
// step == 0 picks 1/L with L the gradient Lipschitz constant.
std::vector<double> oracle_solve_alpha(const AlphaSubproblem& problem,
                                       int iterations = 0, double step = 0.0);

// Max KKT violation of (alpha, nu) for the subproblem: primal feasibility,
// stationarity on the support, dual feasibility off it.
double kkt_residual(const AlphaSubproblem& problem, const std::vector<double>& alpha, double nu);

double alpha_objective(const AlphaSubproblem& problem, const std::vector<double>& alpha);

// Euclidean projection of an arbitrary vector onto the probability simplex.
std::vector<double> project_to_simplex(std::vector<double> x);

}  // namespace jtrack::weights

#endif
