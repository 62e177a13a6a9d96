#include "jtrack/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace jtrack::weights {

void PriorSchedule::validate() const {
    if (window < 1) throw std::invalid_argument("PriorSchedule: window must be >= 1");
    if (!(decay >= 0.0 && decay < 1.0))
        throw std::invalid_argument("PriorSchedule: decay must lie in [0, 1)");
}

std::vector<double> compute_priors(int frame_count, const PriorSchedule& schedule) {
    schedule.validate();
    if (frame_count < 1) throw std::invalid_argument("compute_priors: frame_count must be >= 1");

    const int t = frame_count;
    const int k_window = schedule.window;
    const double retain = 1.0 - schedule.decay;

    // Unnormalized masses relative to the newest frame (value 1), so no
    // exponent is ever positive and nothing can overflow.
    std::vector<double> rho(static_cast<size_t>(t));
    for (int k = 1; k <= t; ++k) {
        const int age = t - k;
        rho[k - 1] = std::pow(retain, static_cast<double>(std::min(age, k_window)));
    }
    const double total = std::accumulate(rho.begin(), rho.end(), 0.0);
    for (double& r : rho) r /= total;
    return rho;
}

double prior_flat_level(int frame_count, const PriorSchedule& schedule) {
    schedule.validate();
    if (frame_count <= schedule.window)
        throw std::invalid_argument("prior_flat_level: requires frame_count > window");
    if (schedule.decay == 0.0) return 1.0 / frame_count;
    const double eta = schedule.decay;
    const double growth = std::pow(1.0 - eta, -static_cast<double>(schedule.window));
    return 1.0 / (frame_count - schedule.window + (growth - 1.0) / eta);
}

void AlphaSubproblem::validate() const {
    if (losses.empty()) throw std::invalid_argument("AlphaSubproblem: empty problem");
    if (losses.size() != priors.size())
        throw std::invalid_argument("AlphaSubproblem: losses/priors length mismatch");
    if (!(mu > 0.0)) throw std::invalid_argument("AlphaSubproblem: mu must be > 0");
    for (double l : losses)
        if (!std::isfinite(l)) throw std::invalid_argument("AlphaSubproblem: non-finite loss");
    for (double p : priors)
        if (!(p > 0.0) || !std::isfinite(p))
            throw std::invalid_argument("AlphaSubproblem: priors must be positive and finite");
}

double alpha_objective(const AlphaSubproblem& problem, const std::vector<double>& alpha) {
    double obj = 0.0;
    for (size_t k = 0; k < alpha.size(); ++k)
        obj += problem.losses[k] * alpha[k] + alpha[k] * alpha[k] / (problem.mu * problem.priors[k]);
    return obj;
}

double kkt_residual(const AlphaSubproblem& problem, const std::vector<double>& alpha, double nu) {
    const size_t t = alpha.size();
    double res = 0.0;
    double sum = 0.0;
    for (size_t k = 0; k < t; ++k) {
        sum += alpha[k];
        res = std::max(res, -alpha[k]);  // primal nonnegativity
        const double grad = problem.losses[k] + 2.0 * alpha[k] / (problem.mu * problem.priors[k]);
        if (alpha[k] > 0.0)
            res = std::max(res, std::abs(grad - nu));  // stationarity on the support
        else
            res = std::max(res, nu - grad);  // dual feasibility: grad >= nu off the support
    }
    res = std::max(res, std::abs(sum - 1.0));
    return res;
}

namespace {

// Evaluates alpha(nu) and its KKT data for a given multiplier. The exact
// renormalization removes the last-ulp feasibility gap that reconstructing
// alpha from nu leaves behind (it matters for extreme mu).
AlphaSolution assemble(const AlphaSubproblem& problem, double nu) {
    const size_t t = problem.losses.size();
    AlphaSolution out;
    out.alpha.resize(t);
    double sum = 0.0;
    for (size_t k = 0; k < t; ++k) {
        out.alpha[k] =
            std::max(0.0, 0.5 * problem.mu * problem.priors[k] * (nu - problem.losses[k]));
        sum += out.alpha[k];
    }
    if (sum > 0.0)
        for (double& a : out.alpha) a /= sum;
    out.nu = nu;
    out.kkt_residual = kkt_residual(problem, out.alpha, nu);
    return out;
}

AlphaSolution solve_by_scan(const AlphaSubproblem& problem) {
    const size_t t = problem.losses.size();

    std::vector<size_t> order(t);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return problem.losses[a] < problem.losses[b]; });

    // Shifting all losses leaves the solution unchanged (nu absorbs the
    // shift); anchor at the smallest loss for conditioning.
    const double base = problem.losses[order.front()];

    // With support = the m smallest-loss frames, sum alpha = 1 fixes
    //   nu = (2/mu + sum_{i<=m} rho_i L_i) / sum_{i<=m} rho_i.
    // The valid support is the largest prefix with nu > L_(m).
    double sum_rho = 0.0, sum_rho_loss = 0.0;
    double nu = 0.0;
    for (size_t m = 0; m < t; ++m) {
        const size_t k = order[m];
        const double shifted = problem.losses[k] - base;
        const double cand_rho = sum_rho + problem.priors[k];
        const double cand_rho_loss = sum_rho_loss + problem.priors[k] * shifted;
        const double cand_nu = (2.0 / problem.mu + cand_rho_loss) / cand_rho;
        if (m > 0 && cand_nu <= shifted) break;  // frame m would get alpha <= 0
        sum_rho = cand_rho;
        sum_rho_loss = cand_rho_loss;
        nu = cand_nu;
    }
    return assemble(problem, nu + base);
}

}  // namespace

AlphaSolution solve_alpha_bisection(const AlphaSubproblem& problem) {
    problem.validate();
    const size_t t = problem.losses.size();

    const double lo_loss = *std::min_element(problem.losses.begin(), problem.losses.end());
    // sum alpha(nu) is 0 at nu = min L and grows without bound, so bracket
    // [min L, nu_hi] with nu_hi large enough that the sum exceeds 1.
    double lo = lo_loss;
    double hi = lo_loss + 2.0 / problem.mu / *std::min_element(problem.priors.begin(), problem.priors.end()) + 1.0;
    auto mass = [&](double nu) {
        double s = 0.0;
        for (size_t k = 0; k < t; ++k)
            s += std::max(0.0, 0.5 * problem.mu * problem.priors[k] * (nu - problem.losses[k]));
        return s;
    };
    while (mass(hi) < 1.0) hi = lo_loss + 2.0 * (hi - lo_loss);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mass(mid) < 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return assemble(problem, 0.5 * (lo + hi));
}

AlphaSolution solve_alpha(const AlphaSubproblem& problem) {
    problem.validate();
    AlphaSolution sol = solve_by_scan(problem);
    if (sol.kkt_residual > 1e-9) {
        AlphaSolution fallback = solve_alpha_bisection(problem);
        if (fallback.kkt_residual < sol.kkt_residual) sol = std::move(fallback);
    }
    return sol;
}

std::vector<double> project_to_simplex(std::vector<double> x) {
    // Held et al. threshold rule: x_i -> max(0, x_i - tau) with tau chosen
    // from the largest prefix of the sorted values.
    std::vector<double> sorted(x);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumsum = 0.0, tau = 0.0;
    int support = 0;
    for (size_t i = 0; i < sorted.size(); ++i) {
        cumsum += sorted[i];
        const double cand = (cumsum - 1.0) / static_cast<double>(i + 1);
        if (sorted[i] - cand > 0.0) {
            tau = cand;
            support = static_cast<int>(i + 1);
        }
    }
    (void)support;
    for (double& xi : x) xi = std::max(0.0, xi - tau);
    return x;
}

std::vector<double> oracle_solve_alpha(const AlphaSubproblem& problem, int iterations, double step) {
    problem.validate();
    const size_t t = problem.losses.size();

    const double p_min = *std::min_element(problem.priors.begin(), problem.priors.end());
    const double p_max = *std::max_element(problem.priors.begin(), problem.priors.end());
    const double lipschitz = 2.0 / (problem.mu * p_min);
    if (step <= 0.0) step = 1.0 / lipschitz;
    if (iterations <= 0) {
        // Linear convergence at rate (1 - 1/kappa); budget for ~1e-10.
        const double kappa = p_max / p_min;
        iterations = static_cast<int>(std::min(400000.0, std::ceil(24.0 * kappa) + 200.0));
    }

    std::vector<double> alpha(t, 1.0 / static_cast<double>(t));
    std::vector<double> next(t);
    for (int it = 0; it < iterations; ++it) {
        for (size_t k = 0; k < t; ++k) {
            const double grad = problem.losses[k] + 2.0 * alpha[k] / (problem.mu * problem.priors[k]);
            next[k] = alpha[k] - step * grad;
        }
        next = project_to_simplex(std::move(next));
        double delta = 0.0;
        for (size_t k = 0; k < t; ++k) delta = std::max(delta, std::abs(next[k] - alpha[k]));
        alpha.swap(next);
        if (delta < 1e-15) break;
    }
    return alpha;
}

}  // namespace jtrack::weights
