#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "jtrack/baselines.hpp"

using namespace jtrack;
using namespace jtrack::baselines;

TEST_CASE("decay weights basic values") {
    auto uniform = decay_weights(5, 0.0);
    for (double a : uniform) CHECK(a == doctest::Approx(0.2).epsilon(1e-14));

    auto geometric = decay_weights(3, 0.5);
    CHECK(geometric[0] == doctest::Approx(1.0 / 7).epsilon(1e-12));
    CHECK(geometric[1] == doctest::Approx(2.0 / 7).epsilon(1e-12));
    CHECK(geometric[2] == doctest::Approx(4.0 / 7).epsilon(1e-12));

    auto onehot = decay_weights(4, 1.0);
    CHECK(onehot[3] == doctest::Approx(1.0));
    CHECK(onehot[0] == 0.0);

    CHECK_THROWS_AS(decay_weights(0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(decay_weights(3, 1.5), std::invalid_argument);
}

TEST_CASE("decay weights satisfy the recursion and the simplex") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> gamma_dist(0.0, 0.99);
    std::uniform_int_distribution<int> t_dist(1, 200);
    for (int rep = 0; rep < 100; ++rep) {
        const int t = t_dist(rng);
        const double gamma = gamma_dist(rng);
        const auto a = decay_weights(t, gamma);
        CHECK(is_simplex(a, 1e-12));
        for (int k = 0; k + 1 < t; ++k)
            CHECK(std::abs(a[k] - (1.0 - gamma) * a[k + 1]) <= 1e-12);
    }
}

TEST_CASE("psr hand-computed 3x3 example") {
    // peak 10 at the center, sidelobe of four 0s and four 2s
    Grid m(3, 3);
    m.at(1, 1) = 10.0;
    m.at(0, 0) = 2.0;
    m.at(0, 2) = 2.0;
    m.at(2, 0) = 2.0;
    m.at(2, 2) = 2.0;
    const PsrConfig cfg{0, 5.0};
    CHECK(psr(m, cfg) == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(psr_accept(m, cfg));
}

TEST_CASE("psr is invariant to positive affine rescaling") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Grid m(9, 11);
    for (double& v : m.v) v = uni(rng);
    const PsrConfig cfg{2, 0.0};
    const double base = psr(m, cfg);

    for (auto [scale, shift] : {std::pair{3.0, 0.0}, {0.25, 2.0}, {7.5, -4.0}}) {
        Grid t = m;
        for (double& v : t.v) v = scale * v + shift;
        CHECK(psr(t, cfg) == doctest::Approx(base).epsilon(1e-10));
    }
}

TEST_CASE("psr degenerate and error cases") {
    Grid constant(4, 4, 1.0);
    CHECK_THROWS_AS(psr(constant, PsrConfig{0, 0.0}), std::domain_error);
    CHECK_FALSE(psr_accept(constant, PsrConfig{0, 0.0}));  // reject, not error

    Grid tiny(3, 3, 0.0);
    tiny.at(1, 1) = 1.0;
    // radius 1 swallows the whole 3x3 wrapped neighborhood
    CHECK_THROWS_AS(psr(tiny, PsrConfig{1, 0.0}), std::invalid_argument);

    // disabled gate accepts everything, even degenerate maps
    const PsrConfig off{0, -std::numeric_limits<double>::infinity()};
    CHECK(psr_accept(constant, off));
    CHECK(psr_accept(tiny, off));
}

TEST_CASE("psr exclusion radius uses wrapped chebyshev distance") {
    Grid m(5, 5, 0.0);
    m.at(0, 0) = 5.0;  // peak in the corner
    // cells within radius 1 of (0,0) wrap to rows/cols {4,0,1}; fill the rest
    // with a two-valued pattern
    int idx = 0;
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) {
            const int dr = std::min(r, 5 - r);
            const int dc = std::min(c, 5 - c);
            if (std::max(dr, dc) > 1) m.at(r, c) = (idx++ % 2) ? 1.0 : -1.0;
        }
    const PsrConfig cfg{1, 0.0};
    // sidelobe holds only the +/-1 pattern: mean 0 (or close), stddev 1-ish
    const double v = psr(m, cfg);
    CHECK(v > 4.0);
    CHECK(std::isfinite(v));
}
