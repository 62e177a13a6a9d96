#include <doctest.h>

#include <cmath>
#include <random>

#include "jtrack/learners.hpp"
#include "oracles.hpp"

using namespace jtrack;

namespace {

std::mt19937_64 rng_for(int salt) { return std::mt19937_64(0x9e3779b9u + salt); }

FeatureMap random_features(std::mt19937_64& rng, int rows, int cols, int d) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    FeatureMap f(rows, cols, d);
    for (double& v : f.v) v = uni(rng);
    return f;
}

Grid random_grid(std::mt19937_64& rng, int rows, int cols) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Grid g(rows, cols);
    for (double& v : g.v) v = uni(rng);
    return g;
}

TrainingSample random_sample(std::mt19937_64& rng, int rows, int cols, int d, long frame) {
    TrainingSample s;
    s.features = random_features(rng, rows, cols, d);
    s.label = random_grid(rng, rows, cols);
    s.frame_index = frame;
    return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double max_abs(const std::vector<double>& a) {
    double d = 0.0;
    for (double v : a) d = std::max(d, std::abs(v));
    return d;
}

}  // namespace

TEST_CASE("gaussian label peaks at 1 and wraps") {
    const LabelMap y = make_gaussian_label(8, 8, 2, 3, 1.7);
    CHECK(y.at(2, 3) == doctest::Approx(1.0).epsilon(1e-15));

    const LabelMap corner = make_gaussian_label(8, 8, 0, 0, 1.0);
    // wrapped distance from (0,0) to (4,4) is (4,4)
    CHECK(corner.at(4, 4) == doctest::Approx(std::exp(-16.0)).epsilon(1e-12));
    // wrap symmetry: (0,7) is one step left of the peak
    CHECK(corner.at(0, 7) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

    const LabelMap flat = make_gaussian_label(8, 8, 4, 4, 1e6);
    for (double v : flat.v) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS(make_gaussian_label(8, 8, 4, 4, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_gaussian_label(8, 8, 9, 4, 1.0), std::invalid_argument);
}

TEST_CASE("impulse data reproduces the label exactly") {
    TrainingSample s;
    s.features = FeatureMap(6, 5, 1);
    s.features.at(0, 0, 0) = 1.0;  // unit impulse at the origin
    auto rng = rng_for(1);
    s.label = random_grid(rng, 6, 5);

    const CorrelationFilter f = train_filter({s}, {1.0}, 0.0);
    CHECK(max_abs_diff(f.coeffs, s.label->v) <= 1e-12);
    CHECK(filter_frame_loss(f, s) <= 1e-12);
}

TEST_CASE("huge regularization drives the filter to zero") {
    auto rng = rng_for(2);
    const std::vector<TrainingSample> samples{random_sample(rng, 8, 8, 2, 1)};
    const CorrelationFilter f = train_filter(samples, {1.0}, 1e12);
    CHECK(max_abs(f.coeffs) <= 1e-9);
}

TEST_CASE("train_filter matches the dense circulant oracle") {
    auto rng = rng_for(3);
    for (int rep = 0; rep < 8; ++rep) {
        const int rows = rep % 2 ? 4 : 8;
        const int cols = rep % 3 ? 4 : 6;
        const int d = 1 + rep % 2;
        std::vector<TrainingSample> samples;
        for (long k = 1; k <= 3; ++k) samples.push_back(random_sample(rng, rows, cols, d, k));
        std::vector<double> alpha{0.5, 0.3, 0.2};
        const double lambda = 0.1;

        const CorrelationFilter fast = train_filter(samples, alpha, lambda);
        const CorrelationFilter dense = oracles::dense_train_filter(samples, alpha, lambda);
        const double scale = std::max(1e-30, max_abs(dense.coeffs));
        CAPTURE(rep);
        CHECK(max_abs_diff(fast.coeffs, dense.coeffs) / scale <= 1e-8);
    }
}

TEST_CASE("lambda = 0 with rank-deficient data is a degenerate problem") {
    TrainingSample s;
    s.features = FeatureMap(4, 4, 2);  // all-zero features
    s.label = Grid(4, 4, 1.0);
    s.frame_index = 1;
    CHECK_THROWS_AS(train_filter({s}, {1.0}, 0.0), std::domain_error);
}

TEST_CASE("first-order optimality of the trained filter") {
    auto rng = rng_for(4);
    std::vector<TrainingSample> samples;
    for (long k = 1; k <= 3; ++k) samples.push_back(random_sample(rng, 6, 6, 2, k));
    const std::vector<double> alpha{0.2, 0.5, 0.3};
    const double lambda = 0.05;
    const CorrelationFilter f = train_filter(samples, alpha, lambda);
    const double base = oracles::dense_objective(f, samples, alpha, lambda);

    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        CorrelationFilter probe = f;
        for (double& c : probe.coeffs) c += 1e-4 * gauss(rng);
        CHECK(oracles::dense_objective(probe, samples, alpha, lambda) >= base - 1e-8);
    }
}

TEST_CASE("duplicating a frame and halving its weight changes nothing") {
    auto rng = rng_for(5);
    std::vector<TrainingSample> samples;
    for (long k = 1; k <= 2; ++k) samples.push_back(random_sample(rng, 5, 4, 2, k));
    const CorrelationFilter base = train_filter(samples, {0.6, 0.4}, 0.2);

    std::vector<TrainingSample> doubled = samples;
    doubled.push_back(samples.back());
    const CorrelationFilter split = train_filter(doubled, {0.6, 0.2, 0.2}, 0.2);
    CHECK(max_abs_diff(base.coeffs, split.coeffs) <= 1e-10);
}

TEST_CASE("filter_confidence agrees with naive circular convolution") {
    auto rng = rng_for(6);
    CorrelationFilter f;
    f.rows = 4;
    f.cols = 4;
    f.channels = 2;
    f.coeffs = random_features(rng, 4, 4, 2).v;
    const FeatureMap x = random_features(rng, 4, 4, 2);

    const Grid fast = filter_confidence(f, x);
    const Grid naive = oracles::naive_confidence(f, x);
    CHECK(max_abs_diff(fast.v, naive.v) <= 1e-10);

    // impulse filter = identity on the single channel
    CorrelationFilter impulse;
    impulse.rows = 4;
    impulse.cols = 4;
    impulse.channels = 1;
    impulse.coeffs.assign(16, 0.0);
    impulse.coeffs[0] = 1.0;
    FeatureMap single(4, 4, 1);
    auto rng2 = rng_for(7);
    for (double& v : single.v) v = std::uniform_real_distribution<double>(-1, 1)(rng2);
    CHECK(max_abs_diff(filter_confidence(impulse, single).v, single.v) <= 1e-12);

    // zero filter -> zero confidence
    CorrelationFilter zero = impulse;
    zero.coeffs.assign(16, 0.0);
    CHECK(max_abs(filter_confidence(zero, single).v) == 0.0);

    FeatureMap wrong(5, 4, 1);
    CHECK_THROWS_AS(filter_confidence(impulse, wrong), std::invalid_argument);
}

TEST_CASE("frame loss via Parseval equals the spatial-domain loss") {
    auto rng = rng_for(8);
    for (int rep = 0; rep < 6; ++rep) {
        const TrainingSample s = random_sample(rng, 8, 6, 2, 1);
        CorrelationFilter f;
        f.rows = 8;
        f.cols = 6;
        f.channels = 2;
        f.coeffs = random_features(rng, 8, 6, 2).v;

        const double fast = filter_frame_loss(f, s);
        const double naive = oracles::naive_frame_loss(f, s);
        CHECK(std::abs(fast - naive) <= 1e-10 * std::max(1.0, naive));
    }

    // zero filter: loss reduces to the label energy
    const TrainingSample s = random_sample(rng, 4, 4, 1, 1);
    CorrelationFilter zero;
    zero.rows = 4;
    zero.cols = 4;
    zero.channels = 1;
    zero.coeffs.assign(16, 0.0);
    double energy = 0.0;
    for (double v : s.label->v) energy += v * v;
    CHECK(filter_frame_loss(zero, s) == doctest::Approx(energy).epsilon(1e-12));
}

TEST_CASE("spatial training with constant penalty reduces to ridge training") {
    auto rng = rng_for(9);
    std::vector<TrainingSample> samples;
    for (long k = 1; k <= 2; ++k) samples.push_back(random_sample(rng, 6, 6, 1, k));
    const std::vector<double> alpha{0.5, 0.5};
    const double lambda = 0.5;

    const Grid penalty(6, 6, std::sqrt(lambda));
    const CorrelationFilter gs = train_filter_spatial(samples, alpha, penalty, 400, nullptr);
    const CorrelationFilter ridge = train_filter(samples, alpha, lambda);
    CHECK(max_abs_diff(gs.coeffs, ridge.coeffs) <= 1e-6);
}

TEST_CASE("zero sweeps returns the warm start untouched") {
    auto rng = rng_for(10);
    const std::vector<TrainingSample> samples{random_sample(rng, 4, 4, 1, 1)};
    CorrelationFilter warm;
    warm.rows = 4;
    warm.cols = 4;
    warm.channels = 1;
    warm.coeffs = random_grid(rng, 4, 4).v;
    const Grid penalty(4, 4, 1.0);
    const CorrelationFilter out = train_filter_spatial(samples, {1.0}, penalty, 0, &warm);
    CHECK(out.coeffs == warm.coeffs);
}

TEST_CASE("gauss-seidel reaches the dense direct solution of the penalized system") {
    auto rng = rng_for(11);
    std::vector<TrainingSample> samples;
    for (long k = 1; k <= 2; ++k) samples.push_back(random_sample(rng, 8, 8, 1, k));
    const std::vector<double> alpha{0.7, 0.3};

    Grid penalty(8, 8);
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) penalty.at(r, c) = 0.5 + 0.2 * (r + c);  // ramp mask

    const CorrelationFilter gs = train_filter_spatial(samples, alpha, penalty, 200, nullptr);
    const CorrelationFilter direct = oracles::dense_train_filter_spatial(samples, alpha, penalty);
    CHECK(max_abs_diff(gs.coeffs, direct.coeffs) <= 1e-6);
}

TEST_CASE("gauss-seidel sweeps decrease the normal-equations objective monotonically") {
    auto rng = rng_for(12);
    std::vector<TrainingSample> samples;
    for (long k = 1; k <= 2; ++k) samples.push_back(random_sample(rng, 6, 6, 1, k));
    const std::vector<double> alpha{0.5, 0.5};
    Grid penalty(6, 6, 0.3);

    // chained single sweeps equal one continuous run; the quadratic
    // objective of the penalized problem must not increase
    auto objective = [&](const CorrelationFilter& f) {
        double obj = 0.0;
        for (size_t k = 0; k < samples.size(); ++k)
            obj += alpha[k] * oracles::naive_frame_loss(f, samples[k]);
        for (int l = 0; l < f.channels; ++l)
            for (int p = 0; p < 36; ++p) {
                const double w = penalty.v[p] * f.channel(l)[p];
                obj += w * w;
            }
        return obj;
    };

    CorrelationFilter cur = train_filter_spatial(samples, alpha, penalty, 1, nullptr);
    double prev = objective(cur);
    for (int sweep = 0; sweep < 30; ++sweep) {
        cur = train_filter_spatial(samples, alpha, penalty, 1, &cur);
        const double now = objective(cur);
        CHECK(now <= prev + 1e-12);
        prev = now;
    }
}

TEST_CASE("spatial training validates its inputs") {
    auto rng = rng_for(13);
    const std::vector<TrainingSample> samples{random_sample(rng, 4, 4, 1, 1)};
    Grid bad(4, 4, 1.0);
    bad.at(2, 2) = 0.0;
    CHECK_THROWS_AS(train_filter_spatial(samples, {1.0}, bad, 5, nullptr),
                    std::invalid_argument);

    const std::vector<TrainingSample> big{random_sample(rng, 48, 48, 2, 1)};
    CHECK_THROWS_AS(train_filter_spatial(big, {1.0}, Grid(48, 48, 1.0), 1, nullptr),
                    std::invalid_argument);
}

namespace {

FrameSamples svm_frame(long index, std::vector<std::pair<std::vector<double>, int>> pts) {
    FrameSamples fr;
    fr.frame_index = index;
    for (auto& [x, y] : pts) {
        TrainingSample s;
        s.features = FeatureMap(1, 1, static_cast<int>(x.size()));
        s.features.v = x;
        s.klass = y;
        s.frame_index = index;
        fr.samples.push_back(std::move(s));
    }
    return fr;
}

}  // namespace

TEST_CASE("svm frame loss hand values") {
    LinearSvmModel m;
    m.weights = {1.0};
    m.bias = 0.0;

    // margins >= 1 on both samples
    auto fr = svm_frame(1, {{{2.0}, 1}, {{-3.0}, -1}});
    CHECK(svm_frame_loss(m, fr) == doctest::Approx(0.0));

    // score 0, label +1 -> hinge 1
    fr = svm_frame(1, {{{0.0}, 1}});
    CHECK(svm_frame_loss(m, fr) == doctest::Approx(1.0));

    // scores 0.5 and -0.5, both labeled +1 -> 0.5 + 1.5
    fr = svm_frame(1, {{{0.5}, 1}, {{-0.5}, 1}});
    CHECK(svm_frame_loss(m, fr) == doctest::Approx(2.0));
}

TEST_CASE("separable points are fit to near-zero hinge") {
    std::vector<FrameSamples> frames{svm_frame(1, {{{-2.0}, -1}}), svm_frame(2, {{{2.0}, 1}})};
    const std::vector<double> alpha{0.5, 0.5};
    const LinearSvmModel m = train_svm(frames, alpha, 1e-6, 400);
    double hinge = 0.0;
    for (size_t k = 0; k < frames.size(); ++k) hinge += alpha[k] * svm_frame_loss(m, frames[k]);
    CHECK(hinge <= 1e-3);
}

TEST_CASE("zero-weight frames do not influence the svm") {
    auto rng = rng_for(14);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    auto make = [&](long idx, int n) {
        std::vector<std::pair<std::vector<double>, int>> pts;
        for (int j = 0; j < n; ++j) {
            std::vector<double> x{uni(rng), uni(rng), uni(rng)};
            pts.emplace_back(x, x[0] + 0.3 * x[1] > 0 ? 1 : -1);
        }
        return svm_frame(idx, pts);
    };
    std::vector<FrameSamples> frames{make(1, 5), make(2, 5), make(3, 5)};
    const LinearSvmModel with_zero = train_svm(frames, {0.6, 0.0, 0.4}, 0.1, 200);

    std::vector<FrameSamples> pruned{frames[0], frames[2]};
    const LinearSvmModel without = train_svm(pruned, {0.6, 0.4}, 0.1, 200);

    CHECK(svm_objective(with_zero, frames, {0.6, 0.0, 0.4}, 0.1) ==
          doctest::Approx(svm_objective(without, pruned, {0.6, 0.4}, 0.1)).epsilon(1e-9));
}

TEST_CASE("svm objective matches the independent reference solver") {
    auto rng = rng_for(15);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<FrameSamples> frames;
    for (long k = 1; k <= 6; ++k) {
        std::vector<std::pair<std::vector<double>, int>> pts;
        for (int j = 0; j < 4; ++j) {
            const int y = j % 2 ? 1 : -1;
            std::vector<double> x{y * 1.0 + 0.4 * gauss(rng), y * -0.5 + 0.4 * gauss(rng)};
            pts.emplace_back(x, y);
        }
        frames.push_back(svm_frame(k, pts));
    }
    std::vector<double> alpha(frames.size(), 1.0 / frames.size());
    const double lambda = 0.1;

    const LinearSvmModel mine = train_svm(frames, alpha, lambda, 2000);
    const LinearSvmModel ref = oracles::reference_svm(frames, alpha, lambda, 20000);
    CHECK(svm_objective(mine, frames, alpha, lambda) <=
          svm_objective(ref, frames, alpha, lambda) + 1e-3);
    CHECK(svm_objective(ref, frames, alpha, lambda) <=
          svm_objective(mine, frames, alpha, lambda) + 1e-3);
}

TEST_CASE("longer svm budgets never increase the objective") {
    auto rng = rng_for(16);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<FrameSamples> frames;
    for (long k = 1; k <= 4; ++k) {
        std::vector<std::pair<std::vector<double>, int>> pts;
        for (int j = 0; j < 3; ++j) {
            std::vector<double> x{uni(rng), uni(rng)};
            pts.emplace_back(x, uni(rng) > 0 ? 1 : -1);
        }
        frames.push_back(svm_frame(k, pts));
    }
    const std::vector<double> alpha(4, 0.25);
    double prev = svm_objective(train_svm(frames, alpha, 0.2, 10), frames, alpha, 0.2);
    for (int budget : {30, 100, 300}) {
        const double obj =
            svm_objective(train_svm(frames, alpha, 0.2, budget), frames, alpha, 0.2);
        CHECK(obj <= prev + 1e-12);
        prev = obj;
    }
}

TEST_CASE("svm input validation") {
    CHECK_THROWS_AS(train_svm({}, {}, 0.1, 10), std::invalid_argument);
    auto fr = svm_frame(1, {{{1.0}, 1}});
    fr.samples.front().klass = 2;
    CHECK_THROWS_AS(train_svm({fr}, {1.0}, 0.1, 10), std::invalid_argument);

    // one-class input is allowed
    const LinearSvmModel m = train_svm({svm_frame(1, {{{1.0}, 1}, {{2.0}, 1}})}, {1.0}, 0.1, 50);
    CHECK(m.weights.size() == 1);
}
