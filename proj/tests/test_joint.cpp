#include <doctest.h>

#include <cmath>
#include <random>

#include "jtrack/joint.hpp"

using namespace jtrack;

namespace {

TrainingSample dcf_sample(std::mt19937_64& rng, int size, long frame, bool corrupt_label = false) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    TrainingSample s;
    s.features = FeatureMap(size, size, 1);
    for (double& v : s.features.v) v = uni(rng);
    s.label = make_gaussian_label(size, size, size / 2, size / 2, 1.0);
    if (corrupt_label)
        for (double& v : s.label->v) v = uni(rng);  // label no longer matches anything
    s.frame_index = frame;
    return s;
}

FrameSamples dcf_frame(std::mt19937_64& rng, int size, long frame, bool corrupt = false) {
    FrameSamples fr;
    fr.frame_index = frame;
    fr.samples.push_back(dcf_sample(rng, size, frame, corrupt));
    return fr;
}

TrainingMemory fresh_memory(int capacity = 300, int window = 10, double decay = 0.1) {
    TrainingMemory m;
    m.capacity = capacity;
    m.schedule = weights::PriorSchedule{window, decay};
    return m;
}

}  // namespace

TEST_CASE("first frame gets full weight") {
    auto rng = std::mt19937_64(1);
    TrainingMemory m = fresh_memory();
    add_frame(m, dcf_frame(rng, 8, 1));
    REQUIRE(m.size() == 1);
    CHECK(m.alpha[0] == doctest::Approx(1.0));
    CHECK(m.priors[0] == doctest::Approx(1.0));
}

TEST_CASE("carry-over masses renormalize with the new prior") {
    auto rng = std::mt19937_64(2);
    TrainingMemory m = fresh_memory();
    add_frame(m, dcf_frame(rng, 8, 1));
    add_frame(m, dcf_frame(rng, 8, 2));

    // Force the documented scenario: alpha = [0.6, 0.4], then a third frame
    // whose prior weight is rho_t = 0.2.
    m.schedule = weights::PriorSchedule{2, 0.2};  // makes rho = [0.32, 0.4, ...]
    m.alpha = {0.6, 0.4};

    // compute what rho_t will be for t = 3 under the memory's schedule
    const auto rho3 = weights::compute_priors(3, m.schedule);
    add_frame(m, dcf_frame(rng, 8, 3));
    const double mass = 0.6 + 0.4 + rho3.back();
    CHECK(m.alpha[0] == doctest::Approx(0.6 / mass).epsilon(1e-12));
    CHECK(m.alpha[1] == doctest::Approx(0.4 / mass).epsilon(1e-12));
    CHECK(m.alpha[2] == doctest::Approx(rho3.back() / mass).epsilon(1e-12));

    // the exact worked example: rho_t = 0.2 gives [0.5, 1/3, 1/6]
    std::vector<double> unnorm{0.6, 0.4, 0.2};
    const double total = 1.2;
    CHECK(unnorm[0] / total == doctest::Approx(0.5));
    CHECK(unnorm[1] / total == doctest::Approx(1.0 / 3));
    CHECK(unnorm[2] / total == doctest::Approx(1.0 / 6));
}

TEST_CASE("frame indices must increase") {
    auto rng = std::mt19937_64(3);
    TrainingMemory m = fresh_memory();
    add_frame(m, dcf_frame(rng, 8, 5));
    CHECK_THROWS_AS(add_frame(m, dcf_frame(rng, 8, 5)), std::invalid_argument);
    CHECK_THROWS_AS(add_frame(m, dcf_frame(rng, 8, 4)), std::invalid_argument);
}

TEST_CASE("eviction removes the smallest weight, never the newest") {
    auto rng = std::mt19937_64(4);
    TrainingMemory m = fresh_memory();
    for (long f = 1; f <= 3; ++f) add_frame(m, dcf_frame(rng, 8, f));

    SUBCASE("tie between old frames goes to the oldest") {
        m.alpha = {0.1, 0.1, 0.8};
        evict_smallest(m);
        REQUIRE(m.size() == 2);
        CHECK(m.frames[0].frame_index == 2);
        CHECK(m.frames[1].frame_index == 3);
        CHECK(is_simplex(m.alpha, 1e-12));
    }
    SUBCASE("zero-weight frame goes and the survivors keep their values") {
        m.alpha = {0.0, 0.5, 0.5};
        evict_smallest(m);
        CHECK(m.frames[0].frame_index == 2);
        CHECK(m.alpha[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(m.alpha[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("newest is excluded even when it has the smallest weight") {
        m.alpha = {0.4, 0.1, 0.5};
        evict_smallest(m);
        CHECK(m.frames[0].frame_index == 1);
        CHECK(m.frames[1].frame_index == 3);
    }
    SUBCASE("newest excluded when it is the global minimum") {
        m.alpha = {0.45, 0.5, 0.05};
        evict_smallest(m);
        CHECK(m.frames[1].frame_index == 3);
    }
}

TEST_CASE("capacity is enforced by add_frame") {
    auto rng = std::mt19937_64(5);
    TrainingMemory m = fresh_memory(3);
    for (long f = 1; f <= 10; ++f) {
        add_frame(m, dcf_frame(rng, 8, f));
        CHECK(m.size() <= 3);
        CHECK(is_simplex(m.alpha, 1e-10));
        CHECK(is_simplex(m.priors, 1e-10));
    }
    CHECK(m.frames.back().frame_index == 10);
}

TEST_CASE("joint loss identities") {
    auto rng = std::mt19937_64(6);
    RidgeFilterLearner learner(0.0);
    TrainingMemory m = fresh_memory();
    add_frame(m, dcf_frame(rng, 8, 1));

    // single frame, perfect model, lambda = 0: only the alpha penalty
    // remains and it equals 1/mu since alpha = rho = [1]
    TrainingSample& s = m.frames[0].samples[0];
    s.features = FeatureMap(8, 8, 1);
    s.features.at(0, 0, 0) = 1.0;
    CorrelationFilter perfect = learner.train(m.frames, m.alpha);
    const double mu = 3.0;
    CHECK(joint_loss(learner, perfect, m, mu) == doctest::Approx(1.0 / mu).epsilon(1e-9));
}

TEST_CASE("joint loss equals its recomposition from parts") {
    auto rng = std::mt19937_64(7);
    RidgeFilterLearner learner(0.02);
    TrainingMemory m = fresh_memory();
    for (long f = 1; f <= 5; ++f) add_frame(m, dcf_frame(rng, 8, f));
    const CorrelationFilter model = learner.train(m.frames, m.alpha);

    const double mu = 5.0;
    double expected = 0.02 * model.squared_norm();
    for (int k = 0; k < m.size(); ++k) {
        expected += m.alpha[k] * filter_frame_loss(model, m.frames[k].samples[0]);
        expected += m.alpha[k] * m.alpha[k] / (mu * m.priors[k]);
    }
    CHECK(joint_loss(learner, model, m, mu) == doctest::Approx(expected).epsilon(1e-12));

    // alpha = rho makes the penalty term collapse to 1/mu
    m.alpha = m.priors;
    CorrelationFilter zero = model;
    zero.coeffs.assign(zero.coeffs.size(), 0.0);
    double label_energy = 0.0;
    for (int k = 0; k < m.size(); ++k) {
        double e = 0.0;
        for (double v : m.frames[k].samples[0].label->v) e += v * v;
        label_energy += m.alpha[k] * e;
    }
    CHECK(joint_loss(learner, zero, m, mu) ==
          doctest::Approx(label_energy + 1.0 / mu).epsilon(1e-12));
}

TEST_CASE("acs iterations never increase the joint loss") {
    auto rng = std::mt19937_64(8);
    JointConfig cfg;
    cfg.mu = 5.0;
    cfg.acs_iterations = 4;
    cfg.activation_frame = 1;
    cfg.lambda = 0.05;
    cfg.schedule = weights::PriorSchedule{10, 0.1};

    for (int rep = 0; rep < 10; ++rep) {
        RidgeFilterLearner learner(cfg.lambda);
        TrainingMemory m = fresh_memory(300, 10, 0.1);
        const int frames = 3 + rep % 5;
        for (long f = 1; f <= frames; ++f)
            add_frame(m, dcf_frame(rng, 8, f, f % 3 == 0));

        const auto result = acs_update(m, cfg, learner);
        CAPTURE(rep);
        for (size_t i = 1; i < result.joint_losses.size(); ++i) {
            const double prev = result.joint_losses[i - 1];
            const double now = result.joint_losses[i];
            CHECK(now <= prev + 1e-9 * std::max(1.0, std::abs(prev)));
        }
        CHECK(is_simplex(m.alpha, 1e-10));
    }
}

TEST_CASE("acs before the activation frame pins alpha to the priors") {
    auto rng = std::mt19937_64(9);
    JointConfig cfg;
    cfg.activation_frame = 10;
    RidgeFilterLearner learner(cfg.lambda);
    TrainingMemory m = fresh_memory(300, cfg.schedule.window, cfg.schedule.decay);
    for (long f = 1; f <= 5; ++f) add_frame(m, dcf_frame(rng, 8, f));

    acs_update(m, cfg, learner);
    CHECK(m.alpha == m.priors);
}

TEST_CASE("tiny mu reproduces the fixed-prior training result") {
    auto rng = std::mt19937_64(10);
    JointConfig cfg;
    cfg.mu = 1e-8;
    cfg.activation_frame = 1;
    RidgeFilterLearner learner(cfg.lambda);
    TrainingMemory m = fresh_memory(300, 10, 0.1);
    for (long f = 1; f <= 6; ++f) add_frame(m, dcf_frame(rng, 8, f));

    acs_update(m, cfg, learner);
    for (int k = 0; k < m.size(); ++k) CHECK(std::abs(m.alpha[k] - m.priors[k]) <= 1e-4);
}

TEST_CASE("repeated acs on unchanged memory is near-stationary") {
    auto rng = std::mt19937_64(11);
    JointConfig cfg;
    cfg.activation_frame = 1;
    cfg.acs_iterations = 1;
    RidgeFilterLearner learner(cfg.lambda);
    TrainingMemory m = fresh_memory(300, 10, 0.1);
    for (long f = 1; f <= 6; ++f) add_frame(m, dcf_frame(rng, 8, f, f == 2));

    auto first = acs_update(m, cfg, learner);
    for (int i = 0; i < 3; ++i) first = acs_update(m, cfg, learner, &first.model);
    const double before = first.joint_losses.back();
    const auto again = acs_update(m, cfg, learner, &first.model);
    CHECK(before - again.joint_losses.back() < 1e-7);
}

TEST_CASE("corrupted frames end up with less weight than clean ones") {
    auto rng = std::mt19937_64(12);
    JointConfig cfg;
    cfg.mu = 5.0;
    cfg.activation_frame = 1;
    RidgeFilterLearner learner(cfg.lambda);
    TrainingMemory m = fresh_memory(300, 10, 0.05);

    // two shared-appearance clean frames and one label-corrupted frame
    auto clean_template = dcf_frame(rng, 8, 1);
    add_frame(m, clean_template);
    auto second = clean_template;
    second.frame_index = 2;
    second.samples[0].frame_index = 2;
    add_frame(m, second);
    add_frame(m, dcf_frame(rng, 8, 3, true));

    acs_update(m, cfg, learner);
    CHECK(m.alpha[2] < m.alpha[0]);
    CHECK(m.alpha[2] < m.alpha[1]);
}

TEST_CASE("acs rejects an empty memory") {
    JointConfig cfg;
    RidgeFilterLearner learner(0.01);
    TrainingMemory m = fresh_memory();
    CHECK_THROWS_AS(acs_update(m, cfg, learner), std::invalid_argument);
}
