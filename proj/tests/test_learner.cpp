#include <cmath>
#include <utility>
#include <vector>

#include <doctest.h>

#include "bisimlab/gaussian.hpp"
#include "bisimlab/learner.hpp"
#include "bisimlab/mdp.hpp"
#include "bisimlab/operators.hpp"
#include "bisimlab/rng.hpp"
#include "bisimlab/similarity.hpp"

using namespace bisimlab;

namespace {

Matrix scalar_map(double v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return m;
}

/// Two states, one action, self-loops, rewards 1 and 0: the entangled fixed
/// point is d(0,1) = 1 / (1 - c) in closed form.
FiniteMdp two_state_chain() {
    FiniteMdp mdp(2, 1);
    mdp.transition(0, 0, 0) = 1.0;
    mdp.transition(1, 0, 1) = 1.0;
    mdp.reward(0, 0) = 1.0;
    mdp.reward(1, 0) = 0.0;
    mdp.set_discount(0.9);
    return mdp;
}

double folded_normal_mean(double mu, double sigma) {
    return sigma * std::sqrt(2.0 / M_PI) * std::exp(-mu * mu / (2.0 * sigma * sigma)) +
           mu * (1.0 - 2.0 * normal_cdf(-mu / sigma));
}

}  // namespace

TEST_CASE("an all-zero distance is charged for the reward gap it ignores") {
    const FiniteMdp mdp = two_state_chain();
    const TabularPolicy policy = TabularPolicy::uniform(2, 1);
    const SimilarityG g = SimilarityG::reward_diff(mdp);
    const TabularDistanceParams params = TabularDistanceParams::constant(2, 0.0);

    const BatchLoss bl = bisim_loss_batch(params, mdp, policy, g, 0.9, {{0, 1}},
                                          {derive_stream(1, std::uint64_t{0})});
    // Target is G + c * d(s, s') = 1 with d frozen at zero; prediction is 0.
    CHECK(bl.loss == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(bl.targets.size() == 1);
    CHECK(bl.targets[0] == doctest::Approx(1.0).epsilon(1e-12));
    // Squared parametrization: zero raw value is a stationary point.
    CHECK(bl.grad(0, 1) == 0.0);
}

TEST_CASE("the analytic gradient matches central differences of the frozen-target loss") {
    const FiniteMdp mdp = random_mdp(4, 2, 0.0, 1.0, 11);
    const TabularPolicy policy = random_policy(4, 2, 12);
    const SimilarityG g = SimilarityG::reward_diff(mdp);
    TabularDistanceParams params = TabularDistanceParams::constant(4, 0.0);
    SplitMix64 gen(13);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) params.raw(i, j) = 0.3 + gen.uniform01();

    std::vector<std::pair<std::size_t, std::size_t>> batch;
    std::vector<std::uint64_t> seeds;
    SplitMix64 pick(14);
    for (int b = 0; b < 24; ++b) {
        batch.emplace_back(pick.next_u64() % 4, pick.next_u64() % 4);
        seeds.push_back(derive_stream(15, std::uint64_t(b)));
    }

    const BatchLoss bl = bisim_loss_batch(params, mdp, policy, g, 0.9, batch, seeds);
    CHECK(bl.loss == doctest::Approx(loss_given_targets(params, batch, bl.targets)).epsilon(1e-12));

    const double h = 1e-6;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            TabularDistanceParams plus = params, minus = params;
            plus.raw(i, j) += h;
            minus.raw(i, j) -= h;
            const double fd = (loss_given_targets(plus, batch, bl.targets) -
                               loss_given_targets(minus, batch, bl.targets)) /
                              (2.0 * h);
            const double scale = std::max(1.0, std::abs(fd));
            CHECK(std::abs(bl.grad(i, j) - fd) / scale < 1e-4);
        }
    }
}

TEST_CASE("training recovers the closed-form distance of the two-state chain") {
    const FiniteMdp mdp = two_state_chain();
    const TabularPolicy policy = TabularPolicy::uniform(2, 1);
    const SimilarityG g = SimilarityG::reward_diff(mdp);

    const TabularTrainResult r = train_tabular(mdp, policy, g, 0.9, 5000, 2e-3, 8, 3);
    REQUIRE(!r.diverged);
    REQUIRE(r.history.size() == 5000);
    CHECK(r.exact.at(0, 1) == doctest::Approx(10.0).epsilon(1e-8));
    CHECK(std::abs(r.params.distance(0, 1) - 10.0) < 0.05);
    // Deterministic dynamics leave no target noise, so the run settles far
    // below any stochastic floor.
    CHECK(r.history.back().sup_error < 1e-6);
}

TEST_CASE("states duplicated from a common original train toward distance zero") {
    const FiniteMdp base = random_mdp(3, 2, 0.0, 1.0, 111);
    const TabularPolicy base_policy = random_policy(3, 2, 112);
    const DuplicatedMdp dup = duplicate_states(base, {{0, 2}});
    const TabularPolicy policy = lift_policy(base_policy, dup.origin);
    const SimilarityG g = SimilarityG::reward_diff(dup.mdp);

    const TabularTrainResult r = train_tabular(dup.mdp, policy, g, 0.9, 20000, 1e-2, 128, 113);
    REQUIRE(!r.diverged);
    for (const auto& pr : dup.pairs.pairs) {
        CHECK(r.exact.at(pr.first, pr.second) <= 1e-8);
        CHECK(r.params.distance(pr.first, pr.second) <= 1e-2);
    }
}

TEST_CASE("at zero contraction the run converges to the expected immediate gap") {
    const FiniteMdp mdp = random_mdp(4, 3, 0.0, 1.0, 101);
    const TabularPolicy policy = random_policy(4, 3, 102);
    const SimilarityG g = SimilarityG::reward_diff(mdp);

    const TabularTrainResult r = train_tabular(mdp, policy, g, 0.0, 20000, 1e-3, 128, 103);
    REQUIRE(!r.diverged);
    const StateMetric one_step =
        apply_F_eps_bar(mdp, policy, g, 0.0, StateMetric::zero(4));
    CHECK(r.exact.sup_distance(one_step) < 1e-9);
    CHECK(r.history.back().sup_error < 5e-3);
}

TEST_CASE("realized metrics are symmetric with a structurally zero diagonal") {
    TabularDistanceParams params = TabularDistanceParams::constant(3, 0.0);
    params.raw(0, 1) = -0.5;
    params.raw(0, 2) = 1.5;
    params.raw(1, 2) = 0.0;
    const StateMetric m = params.realize();
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(m.at(i, i) == 0.0);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(m.at(i, j) == m.at(j, i));
            CHECK(m.at(i, j) >= 0.0);
        }
    }
    CHECK(m.at(0, 1) == 0.25);
    CHECK(m.at(0, 2) == 2.25);
}

TEST_CASE("noise seeds are inert when the testbed itself is deterministic") {
    const FiniteMdp mdp = two_state_chain();
    const TabularPolicy policy = TabularPolicy::uniform(2, 1);
    const SimilarityG g = SimilarityG::reward_diff(mdp);

    TrainTabularOptions a, b;
    a.batch_seed = 71;
    a.noise_seed = 1000;
    b.batch_seed = 71;
    b.noise_seed = 2000;
    const auto ra = train_tabular(mdp, policy, g, 0.9, 400, 2e-3, 8, 70, a);
    const auto rb = train_tabular(mdp, policy, g, 0.9, 400, 2e-3, 8, 70, b);
    REQUIRE(ra.history.size() == rb.history.size());
    for (std::size_t t = 0; t < ra.history.size(); ++t) {
        CHECK(ra.history[t].loss == rb.history[t].loss);
        CHECK(ra.history[t].sup_error == rb.history[t].sup_error);
    }
    CHECK(ra.params.raw(0, 1) == rb.params.raw(0, 1));
}

TEST_CASE("an absurd step size trips the divergence guard and keeps partial history") {
    const FiniteMdp mdp = two_state_chain();
    const TabularPolicy policy = TabularPolicy::uniform(2, 1);
    const SimilarityG g = SimilarityG::reward_diff(mdp);

    const TabularTrainResult r = train_tabular(mdp, policy, g, 0.9, 500, 1e6, 16, 5);
    CHECK(r.diverged);
    CHECK(r.history.size() < 500);
    CHECK(r.diverged_step <= 500);
    for (const auto& row : r.history) CHECK(std::isfinite(row.loss));
}

TEST_CASE("the separable learner recovers the exact weight of a deterministic testbed") {
    // 1-D states and actions, zero-stddev dynamics, deterministic policy
    // a = 0.6 z + 0.1: the reward gap is |0.7 + 0.5 * 0.6| |z - z'| = |z - z'|,
    // so at c = 0 the optimal weight on |z - z'| is exactly 1.
    const AffineMap mean{scalar_map(0.0), scalar_map(0.0), {0.0}};
    const AffineMap stddev{scalar_map(0.0), scalar_map(0.0), {0.0}};
    const AffineMap reward{scalar_map(0.7), scalar_map(0.5), {0.2}};
    const GaussianLinearMdp mdp(1, 1, mean, stddev, reward, 0.9);
    const GaussianPolicy policy{scalar_map(0.6), {0.1}, {0.0}};

    const SeparableTrainResult r = train_separable_gaussian(
        mdp, policy, ContinuousSimilarity::RewardDiff, 0.0, 1500, 0.05, 64, 1, 1, 121);
    REQUIRE(!r.diverged);
    REQUIRE(r.history.size() == 1500);
    CHECK(std::abs(r.params.weights(0, 0) - 1.0) < 0.02);

    SplitMix64 gen(122);
    for (int k = 0; k < 20; ++k) {
        const Vec z{gen.standard_normal()};
        const Vec z2{gen.standard_normal()};
        const double truth = std::abs(z[0] - z2[0]);
        if (truth < 0.1) continue;
        CHECK(std::abs(r.params.distance(z, z2) - truth) / truth < 0.02);
    }
}

TEST_CASE("a coordinate the data never separates keeps an exactly zero weight") {
    const std::size_t dim = 2;
    AffineMap mean{Matrix(dim, dim), Matrix(dim, 1), Vec(dim, 0.0)};
    AffineMap stddev{Matrix(dim, dim), Matrix(dim, 1), Vec(dim, 0.0)};
    Matrix rz(1, dim);
    rz(0, 0) = 0.8;
    rz(0, 1) = 0.3;
    const AffineMap reward{rz, scalar_map(0.4), {0.0}};
    const GaussianLinearMdp mdp(dim, 1, mean, stddev, reward, 0.9);
    Matrix pc(1, dim);
    pc(0, 0) = 0.5;
    const GaussianPolicy policy{pc, {0.0}, {0.0}};

    TrainSeparableOptions options;
    options.pair_sampler = [](SplitMix64& gen) {
        const double shared = gen.standard_normal();
        return std::make_pair(Vec{gen.standard_normal(), shared},
                              Vec{gen.standard_normal(), shared});
    };
    const SeparableTrainResult r = train_separable_gaussian(
        mdp, policy, ContinuousSimilarity::RewardDiff, 0.0, 800, 0.05, 32, 1, 2, 123, options);
    REQUIRE(!r.diverged);
    CHECK(r.params.weights(0, 0) > 0.1);
    CHECK(r.params.weights(1, 0) == 0.0);
    CHECK(r.params.weights(1, 1) == 0.0);
}

TEST_CASE("the trained distance satisfies the consistency equation on held-out pairs") {
    // Affine-stddev testbed chosen so the fixed point stays inside the
    // separable family: the entangled next-state gap is
    // |z - z'| |0.85 + 0.05 eps|, so d*(z, z') = w* |z - z'| with
    // w* = 0.55 / (1 - 0.9 E|0.85 + 0.05 eps|).
    const double c = 0.9;
    const AffineMap mean{scalar_map(0.6), scalar_map(0.5), {0.0}};
    const AffineMap stddev{scalar_map(0.05), scalar_map(0.0), {0.5}};
    const AffineMap reward{scalar_map(0.4), scalar_map(0.3), {0.0}};
    const GaussianLinearMdp mdp(1, 1, mean, stddev, reward, c);
    const GaussianPolicy policy{scalar_map(0.5), {0.0}, {0.0}};

    const SeparableTrainResult r = train_separable_gaussian(
        mdp, policy, ContinuousSimilarity::RewardDiff, c, 6000, 0.01, 64, 4, 1, 131);
    REQUIRE(!r.diverged);

    const double w_star = 0.55 / (1.0 - c * folded_normal_mean(0.85, 0.05));
    CHECK(std::abs(r.params.weights(0, 0) - w_star) / w_star < 5e-3);

    // At a fixed point, d(z, z') equals the expected one-draw target; check
    // the Monte Carlo residual stays within sampling error on fresh pairs.
    SplitMix64 gen(777);
    const std::size_t n_audit = 400;
    for (int p = 0; p < 12; ++p) {
        const Vec z{gen.standard_normal()};
        const Vec z2{gen.standard_normal()};
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t i = 0; i < n_audit; ++i) {
            const double t = sample_target_gaussian(
                mdp, policy, ContinuousSimilarity::RewardDiff, c, r.params, z, z2,
                derive_stream(888, std::uint64_t(p) * n_audit + i));
            sum += t;
            sum_sq += t * t;
        }
        const double mean_target = sum / double(n_audit);
        const double variance =
            (sum_sq - double(n_audit) * mean_target * mean_target) / double(n_audit - 1);
        const double se = std::sqrt(variance / double(n_audit));
        const double residual = std::abs(r.params.distance(z, z2) - mean_target);
        CHECK(residual <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("tightness audit: identical marginals cost nothing") {
    const GaussianLinearMdp mdp = random_gaussian_mdp(2, 2, 141);
    const GaussianPolicy policy = random_gaussian_policy(2, 2, 142);
    SeparableDistanceParams d = SeparableDistanceParams::zeros(2, 2);
    d.weights(0, 0) = 1.0;
    d.weights(1, 1) = 0.5;

    SplitMix64 gen(143);
    std::vector<std::pair<Vec, Vec>> pairs;
    for (int k = 0; k < 5; ++k) {
        Vec z{gen.standard_normal(), gen.standard_normal()};
        pairs.emplace_back(z, z);
    }
    const TightnessReport report = verify_tightness(mdp, policy, d, pairs, 200, 2000, 144);
    REQUIRE(report.rows.size() == pairs.size());
    for (const auto& row : report.rows) {
        CHECK(row.mc_estimate == 0.0);
        CHECK(row.quadrature_reference == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(row.passed);
    }
    CHECK(report.all_passed());
}

TEST_CASE("tightness audit: a pure mean shift is priced at the shift") {
    // Dynamics N(z, 1): the pair (0, 2) induces N(0,1) vs N(2,1), whose
    // W1 distance is exactly 2, and the shared-noise draws hit it exactly.
    const AffineMap mean{scalar_map(1.0), scalar_map(0.0), {0.0}};
    const AffineMap stddev{scalar_map(0.0), scalar_map(0.0), {1.0}};
    const AffineMap reward{scalar_map(1.0), scalar_map(0.0), {0.0}};
    const GaussianLinearMdp mdp(1, 1, mean, stddev, reward, 0.9);
    const GaussianPolicy policy{scalar_map(0.0), {0.0}, {0.0}};
    SeparableDistanceParams d = SeparableDistanceParams::zeros(1, 1);
    d.weights(0, 0) = 1.0;

    const TightnessReport report =
        verify_tightness(mdp, policy, d, {{Vec{0.0}, Vec{2.0}}}, 100, 50000, 145);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].mc_estimate == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(report.rows[0].mc_std_error == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.rows[0].quadrature_reference == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(report.rows[0].passed);
}
