#include <cmath>
#include <map>
#include <vector>

#include <doctest.h>

#include "bisimlab/gaussian.hpp"
#include "bisimlab/mdp.hpp"
#include "bisimlab/rng.hpp"
#include "bisimlab/types.hpp"

using namespace bisimlab;

namespace {

/// Policy evaluation by value iteration under the policy-averaged dynamics.
Vec evaluate_policy(const FiniteMdp& mdp, const TabularPolicy& policy, double gamma) {
    const AveragedDynamics avg = policy_averaged_dynamics(mdp, policy);
    const std::size_t n = mdp.n_states();
    Vec v(n, 0.0), next(n, 0.0);
    for (int iter = 0; iter < 4000; ++iter) {
        double change = 0.0;
        for (std::size_t z = 0; z < n; ++z) {
            double acc = avg.reward[z];
            for (std::size_t s = 0; s < n; ++s) acc += gamma * avg.transition(z, s) * v[s];
            next[z] = acc;
            change = std::max(change, std::abs(next[z] - v[z]));
        }
        v.swap(next);
        if (change < 1e-14) break;
    }
    return v;
}

}  // namespace

TEST_CASE("the one-state one-action MDP is fully determined") {
    const FiniteMdp mdp = random_mdp(1, 1, 0.0, 0.0, 99);
    CHECK(mdp.transition(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mdp.reward(0, 0) == 0.0);
}

TEST_CASE("random MDPs are deterministic in the seed and valid") {
    const FiniteMdp a = random_mdp(3, 2, 0.0, 1.0, 7);
    const FiniteMdp b = random_mdp(3, 2, 0.0, 1.0, 7);
    const FiniteMdp c = random_mdp(3, 2, 0.0, 1.0, 8);
    bool identical = true, differs = false;
    for (std::size_t z = 0; z < 3; ++z)
        for (std::size_t x = 0; x < 2; ++x) {
            if (a.reward(z, x) != b.reward(z, x)) identical = false;
            if (a.reward(z, x) != c.reward(z, x)) differs = true;
            for (std::size_t s = 0; s < 3; ++s) {
                if (a.transition(z, x, s) != b.transition(z, x, s)) identical = false;
                if (a.transition(z, x, s) != c.transition(z, x, s)) differs = true;
            }
        }
    CHECK(identical);
    CHECK(differs);
    for (std::size_t z = 0; z < 3; ++z)
        for (std::size_t x = 0; x < 2; ++x) {
            double mass = 0.0;
            for (std::size_t s = 0; s < 3; ++s) {
                mass += a.transition(z, x, s);
                CHECK(a.transition(z, x, s) >= 0.0);
            }
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(a.reward(z, x) >= 0.0);
            CHECK(a.reward(z, x) <= 1.0);
        }
    a.validate();
}

TEST_CASE("invalid MDP shapes and values are rejected") {
    CHECK_THROWS_AS(random_mdp(0, 2, 0.0, 1.0, 1), ArgumentError);
    CHECK_THROWS_AS(random_mdp(2, 0, 0.0, 1.0, 1), ArgumentError);
    CHECK_THROWS_AS(random_mdp(2, 2, 1.0, 0.0, 1), ArgumentError);

    FiniteMdp broken(2, 1);
    broken.transition(0, 0, 0) = 0.7;  // row sums to 0.7
    broken.transition(1, 0, 1) = 1.0;
    CHECK_THROWS_AS(broken.validate(), ArgumentError);

    FiniteMdp ok = random_mdp(2, 1, 0.0, 1.0, 1);
    CHECK_THROWS_AS(ok.set_discount(1.0), ArgumentError);
    CHECK_THROWS_AS(ok.set_discount(-0.1), ArgumentError);
}

TEST_CASE("random policies are deterministic, valid, and trivial with one action") {
    const TabularPolicy single = random_policy(3, 1, 4);
    for (std::size_t z = 0; z < 3; ++z) CHECK(single.prob(z, 0) == 1.0);

    const TabularPolicy a = random_policy(4, 3, 21);
    const TabularPolicy b = random_policy(4, 3, 21);
    for (std::size_t z = 0; z < 4; ++z) {
        double mass = 0.0;
        for (std::size_t x = 0; x < 3; ++x) {
            CHECK(a.prob(z, x) == b.prob(z, x));
            CHECK(a.prob(z, x) >= 0.0);
            mass += a.prob(z, x);
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("duplicating one state adds a copy and records the pair") {
    const FiniteMdp base = random_mdp(2, 2, 0.0, 1.0, 5);
    const DuplicatedMdp dup = duplicate_states(base, {{0, 2}});
    CHECK(dup.mdp.n_states() == 3);
    REQUIRE(dup.pairs.size() == 1);
    CHECK(dup.pairs.pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});
    CHECK(dup.origin == std::vector<std::size_t>{0, 0, 1});
    dup.mdp.validate();

    // Copies carry the original reward row and split incoming mass evenly.
    for (std::size_t x = 0; x < 2; ++x) {
        CHECK(dup.mdp.reward(0, x) == base.reward(0, x));
        CHECK(dup.mdp.reward(1, x) == base.reward(0, x));
        CHECK(dup.mdp.reward(2, x) == base.reward(1, x));
        CHECK(dup.mdp.transition(2, x, 0) == doctest::Approx(base.transition(1, x, 0) / 2));
        CHECK(dup.mdp.transition(2, x, 1) == doctest::Approx(base.transition(1, x, 0) / 2));
        CHECK(dup.mdp.transition(2, x, 2) == doctest::Approx(base.transition(1, x, 1)));
    }
}

TEST_CASE("copy count one leaves the MDP unchanged") {
    const FiniteMdp base = random_mdp(3, 2, 0.0, 1.0, 17);
    const DuplicatedMdp dup = duplicate_states(base, {{0, 1}, {2, 1}});
    CHECK(dup.mdp.n_states() == 3);
    CHECK(dup.pairs.size() == 0);
    for (std::size_t z = 0; z < 3; ++z)
        for (std::size_t x = 0; x < 2; ++x) {
            CHECK(dup.mdp.reward(z, x) == base.reward(z, x));
            for (std::size_t s = 0; s < 3; ++s)
                CHECK(dup.mdp.transition(z, x, s) == base.transition(z, x, s));
        }
    CHECK_THROWS_AS(duplicate_states(base, {{1, 0}}), ArgumentError);
    CHECK_THROWS_AS(duplicate_states(base, {{9, 2}}), ArgumentError);
}

TEST_CASE("duplication preserves the policy value function") {
    const FiniteMdp base = random_mdp(4, 3, 0.0, 1.0, 31);
    const TabularPolicy policy = random_policy(4, 3, 32);
    const DuplicatedMdp dup = duplicate_states(base, {{1, 3}, {3, 2}});
    const TabularPolicy lifted = lift_policy(policy, dup.origin);

    const Vec v_base = evaluate_policy(base, policy, 0.9);
    const Vec v_dup = evaluate_policy(dup.mdp, lifted, 0.9);
    for (std::size_t k = 0; k < dup.origin.size(); ++k)
        CHECK(std::abs(v_dup[k] - v_base[dup.origin[k]]) < 1e-8);
}

TEST_CASE("policy averaging selects rows under a deterministic policy") {
    const FiniteMdp mdp = random_mdp(3, 2, 0.0, 1.0, 12);
    const TabularPolicy pick_second = TabularPolicy::constant(3, 2, 1);
    const AveragedDynamics avg = policy_averaged_dynamics(mdp, pick_second);
    for (std::size_t z = 0; z < 3; ++z) {
        CHECK(avg.reward[z] == doctest::Approx(mdp.reward(z, 1)).epsilon(1e-15));
        for (std::size_t s = 0; s < 3; ++s)
            CHECK(avg.transition(z, s) == doctest::Approx(mdp.transition(z, 1, s)).epsilon(1e-15));
    }
}

TEST_CASE("uniform averaging of rewards zero and one gives one half") {
    FiniteMdp mdp(1, 2);
    mdp.transition(0, 0, 0) = 1.0;
    mdp.transition(0, 1, 0) = 1.0;
    mdp.reward(0, 0) = 0.0;
    mdp.reward(0, 1) = 1.0;
    const AveragedDynamics avg =
        policy_averaged_dynamics(mdp, TabularPolicy::uniform(1, 2));
    CHECK(avg.reward[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("policy averaging matches a direct summation oracle") {
    const FiniteMdp mdp = random_mdp(5, 3, 0.0, 1.0, 77);
    const TabularPolicy policy = random_policy(5, 3, 78);
    const AveragedDynamics avg = policy_averaged_dynamics(mdp, policy);
    for (std::size_t z = 0; z < 5; ++z) {
        double r = 0.0;
        for (std::size_t x = 0; x < 3; ++x) r += policy.prob(z, x) * mdp.reward(z, x);
        CHECK(std::abs(avg.reward[z] - r) < 1e-12);
        double mass = 0.0;
        for (std::size_t s = 0; s < 5; ++s) {
            double t = 0.0;
            for (std::size_t x = 0; x < 3; ++x)
                t += policy.prob(z, x) * mdp.transition(z, x, s);
            CHECK(std::abs(avg.transition(z, s) - t) < 1e-12);
            mass += avg.transition(z, s);
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("Gaussian testbed next-state coordinates are uncorrelated") {
    const GaussianLinearMdp mdp = random_gaussian_mdp(3, 2, 41);
    const GaussianPolicy policy = random_gaussian_policy(3, 2, 42);
    const Vec z{0.3, -0.8, 1.1};
    const Vec a = policy.mean(z);
    const DiagonalGaussian next = mdp.next_state_distribution(z, a);
    next.validate();

    SplitMix64 gen(43);
    const int n = 50000;
    std::vector<Vec> draws(n, Vec(3));
    Vec mean(3, 0.0);
    for (int k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < 3; ++i) {
            draws[k][i] = next.mean[i] + next.stddev[i] * gen.standard_normal();
            mean[i] += draws[k][i] / n;
        }
    }
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) {
            double cov = 0.0;
            for (int k = 0; k < n; ++k)
                cov += (draws[k][i] - mean[i]) * (draws[k][j] - mean[j]) / n;
            const double scale = next.stddev[i] * next.stddev[j];
            CHECK(std::abs(cov / scale) < 0.03);
        }
}

TEST_CASE("Gaussian testbed generators are deterministic and validate") {
    const GaussianLinearMdp a = random_gaussian_mdp(2, 2, 9);
    const GaussianLinearMdp b = random_gaussian_mdp(2, 2, 9);
    a.validate();
    const Vec z{0.5, -0.25};
    const GaussianPolicy pa = random_gaussian_policy(2, 2, 10);
    const GaussianPolicy pb = random_gaussian_policy(2, 2, 10);
    pa.validate(2);
    CHECK(a.reward(z, pa.mean(z)) == b.reward(z, pb.mean(z)));
    const DiagonalGaussian na = a.next_state_distribution(z, pa.mean(z));
    const DiagonalGaussian nb = b.next_state_distribution(z, pb.mean(z));
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(na.mean[i] == nb.mean[i]);
        CHECK(na.stddev[i] == nb.stddev[i]);
    }
}
