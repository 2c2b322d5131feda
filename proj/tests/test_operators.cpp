#include <cmath>
#include <vector>

#include <doctest.h>

#include "bisimlab/mdp.hpp"
#include "bisimlab/metric.hpp"
#include "bisimlab/operators.hpp"
#include "bisimlab/rng.hpp"
#include "bisimlab/similarity.hpp"
#include "bisimlab/types.hpp"

using namespace bisimlab;

namespace {

/// Two absorbing states, rewards 1 and 0: every operator's fixed point puts
/// |1 - 0| / (1 - c) between them.
FiniteMdp two_state_self_loop() {
    FiniteMdp mdp(2, 1);
    mdp.transition(0, 0, 0) = 1.0;
    mdp.transition(1, 0, 1) = 1.0;
    mdp.reward(0, 0) = 1.0;
    mdp.reward(1, 0) = 0.0;
    return mdp;
}

OperatorKind kind_of(OperatorTag tag, double c, const FiniteMdp& mdp,
                     const TabularPolicy& policy) {
    OperatorKind kind;
    kind.tag = tag;
    kind.c = c;
    if (tag == OperatorTag::Eps || tag == OperatorTag::EpsBar)
        kind.similarity = SimilarityG::reward_diff(mdp);
    (void)policy;
    return kind;
}

StateMetric random_metric(std::size_t n, std::uint64_t seed) {
    SplitMix64 gen(seed);
    StateMetric d(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, 2.0 * gen.uniform01());
    return d;
}

}  // namespace

TEST_CASE("state-action similarity basics") {
    FiniteMdp mdp(2, 2);
    for (std::size_t z = 0; z < 2; ++z)
        for (std::size_t a = 0; a < 2; ++a) mdp.transition(z, a, z) = 1.0;
    mdp.reward(0, 0) = 1.0;
    mdp.reward(0, 1) = 0.25;
    mdp.reward(1, 0) = 0.5;
    mdp.reward(1, 1) = 0.5;
    const SimilarityG g = SimilarityG::reward_diff(mdp);
    CHECK(g.eval(0, 0, 0, 0) == 0.0);
    CHECK(g.eval(1, 1, 1, 1) == 0.0);
    CHECK(g.eval(0, 0, 0, 1) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK_THROWS_AS(g.eval(0, 0, 5, 0), ArgumentError);
}

TEST_CASE("similarity axioms hold exhaustively on a 4-state 3-action domain") {
    const FiniteMdp mdp = random_mdp(4, 3, 0.0, 1.0, 63);
    const TabularPolicy policy = random_policy(4, 3, 64);
    for (const SimilarityG& g :
         {SimilarityG::reward_diff(mdp), SimilarityG::policy_mean_diff(mdp, policy)}) {
        const SimilarityAxiomReport report = check_similarity_axioms(g);
        CHECK(report.passes(1e-12));
    }
}

TEST_CASE("policy-averaged operator at zero distance reduces to the reward gap") {
    const FiniteMdp mdp = random_mdp(4, 2, 0.0, 1.0, 15);
    const TabularPolicy policy = random_policy(4, 2, 16);
    const AveragedDynamics avg = policy_averaged_dynamics(mdp, policy);
    const StateMetric out = apply_F_pi(mdp, policy, 0.9, StateMetric::zero(4));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(out.at(i, j) ==
                  doctest::Approx(std::abs(avg.reward[i] - avg.reward[j])).epsilon(1e-12));
}

TEST_CASE("all unbiased operators solve the absorbing two-state chain in closed form") {
    const FiniteMdp mdp = two_state_self_loop();
    const TabularPolicy policy = TabularPolicy::uniform(2, 1);
    for (OperatorTag tag : {OperatorTag::Pi, OperatorTag::Eps, OperatorTag::EpsBar}) {
        const FixedPointResult result =
            fixed_point(kind_of(tag, 0.9, mdp, policy), mdp, policy, 1e-10, 100000);
        REQUIRE(result.converged);
        CHECK(std::abs(result.metric.at(0, 1) - 10.0) < 1e-8);
        CHECK(result.metric.at(0, 0) == 0.0);
        CHECK(result.metric.at(1, 1) == 0.0);
    }
}

TEST_CASE("entangled operators vanish on the diagonal for any distance matrix") {
    const FiniteMdp mdp = random_mdp(5, 3, 0.0, 1.0, 19);
    const TabularPolicy policy = random_policy(5, 3, 20);
    const SimilarityG g = SimilarityG::reward_diff(mdp);
    const StateMetric d = random_metric(5, 21);
    const StateMetric eps = apply_F_eps(mdp, policy, g, 0.9, d);
    const StateMetric ebar = apply_F_eps_bar(mdp, policy, g, 0.9, d);
    for (std::size_t z = 0; z < 5; ++z) {
        CHECK(eps.at(z, z) == 0.0);
        CHECK(ebar.at(z, z) == 0.0);
    }
}

TEST_CASE("with a single action the entangled operator collapses to the averaged one") {
    const FiniteMdp mdp = random_mdp(4, 1, 0.0, 1.0, 33);
    const TabularPolicy policy = TabularPolicy::uniform(4, 1);
    const SimilarityG g = SimilarityG::reward_diff(mdp);
    const StateMetric d = random_metric(4, 34);
    const StateMetric via_pi = apply_F_pi(mdp, policy, 0.8, d);
    const StateMetric via_eps = apply_F_eps(mdp, policy, g, 0.8, d);
    CHECK(via_pi.sup_distance(via_eps) < 1e-12);
}

TEST_CASE("deterministic transitions make both entangled variants identical") {
    FiniteMdp mdp(3, 2);
    SplitMix64 gen(44);
    for (std::size_t z = 0; z < 3; ++z)
        for (std::size_t a = 0; a < 2; ++a) {
            mdp.transition(z, a, gen.next_u64() % 3) = 1.0;
            mdp.reward(z, a) = gen.uniform01();
        }
    const TabularPolicy policy = random_policy(3, 2, 45);
    const SimilarityG g = SimilarityG::reward_diff(mdp);
    const StateMetric d = random_metric(3, 46);
    const StateMetric eps = apply_F_eps(mdp, policy, g, 0.9, d);
    const StateMetric ebar = apply_F_eps_bar(mdp, policy, g, 0.9, d);
    CHECK(eps.sup_distance(ebar) < 1e-12);
}

TEST_CASE("fixed points obey the pointwise ordering chain") {
    for (std::uint64_t k = 0; k < 12; ++k) {
        const std::size_t n = 2 + k % 5;
        const std::size_t m = 1 + k % 3;
        const FiniteMdp mdp = random_mdp(n, m, 0.0, 1.0, 100 + k);
        const TabularPolicy policy = random_policy(n, m, 200 + k);
        StateMetric solved[3];
        int idx = 0;
        for (OperatorTag tag : {OperatorTag::Pi, OperatorTag::Eps, OperatorTag::EpsBar}) {
            const FixedPointResult r =
                fixed_point(kind_of(tag, 0.9, mdp, policy), mdp, policy, 1e-9, 100000);
            REQUIRE(r.converged);
            solved[idx++] = r.metric;
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(solved[1].at(i, j) >= solved[0].at(i, j) - 1e-8);
                CHECK(solved[2].at(i, j) >= solved[1].at(i, j) - 1e-8);
            }
    }
}

TEST_CASE("operator application is monotone in the distance argument") {
    const FiniteMdp mdp = random_mdp(4, 2, 0.0, 1.0, 55);
    const TabularPolicy policy = random_policy(4, 2, 56);
    const SimilarityG g = SimilarityG::reward_diff(mdp);
    const StateMetric lo = random_metric(4, 57);
    StateMetric hi = lo;
    SplitMix64 gen(58);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
            hi.set(i, j, lo.at(i, j) + gen.uniform01());

    const auto check_monotone = [&](const StateMetric& a, const StateMetric& b) {
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) CHECK(a.at(i, j) <= b.at(i, j) + 1e-12);
    };
    check_monotone(apply_F_pi(mdp, policy, 0.9, lo), apply_F_pi(mdp, policy, 0.9, hi));
    check_monotone(apply_F_eps(mdp, policy, g, 0.9, lo), apply_F_eps(mdp, policy, g, 0.9, hi));
    check_monotone(apply_F_eps_bar(mdp, policy, g, 0.9, lo),
                   apply_F_eps_bar(mdp, policy, g, 0.9, hi));
}

TEST_CASE("duplicated states sit at distance zero in every unbiased fixed point") {
    const FiniteMdp base = random_mdp(3, 2, 0.0, 1.0, 61);
    const TabularPolicy policy = random_policy(3, 2, 62);
    const DuplicatedMdp dup = duplicate_states(base, {{0, 2}, {2, 3}});
    const TabularPolicy lifted = lift_policy(policy, dup.origin);
    for (OperatorTag tag : {OperatorTag::Pi, OperatorTag::Eps, OperatorTag::EpsBar}) {
        const FixedPointResult r =
            fixed_point(kind_of(tag, 0.9, dup.mdp, lifted), dup.mdp, lifted, 1e-10, 100000);
        REQUIRE(r.converged);
        for (const auto& [a, b] : dup.pairs.pairs) CHECK(r.metric.at(a, b) <= 1e-8);
    }
}

TEST_CASE("independent action sampling prices the diagonal of a noisy-reward state") {
    // One state, two actions with rewards 0 and 1: drawing the two actions
    // independently pays |r - r'| = 1 half the time.
    FiniteMdp mdp(1, 2);
    mdp.transition(0, 0, 0) = 1.0;
    mdp.transition(0, 1, 0) = 1.0;
    mdp.reward(0, 0) = 0.0;
    mdp.reward(0, 1) = 1.0;
    const TabularPolicy policy = TabularPolicy::uniform(1, 2);
    const StateMetric out = apply_F_dbc_style(mdp, policy, 0.0, StateMetric::zero(1));
    CHECK(out.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("deterministic policies remove the independent-sampling penalty") {
    const FiniteMdp mdp = random_mdp(3, 2, 0.0, 1.0, 71);
    const TabularPolicy pick_first = TabularPolicy::constant(3, 2, 0);
    const StateMetric d = random_metric(3, 72);
    const StateMetric dbc = apply_F_dbc_style(mdp, pick_first, 0.9, d);
    const StateMetric pi = apply_F_pi(mdp, pick_first, 0.9, d);
    CHECK(dbc.sup_distance(pi) < 1e-12);
}

TEST_CASE("independent next-state sampling prices the diagonal under stochastic transitions") {
    FiniteMdp mdp(2, 1);
    for (std::size_t z = 0; z < 2; ++z)
        for (std::size_t s = 0; s < 2; ++s) mdp.transition(z, 0, s) = 0.5;
    const TabularPolicy policy = TabularPolicy::uniform(2, 1);
    StateMetric d(2);
    d.set(0, 1, 1.0);
    const StateMetric psm = apply_F_psm_style(mdp, policy, 0.9, d);
    CHECK(psm.at(0, 0) == doctest::Approx(0.9 * 0.5).epsilon(1e-12));
    CHECK(psm.at(0, 0) > 0.0);
}

TEST_CASE("matching policies and deterministic matching transitions satisfy the mean-action operator") {
    FiniteMdp mdp(2, 2);
    for (std::size_t z = 0; z < 2; ++z)
        for (std::size_t a = 0; a < 2; ++a) mdp.transition(z, a, z) = 1.0;
    mdp.reward(0, 0) = 0.3;
    const TabularPolicy policy = TabularPolicy::uniform(2, 2);
    const StateMetric out = apply_F_psm_style(mdp, policy, 0.9, StateMetric::zero(2));
    CHECK(out.at(0, 0) == 0.0);
    CHECK(out.at(1, 1) == 0.0);

    FiniteMdp single(1, 1);
    single.transition(0, 0, 0) = 1.0;
    single.reward(0, 0) = 0.7;
    const StateMetric one = apply_F_psm_style(single, TabularPolicy::uniform(1, 1), 0.9,
                                              StateMetric::zero(1));
    CHECK(one.at(0, 0) == 0.0);
}

TEST_CASE("zero contraction converges in a single application") {
    const FiniteMdp mdp = random_mdp(4, 2, 0.0, 1.0, 81);
    const TabularPolicy policy = random_policy(4, 2, 82);
    const FixedPointResult r =
        fixed_point(kind_of(OperatorTag::EpsBar, 0.0, mdp, policy), mdp, policy, 1e-12, 10);
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.residual == 0.0);
    const StateMetric direct = apply_F_eps_bar(mdp, policy, SimilarityG::reward_diff(mdp), 0.0,
                                               StateMetric::zero(4));
    CHECK(r.metric.sup_distance(direct) < 1e-15);
}

TEST_CASE("iteration residuals contract by the operator factor") {
    const FiniteMdp mdp = random_mdp(5, 2, 0.0, 1.0, 91);
    const TabularPolicy policy = random_policy(5, 2, 92);
    const FixedPointResult r =
        fixed_point(kind_of(OperatorTag::Eps, 0.85, mdp, policy), mdp, policy, 1e-11, 100000);
    REQUIRE(r.converged);
    for (std::size_t k = 1; k < r.residuals.size(); ++k)
        CHECK(r.residuals[k] <= 0.85 * r.residuals[k - 1] + 1e-12);
}

TEST_CASE("hitting the iteration cap reports failure with the last iterate") {
    const FiniteMdp mdp = two_state_self_loop();
    const TabularPolicy policy = TabularPolicy::uniform(2, 1);
    const FixedPointResult r =
        fixed_point(kind_of(OperatorTag::Pi, 0.9, mdp, policy), mdp, policy, 1e-12, 4);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 4);
    CHECK(r.residual > 1e-12);
    CHECK(r.metric.at(0, 1) > 1.0);
}

TEST_CASE("loose and tight tolerances land within the contraction bound") {
    const FiniteMdp mdp = random_mdp(5, 3, 0.0, 1.0, 95);
    const TabularPolicy policy = random_policy(5, 3, 96);
    const OperatorKind kind = kind_of(OperatorTag::Eps, 0.9, mdp, policy);
    const FixedPointResult loose = fixed_point(kind, mdp, policy, 1e-6, 100000);
    const FixedPointResult tight = fixed_point(kind, mdp, policy, 1e-10, 100000);
    REQUIRE(loose.converged);
    REQUIRE(tight.converged);
    CHECK(loose.metric.sup_distance(tight.metric) < 1e-5);
}

TEST_CASE("solved fixed points are pseudometrics within tolerance") {
    for (std::uint64_t k = 0; k < 6; ++k) {
        const std::size_t n = 3 + k % 5;
        const FiniteMdp mdp = random_mdp(n, 2, 0.0, 1.0, 300 + k);
        const TabularPolicy policy = random_policy(n, 2, 400 + k);
        for (OperatorTag tag : {OperatorTag::Pi, OperatorTag::Eps, OperatorTag::EpsBar}) {
            const FixedPointResult r =
                fixed_point(kind_of(tag, 0.9, mdp, policy), mdp, policy, 1e-10, 100000);
            REQUIRE(r.converged);
            CHECK_NOTHROW(r.metric.check_pseudometric(1e-8));
        }
    }
}

TEST_CASE("the Gaussian proxy is a distinct relaxation of the exact transport term") {
    const FiniteMdp mdp = random_mdp(4, 2, 0.0, 1.0, 97);
    const TabularPolicy policy = random_policy(4, 2, 98);
    const StateMetric d = random_metric(4, 99);
    const StateMetric exact = apply_F_dbc_style(mdp, policy, 0.9, d, false);
    const StateMetric proxy = apply_F_dbc_style(mdp, policy, 0.9, d, true);
    CHECK(exact.values().all_finite());
    CHECK(proxy.values().all_finite());
    CHECK(proxy.sup_distance(exact) > 1e-6);

    OperatorKind kind;
    kind.tag = OperatorTag::DbcStyle;
    kind.c = 0.9;
    kind.gaussian_proxy = true;
    const StateMetric dispatched = apply_operator(kind, mdp, policy, d);
    CHECK(dispatched.sup_distance(proxy) == 0.0);
}
