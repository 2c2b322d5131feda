#include "bisimlab/mdp.hpp"

#include <cmath>

#include "bisimlab/distributions.hpp"
#include "bisimlab/rng.hpp"

namespace bisimlab {

void FiniteMdp::set_discount(double g) {
    require(g >= 0.0 && g < 1.0, "FiniteMdp: discount must lie in [0, 1)");
    discount_ = g;
}

void FiniteMdp::validate() const {
    require(n_states_ > 0 && n_actions_ > 0, "FiniteMdp: empty state or action space");
    require(discount_ >= 0.0 && discount_ < 1.0, "FiniteMdp: discount must lie in [0, 1)");
    for (std::size_t z = 0; z < n_states_; ++z)
        for (std::size_t a = 0; a < n_actions_; ++a)
            validate_weights(transition_row(z, a), n_states_, "FiniteMdp transition row");
    for (double r : reward_.data())
        if (!std::isfinite(r)) throw ArgumentError("FiniteMdp: non-finite reward");
}

TabularPolicy TabularPolicy::constant(std::size_t n_states, std::size_t n_actions,
                                      std::size_t a) {
    require(a < n_actions, "TabularPolicy::constant: action out of range");
    TabularPolicy pi(n_states, n_actions);
    for (std::size_t z = 0; z < n_states; ++z) pi.prob(z, a) = 1.0;
    return pi;
}

TabularPolicy TabularPolicy::uniform(std::size_t n_states, std::size_t n_actions) {
    require(n_actions > 0, "TabularPolicy::uniform: empty action space");
    TabularPolicy pi(n_states, n_actions);
    const double w = 1.0 / static_cast<double>(n_actions);
    for (std::size_t z = 0; z < n_states; ++z)
        for (std::size_t a = 0; a < n_actions; ++a) pi.prob(z, a) = w;
    return pi;
}

void TabularPolicy::validate() const {
    require(n_states() > 0 && n_actions() > 0, "TabularPolicy: empty table");
    for (std::size_t z = 0; z < n_states(); ++z)
        validate_weights(row(z), n_actions(), "TabularPolicy row");
}

namespace {

// Shared by random_mdp and random_policy: positive draws, normalized. The
// 1e-6 floor keeps rows bounded away from degenerate support.
void fill_random_row(double* row, std::size_t n, SplitMix64& gen) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        row[i] = 1e-6 + (1.0 - 1e-6) * (1.0 - gen.uniform01());
        sum += row[i];
    }
    for (std::size_t i = 0; i < n; ++i) row[i] /= sum;
}

}  // namespace

FiniteMdp random_mdp(std::size_t n_states, std::size_t n_actions, double reward_lo,
                     double reward_hi, std::uint64_t seed) {
    require(n_states > 0 && n_actions > 0, "random_mdp: need at least one state and action");
    require(std::isfinite(reward_lo) && std::isfinite(reward_hi) && reward_lo <= reward_hi,
            "random_mdp: reward range must be a nonempty finite interval");

    FiniteMdp mdp(n_states, n_actions);
    SplitMix64 trans_gen(derive_stream(seed, "transitions"));
    SplitMix64 reward_gen(derive_stream(seed, "rewards"));
    for (std::size_t z = 0; z < n_states; ++z)
        for (std::size_t a = 0; a < n_actions; ++a) {
            double* row = mdp.transition_data().data() + (z * n_actions + a) * n_states;
            fill_random_row(row, n_states, trans_gen);
            mdp.reward(z, a) = reward_lo + (reward_hi - reward_lo) * reward_gen.uniform01();
        }
    mdp.validate();
    return mdp;
}

TabularPolicy random_policy(std::size_t n_states, std::size_t n_actions, std::uint64_t seed) {
    require(n_states > 0 && n_actions > 0, "random_policy: need at least one state and action");
    TabularPolicy pi(n_states, n_actions);
    SplitMix64 gen(derive_stream(seed, "policy"));
    for (std::size_t z = 0; z < n_states; ++z)
        fill_random_row(pi.table().row(z), n_actions, gen);
    pi.validate();
    return pi;
}

DuplicatedMdp duplicate_states(const FiniteMdp& mdp,
                               const std::map<std::size_t, std::size_t>& copies) {
    mdp.validate();
    const std::size_t n = mdp.n_states(), na = mdp.n_actions();
    for (const auto& [s, count] : copies) {
        require(s < n, "duplicate_states: state index out of range");
        require(count >= 1, "duplicate_states: copy counts must be >= 1");
    }

    std::vector<std::size_t> count(n, 1);
    for (const auto& [s, c] : copies) count[s] = c;

    DuplicatedMdp out;
    std::vector<std::size_t> first_copy(n);
    std::size_t total = 0;
    for (std::size_t s = 0; s < n; ++s) {
        first_copy[s] = total;
        for (std::size_t k = 0; k < count[s]; ++k) out.origin.push_back(s);
        for (std::size_t a = 0; a < count[s]; ++a)
            for (std::size_t b = a + 1; b < count[s]; ++b)
                out.pairs.add(total + a, total + b);
        total += count[s];
    }

    out.mdp = FiniteMdp(total, na);
    out.mdp.set_discount(mdp.discount());
    for (std::size_t k = 0; k < total; ++k) {
        const std::size_t s = out.origin[k];
        for (std::size_t a = 0; a < na; ++a) {
            out.mdp.reward(k, a) = mdp.reward(s, a);
            for (std::size_t t = 0; t < n; ++t) {
                const double share = mdp.transition(s, a, t) / static_cast<double>(count[t]);
                for (std::size_t j = 0; j < count[t]; ++j)
                    out.mdp.transition(k, a, first_copy[t] + j) = share;
            }
        }
    }
    out.mdp.validate();
    return out;
}

TabularPolicy lift_policy(const TabularPolicy& policy, const std::vector<std::size_t>& origin) {
    policy.validate();
    TabularPolicy out(origin.size(), policy.n_actions());
    for (std::size_t k = 0; k < origin.size(); ++k) {
        require(origin[k] < policy.n_states(), "lift_policy: origin index out of range");
        for (std::size_t a = 0; a < policy.n_actions(); ++a)
            out.prob(k, a) = policy.prob(origin[k], a);
    }
    return out;
}

AveragedDynamics policy_averaged_dynamics(const FiniteMdp& mdp, const TabularPolicy& policy) {
    mdp.validate();
    policy.validate();
    require(policy.n_states() == mdp.n_states() && policy.n_actions() == mdp.n_actions(),
            "policy_averaged_dynamics: policy shape does not match the MDP");

    const std::size_t n = mdp.n_states(), na = mdp.n_actions();
    AveragedDynamics out;
    out.reward.assign(n, 0.0);
    out.transition = Matrix(n, n);
    for (std::size_t z = 0; z < n; ++z)
        for (std::size_t a = 0; a < na; ++a) {
            const double w = policy.prob(z, a);
            if (w == 0.0) continue;
            out.reward[z] += w * mdp.reward(z, a);
            const double* row = mdp.transition_row(z, a);
            for (std::size_t t = 0; t < n; ++t) out.transition(z, t) += w * row[t];
        }
    return out;
}

}  // namespace bisimlab
