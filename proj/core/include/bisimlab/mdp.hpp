#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "bisimlab/types.hpp"

namespace bisimlab {

/**
 * Finite MDP with tabular transitions and rewards.
 *
 * transition is indexed [state][action][next_state] (flattened row-major),
 * reward is [state][action]. discount lives in [0, 1). States and actions
 * are plain 0-based indices.
 */
class FiniteMdp {
  public:
    FiniteMdp() = default;
    FiniteMdp(std::size_t n_states, std::size_t n_actions)
        : n_states_(n_states), n_actions_(n_actions),
          transition_(n_states * n_actions * n_states, 0.0), reward_(n_states, n_actions) {}

    std::size_t n_states() const { return n_states_; }
    std::size_t n_actions() const { return n_actions_; }

    double transition(std::size_t z, std::size_t a, std::size_t next) const {
        return transition_[(z * n_actions_ + a) * n_states_ + next];
    }
    double& transition(std::size_t z, std::size_t a, std::size_t next) {
        return transition_[(z * n_actions_ + a) * n_states_ + next];
    }
    /// Transition row P(. | z, a), length n_states.
    const double* transition_row(std::size_t z, std::size_t a) const {
        return transition_.data() + (z * n_actions_ + a) * n_states_;
    }

    double reward(std::size_t z, std::size_t a) const { return reward_(z, a); }
    double& reward(std::size_t z, std::size_t a) { return reward_(z, a); }
    const Matrix& reward_table() const { return reward_; }

    double discount() const { return discount_; }
    void set_discount(double g);

    const Vec& transition_data() const { return transition_; }
    Vec& transition_data() { return transition_; }

    /**
     * Structural checks: every transition row is a probability vector (within
     * 1e-12 of unit mass), rewards are finite, discount is in [0, 1).
     * Throws ArgumentError on the first violation.
     */
    void validate() const;

  private:
    std::size_t n_states_ = 0, n_actions_ = 0;
    Vec transition_;
    Matrix reward_;
    double discount_ = 0.9;
};

/// Tabular stochastic policy: probs(z, a) = pi(a | z), one row per state.
class TabularPolicy {
  public:
    TabularPolicy() = default;
    TabularPolicy(std::size_t n_states, std::size_t n_actions)
        : probs_(n_states, n_actions) {}

    std::size_t n_states() const { return probs_.rows(); }
    std::size_t n_actions() const { return probs_.cols(); }

    double prob(std::size_t z, std::size_t a) const { return probs_(z, a); }
    double& prob(std::size_t z, std::size_t a) { return probs_(z, a); }
    const double* row(std::size_t z) const { return probs_.row(z); }
    const Matrix& table() const { return probs_; }
    Matrix& table() { return probs_; }

    /// Deterministic policy playing action a in every state.
    static TabularPolicy constant(std::size_t n_states, std::size_t n_actions, std::size_t a);
    /// Uniform policy over all actions.
    static TabularPolicy uniform(std::size_t n_states, std::size_t n_actions);

    /// Throws ArgumentError unless every row is a probability vector.
    void validate() const;

  private:
    Matrix probs_;
};

/// Unordered state pairs known to be behaviorally identical by construction.
struct BisimilarPairSet {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;

    std::size_t size() const { return pairs.size(); }
    void add(std::size_t a, std::size_t b) {
        pairs.emplace_back(std::min(a, b), std::max(a, b));
    }
};

/**
 * Random MDP: each transition row is an independent uniform draw from
 * (1e-6, 1] per entry, normalized to unit mass (so every row has full
 * support), rewards are uniform in [reward_lo, reward_hi]. Identical seeds
 * give bit-identical MDPs. The discount is left at its default; callers pick
 * the contraction factor when they apply an operator.
 */
FiniteMdp random_mdp(std::size_t n_states, std::size_t n_actions, double reward_lo,
                     double reward_hi, std::uint64_t seed);

/// Random policy: rows drawn the same way as random_mdp transition rows.
TabularPolicy random_policy(std::size_t n_states, std::size_t n_actions, std::uint64_t seed);

/**
 * Result of duplicate_states. origin[k] is the original state the new state k
 * copies; pairs lists every unordered pair of copies of the same original
 * state (those are exactly bisimilar by construction).
 */
struct DuplicatedMdp {
    FiniteMdp mdp;
    BisimilarPairSet pairs;
    std::vector<std::size_t> origin;
};

/**
 * Replace each state s by copies.at(s) behaviorally identical copies
 * (states absent from the map keep one copy). Every copy keeps the original
 * reward row; incoming probability mass of an original state is split
 * uniformly across its copies, so each copy's transition row is the original
 * row with mass divided per copy group. Copy counts must be >= 1.
 *
 * New states are ordered by original state, copies consecutive, so with all
 * counts equal to 1 the MDP is returned unchanged.
 */
DuplicatedMdp duplicate_states(const FiniteMdp& mdp,
                               const std::map<std::size_t, std::size_t>& copies);

/// Lift a policy on the original MDP to the duplicated one (copies inherit
/// the action distribution of their original state).
TabularPolicy lift_policy(const TabularPolicy& policy, const std::vector<std::size_t>& origin);

/**
 * Policy-averaged reward vector and transition matrix:
 *   avg_reward[z]        = sum_a pi(a|z) R(z, a)
 *   avg_transition(z, s) = sum_a pi(a|z) P(s | z, a)
 */
struct AveragedDynamics {
    Vec reward;
    Matrix transition;
};

AveragedDynamics policy_averaged_dynamics(const FiniteMdp& mdp, const TabularPolicy& policy);

}  // namespace bisimlab
