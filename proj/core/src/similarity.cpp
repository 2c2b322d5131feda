#include "bisimlab/similarity.hpp"

#include <cmath>

namespace bisimlab {

SimilarityG SimilarityG::reward_diff(const FiniteMdp& mdp) {
    mdp.validate();
    SimilarityG g;
    g.variant_ = Variant::RewardDiff;
    g.n_states_ = mdp.n_states();
    g.n_actions_ = mdp.n_actions();
    g.reward_ = mdp.reward_table();
    return g;
}

SimilarityG SimilarityG::policy_mean_diff(const FiniteMdp& mdp, const TabularPolicy& policy) {
    // One-hot embedding: the mean action embedding of a state is its policy row.
    Matrix one_hot(mdp.n_actions(), mdp.n_actions());
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) one_hot(a, a) = 1.0;
    return policy_mean_diff(mdp, policy, one_hot);
}

SimilarityG SimilarityG::policy_mean_diff(const FiniteMdp& mdp, const TabularPolicy& policy,
                                          const Matrix& action_embeddings) {
    mdp.validate();
    policy.validate();
    require(policy.n_states() == mdp.n_states() && policy.n_actions() == mdp.n_actions(),
            "SimilarityG: policy shape does not match the MDP");
    require(action_embeddings.rows() == mdp.n_actions(),
            "SimilarityG: one embedding row per action required");
    require(action_embeddings.all_finite(), "SimilarityG: non-finite embedding");

    SimilarityG g;
    g.variant_ = Variant::PolicyMeanDiff;
    g.n_states_ = mdp.n_states();
    g.n_actions_ = mdp.n_actions();
    g.mean_action_ = Matrix(mdp.n_states(), action_embeddings.cols());
    for (std::size_t z = 0; z < mdp.n_states(); ++z)
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            const double w = policy.prob(z, a);
            if (w == 0.0) continue;
            for (std::size_t k = 0; k < action_embeddings.cols(); ++k)
                g.mean_action_(z, k) += w * action_embeddings(a, k);
        }
    return g;
}

double SimilarityG::eval(std::size_t z, std::size_t a, std::size_t z_prime,
                         std::size_t a_prime) const {
    require(z < n_states_ && z_prime < n_states_ && a < n_actions_ && a_prime < n_actions_,
            "SimilarityG::eval: index out of range");
    if (variant_ == Variant::RewardDiff)
        return std::fabs(reward_(z, a) - reward_(z_prime, a_prime));

    double acc = 0.0;
    for (std::size_t k = 0; k < mean_action_.cols(); ++k)
        acc += std::fabs(mean_action_(z, k) - mean_action_(z_prime, k));
    return acc;
}

SimilarityAxiomReport check_similarity_axioms(const SimilarityG& g) {
    const std::size_t n = g.n_states(), na = g.n_actions();
    const std::size_t total = n * na;
    SimilarityAxiomReport report;

    auto state_of = [na](std::size_t k) { return k / na; };
    auto action_of = [na](std::size_t k) { return k % na; };

    for (std::size_t x = 0; x < total; ++x) {
        const double self = g.eval(state_of(x), action_of(x), state_of(x), action_of(x));
        report.worst_self = std::max(report.worst_self, std::fabs(self));
        for (std::size_t y = 0; y < total; ++y) {
            const double xy = g.eval(state_of(x), action_of(x), state_of(y), action_of(y));
            const double yx = g.eval(state_of(y), action_of(y), state_of(x), action_of(x));
            if (xy < 0.0) report.worst_negative = std::max(report.worst_negative, -xy);
            report.worst_asymmetry = std::max(report.worst_asymmetry, std::fabs(xy - yx));
            for (std::size_t m = 0; m < total; ++m) {
                const double xm = g.eval(state_of(x), action_of(x), state_of(m), action_of(m));
                const double my = g.eval(state_of(m), action_of(m), state_of(y), action_of(y));
                report.worst_triangle = std::max(report.worst_triangle, xy - xm - my);
            }
        }
    }
    return report;
}

}  // namespace bisimlab
