#pragma once

#include "bisimlab/mdp.hpp"
#include "bisimlab/types.hpp"

namespace bisimlab {

/**
 * State-action similarity G(z, a, z', a'): the immediate term the coupled
 * operators and estimators charge before discounting the next-state
 * distance. Both variants are pseudometrics on state-action pairs
 * (nonnegative, zero on identical arguments, symmetric, triangle).
 */
class SimilarityG {
  public:
    enum class Variant { RewardDiff, PolicyMeanDiff };

    /// G = |R(z, a) - R(z', a')|.
    static SimilarityG reward_diff(const FiniteMdp& mdp);

    /**
     * G = l1 distance between the policy-weighted mean action embeddings of
     * z and z' (action identity does not enter, only the states). The
     * default embedding is one-hot, in which case the mean embedding of a
     * state is its policy row.
     */
    static SimilarityG policy_mean_diff(const FiniteMdp& mdp, const TabularPolicy& policy);
    static SimilarityG policy_mean_diff(const FiniteMdp& mdp, const TabularPolicy& policy,
                                        const Matrix& action_embeddings);

    Variant variant() const { return variant_; }
    std::size_t n_states() const { return n_states_; }
    std::size_t n_actions() const { return n_actions_; }

    double eval(std::size_t z, std::size_t a, std::size_t z_prime, std::size_t a_prime) const;

  private:
    SimilarityG() = default;
    Variant variant_ = Variant::RewardDiff;
    std::size_t n_states_ = 0, n_actions_ = 0;
    Matrix reward_;       // RewardDiff
    Matrix mean_action_;  // PolicyMeanDiff: one row of mean embedding per state
};

/// Worst violation of each pseudometric axiom, found by exhaustive
/// enumeration of state-action triples. All fields <= tol means G passes.
struct SimilarityAxiomReport {
    double worst_negative = 0.0;     // most negative value, reported as magnitude
    double worst_self = 0.0;         // max |G(z,a,z,a)|
    double worst_asymmetry = 0.0;    // max |G(z,a,z',a') - G(z',a',z,a)|
    double worst_triangle = 0.0;     // max G(x,y) - G(x,m) - G(m,y) over triples
    bool passes(double tol) const {
        return worst_negative <= tol && worst_self <= tol && worst_asymmetry <= tol &&
               worst_triangle <= tol;
    }
};

SimilarityAxiomReport check_similarity_axioms(const SimilarityG& g);

}  // namespace bisimlab
