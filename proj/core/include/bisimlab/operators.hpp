#pragma once

#include <cstddef>
#include <optional>

#include "bisimlab/mdp.hpp"
#include "bisimlab/metric.hpp"
#include "bisimlab/similarity.hpp"
#include "bisimlab/types.hpp"

namespace bisimlab {

/**
 * The five distance operators. Each maps a pairwise distance matrix d to an
 * updated one and contracts the sup norm by its factor c, so iterating from
 * the all-zero matrix converges to the operator's unique fixed point.
 *
 * All evaluations are exact: expectations over coupled discrete draws are
 * finite sums over the coupling's constancy segments, never Monte Carlo.
 * Pi, Eps and EpsBar are computed on unordered pairs and mirrored, with a
 * structurally zero diagonal. DbcStyle and PsmStyle evaluate their diagonal
 * honestly, which is generally positive; that failure of self-similarity is
 * exactly what the estimator audits measure.
 *
 *  - Pi:       |avg reward gap| + c * W1 between policy-averaged transitions.
 *  - Eps:      expectation over the comonotone action coupling of
 *              G(z,a,z',a') + c * W1 between the per-action transitions.
 *  - EpsBar:   as Eps, but the transition term is itself an expectation over
 *              the comonotone next-state coupling of d(s, s'); this is the
 *              form the single-sample estimators target.
 *  - DbcStyle: independent action pairs, |R(z,a) - R(z',a')| + c * W1 (or a
 *              moment-matched Gaussian W2 proxy on the state-index line when
 *              gaussian_proxy is set).
 *  - PsmStyle: l1 gap of policy mean-action vectors + c * expectation of
 *              d(s, s') under fully independent next states.
 */
enum class OperatorTag { Pi, Eps, EpsBar, DbcStyle, PsmStyle };

struct OperatorKind {
    OperatorTag tag = OperatorTag::Pi;
    double c = 0.9;
    /// Required for Eps and EpsBar, ignored by the other operators.
    std::optional<SimilarityG> similarity;
    /// DbcStyle only: swap exact W1 for the Gaussian moment proxy.
    bool gaussian_proxy = false;
};

StateMetric apply_F_pi(const FiniteMdp& mdp, const TabularPolicy& policy, double c,
                       const StateMetric& d, int workers = 1);

StateMetric apply_F_eps(const FiniteMdp& mdp, const TabularPolicy& policy, const SimilarityG& g,
                        double c, const StateMetric& d, int workers = 1);

StateMetric apply_F_eps_bar(const FiniteMdp& mdp, const TabularPolicy& policy,
                            const SimilarityG& g, double c, const StateMetric& d,
                            int workers = 1);

StateMetric apply_F_dbc_style(const FiniteMdp& mdp, const TabularPolicy& policy, double c,
                              const StateMetric& d, bool gaussian_proxy = false,
                              int workers = 1);

StateMetric apply_F_psm_style(const FiniteMdp& mdp, const TabularPolicy& policy, double c,
                              const StateMetric& d, int workers = 1);

/// Dispatch on kind.tag with kind's own c / similarity / proxy flag.
StateMetric apply_operator(const OperatorKind& kind, const FiniteMdp& mdp,
                           const TabularPolicy& policy, const StateMetric& d, int workers = 1);

struct FixedPointResult {
    StateMetric metric;
    std::size_t iterations = 0;
    /// Sup-norm change of the last iteration (0 exactly for c = 0).
    double residual = 0.0;
    bool converged = false;
    /// residuals[k] is the sup-norm change of iteration k+1.
    Vec residuals;
};

/**
 * Iterate the chosen operator from the all-zero matrix until the sup-norm
 * change drops to tol. At c = 0 a single application is already exact and is
 * returned directly with residual 0. If max_iter passes without reaching
 * tol, the last iterate is returned with converged = false; no exception,
 * callers decide how loudly to fail.
 */
FixedPointResult fixed_point(const OperatorKind& kind, const FiniteMdp& mdp,
                             const TabularPolicy& policy, double tol, std::size_t max_iter,
                             int workers = 1);

}  // namespace bisimlab
