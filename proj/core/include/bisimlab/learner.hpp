#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "bisimlab/estimators.hpp"
#include "bisimlab/gaussian.hpp"
#include "bisimlab/mdp.hpp"
#include "bisimlab/metric.hpp"
#include "bisimlab/similarity.hpp"

namespace bisimlab {

/**
 * Learnable tabular distance. One raw parameter per unordered state pair;
 * the realized distance is its square, so nonnegativity is structural, and
 * the diagonal is identically zero (not parametrized at all).
 */
struct TabularDistanceParams {
    std::size_t n_states = 0;
    Matrix raw;  // only entries above the diagonal are read

    static TabularDistanceParams constant(std::size_t n_states, double raw_value);

    double distance(std::size_t i, std::size_t j) const {
        if (i == j) return 0.0;
        const double r = raw(std::min(i, j), std::max(i, j));
        return r * r;
    }

    /// The full realized distance matrix.
    StateMetric realize() const;
};

/**
 * Loss and gradient of one stochastic step: for each batch pair, draw a
 * single entangled target G + c * d(s, s') (using the realized current
 * distance, treated as a constant) and charge the squared residual of the
 * prediction d(z, z') against it.
 *
 * The gradient is the derivative of the prediction term only; targets are
 * frozen. That is what makes this the stochastic-approximation analog of
 * iterating the exact operator rather than a joint optimization of both
 * sides of the consistency equation.
 */
struct BatchLoss {
    double loss = 0.0;
    Matrix grad;  // same shape as TabularDistanceParams::raw
    Vec targets;  // the frozen per-element targets actually used
};

BatchLoss bisim_loss_batch(const TabularDistanceParams& params, const FiniteMdp& mdp,
                           const TabularPolicy& policy, const SimilarityG& g, double c,
                           const std::vector<std::pair<std::size_t, std::size_t>>& batch,
                           const std::vector<std::uint64_t>& noise_seeds);

/// Prediction-side loss for a fixed target vector: mean of
/// (d(z, z') - target)^2 over the batch. The finite-difference gradient of
/// this function (targets held fixed) is what the analytic gradient matches.
double loss_given_targets(const TabularDistanceParams& params,
                          const std::vector<std::pair<std::size_t, std::size_t>>& batch,
                          const Vec& targets);

struct TrainHistoryRow {
    std::size_t step = 0;
    double loss = 0.0;
    double sup_error = 0.0;
};

struct TabularTrainResult {
    TabularDistanceParams params;
    std::vector<TrainHistoryRow> history;
    /// Exact entangled fixed point the run is measured against.
    StateMetric exact;
    bool diverged = false;
    std::size_t diverged_step = 0;
};

struct TrainTabularOptions {
    /// Initial raw value for every pair (zero would be a stationary point of
    /// the squared parametrization, so the default starts away from it).
    double init_raw = 1.0;
    /// Batch composition and target noise come from separate derived streams
    /// so they can be varied independently; unset means derived from `seed`.
    std::optional<std::uint64_t> batch_seed;
    std::optional<std::uint64_t> noise_seed;
    /// Tolerance for the exact fixed point used in sup_error reporting.
    double exact_tol = 1e-10;
    std::size_t exact_max_iter = 100000;
};

/**
 * Plain stochastic gradient descent on the tabular distance with fixed step
 * size. Each step samples batch_size states uniformly, pairs them against a
 * random permutation of themselves, draws one entangled target per pair and
 * descends bisim_loss_batch. History records loss and the sup-norm error
 * against the exact fixed point per step. A non-finite loss stops the run
 * and marks it diverged; partial history is returned.
 */
TabularTrainResult train_tabular(const FiniteMdp& mdp, const TabularPolicy& policy,
                                 const SimilarityG& g, double c, std::size_t steps,
                                 double step_size, std::size_t batch_size, std::uint64_t seed,
                                 const TrainTabularOptions& options = {});

/**
 * Learnable separable distance on continuous states:
 *   d(z, z') = sum_i sum_{j=1..max_power} weights(i, j-1) * |z_i - z'_i|^j
 * with weights kept nonnegative by projection after each descent step.
 */
struct SeparableDistanceParams {
    std::size_t state_dim = 0;
    std::size_t max_power = 0;
    Matrix weights;  // state_dim x max_power

    static SeparableDistanceParams zeros(std::size_t state_dim, std::size_t max_power);

    void validate() const;
    double distance(const Vec& z, const Vec& z_prime) const;
};

/// Immediate term used on the continuous testbed.
enum class ContinuousSimilarity { RewardDiff, PolicyMeanDiff };

double eval_similarity_gaussian(const GaussianLinearMdp& mdp, const GaussianPolicy& policy,
                                ContinuousSimilarity g, const Vec& z, const Vec& a,
                                const Vec& z_prime, const Vec& a_prime);

/// One entangled target draw on the continuous testbed: shared action noise,
/// shared next-state noise, value G + c * d(s, s') under the given params.
double sample_target_gaussian(const GaussianLinearMdp& mdp, const GaussianPolicy& policy,
                              ContinuousSimilarity g, double c,
                              const SeparableDistanceParams& params, const Vec& z,
                              const Vec& z_prime, std::uint64_t noise_seed);

struct SeparableTrainResult {
    SeparableDistanceParams params;
    /// sup_error column holds the batch max |residual| (no tabular exact
    /// reference exists in the continuous case).
    std::vector<TrainHistoryRow> history;
    bool diverged = false;
    std::size_t diverged_step = 0;
};

struct TrainSeparableOptions {
    /// Draws one training pair; unset samples i.i.d. standard normal states
    /// and pairs a batch against a permutation of itself.
    std::function<std::pair<Vec, Vec>(SplitMix64&)> pair_sampler;
    std::optional<std::uint64_t> batch_seed;
    std::optional<std::uint64_t> noise_seed;
};

SeparableTrainResult train_separable_gaussian(const GaussianLinearMdp& mdp,
                                              const GaussianPolicy& policy,
                                              ContinuousSimilarity g, double c,
                                              std::size_t steps, double step_size,
                                              std::size_t batch_size, std::size_t n_mc,
                                              std::size_t max_power, std::uint64_t seed,
                                              const TrainSeparableOptions& options = {});

/**
 * Tightness audit on the continuous testbed: for each state pair, realize
 * one entangled action pair, then compare the Monte Carlo mean of d(s, s')
 * under the shared-noise coupling (n_mc draws) against the coordinate-wise
 * optimal transport reference sum_{i,j} w_ij * integral |F_i^-1 - G_i^-1|^j,
 * evaluated by inverse-CDF quadrature on n_quad midpoint cells. For
 * coordinate-independent Gaussians and separable distances the two agree up
 * to Monte Carlo and quadrature error; each row passes if
 * |mc - quad| <= 3 * stderr + quad_tol.
 */
struct TightnessRow {
    std::size_t pair_index = 0;
    double mc_estimate = 0.0;
    double mc_std_error = 0.0;
    double quadrature_reference = 0.0;
    double difference = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct TightnessReport {
    std::vector<TightnessRow> rows;
    bool all_passed() const {
        for (const TightnessRow& r : rows)
            if (!r.passed) return false;
        return true;
    }
};

TightnessReport verify_tightness(const GaussianLinearMdp& mdp, const GaussianPolicy& policy,
                                 const SeparableDistanceParams& d,
                                 const std::vector<std::pair<Vec, Vec>>& pairs,
                                 std::size_t n_mc, int n_quad, std::uint64_t seed,
                                 double quad_tol = 1e-5);

}  // namespace bisimlab
