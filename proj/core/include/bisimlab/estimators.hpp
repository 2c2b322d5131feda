#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bisimlab/gaussian.hpp"
#include "bisimlab/mdp.hpp"
#include "bisimlab/metric.hpp"
#include "bisimlab/operators.hpp"
#include "bisimlab/similarity.hpp"

namespace bisimlab {

/**
 * Single-sample estimator of the entangled operator value at (z, z'): one
 * shared uniform picks the action pair from the comonotone policy coupling,
 * a second shared uniform picks the next-state pair from the comonotone
 * transition coupling, and the draw is G(z,a,z',a') + c * d(s, s').
 *
 * Its expectation over noise_seed draws is apply_F_eps_bar at that pair, and
 * for z == z' with a zero-diagonal d the draw is literally 0 every time: both
 * couplings degenerate to identical atoms, no variance, no bias.
 */
double sample_F_hat_eps(const FiniteMdp& mdp, const TabularPolicy& policy, const SimilarityG& g,
                        double c, const StateMetric& d, std::size_t z, std::size_t z_prime,
                        std::uint64_t noise_seed);

/// Same functional, but actions and next states drawn with independent
/// uniforms on the two sides. Overestimates transition agreement on average;
/// kept for the bias audits.
double sample_F_hat_eps_independent(const FiniteMdp& mdp, const TabularPolicy& policy,
                                    const SimilarityG& g, double c, const StateMetric& d,
                                    std::size_t z, std::size_t z_prime,
                                    std::uint64_t noise_seed);

/**
 * Single-sample DBC-style draw on the tabular testbed: independent actions
 * a ~ pi(.|z), a' ~ pi(.|z'), value |R(z,a) - R(z',a')| + c * exact W1
 * between the two per-action transition rows under d.
 */
double sample_F_hat_dbc(const FiniteMdp& mdp, const TabularPolicy& policy, double c,
                        const StateMetric& d, std::size_t z, std::size_t z_prime,
                        std::uint64_t noise_seed);

/// DBC-style draw on the continuous testbed: independent Gaussian actions,
/// closed-form W2 between the induced next-state Gaussians (the metric-free
/// shortcut that family of methods uses).
double sample_F_hat_dbc(const GaussianLinearMdp& mdp, const GaussianPolicy& policy, double c,
                        const Vec& z, const Vec& z_prime, std::uint64_t noise_seed);

/**
 * Single-sample PSM-style draw: l1 gap between the policy rows of z and z'
 * plus c * d(s, s') with s, s' drawn fully independently through the policy.
 */
double sample_F_hat_psm(const FiniteMdp& mdp, const TabularPolicy& policy, double c,
                        const StateMetric& d, std::size_t z, std::size_t z_prime,
                        std::uint64_t noise_seed);

enum class SamplingMode { Entangled, Independent };

/**
 * What bias_audit runs. Supported combinations: Eps entangled, Eps
 * independent, DbcStyle independent, PsmStyle independent (the biased
 * families have no entangled variant; asking for one is an error).
 * similarity is required for Eps and ignored otherwise.
 */
struct EstimatorMethod {
    OperatorTag tag = OperatorTag::Eps;
    SamplingMode mode = SamplingMode::Entangled;
    double c = 0.9;
    std::optional<SimilarityG> similarity;
};

struct EstimatorReport {
    std::string method;  // "eps" | "dbc" | "psm"
    std::string mode;    // "entangled" | "independent"
    std::size_t z = 0;
    std::size_t z_prime = 0;
    std::size_t n = 0;
    double mean = 0.0;
    double std_error = 0.0;
    /// The unbiased target: apply_F_eps_bar at this pair, with the method's
    /// own immediate term (RewardDiff for eps/dbc, PolicyMeanDiff for psm).
    double exact_reference = 0.0;
    double bias = 0.0;  // mean - exact_reference
    std::uint64_t seed = 0;
};

/**
 * Monte Carlo audit of an estimator at fixed d: for every requested pair,
 * average n_samples i.i.d. single-sample draws (disjoint derived seeds) and
 * compare against the exact entangled operator value. Entangled-eps reports
 * are unbiased, so |bias| stays within a few std errors; the biased families
 * show systematic positive bias at diagonal pairs.
 */
std::vector<EstimatorReport> bias_audit(const EstimatorMethod& method, const FiniteMdp& mdp,
                                        const TabularPolicy& policy, const StateMetric& d,
                                        const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                        std::size_t n_samples, std::uint64_t seed,
                                        int workers = 1);

/// Fixed column order: method,mode,z,z_prime,n,mean,stderr,exact,bias,seed.
/// Floating values printed as the shortest decimals that parse back exactly.
std::string reports_to_csv(const std::vector<EstimatorReport>& reports);

/// The same records as a JSON array of objects (keys match the CSV columns).
std::string reports_to_json(const std::vector<EstimatorReport>& reports);

}  // namespace bisimlab
