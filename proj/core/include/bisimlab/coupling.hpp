#pragma once

#include <cstdint>
#include <vector>

#include "bisimlab/distributions.hpp"
#include "bisimlab/rng.hpp"
#include "bisimlab/types.hpp"

namespace bisimlab {

/// Noise shared between the two sides of a coupled draw.
struct NoiseVector {
    enum class Law { Uniform01, StdNormal };
    Law law = Law::StdNormal;
    Vec values;

    static NoiseVector uniform(std::size_t n, SplitMix64& gen);
    static NoiseVector standard_normal(std::size_t n, SplitMix64& gen);
};

/// A joint draw (x, y) together with the noise that produced it.
template <typename S>
struct CoupledPair {
    S x;
    S y;
    NoiseVector noise;
};

/**
 * Comonotone coupling of two diagonal Gaussians by sharing the driving
 * noise: x_i = mu_p,i + eps_i * sd_p,i and y_i = mu_q,i + eps_i * sd_q,i.
 * noise must be StdNormal of matching dimension. Both marginals are exact;
 * p == q makes x and y identical on every draw.
 */
CoupledPair<Vec> entangled_gaussian(const DiagonalGaussian& p, const DiagonalGaussian& q,
                                    const NoiseVector& noise);

/**
 * The same coupling built the inverse-CDF way: one shared uniform per
 * coordinate pushed through both quantile functions. Produces the same joint
 * law as entangled_gaussian; exists so tests can check that equivalence.
 */
CoupledPair<Vec> entangled_gaussian_from_uniform(const DiagonalGaussian& p,
                                                 const DiagonalGaussian& q,
                                                 const NoiseVector& noise);

/**
 * Squashed-Gaussian action coupling: a_i = tanh(mu_p,i + eps_i * sd_p,i),
 * b_i likewise from (mu_q, sd_q), with the same eps on both sides. stddevs
 * may be zero here (a deterministic policy head is legitimate).
 */
CoupledPair<Vec> entangled_tanh_policy(const Vec& mu_p, const Vec& sd_p, const Vec& mu_q,
                                       const Vec& sd_q, const NoiseVector& noise);

/// Smallest atom index (in natural order) whose positive cumulative weight
/// reaches u; u = 0 therefore maps to the first atom carrying any mass.
std::size_t sample_index(const double* weights, std::size_t n, double u);

/**
 * Comonotone coupling of two discrete distributions over a shared support:
 * one uniform u picks, in each distribution, the smallest atom (in atom_order)
 * whose cumulative mass reaches u. The canonical order everywhere in this
 * library is ascending index; the explicit-order overload exists for tests.
 */
CoupledPair<std::size_t> entangled_discrete(const DiscreteDistribution& p,
                                            const DiscreteDistribution& q,
                                            const std::vector<std::size_t>& atom_order,
                                            double u);
CoupledPair<std::size_t> entangled_discrete(const DiscreteDistribution& p,
                                            const DiscreteDistribution& q, double u);

/**
 * One constancy segment of the discrete comonotone coupling: for u in an
 * interval of length weight, the coupled draw is the fixed atom pair (x, y).
 */
struct CouplingSegment {
    std::size_t x;
    std::size_t y;
    double weight;
};

/**
 * The full segment decomposition of the coupling above: at most
 * |support p| + |support q| - 1 segments with positive weight, weights
 * summing to 1. Expectations of any pair function under the coupling reduce
 * to finite sums over these segments, which is how the exact operators
 * evaluate them.
 */
std::vector<CouplingSegment> entangled_segments(const DiscreteDistribution& p,
                                                const DiscreteDistribution& q,
                                                const std::vector<std::size_t>& atom_order);
std::vector<CouplingSegment> entangled_segments(const DiscreteDistribution& p,
                                                const DiscreteDistribution& q);

/// Product coupling: x ~ p and y ~ q drawn with independent noise.
CoupledPair<std::size_t> independent_pair(const DiscreteDistribution& p,
                                          const DiscreteDistribution& q, std::uint64_t seed);
CoupledPair<Vec> independent_pair(const DiagonalGaussian& p, const DiagonalGaussian& q,
                                  std::uint64_t seed);

}  // namespace bisimlab
