#pragma once

#include <cstdint>

#include "bisimlab/coupling.hpp"
#include "bisimlab/distributions.hpp"
#include "bisimlab/types.hpp"

namespace bisimlab {

/// out = state_coef * z + action_coef * a + offset.
struct AffineMap {
    Matrix state_coef;
    Matrix action_coef;
    Vec offset;

    std::size_t out_dim() const { return offset.size(); }
    void validate(std::size_t state_dim, std::size_t action_dim, const char* what) const;
    Vec apply(const Vec& z, const Vec& a) const;
};

/**
 * Continuous-state testbed: linear-Gaussian dynamics with independent
 * coordinates. The next state given (z, a) is Gaussian with mean
 * mean_map(z, a) and diagonal stddev stddev_map(z, a); a constant stddev is
 * the special case of zero stddev coefficients. Rewards are affine. Because
 * each coordinate's conditional is an independent univariate Gaussian, the
 * comonotone coupling factorizes per coordinate, which is what makes exact
 * coordinate-wise references computable.
 */
class GaussianLinearMdp {
  public:
    GaussianLinearMdp() = default;
    GaussianLinearMdp(std::size_t state_dim, std::size_t action_dim, AffineMap mean_map,
                      AffineMap stddev_map, AffineMap reward_map, double discount);

    std::size_t state_dim() const { return state_dim_; }
    std::size_t action_dim() const { return action_dim_; }
    double discount() const { return discount_; }

    /**
     * Conditional next-state distribution. Throws NumericalError if the
     * affine stddev dips to zero or below at this (z, a); the invariant is
     * the caller's to maintain on the region it actually visits.
     */
    DiagonalGaussian next_state_distribution(const Vec& z, const Vec& a) const;

    double reward(const Vec& z, const Vec& a) const;

    void validate() const;

  private:
    std::size_t state_dim_ = 0, action_dim_ = 0;
    AffineMap mean_map_, stddev_map_, reward_map_;
    double discount_ = 0.9;
};

/// Gaussian policy head: a = coef * z + offset + stddev .* eps, stddev >= 0
/// per coordinate (zero makes the policy deterministic in that coordinate).
struct GaussianPolicy {
    Matrix coef;  // action_dim x state_dim
    Vec offset;
    Vec stddev;

    std::size_t action_dim() const { return offset.size(); }
    void validate(std::size_t state_dim) const;
    Vec mean(const Vec& z) const;

    /// Entangled action pair for states z, z': same eps on both sides.
    CoupledPair<Vec> entangled_actions(const Vec& z, const Vec& z_prime,
                                       const NoiseVector& noise) const;
};

struct GaussianMdpOptions {
    double stddev_base_lo = 0.4;
    double stddev_base_hi = 1.0;
    /// Scale of the affine stddev coefficients; 0 gives constant stddevs.
    double stddev_affine_scale = 0.0;
};

/// Random testbed with bounded coefficients; bit-identical per seed.
GaussianLinearMdp random_gaussian_mdp(std::size_t state_dim, std::size_t action_dim,
                                      std::uint64_t seed, const GaussianMdpOptions& options = {});

GaussianPolicy random_gaussian_policy(std::size_t state_dim, std::size_t action_dim,
                                      std::uint64_t seed);

}  // namespace bisimlab
