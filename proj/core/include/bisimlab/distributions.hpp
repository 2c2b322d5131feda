#pragma once

#include <cstddef>

#include "bisimlab/types.hpp"

namespace bisimlab {

/// Tolerance on "probabilities sum to one" everywhere in the library.
inline constexpr double kMassTolerance = 1e-12;

/**
 * Probability distribution over atoms indexed 0..size-1. Atoms are abstract
 * indices; whatever they mean (states, actions) is the caller's business.
 */
struct DiscreteDistribution {
    Vec weights;

    DiscreteDistribution() = default;
    explicit DiscreteDistribution(Vec w) : weights(std::move(w)) {}

    std::size_t size() const { return weights.size(); }

    /// Throws ArgumentError unless weights are finite, nonnegative and sum to 1.
    void validate() const;
};

/// Validate a bare weight row without wrapping it (hot paths pass raw rows).
void validate_weights(const double* w, std::size_t n, const char* what);

/// Gaussian with independent coordinates.
struct DiagonalGaussian {
    Vec mean;
    Vec stddev;

    std::size_t dim() const { return mean.size(); }

    /// Throws ArgumentError unless dimensions match, values are finite and
    /// every stddev is strictly positive.
    void validate() const;

    /// Per-coordinate quantile x_i = mean_i + stddev_i * Phi^{-1}(u).
    double coordinate_quantile(std::size_t i, double u) const;
};

}  // namespace bisimlab
