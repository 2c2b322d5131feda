#pragma once

#include <functional>

#include "bisimlab/distributions.hpp"
#include "bisimlab/types.hpp"

namespace bisimlab {

/**
 * Exact 1-Wasserstein distance between two discrete distributions.
 *
 * cost(i, j) is the ground cost of moving mass from atom i of p to atom j of
 * q; it must be finite and nonnegative (no metric structure is assumed, the
 * solver only needs costs). Solved exactly as a min-cost flow on the
 * bipartite transportation graph, successive shortest paths with node
 * potentials. No regularization of any kind.
 *
 * Throws ArgumentError for invalid distributions or a cost matrix whose shape
 * is not |p| x |q|, NumericalError if the solver cannot route all mass.
 */
double w1_discrete(const DiscreteDistribution& p, const DiscreteDistribution& q,
                   const Matrix& cost);

/**
 * Reference solver for tiny instances: enumerates every basic feasible
 * solution of the transport polytope (spanning trees of the bipartite graph)
 * and returns the cheapest. Exponential, deliberately so; it shares no code
 * with w1_discrete and exists to audit it. Requires |p|*|q| <= 16.
 */
double w1_discrete_bruteforce(const DiscreteDistribution& p, const DiscreteDistribution& q,
                              const Matrix& cost);

/**
 * p-Wasserstein distance between two distributions on the real line, given
 * their inverse CDFs:
 *
 *   W_p(P, Q) = ( integral_0^1 |F^-1(u) - G^-1(u)|^p du )^(1/p)
 *
 * evaluated by the midpoint rule on n_quad equal cells, with quantile
 * arguments clamped to [1e-12, 1 - 1e-12] so the inverse CDFs are never
 * probed at 0 or 1. power must be >= 1. Throws NumericalError if an inverse
 * CDF returns a non-finite value at an interior point.
 */
double wp_univariate(const std::function<double(double)>& p_inv_cdf,
                     const std::function<double(double)>& q_inv_cdf, double power, int n_quad);

/**
 * The raw optimal transport cost for the |x - y|^power ground cost in one
 * dimension, i.e. the integral above without the final 1/power root. This is
 * the quantity coordinate-wise separable distances sum.
 */
double wp_cost_univariate(const std::function<double(double)>& p_inv_cdf,
                          const std::function<double(double)>& q_inv_cdf, double power,
                          int n_quad);

/**
 * Closed-form 2-Wasserstein distance between Gaussians with diagonal
 * covariance: sqrt( sum_i (mu_p,i - mu_q,i)^2 + (sd_p,i - sd_q,i)^2 ).
 */
double w2_diag_gaussian(const DiagonalGaussian& p, const DiagonalGaussian& q);

}  // namespace bisimlab
