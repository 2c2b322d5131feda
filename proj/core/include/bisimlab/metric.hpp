#pragma once

#include <string>

#include "bisimlab/types.hpp"

namespace bisimlab {

/**
 * Symmetric nonnegative matrix of pairwise state distances.
 *
 * Proper pseudometrics have a zero diagonal and satisfy the triangle
 * inequality, and the fixed points of the unbiased operators do; the
 * biased operator variants deliberately produce positive diagonals, which is
 * why those two properties are check predicates here rather than
 * construction-time invariants.
 */
class StateMetric {
  public:
    StateMetric() = default;
    explicit StateMetric(std::size_t n_states) : values_(n_states, n_states) {}

    static StateMetric zero(std::size_t n_states) { return StateMetric(n_states); }

    std::size_t n_states() const { return values_.rows(); }

    double at(std::size_t i, std::size_t j) const { return values_(i, j); }
    /// Sets both (i, j) and (j, i).
    void set(std::size_t i, std::size_t j, double v) {
        values_(i, j) = v;
        values_(j, i) = v;
    }

    const Matrix& values() const { return values_; }
    Matrix& values() { return values_; }

    double sup_distance(const StateMetric& other) const {
        return values_.max_abs_diff(other.values_);
    }

    double max_entry() const;

    bool is_symmetric(double tol = 0.0) const;
    bool is_nonnegative() const;
    bool has_zero_diagonal(double tol = 0.0) const;
    /// Exhaustive triple check d(i,k) <= d(i,j) + d(j,k) + tol.
    bool satisfies_triangle(double tol) const;

    /// Worst triangle violation max_{i,j,k} d(i,k) - d(i,j) - d(j,k), >= 0
    /// means some triple violates; useful for reporting tolerances.
    double worst_triangle_violation() const;

    /// Throws ArgumentError naming the failed pseudometric axiom, if any.
    void check_pseudometric(double tol) const;

  private:
    Matrix values_;
};

}  // namespace bisimlab
