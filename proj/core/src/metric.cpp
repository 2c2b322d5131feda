#include "bisimlab/metric.hpp"

#include <algorithm>
#include <cmath>

namespace bisimlab {

double StateMetric::max_entry() const {
    double best = 0.0;
    for (double v : values_.data()) best = std::max(best, v);
    return best;
}

bool StateMetric::is_symmetric(double tol) const {
    for (std::size_t i = 0; i < n_states(); ++i)
        for (std::size_t j = i + 1; j < n_states(); ++j)
            if (std::fabs(values_(i, j) - values_(j, i)) > tol) return false;
    return true;
}

bool StateMetric::is_nonnegative() const {
    for (double v : values_.data())
        if (!(v >= 0.0)) return false;
    return true;
}

bool StateMetric::has_zero_diagonal(double tol) const {
    for (std::size_t i = 0; i < n_states(); ++i)
        if (std::fabs(values_(i, i)) > tol) return false;
    return true;
}

double StateMetric::worst_triangle_violation() const {
    const std::size_t n = n_states();
    double worst = -HUGE_VAL;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                worst = std::max(worst, values_(i, k) - values_(i, j) - values_(j, k));
    return worst;
}

bool StateMetric::satisfies_triangle(double tol) const {
    return worst_triangle_violation() <= tol;
}

void StateMetric::check_pseudometric(double tol) const {
    if (!is_nonnegative()) throw ArgumentError("StateMetric: negative entry");
    if (!is_symmetric(tol)) throw ArgumentError("StateMetric: not symmetric");
    if (!has_zero_diagonal(tol)) throw ArgumentError("StateMetric: nonzero diagonal");
    if (!satisfies_triangle(tol)) throw ArgumentError("StateMetric: triangle inequality violated");
}

}  // namespace bisimlab
