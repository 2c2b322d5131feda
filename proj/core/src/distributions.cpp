#include "bisimlab/distributions.hpp"

#include <cmath>

#include "bisimlab/rng.hpp"

namespace bisimlab {

void validate_weights(const double* w, std::size_t n, const char* what) {
    if (n == 0) throw ArgumentError(std::string(what) + ": empty support");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(w[i]) || w[i] < 0.0)
            throw ArgumentError(std::string(what) + ": weights must be finite and nonnegative");
        sum += w[i];
    }
    if (std::fabs(sum - 1.0) > kMassTolerance)
        throw ArgumentError(std::string(what) + ": weights must sum to 1");
}

void DiscreteDistribution::validate() const {
    validate_weights(weights.data(), weights.size(), "DiscreteDistribution");
}

void DiagonalGaussian::validate() const {
    if (mean.empty() || mean.size() != stddev.size())
        throw ArgumentError("DiagonalGaussian: mean/stddev dimension mismatch");
    for (std::size_t i = 0; i < mean.size(); ++i) {
        if (!std::isfinite(mean[i]) || !std::isfinite(stddev[i]))
            throw ArgumentError("DiagonalGaussian: non-finite parameter");
        if (stddev[i] <= 0.0)
            throw ArgumentError("DiagonalGaussian: stddev must be strictly positive");
    }
}

double DiagonalGaussian::coordinate_quantile(std::size_t i, double u) const {
    return mean[i] + stddev[i] * normal_quantile(u);
}

}  // namespace bisimlab
