#include "bisimlab/gaussian.hpp"

#include <cmath>

#include "bisimlab/rng.hpp"

namespace bisimlab {

void AffineMap::validate(std::size_t state_dim, std::size_t action_dim, const char* what) const {
    const std::size_t out = offset.size();
    if (out == 0) throw ArgumentError(std::string(what) + ": empty output");
    if (state_coef.rows() != out || state_coef.cols() != state_dim ||
        action_coef.rows() != out || action_coef.cols() != action_dim)
        throw ArgumentError(std::string(what) + ": coefficient shape mismatch");
    if (!state_coef.all_finite() || !action_coef.all_finite())
        throw ArgumentError(std::string(what) + ": non-finite coefficient");
    for (double v : offset)
        if (!std::isfinite(v)) throw ArgumentError(std::string(what) + ": non-finite offset");
}

Vec AffineMap::apply(const Vec& z, const Vec& a) const {
    Vec out = offset;
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t k = 0; k < state_coef.cols(); ++k) out[i] += state_coef(i, k) * z[k];
        for (std::size_t k = 0; k < action_coef.cols(); ++k) out[i] += action_coef(i, k) * a[k];
    }
    return out;
}

GaussianLinearMdp::GaussianLinearMdp(std::size_t state_dim, std::size_t action_dim,
                                     AffineMap mean_map, AffineMap stddev_map,
                                     AffineMap reward_map, double discount)
    : state_dim_(state_dim), action_dim_(action_dim), mean_map_(std::move(mean_map)),
      stddev_map_(std::move(stddev_map)), reward_map_(std::move(reward_map)),
      discount_(discount) {
    validate();
}

void GaussianLinearMdp::validate() const {
    require(state_dim_ > 0 && action_dim_ > 0, "GaussianLinearMdp: empty dimensions");
    require(discount_ >= 0.0 && discount_ < 1.0, "GaussianLinearMdp: discount must be in [0, 1)");
    mean_map_.validate(state_dim_, action_dim_, "GaussianLinearMdp mean_map");
    stddev_map_.validate(state_dim_, action_dim_, "GaussianLinearMdp stddev_map");
    reward_map_.validate(state_dim_, action_dim_, "GaussianLinearMdp reward_map");
    require(mean_map_.out_dim() == state_dim_ && stddev_map_.out_dim() == state_dim_,
            "GaussianLinearMdp: mean/stddev maps must produce state_dim coordinates");
    require(reward_map_.out_dim() == 1, "GaussianLinearMdp: reward map must be scalar");
}

DiagonalGaussian GaussianLinearMdp::next_state_distribution(const Vec& z, const Vec& a) const {
    require(z.size() == state_dim_ && a.size() == action_dim_,
            "GaussianLinearMdp: state/action dimension mismatch");
    DiagonalGaussian g;
    g.mean = mean_map_.apply(z, a);
    g.stddev = stddev_map_.apply(z, a);
    for (double s : g.stddev)
        if (!(s > 0.0))
            throw NumericalError("GaussianLinearMdp: stddev not strictly positive at query");
    return g;
}

double GaussianLinearMdp::reward(const Vec& z, const Vec& a) const {
    require(z.size() == state_dim_ && a.size() == action_dim_,
            "GaussianLinearMdp: state/action dimension mismatch");
    return reward_map_.apply(z, a)[0];
}

void GaussianPolicy::validate(std::size_t state_dim) const {
    const std::size_t ad = offset.size();
    require(ad > 0, "GaussianPolicy: empty action space");
    require(coef.rows() == ad && coef.cols() == state_dim && stddev.size() == ad,
            "GaussianPolicy: shape mismatch");
    require(coef.all_finite(), "GaussianPolicy: non-finite coefficient");
    for (std::size_t i = 0; i < ad; ++i)
        require(std::isfinite(offset[i]) && std::isfinite(stddev[i]) && stddev[i] >= 0.0,
                "GaussianPolicy: offsets finite and stddevs nonnegative required");
}

Vec GaussianPolicy::mean(const Vec& z) const {
    require(z.size() == coef.cols(), "GaussianPolicy: state dimension mismatch");
    Vec out = offset;
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t k = 0; k < coef.cols(); ++k) out[i] += coef(i, k) * z[k];
    return out;
}

CoupledPair<Vec> GaussianPolicy::entangled_actions(const Vec& z, const Vec& z_prime,
                                                   const NoiseVector& noise) const {
    require(noise.law == NoiseVector::Law::StdNormal && noise.values.size() == action_dim(),
            "GaussianPolicy: need StdNormal noise of action dimension");
    const Vec mu_x = mean(z), mu_y = mean(z_prime);
    CoupledPair<Vec> out;
    out.noise = noise;
    out.x.resize(action_dim());
    out.y.resize(action_dim());
    for (std::size_t i = 0; i < action_dim(); ++i) {
        out.x[i] = mu_x[i] + noise.values[i] * stddev[i];
        out.y[i] = mu_y[i] + noise.values[i] * stddev[i];
    }
    return out;
}

GaussianLinearMdp random_gaussian_mdp(std::size_t state_dim, std::size_t action_dim,
                                      std::uint64_t seed, const GaussianMdpOptions& options) {
    require(state_dim > 0 && action_dim > 0, "random_gaussian_mdp: empty dimensions");
    require(options.stddev_base_lo > 0.0 && options.stddev_base_hi >= options.stddev_base_lo,
            "random_gaussian_mdp: stddev base range must be positive");
    require(options.stddev_affine_scale >= 0.0,
            "random_gaussian_mdp: stddev affine scale must be nonnegative");

    SplitMix64 gen(derive_stream(seed, "gaussian_mdp"));
    // Contractive state coefficients keep trajectories from blowing up, which
    // in turn keeps affine stddevs positive on the region tests sample.
    const double a_scale = 0.8 / static_cast<double>(state_dim);

    AffineMap mean_map;
    mean_map.state_coef = Matrix(state_dim, state_dim);
    mean_map.action_coef = Matrix(state_dim, action_dim);
    mean_map.offset.assign(state_dim, 0.0);
    for (std::size_t i = 0; i < state_dim; ++i) {
        for (std::size_t k = 0; k < state_dim; ++k)
            mean_map.state_coef(i, k) = gen.uniform(-a_scale, a_scale);
        for (std::size_t k = 0; k < action_dim; ++k)
            mean_map.action_coef(i, k) = gen.uniform(-0.5, 0.5);
        mean_map.offset[i] = gen.uniform(-0.3, 0.3);
    }

    AffineMap stddev_map;
    stddev_map.state_coef = Matrix(state_dim, state_dim);
    stddev_map.action_coef = Matrix(state_dim, action_dim);
    stddev_map.offset.assign(state_dim, 0.0);
    for (std::size_t i = 0; i < state_dim; ++i) {
        stddev_map.offset[i] = gen.uniform(options.stddev_base_lo, options.stddev_base_hi);
        const double s = options.stddev_affine_scale;
        if (s > 0.0) {
            for (std::size_t k = 0; k < state_dim; ++k)
                stddev_map.state_coef(i, k) = gen.uniform(-s, s);
            for (std::size_t k = 0; k < action_dim; ++k)
                stddev_map.action_coef(i, k) = gen.uniform(-s, s);
        }
    }

    AffineMap reward_map;
    reward_map.state_coef = Matrix(1, state_dim);
    reward_map.action_coef = Matrix(1, action_dim);
    reward_map.offset.assign(1, gen.uniform(-0.2, 0.2));
    for (std::size_t k = 0; k < state_dim; ++k)
        reward_map.state_coef(0, k) = gen.uniform(-1.0, 1.0);
    for (std::size_t k = 0; k < action_dim; ++k)
        reward_map.action_coef(0, k) = gen.uniform(-1.0, 1.0);

    return GaussianLinearMdp(state_dim, action_dim, std::move(mean_map), std::move(stddev_map),
                             std::move(reward_map), 0.9);
}

GaussianPolicy random_gaussian_policy(std::size_t state_dim, std::size_t action_dim,
                                      std::uint64_t seed) {
    require(state_dim > 0 && action_dim > 0, "random_gaussian_policy: empty dimensions");
    SplitMix64 gen(derive_stream(seed, "gaussian_policy"));
    GaussianPolicy pi;
    pi.coef = Matrix(action_dim, state_dim);
    pi.offset.assign(action_dim, 0.0);
    pi.stddev.assign(action_dim, 0.0);
    const double scale = 0.8 / std::sqrt(static_cast<double>(state_dim));
    for (std::size_t i = 0; i < action_dim; ++i) {
        for (std::size_t k = 0; k < state_dim; ++k) pi.coef(i, k) = gen.uniform(-scale, scale);
        pi.offset[i] = gen.uniform(-0.2, 0.2);
        pi.stddev[i] = gen.uniform(0.2, 0.7);
    }
    pi.validate(state_dim);
    return pi;
}

}  // namespace bisimlab
