#include "bisimlab/coupling.hpp"

#include <algorithm>
#include <cmath>

namespace bisimlab {

NoiseVector NoiseVector::uniform(std::size_t n, SplitMix64& gen) {
    NoiseVector nv;
    nv.law = Law::Uniform01;
    nv.values.resize(n);
    for (double& v : nv.values) v = gen.uniform01();
    return nv;
}

NoiseVector NoiseVector::standard_normal(std::size_t n, SplitMix64& gen) {
    NoiseVector nv;
    nv.law = Law::StdNormal;
    nv.values.resize(n);
    for (double& v : nv.values) v = gen.standard_normal();
    return nv;
}

namespace {

void check_noise(const NoiseVector& noise, NoiseVector::Law law, std::size_t dim,
                 const char* what) {
    if (noise.law != law) throw ArgumentError(std::string(what) + ": wrong noise law");
    if (noise.values.size() != dim)
        throw ArgumentError(std::string(what) + ": noise dimension mismatch");
    for (double v : noise.values) {
        if (!std::isfinite(v)) throw ArgumentError(std::string(what) + ": non-finite noise");
        if (law == NoiseVector::Law::Uniform01 && (v <= 0.0 || v >= 1.0))
            throw ArgumentError(std::string(what) + ": uniform noise must lie in (0, 1)");
    }
}

void check_order(const std::vector<std::size_t>& order, std::size_t n) {
    if (order.size() != n)
        throw ArgumentError("entangled_discrete: atom_order must cover the support");
    std::vector<char> seen(n, 0);
    for (std::size_t a : order) {
        if (a >= n || seen[a])
            throw ArgumentError("entangled_discrete: atom_order must be a permutation");
        seen[a] = 1;
    }
}

std::vector<std::size_t> ascending(std::size_t n) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    return order;
}

}  // namespace

CoupledPair<Vec> entangled_gaussian(const DiagonalGaussian& p, const DiagonalGaussian& q,
                                    const NoiseVector& noise) {
    p.validate();
    q.validate();
    require(p.dim() == q.dim(), "entangled_gaussian: dimension mismatch");
    check_noise(noise, NoiseVector::Law::StdNormal, p.dim(), "entangled_gaussian");

    CoupledPair<Vec> out;
    out.noise = noise;
    out.x.resize(p.dim());
    out.y.resize(p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) {
        out.x[i] = p.mean[i] + noise.values[i] * p.stddev[i];
        out.y[i] = q.mean[i] + noise.values[i] * q.stddev[i];
    }
    return out;
}

CoupledPair<Vec> entangled_gaussian_from_uniform(const DiagonalGaussian& p,
                                                 const DiagonalGaussian& q,
                                                 const NoiseVector& noise) {
    p.validate();
    q.validate();
    require(p.dim() == q.dim(), "entangled_gaussian_from_uniform: dimension mismatch");
    check_noise(noise, NoiseVector::Law::Uniform01, p.dim(), "entangled_gaussian_from_uniform");

    CoupledPair<Vec> out;
    out.noise = noise;
    out.x.resize(p.dim());
    out.y.resize(p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) {
        const double z = normal_quantile(noise.values[i]);
        out.x[i] = p.mean[i] + z * p.stddev[i];
        out.y[i] = q.mean[i] + z * q.stddev[i];
    }
    return out;
}

CoupledPair<Vec> entangled_tanh_policy(const Vec& mu_p, const Vec& sd_p, const Vec& mu_q,
                                       const Vec& sd_q, const NoiseVector& noise) {
    const std::size_t d = mu_p.size();
    require(sd_p.size() == d && mu_q.size() == d && sd_q.size() == d,
            "entangled_tanh_policy: dimension mismatch");
    for (std::size_t i = 0; i < d; ++i)
        require(std::isfinite(mu_p[i]) && std::isfinite(mu_q[i]) && sd_p[i] >= 0.0 &&
                    sd_q[i] >= 0.0,
                "entangled_tanh_policy: parameters must be finite, stddevs nonnegative");
    check_noise(noise, NoiseVector::Law::StdNormal, d, "entangled_tanh_policy");

    CoupledPair<Vec> out;
    out.noise = noise;
    out.x.resize(d);
    out.y.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        out.x[i] = std::tanh(mu_p[i] + noise.values[i] * sd_p[i]);
        out.y[i] = std::tanh(mu_q[i] + noise.values[i] * sd_q[i]);
    }
    return out;
}

std::size_t sample_index(const double* weights, std::size_t n, double u) {
    // The cum > 0 guard keeps u = 0 off zero-mass leading atoms, so point
    // masses always map to their own atom.
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        cum += weights[i];
        if (cum >= u && cum > 0.0) return i;
    }
    return n - 1;
}

namespace {

std::size_t quantile_atom(const DiscreteDistribution& p, const std::vector<std::size_t>& order,
                          double u) {
    double cum = 0.0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        cum += p.weights[order[k]];
        if (cum >= u && cum > 0.0) return order[k];
    }
    return order.back();
}

}  // namespace

CoupledPair<std::size_t> entangled_discrete(const DiscreteDistribution& p,
                                            const DiscreteDistribution& q,
                                            const std::vector<std::size_t>& atom_order,
                                            double u) {
    p.validate();
    q.validate();
    require(p.size() == q.size(), "entangled_discrete: supports must match");
    check_order(atom_order, p.size());
    require(u >= 0.0 && u <= 1.0, "entangled_discrete: u must lie in [0, 1]");

    CoupledPair<std::size_t> out;
    out.noise.law = NoiseVector::Law::Uniform01;
    out.noise.values = {u};
    out.x = quantile_atom(p, atom_order, u);
    out.y = quantile_atom(q, atom_order, u);
    return out;
}

CoupledPair<std::size_t> entangled_discrete(const DiscreteDistribution& p,
                                            const DiscreteDistribution& q, double u) {
    return entangled_discrete(p, q, ascending(p.size()), u);
}

std::vector<CouplingSegment> entangled_segments(const DiscreteDistribution& p,
                                                const DiscreteDistribution& q,
                                                const std::vector<std::size_t>& atom_order) {
    p.validate();
    q.validate();
    require(p.size() == q.size(), "entangled_segments: supports must match");
    check_order(atom_order, p.size());

    const std::size_t n = atom_order.size();
    Vec cp(n), cq(n);
    double accp = 0.0, accq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        accp += p.weights[atom_order[k]];
        accq += q.weights[atom_order[k]];
        cp[k] = accp;
        cq[k] = accq;
    }
    // Rows are validated to unit mass within 1e-12; pin the final breakpoints
    // so the merge below closes exactly at 1.
    cp[n - 1] = 1.0;
    cq[n - 1] = 1.0;

    std::vector<CouplingSegment> segments;
    segments.reserve(2 * n - 1);
    std::size_t i = 0, j = 0;
    double lo = 0.0;
    while (i < n && j < n) {
        const double hi = std::min(cp[i], cq[j]);
        if (hi > lo)
            segments.push_back({atom_order[i], atom_order[j], hi - lo});
        lo = hi;
        if (cp[i] <= hi) ++i;
        if (cq[j] <= hi) ++j;
        if (lo >= 1.0) break;
    }
    return segments;
}

std::vector<CouplingSegment> entangled_segments(const DiscreteDistribution& p,
                                                const DiscreteDistribution& q) {
    return entangled_segments(p, q, ascending(p.size()));
}

CoupledPair<std::size_t> independent_pair(const DiscreteDistribution& p,
                                          const DiscreteDistribution& q, std::uint64_t seed) {
    p.validate();
    q.validate();
    SplitMix64 gen(seed);
    CoupledPair<std::size_t> out;
    out.noise.law = NoiseVector::Law::Uniform01;
    out.noise.values = {gen.uniform01(), gen.uniform01()};
    out.x = sample_index(p.weights.data(), p.size(), out.noise.values[0]);
    out.y = sample_index(q.weights.data(), q.size(), out.noise.values[1]);
    return out;
}

CoupledPair<Vec> independent_pair(const DiagonalGaussian& p, const DiagonalGaussian& q,
                                  std::uint64_t seed) {
    p.validate();
    q.validate();
    require(p.dim() == q.dim(), "independent_pair: dimension mismatch");
    SplitMix64 gen(seed);
    CoupledPair<Vec> out;
    out.noise.law = NoiseVector::Law::StdNormal;
    out.noise.values.resize(2 * p.dim());
    for (double& v : out.noise.values) v = gen.standard_normal();
    out.x.resize(p.dim());
    out.y.resize(p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) {
        out.x[i] = p.mean[i] + out.noise.values[i] * p.stddev[i];
        out.y[i] = q.mean[i] + out.noise.values[p.dim() + i] * q.stddev[i];
    }
    return out;
}

}  // namespace bisimlab
