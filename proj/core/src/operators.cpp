#include "bisimlab/operators.hpp"

#include <cmath>
#include <vector>

#include "bisimlab/coupling.hpp"
#include "bisimlab/parallel.hpp"
#include "bisimlab/transport.hpp"

namespace bisimlab {

namespace {

void check_operator_inputs(const FiniteMdp& mdp, const TabularPolicy& policy, double c,
                           const StateMetric& d) {
    mdp.validate();
    policy.validate();
    require(policy.n_states() == mdp.n_states() && policy.n_actions() == mdp.n_actions(),
            "operator: policy shape does not match the MDP");
    require(c >= 0.0 && c < 1.0, "operator: contraction factor c must lie in [0, 1)");
    require(d.n_states() == mdp.n_states(), "operator: distance matrix size mismatch");
    require(d.values().all_finite(), "operator: non-finite distance entry");
    require(d.is_nonnegative(), "operator: negative distance entry");
}

DiscreteDistribution row_distribution(const double* row, std::size_t n) {
    return DiscreteDistribution(Vec(row, row + n));
}

/// All unordered off-diagonal pairs, i < j.
std::vector<std::pair<std::size_t, std::size_t>> state_pairs(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    return pairs;
}

double transition_w1(const FiniteMdp& mdp, std::size_t z, std::size_t a, std::size_t z2,
                     std::size_t a2, const StateMetric& d) {
    const std::size_t n = mdp.n_states();
    return w1_discrete(row_distribution(mdp.transition_row(z, a), n),
                       row_distribution(mdp.transition_row(z2, a2), n), d.values());
}

/// Mean and stddev of a next-state index distribution, for the DBC proxy.
std::pair<double, double> index_moments(const double* row, std::size_t n) {
    double mean = 0.0, second = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        mean += row[t] * static_cast<double>(t);
        second += row[t] * static_cast<double>(t) * static_cast<double>(t);
    }
    const double var = std::max(0.0, second - mean * mean);
    return {mean, std::sqrt(var)};
}

}  // namespace

StateMetric apply_F_pi(const FiniteMdp& mdp, const TabularPolicy& policy, double c,
                       const StateMetric& d, int workers) {
    check_operator_inputs(mdp, policy, c, d);
    const std::size_t n = mdp.n_states();
    const AveragedDynamics avg = policy_averaged_dynamics(mdp, policy);

    StateMetric out(n);
    const auto pairs = state_pairs(n);
    parallel_for(pairs.size(), workers, [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        double value = std::fabs(avg.reward[i] - avg.reward[j]);
        if (c > 0.0)
            value += c * w1_discrete(row_distribution(avg.transition.row(i), n),
                                     row_distribution(avg.transition.row(j), n), d.values());
        out.set(i, j, value);
    });
    return out;
}

StateMetric apply_F_eps(const FiniteMdp& mdp, const TabularPolicy& policy, const SimilarityG& g,
                        double c, const StateMetric& d, int workers) {
    check_operator_inputs(mdp, policy, c, d);
    require(g.n_states() == mdp.n_states() && g.n_actions() == mdp.n_actions(),
            "apply_F_eps: similarity shape does not match the MDP");
    const std::size_t n = mdp.n_states(), na = mdp.n_actions();

    StateMetric out(n);
    const auto pairs = state_pairs(n);
    parallel_for(pairs.size(), workers, [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        const auto action_segments = entangled_segments(
            row_distribution(policy.row(i), na), row_distribution(policy.row(j), na));
        double value = 0.0;
        for (const CouplingSegment& seg : action_segments) {
            double term = g.eval(i, seg.x, j, seg.y);
            if (c > 0.0) term += c * transition_w1(mdp, i, seg.x, j, seg.y, d);
            value += seg.weight * term;
        }
        out.set(i, j, value);
    });
    return out;
}

StateMetric apply_F_eps_bar(const FiniteMdp& mdp, const TabularPolicy& policy,
                            const SimilarityG& g, double c, const StateMetric& d, int workers) {
    check_operator_inputs(mdp, policy, c, d);
    require(g.n_states() == mdp.n_states() && g.n_actions() == mdp.n_actions(),
            "apply_F_eps_bar: similarity shape does not match the MDP");
    const std::size_t n = mdp.n_states(), na = mdp.n_actions();

    StateMetric out(n);
    const auto pairs = state_pairs(n);
    parallel_for(pairs.size(), workers, [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        const auto action_segments = entangled_segments(
            row_distribution(policy.row(i), na), row_distribution(policy.row(j), na));
        double value = 0.0;
        for (const CouplingSegment& aseg : action_segments) {
            double term = g.eval(i, aseg.x, j, aseg.y);
            if (c > 0.0) {
                // Next-state coupling conditioned on this realized action pair.
                const auto state_segments =
                    entangled_segments(row_distribution(mdp.transition_row(i, aseg.x), n),
                                       row_distribution(mdp.transition_row(j, aseg.y), n));
                double expected_d = 0.0;
                for (const CouplingSegment& sseg : state_segments)
                    expected_d += sseg.weight * d.at(sseg.x, sseg.y);
                term += c * expected_d;
            }
            value += aseg.weight * term;
        }
        out.set(i, j, value);
    });
    return out;
}

StateMetric apply_F_dbc_style(const FiniteMdp& mdp, const TabularPolicy& policy, double c,
                              const StateMetric& d, bool gaussian_proxy, int workers) {
    check_operator_inputs(mdp, policy, c, d);
    const std::size_t n = mdp.n_states(), na = mdp.n_actions();

    // Diagonal included: independent action draws make it generally nonzero.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) pairs.emplace_back(i, j);

    StateMetric out(n);
    parallel_for(pairs.size(), workers, [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        double value = 0.0;
        for (std::size_t a = 0; a < na; ++a) {
            const double wa = policy.prob(i, a);
            if (wa == 0.0) continue;
            for (std::size_t a2 = 0; a2 < na; ++a2) {
                const double w = wa * policy.prob(j, a2);
                if (w == 0.0) continue;
                double term = std::fabs(mdp.reward(i, a) - mdp.reward(j, a2));
                if (c > 0.0) {
                    if (gaussian_proxy) {
                        const auto [m1, s1] = index_moments(mdp.transition_row(i, a), n);
                        const auto [m2, s2] = index_moments(mdp.transition_row(j, a2), n);
                        term += c * std::sqrt((m1 - m2) * (m1 - m2) + (s1 - s2) * (s1 - s2));
                    } else {
                        term += c * transition_w1(mdp, i, a, j, a2, d);
                    }
                }
                value += w * term;
            }
        }
        out.set(i, j, value);
    });
    return out;
}

StateMetric apply_F_psm_style(const FiniteMdp& mdp, const TabularPolicy& policy, double c,
                              const StateMetric& d, int workers) {
    check_operator_inputs(mdp, policy, c, d);
    const std::size_t n = mdp.n_states(), na = mdp.n_actions();
    const AveragedDynamics avg = policy_averaged_dynamics(mdp, policy);

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) pairs.emplace_back(i, j);

    StateMetric out(n);
    parallel_for(pairs.size(), workers, [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        // One-hot mean action embedding of a state is its policy row.
        double value = 0.0;
        for (std::size_t a = 0; a < na; ++a)
            value += std::fabs(policy.prob(i, a) - policy.prob(j, a));
        if (c > 0.0) {
            double expected_d = 0.0;
            for (std::size_t s = 0; s < n; ++s) {
                const double ws = avg.transition(i, s);
                if (ws == 0.0) continue;
                for (std::size_t s2 = 0; s2 < n; ++s2)
                    expected_d += ws * avg.transition(j, s2) * d.at(s, s2);
            }
            value += c * expected_d;
        }
        out.set(i, j, value);
    });
    return out;
}

StateMetric apply_operator(const OperatorKind& kind, const FiniteMdp& mdp,
                           const TabularPolicy& policy, const StateMetric& d, int workers) {
    switch (kind.tag) {
        case OperatorTag::Pi:
            return apply_F_pi(mdp, policy, kind.c, d, workers);
        case OperatorTag::Eps:
            require(kind.similarity.has_value(), "apply_operator: Eps needs a similarity G");
            return apply_F_eps(mdp, policy, *kind.similarity, kind.c, d, workers);
        case OperatorTag::EpsBar:
            require(kind.similarity.has_value(), "apply_operator: EpsBar needs a similarity G");
            return apply_F_eps_bar(mdp, policy, *kind.similarity, kind.c, d, workers);
        case OperatorTag::DbcStyle:
            return apply_F_dbc_style(mdp, policy, kind.c, d, kind.gaussian_proxy, workers);
        case OperatorTag::PsmStyle:
            return apply_F_psm_style(mdp, policy, kind.c, d, workers);
    }
    throw ArgumentError("apply_operator: unknown operator tag");
}

FixedPointResult fixed_point(const OperatorKind& kind, const FiniteMdp& mdp,
                             const TabularPolicy& policy, double tol, std::size_t max_iter,
                             int workers) {
    require(tol > 0.0, "fixed_point: tol must be positive");
    require(max_iter >= 1, "fixed_point: max_iter must be >= 1");

    FixedPointResult result;
    StateMetric current = StateMetric::zero(mdp.n_states());

    if (kind.c == 0.0) {
        // The operator ignores d entirely, so one application is the fixed point.
        result.metric = apply_operator(kind, mdp, policy, current, workers);
        result.iterations = 1;
        result.residual = 0.0;
        result.converged = true;
        result.residuals = {0.0};
        return result;
    }

    for (std::size_t iter = 1; iter <= max_iter; ++iter) {
        StateMetric next = apply_operator(kind, mdp, policy, current, workers);
        const double residual = next.sup_distance(current);
        current = std::move(next);
        result.iterations = iter;
        result.residual = residual;
        result.residuals.push_back(residual);
        if (residual <= tol) {
            result.converged = true;
            break;
        }
    }
    result.metric = std::move(current);
    return result;
}

}  // namespace bisimlab
