#include "bisimlab/estimators.hpp"

#include "bisimlab/io.hpp"

#include <cmath>
#include <cstdio>

#include "bisimlab/coupling.hpp"
#include "bisimlab/parallel.hpp"
#include "bisimlab/rng.hpp"
#include "bisimlab/transport.hpp"

namespace bisimlab {

namespace {

void check_estimator_inputs(const FiniteMdp& mdp, const TabularPolicy& policy, double c,
                            const StateMetric& d, std::size_t z, std::size_t z_prime) {
    require(policy.n_states() == mdp.n_states() && policy.n_actions() == mdp.n_actions(),
            "estimator: policy shape does not match the MDP");
    require(c >= 0.0 && c < 1.0, "estimator: contraction factor c must lie in [0, 1)");
    require(d.n_states() == mdp.n_states(), "estimator: distance matrix size mismatch");
    require(z < mdp.n_states() && z_prime < mdp.n_states(), "estimator: state out of range");
}

double l1_policy_gap(const TabularPolicy& policy, std::size_t z, std::size_t z_prime) {
    double acc = 0.0;
    for (std::size_t a = 0; a < policy.n_actions(); ++a)
        acc += std::fabs(policy.prob(z, a) - policy.prob(z_prime, a));
    return acc;
}

}  // namespace

double sample_F_hat_eps(const FiniteMdp& mdp, const TabularPolicy& policy, const SimilarityG& g,
                        double c, const StateMetric& d, std::size_t z, std::size_t z_prime,
                        std::uint64_t noise_seed) {
    check_estimator_inputs(mdp, policy, c, d, z, z_prime);
    const std::size_t n = mdp.n_states(), na = mdp.n_actions();
    SplitMix64 gen(noise_seed);

    const double u_action = gen.uniform01();
    const std::size_t a = sample_index(policy.row(z), na, u_action);
    const std::size_t a2 = sample_index(policy.row(z_prime), na, u_action);

    const double u_state = gen.uniform01();
    const std::size_t s = sample_index(mdp.transition_row(z, a), n, u_state);
    const std::size_t s2 = sample_index(mdp.transition_row(z_prime, a2), n, u_state);

    return g.eval(z, a, z_prime, a2) + c * d.at(s, s2);
}

double sample_F_hat_eps_independent(const FiniteMdp& mdp, const TabularPolicy& policy,
                                    const SimilarityG& g, double c, const StateMetric& d,
                                    std::size_t z, std::size_t z_prime,
                                    std::uint64_t noise_seed) {
    check_estimator_inputs(mdp, policy, c, d, z, z_prime);
    const std::size_t n = mdp.n_states(), na = mdp.n_actions();
    SplitMix64 gen(noise_seed);

    const std::size_t a = sample_index(policy.row(z), na, gen.uniform01());
    const std::size_t a2 = sample_index(policy.row(z_prime), na, gen.uniform01());
    const std::size_t s = sample_index(mdp.transition_row(z, a), n, gen.uniform01());
    const std::size_t s2 = sample_index(mdp.transition_row(z_prime, a2), n, gen.uniform01());

    return g.eval(z, a, z_prime, a2) + c * d.at(s, s2);
}

double sample_F_hat_dbc(const FiniteMdp& mdp, const TabularPolicy& policy, double c,
                        const StateMetric& d, std::size_t z, std::size_t z_prime,
                        std::uint64_t noise_seed) {
    check_estimator_inputs(mdp, policy, c, d, z, z_prime);
    const std::size_t n = mdp.n_states(), na = mdp.n_actions();
    SplitMix64 gen(noise_seed);

    const std::size_t a = sample_index(policy.row(z), na, gen.uniform01());
    const std::size_t a2 = sample_index(policy.row(z_prime), na, gen.uniform01());

    double value = std::fabs(mdp.reward(z, a) - mdp.reward(z_prime, a2));
    if (c > 0.0) {
        const DiscreteDistribution p(Vec(mdp.transition_row(z, a), mdp.transition_row(z, a) + n));
        const DiscreteDistribution q(
            Vec(mdp.transition_row(z_prime, a2), mdp.transition_row(z_prime, a2) + n));
        value += c * w1_discrete(p, q, d.values());
    }
    return value;
}

double sample_F_hat_dbc(const GaussianLinearMdp& mdp, const GaussianPolicy& policy, double c,
                        const Vec& z, const Vec& z_prime, std::uint64_t noise_seed) {
    mdp.validate();
    policy.validate(mdp.state_dim());
    require(policy.action_dim() == mdp.action_dim(),
            "sample_F_hat_dbc: policy action dimension mismatch");
    require(c >= 0.0 && c < 1.0, "sample_F_hat_dbc: contraction factor must lie in [0, 1)");
    require(z.size() == mdp.state_dim() && z_prime.size() == mdp.state_dim(),
            "sample_F_hat_dbc: state dimension mismatch");
    SplitMix64 gen(noise_seed);

    const Vec mu_a = policy.mean(z), mu_a2 = policy.mean(z_prime);
    Vec a(mdp.action_dim()), a2(mdp.action_dim());
    for (std::size_t i = 0; i < mdp.action_dim(); ++i)
        a[i] = mu_a[i] + policy.stddev[i] * gen.standard_normal();
    for (std::size_t i = 0; i < mdp.action_dim(); ++i)
        a2[i] = mu_a2[i] + policy.stddev[i] * gen.standard_normal();

    double value = std::fabs(mdp.reward(z, a) - mdp.reward(z_prime, a2));
    if (c > 0.0)
        value += c * w2_diag_gaussian(mdp.next_state_distribution(z, a),
                                      mdp.next_state_distribution(z_prime, a2));
    return value;
}

double sample_F_hat_psm(const FiniteMdp& mdp, const TabularPolicy& policy, double c,
                        const StateMetric& d, std::size_t z, std::size_t z_prime,
                        std::uint64_t noise_seed) {
    check_estimator_inputs(mdp, policy, c, d, z, z_prime);
    const std::size_t n = mdp.n_states(), na = mdp.n_actions();
    SplitMix64 gen(noise_seed);

    double value = l1_policy_gap(policy, z, z_prime);
    if (c > 0.0) {
        const std::size_t a = sample_index(policy.row(z), na, gen.uniform01());
        const std::size_t a2 = sample_index(policy.row(z_prime), na, gen.uniform01());
        const std::size_t s = sample_index(mdp.transition_row(z, a), n, gen.uniform01());
        const std::size_t s2 = sample_index(mdp.transition_row(z_prime, a2), n, gen.uniform01());
        value += c * d.at(s, s2);
    }
    return value;
}

std::vector<EstimatorReport> bias_audit(
    const EstimatorMethod& method, const FiniteMdp& mdp, const TabularPolicy& policy,
    const StateMetric& d, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    std::size_t n_samples, std::uint64_t seed, int workers) {
    mdp.validate();
    policy.validate();
    require(n_samples >= 1, "bias_audit: need at least one sample");
    require(!pairs.empty(), "bias_audit: empty pair list");
    for (const auto& [z, z2] : pairs)
        require(z < mdp.n_states() && z2 < mdp.n_states(), "bias_audit: state out of range");

    std::string method_name;
    SimilarityG reference_g = SimilarityG::reward_diff(mdp);
    switch (method.tag) {
        case OperatorTag::Eps:
            require(method.similarity.has_value(), "bias_audit: eps needs a similarity G");
            method_name = "eps";
            reference_g = *method.similarity;
            break;
        case OperatorTag::DbcStyle:
            require(method.mode == SamplingMode::Independent,
                    "bias_audit: dbc-style sampling is independent by construction");
            method_name = "dbc";
            break;
        case OperatorTag::PsmStyle:
            require(method.mode == SamplingMode::Independent,
                    "bias_audit: psm-style sampling is independent by construction");
            method_name = "psm";
            reference_g = SimilarityG::policy_mean_diff(mdp, policy);
            break;
        default:
            throw ArgumentError("bias_audit: method must be eps, dbc-style or psm-style");
    }
    const std::string mode_name =
        method.mode == SamplingMode::Entangled ? "entangled" : "independent";

    const StateMetric exact = apply_F_eps_bar(mdp, policy, reference_g, method.c, d, workers);

    std::vector<EstimatorReport> reports(pairs.size());
    parallel_for(pairs.size(), workers, [&](std::size_t k) {
        const auto [z, z2] = pairs[k];
        const std::uint64_t pair_seed = derive_stream(seed, k);

        double mean = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < n_samples; ++i) {
            const std::uint64_t draw_seed = derive_stream(pair_seed, i);
            double v = 0.0;
            switch (method.tag) {
                case OperatorTag::Eps:
                    v = method.mode == SamplingMode::Entangled
                            ? sample_F_hat_eps(mdp, policy, *method.similarity, method.c, d, z,
                                               z2, draw_seed)
                            : sample_F_hat_eps_independent(mdp, policy, *method.similarity,
                                                           method.c, d, z, z2, draw_seed);
                    break;
                case OperatorTag::DbcStyle:
                    v = sample_F_hat_dbc(mdp, policy, method.c, d, z, z2, draw_seed);
                    break;
                default:
                    v = sample_F_hat_psm(mdp, policy, method.c, d, z, z2, draw_seed);
                    break;
            }
            const double delta = v - mean;
            mean += delta / static_cast<double>(i + 1);
            m2 += delta * (v - mean);
        }

        EstimatorReport& r = reports[k];
        r.method = method_name;
        r.mode = mode_name;
        r.z = z;
        r.z_prime = z2;
        r.n = n_samples;
        r.mean = mean;
        r.std_error = n_samples > 1
                          ? std::sqrt(m2 / static_cast<double>(n_samples - 1) /
                                      static_cast<double>(n_samples))
                          : 0.0;
        r.exact_reference = exact.at(z, z2);
        r.bias = r.mean - r.exact_reference;
        r.seed = pair_seed;
    });
    return reports;
}

std::string reports_to_csv(const std::vector<EstimatorReport>& reports) {
    std::string out = "method,mode,z,z_prime,n,mean,stderr,exact,bias,seed\n";
    for (const EstimatorReport& r : reports) {
        out += r.method + ',' + r.mode + ',';
        out += std::to_string(r.z) + ',' + std::to_string(r.z_prime) + ',';
        out += std::to_string(r.n) + ',';
        out += format_double(r.mean) + ',' + format_double(r.std_error) + ',';
        out += format_double(r.exact_reference) + ',' + format_double(r.bias) + ',';
        out += std::to_string(r.seed) + '\n';
    }
    return out;
}

std::string reports_to_json(const std::vector<EstimatorReport>& reports) {
    std::string out = "[\n";
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const EstimatorReport& r = reports[k];
        out += "  {\"method\": \"" + r.method + "\", \"mode\": \"" + r.mode + "\", ";
        out += "\"z\": " + std::to_string(r.z) + ", \"z_prime\": " + std::to_string(r.z_prime) +
               ", \"n\": " + std::to_string(r.n) + ", ";
        out += "\"mean\": " + format_double(r.mean) + ", \"stderr\": " +
               format_double(r.std_error) + ", ";
        out += "\"exact\": " + format_double(r.exact_reference) + ", \"bias\": " +
               format_double(r.bias) + ", ";
        out += "\"seed\": " + std::to_string(r.seed) + "}";
        out += (k + 1 < reports.size()) ? ",\n" : "\n";
    }
    out += "]\n";
    return out;
}

}  // namespace bisimlab
