#include "bisimlab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "bisimlab/coupling.hpp"
#include "bisimlab/estimators.hpp"
#include "bisimlab/gaussian.hpp"
#include "bisimlab/io.hpp"
#include "bisimlab/learner.hpp"
#include "bisimlab/mdp.hpp"
#include "bisimlab/operators.hpp"
#include "bisimlab/parallel.hpp"
#include "bisimlab/rng.hpp"
#include "bisimlab/similarity.hpp"
#include "bisimlab/transport.hpp"

namespace bisimlab {
namespace {

constexpr OperatorTag kSolvedTags[] = {OperatorTag::Pi, OperatorTag::Eps, OperatorTag::EpsBar};

StateMetric random_metric(std::size_t n, double lo, double hi, std::uint64_t seed) {
    SplitMix64 gen(seed);
    StateMetric m = StateMetric::zero(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, gen.uniform(lo, hi));
    return m;
}

/// Two absorbing states with rewards 1 and 0: every variant's fixed point
/// puts 1/(1-c) on the off-diagonal entry, which is 10 at c = 0.9.
FiniteMdp two_state_self_loop_mdp() {
    FiniteMdp mdp(2, 1);
    mdp.transition(0, 0, 0) = 1.0;
    mdp.transition(1, 0, 1) = 1.0;
    mdp.reward(0, 0) = 1.0;
    mdp.reward(1, 0) = 0.0;
    return mdp;
}

DiscreteDistribution random_weights(std::size_t n, SplitMix64& gen) {
    DiscreteDistribution d;
    d.weights.resize(n);
    double total = 0.0;
    for (double& w : d.weights) {
        w = gen.uniform01();
        total += w;
    }
    if (n > 1 && gen.uniform01() < 0.25) {
        const std::size_t drop = static_cast<std::size_t>(gen.next_u64() % n);
        total -= d.weights[drop];
        d.weights[drop] = 0.0;
    }
    for (double& w : d.weights) w /= total;
    return d;
}

OperatorKind make_kind(OperatorTag tag, double c, const SimilarityG& g) {
    OperatorKind kind;
    kind.tag = tag;
    kind.c = c;
    kind.similarity = g;
    return kind;
}

CheckResult check_ot_oracle(const VerifyOptions& o) {
    CheckResult r;
    const std::uint64_t root = derive_stream(o.seed, "ot_oracle");
    std::vector<double> diff(o.ot_instances, 0.0);
    parallel_for(o.ot_instances, o.workers, [&](std::size_t k) {
        SplitMix64 gen(derive_stream(root, k));
        const std::size_t m = 1 + static_cast<std::size_t>(gen.next_u64() % 4);
        const std::size_t n = 1 + static_cast<std::size_t>(gen.next_u64() % 4);
        const DiscreteDistribution p = random_weights(m, gen);
        const DiscreteDistribution q = random_weights(n, gen);
        // supports are points in the plane, so costs form a true metric
        std::vector<double> px(m), py(m), qx(n), qy(n);
        for (std::size_t i = 0; i < m; ++i) {
            px[i] = gen.uniform(-1.0, 1.0);
            py[i] = gen.uniform(-1.0, 1.0);
        }
        for (std::size_t j = 0; j < n; ++j) {
            qx[j] = gen.uniform(-1.0, 1.0);
            qy[j] = gen.uniform(-1.0, 1.0);
        }
        Matrix cost(m, n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                cost(i, j) = std::hypot(px[i] - qx[j], py[i] - qy[j]);
        const double fast = o.w1_override ? o.w1_override(p, q, cost) : w1_discrete(p, q, cost);
        const double slow = w1_discrete_bruteforce(p, q, cost);
        diff[k] = std::abs(fast - slow);
    });
    double worst = 0.0;
    for (double d : diff) worst = std::max(worst, d);
    r.passed = worst <= 1e-9;
    r.detail = "max |solver - enumeration oracle| = " + format_double(worst) + " over " +
               std::to_string(o.ot_instances) + " instances with support <= 4";
    return r;
}

CheckResult check_inflation(const VerifyOptions& o) {
    CheckResult r;
    DiscreteDistribution p;
    p.weights = {0.5, 0.5};
    Matrix cost(2, 2, 0.0);
    cost(0, 1) = 1.0;
    cost(1, 0) = 1.0;
    const double w1 = w1_discrete(p, p, cost);

    SplitMix64 gen(derive_stream(o.seed, "inflation"));
    const std::size_t n = o.inflation_samples;
    double mean = 0.0, m2 = 0.0, worst_entangled = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = sample_index(p.weights.data(), 2, gen.uniform01());
        const std::size_t b = sample_index(p.weights.data(), 2, gen.uniform01());
        const double v = cost(a, b);
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
        const double shared = gen.uniform01();
        worst_entangled = std::max(
            worst_entangled, cost(sample_index(p.weights.data(), 2, shared),
                                  sample_index(p.weights.data(), 2, shared)));
    }
    const double se = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    r.passed = w1 <= 1e-12 && std::abs(mean - 0.5) <= 3.0 * se && worst_entangled == 0.0;
    r.detail = "identical mixtures: exact W1 = " + format_double(w1) +
               ", independent-draw mean = " + format_double(mean) + " (target 0.5, std error " +
               format_double(se) + "), entangled draw max = " + format_double(worst_entangled);
    return r;
}

CheckResult check_self_similarity(const VerifyOptions& o) {
    CheckResult r;
    const std::uint64_t root = derive_stream(o.seed, "self_similarity");

    std::vector<double> worst_per(o.self_similarity_mdps, 0.0);
    parallel_for(o.self_similarity_mdps, o.workers, [&](std::size_t k) {
        const std::uint64_t mk = derive_stream(root, k);
        const FiniteMdp mdp = random_mdp(5, 3, 0.0, 1.0, derive_stream(mk, "mdp"));
        const TabularPolicy policy = random_policy(5, 3, derive_stream(mk, "policy"));
        const StateMetric d = random_metric(5, 0.1, 2.0, derive_stream(mk, "metric"));
        const SimilarityG g = SimilarityG::reward_diff(mdp);
        const std::uint64_t draws = derive_stream(mk, "draws");
        double worst = 0.0;
        for (std::size_t i = 0; i < o.self_similarity_draws; ++i) {
            const std::size_t z = i % 5;
            worst = std::max(
                worst, std::abs(sample_F_hat_eps(mdp, policy, g, 0.9, d, z, z,
                                                 derive_stream(draws, i))));
        }
        worst_per[k] = worst;
    });
    double worst_diag = 0.0;
    for (double w : worst_per) worst_diag = std::max(worst_diag, w);

    FiniteMdp one(1, 2);
    one.transition(0, 0, 0) = 1.0;
    one.transition(0, 1, 0) = 1.0;
    one.reward(0, 0) = 0.0;
    one.reward(0, 1) = 1.0;
    EstimatorMethod dbc;
    dbc.tag = OperatorTag::DbcStyle;
    dbc.mode = SamplingMode::Independent;
    dbc.c = 0.0;
    const std::vector<EstimatorReport> dbc_rep =
        bias_audit(dbc, one, TabularPolicy::uniform(1, 2), StateMetric::zero(1), {{0, 0}},
                   o.dbc_diagonal_samples, derive_stream(root, "dbc"), o.workers);
    const double dbc_mean = dbc_rep[0].mean;

    FiniteMdp stoc(2, 1);
    for (std::size_t z = 0; z < 2; ++z) {
        stoc.transition(z, 0, 0) = 0.5;
        stoc.transition(z, 0, 1) = 0.5;
        stoc.reward(z, 0) = 0.0;
    }
    StateMetric d2 = StateMetric::zero(2);
    d2.set(0, 1, 1.0);
    EstimatorMethod psm;
    psm.tag = OperatorTag::PsmStyle;
    psm.mode = SamplingMode::Independent;
    psm.c = 0.9;
    const std::vector<EstimatorReport> psm_rep =
        bias_audit(psm, stoc, TabularPolicy::constant(2, 1, 0), d2, {{0, 0}},
                   o.psm_diagonal_samples, derive_stream(root, "psm"), o.workers);
    const double psm_z = psm_rep[0].std_error > 0.0 ? psm_rep[0].mean / psm_rep[0].std_error : 0.0;
    const double z99 = 2.3263478740408408;  // one-sided 1% normal quantile

    r.passed = worst_diag == 0.0 && std::abs(dbc_mean - 0.5) <= 0.01 && psm_z > z99;
    r.detail = "entangled diagonal draws max |value| = " + format_double(worst_diag) + " over " +
               std::to_string(o.self_similarity_mdps) + " mdps x " +
               std::to_string(o.self_similarity_draws) + " draws; dbc diagonal mean = " +
               format_double(dbc_mean) + " (target 0.5 +- 0.01); psm diagonal z = " +
               format_double(psm_z) + " (needs > 2.33)";
    return r;
}

CheckResult check_fixed_points(const VerifyOptions& o) {
    CheckResult r;
    const FiniteMdp mdp = two_state_self_loop_mdp();
    const TabularPolicy pol = TabularPolicy::constant(2, 1, 0);
    const SimilarityG g = SimilarityG::reward_diff(mdp);
    double worst_closed = 0.0;
    bool all_converged = true;
    for (OperatorTag tag : kSolvedTags) {
        const FixedPointResult fp = fixed_point(make_kind(tag, 0.9, g), mdp, pol, 1e-10, 20000);
        all_converged = all_converged && fp.converged;
        worst_closed = std::max(worst_closed, std::abs(fp.metric.at(0, 1) - 10.0));
    }

    const std::uint64_t root = derive_stream(o.seed, "contraction");
    std::vector<double> viol(o.contraction_mdps, 0.0);
    std::vector<char> conv(o.contraction_mdps, 1);
    parallel_for(o.contraction_mdps, o.workers, [&](std::size_t k) {
        const std::uint64_t mk = derive_stream(root, k);
        const std::size_t n = 3 + k % 4;
        const std::size_t na = 1 + k % 3;
        const FiniteMdp m = random_mdp(n, na, 0.0, 1.0, derive_stream(mk, "mdp"));
        const TabularPolicy p = random_policy(n, na, derive_stream(mk, "policy"));
        const SimilarityG gk = SimilarityG::reward_diff(m);
        for (OperatorTag tag : kSolvedTags) {
            const FixedPointResult fp = fixed_point(make_kind(tag, 0.9, gk), m, p, 1e-9, 2000);
            conv[k] = conv[k] && fp.converged;
            for (std::size_t t = 1; t < fp.residuals.size(); ++t)
                viol[k] = std::max(viol[k], fp.residuals[t] - 0.9 * fp.residuals[t - 1]);
        }
    });
    double worst_viol = 0.0;
    bool rand_converged = true;
    for (std::size_t k = 0; k < o.contraction_mdps; ++k) {
        worst_viol = std::max(worst_viol, viol[k]);
        rand_converged = rand_converged && conv[k];
    }

    r.passed = all_converged && rand_converged && worst_closed <= 1e-8 && worst_viol <= 1e-12;
    r.detail = "two-state closed form: max |d(0,1) - 10| = " + format_double(worst_closed) +
               " across pi/entangled/entangled-upper at tol 1e-10; contraction slack max = " +
               format_double(worst_viol) + " over " + std::to_string(o.contraction_mdps) +
               " random mdps (limit 1e-12)";
    return r;
}

CheckResult check_ordering(const VerifyOptions& o) {
    CheckResult r;
    const std::uint64_t root = derive_stream(o.seed, "ordering");
    std::vector<double> slack(o.ordering_mdps, 0.0);
    std::vector<char> conv(o.ordering_mdps, 1);
    parallel_for(o.ordering_mdps, o.workers, [&](std::size_t k) {
        const std::uint64_t mk = derive_stream(root, k);
        const std::size_t n = 2 + k % 5;
        const std::size_t na = 1 + k % 3;
        const FiniteMdp m = random_mdp(n, na, 0.0, 1.0, derive_stream(mk, "mdp"));
        const TabularPolicy p = random_policy(n, na, derive_stream(mk, "policy"));
        const SimilarityG g = SimilarityG::reward_diff(m);
        const FixedPointResult fp_pi = fixed_point(make_kind(OperatorTag::Pi, 0.9, g), m, p, 1e-9, 2000);
        const FixedPointResult fp_eps = fixed_point(make_kind(OperatorTag::Eps, 0.9, g), m, p, 1e-9, 2000);
        const FixedPointResult fp_bar = fixed_point(make_kind(OperatorTag::EpsBar, 0.9, g), m, p, 1e-9, 2000);
        conv[k] = fp_pi.converged && fp_eps.converged && fp_bar.converged;
        double s = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                s = std::min(s, fp_eps.metric.at(i, j) - fp_pi.metric.at(i, j));
                s = std::min(s, fp_bar.metric.at(i, j) - fp_eps.metric.at(i, j));
            }
        slack[k] = s;
    });
    double min_slack = std::numeric_limits<double>::infinity();
    bool all_conv = true;
    for (std::size_t k = 0; k < o.ordering_mdps; ++k) {
        min_slack = std::min(min_slack, slack[k]);
        all_conv = all_conv && conv[k];
    }
    r.passed = all_conv && min_slack >= -1e-8;
    r.detail = "pointwise ordering pi <= entangled <= entangled-upper: min slack = " +
               format_double(min_slack) + " over " + std::to_string(o.ordering_mdps) +
               " random mdps (needs >= -1e-8)";
    return r;
}

CheckResult check_duplicated(const VerifyOptions& o) {
    CheckResult r;
    const std::uint64_t root = derive_stream(o.seed, "duplicated");
    std::vector<double> worst(o.duplicated_mdps, 0.0);
    std::vector<char> conv(o.duplicated_mdps, 1);
    parallel_for(o.duplicated_mdps, o.workers, [&](std::size_t k) {
        const std::uint64_t mk = derive_stream(root, k);
        const std::size_t n = 2 + k % 3;
        const std::size_t na = 1 + k % 3;
        const FiniteMdp base = random_mdp(n, na, 0.0, 1.0, derive_stream(mk, "mdp"));
        const TabularPolicy base_pol = random_policy(n, na, derive_stream(mk, "policy"));
        std::map<std::size_t, std::size_t> copies;
        copies[0] = 2;
        if (k % 2 == 1) copies[1] = 2;
        const DuplicatedMdp dup = duplicate_states(base, copies);
        const TabularPolicy pol = lift_policy(base_pol, dup.origin);
        const SimilarityG g = SimilarityG::reward_diff(dup.mdp);
        for (OperatorTag tag : kSolvedTags) {
            const FixedPointResult fp = fixed_point(make_kind(tag, 0.9, g), dup.mdp, pol, 1e-9, 2000);
            conv[k] = conv[k] && fp.converged;
            for (const auto& pr : dup.pairs.pairs)
                worst[k] = std::max(worst[k], fp.metric.at(pr.first, pr.second));
        }
    });
    double worst_all = 0.0;
    bool all_conv = true;
    for (std::size_t k = 0; k < o.duplicated_mdps; ++k) {
        worst_all = std::max(worst_all, worst[k]);
        all_conv = all_conv && conv[k];
    }
    r.passed = all_conv && worst_all <= 1e-8;
    r.detail = "max fixed-point distance on ground-truth equivalent pairs = " +
               format_double(worst_all) + " over " + std::to_string(o.duplicated_mdps) +
               " duplicated mdps x 3 operators (limit 1e-8)";
    return r;
}

CheckResult check_tightness(const VerifyOptions& o) {
    CheckResult r;
    const std::uint64_t root = derive_stream(o.seed, "tightness");
    const std::size_t n_testbeds = 5;
    std::vector<TightnessReport> reps(n_testbeds);
    parallel_for(n_testbeds, o.workers, [&](std::size_t b) {
        const std::size_t count =
            o.tightness_pairs / n_testbeds + (b < o.tightness_pairs % n_testbeds ? 1 : 0);
        const std::uint64_t tb = derive_stream(root, b);
        // state- and action-dependent stddevs, so the two marginals differ in
        // both mean and spread and the Monte Carlo side has real variance
        GaussianMdpOptions gopt;
        gopt.stddev_affine_scale = 0.05;
        const GaussianLinearMdp mdp = random_gaussian_mdp(3, 2, derive_stream(tb, "mdp"), gopt);
        const GaussianPolicy pol = random_gaussian_policy(3, 2, derive_stream(tb, "policy"));
        SeparableDistanceParams d = SeparableDistanceParams::zeros(3, 2);
        SplitMix64 wgen(derive_stream(tb, "weights"));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 2; ++j) d.weights(i, j) = wgen.uniform(0.1, 1.0);
        SplitMix64 pgen(derive_stream(tb, "pairs"));
        std::vector<std::pair<Vec, Vec>> prs(count, {Vec(3), Vec(3)});
        for (auto& pr : prs)
            for (std::size_t i = 0; i < 3; ++i) {
                pr.first[i] = pgen.standard_normal();
                pr.second[i] = pgen.standard_normal();
            }
        reps[b] = verify_tightness(mdp, pol, d, prs, o.tightness_samples, o.tightness_quad_cells,
                                   derive_stream(tb, "mc"));
    });
    double max_diff = 0.0, min_slack = std::numeric_limits<double>::infinity();
    bool all_ok = true;
    std::size_t rows = 0;
    for (const TightnessReport& rep : reps)
        for (const TightnessRow& row : rep.rows) {
            ++rows;
            max_diff = std::max(max_diff, std::abs(row.difference));
            min_slack = std::min(min_slack, row.tolerance - std::abs(row.difference));
            all_ok = all_ok && row.passed;
        }
    r.passed = all_ok && rows == o.tightness_pairs;
    r.detail = "separable distances, powers {1,2}: max |entangled mc - quadrature| = " +
               format_double(max_diff) + ", min tolerance slack = " + format_double(min_slack) +
               " over " + std::to_string(rows) + " coordinate-independent Gaussian pairs";
    return r;
}

CheckResult check_unbiasedness(const VerifyOptions& o) {
    CheckResult r;
    const std::uint64_t root = derive_stream(o.seed, "unbiased");
    std::vector<char> ok(o.unbiasedness_cases, 0);
    parallel_for(o.unbiasedness_cases, o.workers, [&](std::size_t k) {
        const std::uint64_t mk = derive_stream(root, k);
        const std::size_t n = 3 + k % 4;
        const std::size_t na = 1 + k % 2;
        const FiniteMdp m = random_mdp(n, na, 0.0, 1.0, derive_stream(mk, "mdp"));
        const TabularPolicy p = random_policy(n, na, derive_stream(mk, "policy"));
        const StateMetric d = random_metric(n, 0.1, 2.0, derive_stream(mk, "metric"));
        SplitMix64 pick(derive_stream(mk, "pair"));
        const std::size_t z = static_cast<std::size_t>(pick.next_u64() % n);
        const std::size_t z2 = (z + 1 + static_cast<std::size_t>(pick.next_u64() % (n - 1))) % n;
        EstimatorMethod method;
        method.tag = OperatorTag::Eps;
        method.mode = SamplingMode::Entangled;
        method.c = 0.9;
        method.similarity = SimilarityG::reward_diff(m);
        const std::vector<EstimatorReport> rep = bias_audit(
            method, m, p, d, {{z, z2}}, o.unbiasedness_samples, derive_stream(mk, "audit"), 1);
        ok[k] = std::abs(rep[0].bias) <= 3.0 * rep[0].std_error ? 1 : 0;
    });
    std::size_t covered = 0;
    for (char c : ok) covered += static_cast<std::size_t>(c);
    const double coverage = static_cast<double>(covered) / static_cast<double>(o.unbiasedness_cases);

    const std::uint64_t rate_root = derive_stream(o.seed, "rate");
    const FiniteMdp m = random_mdp(5, 2, 0.0, 1.0, derive_stream(rate_root, "mdp"));
    const TabularPolicy p = random_policy(5, 2, derive_stream(rate_root, "policy"));
    const StateMetric d = random_metric(5, 0.1, 2.0, derive_stream(rate_root, "metric"));
    EstimatorMethod method;
    method.tag = OperatorTag::Eps;
    method.mode = SamplingMode::Entangled;
    method.c = 0.9;
    method.similarity = SimilarityG::reward_diff(m);
    const std::size_t ns[] = {100, 1000, 10000, 100000};
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const std::vector<EstimatorReport> rep =
            bias_audit(method, m, p, d, {{0, 1}}, ns[i], derive_stream(rate_root, i), o.workers);
        const double x = std::log(static_cast<double>(ns[i]));
        const double y = std::log(rep[0].std_error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (4.0 * sxy - sx * sy) / (4.0 * sxx - sx * sx);

    r.passed = coverage >= 0.95 && slope >= -0.6 && slope <= -0.4;
    r.detail = "entangled estimator coverage: " + std::to_string(covered) + "/" +
               std::to_string(o.unbiasedness_cases) + " pairs within 3 std errors at " +
               std::to_string(o.unbiasedness_samples) + " samples; std-error log-log slope = " +
               format_double(slope) + " (target -0.5 +- 0.1)";
    return r;
}

CheckResult check_learner(const VerifyOptions& o) {
    CheckResult r;
    const std::uint64_t root = derive_stream(o.seed, "learner");

    const FiniteMdp mdp = random_mdp(4, 2, 0.0, 1.0, derive_stream(root, "mdp"));
    const TabularPolicy policy = random_policy(4, 2, derive_stream(root, "policy"));
    const SimilarityG g = SimilarityG::reward_diff(mdp);
    const TabularTrainResult tr =
        train_tabular(mdp, policy, g, 0.5, o.learner_steps, o.learner_step_size, o.learner_batch,
                      derive_stream(root, "train"));
    const double sup_err =
        tr.history.empty() ? std::numeric_limits<double>::infinity() : tr.history.back().sup_error;
    const bool a_ok = !tr.diverged && sup_err <= 5e-3;

    const FiniteMdp mdp2 = two_state_self_loop_mdp();
    const SimilarityG g2 = SimilarityG::reward_diff(mdp2);
    const TabularTrainResult tr2 =
        train_tabular(mdp2, TabularPolicy::constant(2, 1, 0), g2, 0.9, 5000, 2e-3, 8,
                      derive_stream(root, "closed"));
    const double d01 = tr2.params.distance(0, 1);
    const bool b_ok = !tr2.diverged && std::abs(d01 - 10.0) <= 0.05;

    const FiniteMdp mdp3 = random_mdp(5, 2, 0.0, 1.0, derive_stream(root, "grad_mdp"));
    const TabularPolicy pol3 = random_policy(5, 2, derive_stream(root, "grad_policy"));
    const SimilarityG g3 = SimilarityG::reward_diff(mdp3);
    TabularDistanceParams params = TabularDistanceParams::constant(5, 0.0);
    SplitMix64 rg(derive_stream(root, "grad_params"));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) params.raw(i, j) = rg.uniform(-1.2, 1.2);
    std::vector<std::pair<std::size_t, std::size_t>> batch;
    std::vector<std::uint64_t> seeds;
    const std::uint64_t noise = derive_stream(root, "grad_noise");
    for (std::size_t k = 0; k < 16; ++k) {
        batch.emplace_back(k % 5, (k * 3 + 1) % 5);
        seeds.push_back(derive_stream(noise, k));
    }
    const BatchLoss bl = bisim_loss_batch(params, mdp3, pol3, g3, 0.7, batch, seeds);
    double max_rel = 0.0;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) {
            const double h = 1e-5 * std::max(1.0, std::abs(params.raw(i, j)));
            TabularDistanceParams plus = params, minus = params;
            plus.raw(i, j) += h;
            minus.raw(i, j) -= h;
            const double fd = (loss_given_targets(plus, batch, bl.targets) -
                               loss_given_targets(minus, batch, bl.targets)) /
                              (2.0 * h);
            const double an = bl.grad(i, j);
            const double denom = std::max({1e-8, std::abs(an), std::abs(fd)});
            max_rel = std::max(max_rel, std::abs(an - fd) / denom);
        }
    const bool c_ok = max_rel <= 1e-4;

    r.passed = a_ok && b_ok && c_ok;
    r.detail = "sup error vs exact fixed point = " + format_double(sup_err) +
               " (limit 5e-3); two-state learned distance = " + format_double(d01) +
               " (target 10 +- 0.05); max gradient relative error vs central differences = " +
               format_double(max_rel) + " (limit 1e-4)";
    return r;
}

CheckResult check_axioms(const VerifyOptions& o) {
    CheckResult r;
    const std::uint64_t root = derive_stream(o.seed, "axioms");
    std::vector<double> worst(o.axiom_instances, 0.0);
    std::vector<char> conv(o.axiom_instances, 1);
    parallel_for(o.axiom_instances, o.workers, [&](std::size_t k) {
        const std::uint64_t mk = derive_stream(root, k);
        const std::size_t n = 2 + k % 7;
        const std::size_t na = 1 + k % 3;
        const FiniteMdp m = random_mdp(n, na, 0.0, 1.0, derive_stream(mk, "mdp"));
        const TabularPolicy p = random_policy(n, na, derive_stream(mk, "policy"));
        const SimilarityG g = SimilarityG::reward_diff(m);
        for (OperatorTag tag : kSolvedTags) {
            const FixedPointResult fp = fixed_point(make_kind(tag, 0.9, g), m, p, 1e-9, 3000);
            conv[k] = conv[k] && fp.converged;
            const StateMetric& met = fp.metric;
            double w = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                w = std::max(w, std::abs(met.at(i, i)));
                for (std::size_t j = 0; j < n; ++j) {
                    w = std::max(w, std::abs(met.at(i, j) - met.at(j, i)));
                    w = std::max(w, -met.at(i, j));
                }
            }
            w = std::max(w, met.worst_triangle_violation());
            worst[k] = std::max(worst[k], w);
        }
    });
    double worst_metric = 0.0;
    bool all_conv = true;
    for (std::size_t k = 0; k < o.axiom_instances; ++k) {
        worst_metric = std::max(worst_metric, worst[k]);
        all_conv = all_conv && conv[k];
    }

    double worst_sim = 0.0;
    for (std::size_t k = 0; k < 10; ++k) {
        const std::uint64_t mk = derive_stream(root, std::string("sim") + std::to_string(k));
        const FiniteMdp m = random_mdp(4, 3, 0.0, 1.0, derive_stream(mk, "mdp"));
        const TabularPolicy p = random_policy(4, 3, derive_stream(mk, "policy"));
        for (const SimilarityG& g :
             {SimilarityG::reward_diff(m), SimilarityG::policy_mean_diff(m, p)}) {
            const SimilarityAxiomReport rep = check_similarity_axioms(g);
            worst_sim = std::max({worst_sim, rep.worst_negative, rep.worst_self,
                                  rep.worst_asymmetry, rep.worst_triangle});
        }
    }

    r.passed = all_conv && worst_metric <= 1e-8 && worst_sim <= 1e-12;
    r.detail = "solved fixed points: worst pseudometric violation = " + format_double(worst_metric) +
               " over " + std::to_string(o.axiom_instances) +
               " instances x 3 operators (limit 1e-8); state-action similarity axioms: worst "
               "violation = " +
               format_double(worst_sim) + " by exhaustive enumeration on 4-state 3-action domains";
    return r;
}

}  // namespace

std::string VerifyReport::to_text() const {
    std::string out = "bisimlab verification report\n";
    out += "seed " + std::to_string(seed) + "\n";
    std::size_t n_passed = 0;
    for (const CheckResult& c : checks) {
        out += std::string(c.passed ? "[PASS] " : "[FAIL] ") + c.name + ": " + c.detail + "\n";
        if (c.passed) ++n_passed;
    }
    out += "result " + std::string(all_passed() ? "PASS" : "FAIL") + " (" +
           std::to_string(n_passed) + "/" + std::to_string(checks.size()) + " checks)\n";
    return out;
}

VerifyReport run_verification(const VerifyOptions& options) {
    require(options.workers >= 1, "run_verification: workers must be >= 1");
    using Check = CheckResult (*)(const VerifyOptions&);
    const std::pair<const char*, Check> table[] = {
        {"ot_oracle_equivalence", check_ot_oracle},
        {"independent_sampling_inflation", check_inflation},
        {"estimator_self_similarity", check_self_similarity},
        {"fixed_point_convergence", check_fixed_points},
        {"operator_ordering", check_ordering},
        {"duplicated_state_zero_distance", check_duplicated},
        {"separable_tightness", check_tightness},
        {"estimator_unbiasedness", check_unbiasedness},
        {"learner_convergence", check_learner},
        {"metric_and_similarity_axioms", check_axioms},
    };
    VerifyReport report;
    report.seed = options.seed;
    for (const auto& [name, fn] : table) {
        const auto start = std::chrono::steady_clock::now();
        CheckResult result;
        try {
            result = fn(options);
        } catch (const std::exception& e) {
            result.passed = false;
            result.detail = std::string("exception: ") + e.what();
        }
        result.name = name;
        result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.checks.push_back(std::move(result));
    }
    return report;
}

}  // namespace bisimlab
