// bisim: command line front end for the bisimlab core library.
//
// Subcommands: gen | solve | estimate | learn | verify. Every subcommand
// reads an optional flat key-value config file (--config), applies flag
// overrides on top, and writes its primary outputs into --out. Primary
// outputs are deterministic functions of (config, seed); anything timed or
// incidental goes to stderr so reruns stay byte-identical.
//
// Exit codes: 0 success, 1 argument or config error, 2 convergence failure,
// 3 verification failure, 4 I/O error.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bisimlab/estimators.hpp"
#include "bisimlab/gaussian.hpp"
#include "bisimlab/io.hpp"
#include "bisimlab/learner.hpp"
#include "bisimlab/mdp.hpp"
#include "bisimlab/metric.hpp"
#include "bisimlab/operators.hpp"
#include "bisimlab/rng.hpp"
#include "bisimlab/similarity.hpp"
#include "bisimlab/types.hpp"
#include "bisimlab/verify.hpp"

namespace {

using namespace bisimlab;
using nlohmann::ordered_json;

int default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

/**
 * Flat "key value" document. One pair per line, '#' starts a comment, the
 * value is the rest of the line after the key. Lookups mark keys as
 * consumed; reject_unknown() then flags anything a subcommand never asked
 * about, so typos in config files fail loudly instead of being ignored.
 */
class KeyValueConfig {
  public:
    static KeyValueConfig from_file(const std::string& path) {
        KeyValueConfig cfg;
        const std::string text = read_text_file(path);
        std::size_t line_no = 0, pos = 0;
        while (pos < text.size()) {
            std::size_t nl = text.find('\n', pos);
            if (nl == std::string::npos) nl = text.size();
            std::string line = text.substr(pos, nl - pos);
            pos = nl + 1;
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto split = line.find_first_of(" \t");
            if (split == std::string::npos)
                throw ArgumentError(path + ":" + std::to_string(line_no) +
                                    ": config line has a key but no value: '" + line + "'");
            const std::string key = line.substr(0, split);
            const std::string value = trim(line.substr(split));
            if (cfg.values_.count(key))
                throw ArgumentError(path + ":" + std::to_string(line_no) +
                                    ": duplicate config key '" + key + "'");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    void override_value(const std::string& key, const std::string& value) {
        values_[key] = value;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        touched_.insert(key);
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) const {
        touched_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end())
            throw ArgumentError("missing required config key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        const auto it = lookup(key);
        if (it == values_.end()) return fallback;
        return parse_double(key, it->second);
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        const auto it = lookup(key);
        if (it == values_.end()) return fallback;
        return parse_u64(key, it->second);
    }

    std::size_t get_size(const std::string& key, std::size_t fallback) const {
        return static_cast<std::size_t>(get_u64(key, fallback));
    }

    std::size_t require_size(const std::string& key) const {
        return static_cast<std::size_t>(parse_u64(key, require_string(key)));
    }

    int get_int(const std::string& key, int fallback) const {
        const auto v = get_u64(key, static_cast<std::uint64_t>(fallback));
        if (v > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
            throw ArgumentError("config key '" + key + "': value too large");
        return static_cast<int>(v);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        const auto it = lookup(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ArgumentError("config key '" + key + "': expected true or false, got '" +
                            it->second + "'");
    }

    void reject_unknown() const {
        std::vector<std::string> unknown;
        for (const auto& [key, value] : values_)
            if (!touched_.count(key)) unknown.push_back(key);
        if (unknown.empty()) return;
        std::string msg = "unknown config key";
        if (unknown.size() > 1) msg += 's';
        for (const auto& k : unknown) msg += " '" + k + "'";
        throw ArgumentError(msg);
    }

  private:
    std::map<std::string, std::string>::const_iterator lookup(const std::string& key) const {
        touched_.insert(key);
        return values_.find(key);
    }

    static double parse_double(const std::string& key, const std::string& text) {
        char* end = nullptr;
        const double v = std::strtod(text.c_str(), &end);
        if (end != text.c_str() + text.size() || text.empty() || !std::isfinite(v))
            throw ArgumentError("config key '" + key + "': expected a finite number, got '" +
                                text + "'");
        return v;
    }

    static std::uint64_t parse_u64(const std::string& key, const std::string& text) {
        char* end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
        if (end != text.c_str() + text.size() || text.empty() || errno == ERANGE ||
            text[0] == '-')
            throw ArgumentError("config key '" + key +
                                "': expected a nonnegative integer, got '" + text + "'");
        return static_cast<std::uint64_t>(v);
    }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> touched_;
};

/// Flags shared by every subcommand; unset optionals leave the config file
/// value (or the documented default) in force.
struct CommonFlags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<double> tol;
    std::optional<std::uint64_t> samples;
};

void add_common_flags(CLI::App* sub, CommonFlags& flags) {
    sub->add_option("--config", flags.config, "flat key-value config file");
    sub->add_option("--out", flags.out, "output directory (default: current directory)");
    sub->add_option("--seed", flags.seed, "root seed, overrides the config file");
    sub->add_option("--workers", flags.workers, "worker threads (default: hardware threads)");
    sub->add_option("--tol", flags.tol, "tolerance, where the subcommand uses one");
    sub->add_option("--samples", flags.samples, "sample count, where the subcommand uses one");
}

KeyValueConfig load_config(const CommonFlags& flags) {
    KeyValueConfig cfg =
        flags.config.empty() ? KeyValueConfig{} : KeyValueConfig::from_file(flags.config);
    if (flags.out.size()) cfg.override_value("out", flags.out);
    if (flags.seed) cfg.override_value("seed", std::to_string(*flags.seed));
    if (flags.workers) cfg.override_value("workers", std::to_string(*flags.workers));
    if (flags.tol) cfg.override_value("tol", format_double(*flags.tol));
    if (flags.samples) cfg.override_value("samples", std::to_string(*flags.samples));
    return cfg;
}

std::filesystem::path resolve_out_dir(const KeyValueConfig& cfg) {
    const std::filesystem::path dir = cfg.get_string("out", ".");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir;
}

void write_output(const std::filesystem::path& dir, const std::string& name,
                  const std::string& content) {
    write_text_file((dir / name).string(), content);
}

/**
 * MDP source for solve/estimate/learn. The 'mdp' key is either a file path
 * or the word 'random', in which case 'states'/'actions' (and optionally
 * 'reward_lo'/'reward_hi'/'discount') describe the instance inline and the
 * draw comes from the root seed's "mdp" stream.
 */
FiniteMdp load_mdp(const KeyValueConfig& cfg, std::uint64_t seed) {
    const std::string spec = cfg.require_string("mdp");
    if (spec == "random") {
        FiniteMdp mdp = random_mdp(cfg.require_size("states"), cfg.require_size("actions"),
                                   cfg.get_double("reward_lo", 0.0),
                                   cfg.get_double("reward_hi", 1.0), derive_stream(seed, "mdp"));
        mdp.set_discount(cfg.get_double("discount", mdp.discount()));
        return mdp;
    }
    return parse_mdp(read_text_file(spec));
}

/// The 'policy' key is a file path or 'uniform' or 'random' (root seed's
/// "policy" stream). Defaults to uniform.
TabularPolicy load_policy(const KeyValueConfig& cfg, const FiniteMdp& mdp, std::uint64_t seed) {
    const std::string spec = cfg.get_string("policy", "uniform");
    if (spec == "uniform") return TabularPolicy::uniform(mdp.n_states(), mdp.n_actions());
    if (spec == "random")
        return random_policy(mdp.n_states(), mdp.n_actions(), derive_stream(seed, "policy"));
    TabularPolicy policy = parse_policy(read_text_file(spec));
    if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions())
        throw ArgumentError("policy shape " + std::to_string(policy.n_states()) + "x" +
                            std::to_string(policy.n_actions()) + " does not match the MDP");
    return policy;
}

SimilarityG load_similarity(const KeyValueConfig& cfg, const FiniteMdp& mdp,
                            const TabularPolicy& policy) {
    const std::string name = cfg.get_string("similarity", "reward_diff");
    if (name == "reward_diff") return SimilarityG::reward_diff(mdp);
    if (name == "policy_mean_diff") return SimilarityG::policy_mean_diff(mdp, policy);
    throw ArgumentError("config key 'similarity': expected reward_diff or policy_mean_diff, got '" +
                        name + "'");
}

OperatorTag parse_operator_tag(const std::string& name) {
    if (name == "pi") return OperatorTag::Pi;
    if (name == "eps") return OperatorTag::Eps;
    if (name == "eps_bar") return OperatorTag::EpsBar;
    if (name == "dbc") return OperatorTag::DbcStyle;
    if (name == "psm") return OperatorTag::PsmStyle;
    throw ArgumentError("config key 'operator': expected pi, eps, eps_bar, dbc or psm, got '" +
                        name + "'");
}

// ---------------------------------------------------------------------------
// gen

std::map<std::size_t, std::size_t> parse_duplicate_directive(const std::string& text) {
    std::map<std::size_t, std::size_t> copies;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = trim(text.substr(pos, comma - pos));
        pos = comma + 1;
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ArgumentError("config key 'duplicate': expected state:count items, got '" +
                                item + "'");
        char* end = nullptr;
        const unsigned long long state = std::strtoull(item.c_str(), &end, 10);
        if (end != item.c_str() + colon)
            throw ArgumentError("config key 'duplicate': bad state index in '" + item + "'");
        const char* count_begin = item.c_str() + colon + 1;
        const unsigned long long count = std::strtoull(count_begin, &end, 10);
        if (end != item.c_str() + item.size() || count == 0)
            throw ArgumentError("config key 'duplicate': bad copy count in '" + item + "'");
        if (copies.count(state))
            throw ArgumentError("config key 'duplicate': state " + std::to_string(state) +
                                " listed twice");
        copies[static_cast<std::size_t>(state)] = static_cast<std::size_t>(count);
    }
    if (copies.empty()) throw ArgumentError("config key 'duplicate': empty directive");
    return copies;
}

int cmd_gen(const CommonFlags& flags) {
    const KeyValueConfig cfg = load_config(flags);
    const std::size_t n_states = cfg.require_size("states");
    const std::size_t n_actions = cfg.require_size("actions");
    const double reward_lo = cfg.get_double("reward_lo", 0.0);
    const double reward_hi = cfg.get_double("reward_hi", 1.0);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    const std::string policy_kind = cfg.get_string("policy", "random");
    const std::string duplicate = cfg.get_string("duplicate", "");
    const auto out_dir = resolve_out_dir(cfg);

    FiniteMdp mdp = random_mdp(n_states, n_actions, reward_lo, reward_hi,
                               derive_stream(seed, "mdp"));
    mdp.set_discount(cfg.get_double("discount", mdp.discount()));
    cfg.reject_unknown();

    TabularPolicy policy = [&] {
        if (policy_kind == "uniform") return TabularPolicy::uniform(n_states, n_actions);
        if (policy_kind == "random")
            return random_policy(n_states, n_actions, derive_stream(seed, "policy"));
        throw ArgumentError("config key 'policy': expected random or uniform, got '" +
                            policy_kind + "'");
    }();

    std::string summary = "gen: wrote mdp.txt (" + std::to_string(mdp.n_states()) +
                          " states, " + std::to_string(mdp.n_actions()) + " actions)";
    if (!duplicate.empty()) {
        const DuplicatedMdp dup = duplicate_states(mdp, parse_duplicate_directive(duplicate));
        const TabularPolicy lifted = lift_policy(policy, dup.origin);
        write_output(out_dir, "mdp.txt", format_mdp(dup.mdp));
        write_output(out_dir, "policy.txt", format_policy(lifted));
        write_output(out_dir, "pairs.txt", format_pairs(dup.pairs.pairs));
        summary = "gen: wrote mdp.txt (" + std::to_string(dup.mdp.n_states()) + " states, " +
                  std::to_string(dup.mdp.n_actions()) + " actions), policy.txt, pairs.txt (" +
                  std::to_string(dup.pairs.size()) + " bisimilar pairs)";
    } else {
        write_output(out_dir, "mdp.txt", format_mdp(mdp));
        write_output(out_dir, "policy.txt", format_policy(policy));
        summary += ", policy.txt";
    }
    std::cout << summary << " in " << out_dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// solve

int cmd_solve(const CommonFlags& flags) {
    const KeyValueConfig cfg = load_config(flags);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    const FiniteMdp mdp = load_mdp(cfg, seed);
    const TabularPolicy policy = load_policy(cfg, mdp, seed);

    OperatorKind kind;
    kind.tag = parse_operator_tag(cfg.get_string("operator", "pi"));
    kind.c = cfg.get_double("c", mdp.discount());
    kind.gaussian_proxy = cfg.get_bool("gaussian_proxy", false);
    if (kind.tag == OperatorTag::Eps || kind.tag == OperatorTag::EpsBar)
        kind.similarity = load_similarity(cfg, mdp, policy);

    const double tol = cfg.get_double("tol", 1e-9);
    const std::size_t max_iter = cfg.get_size("max_iter", 100000);
    const int workers = cfg.get_int("workers", default_workers());
    const std::string operator_name = cfg.get_string("operator", "pi");
    const auto out_dir = resolve_out_dir(cfg);
    cfg.reject_unknown();

    const FixedPointResult result = fixed_point(kind, mdp, policy, tol, max_iter, workers);

    std::string metric_text = format_metric(result.metric);
    if (!result.converged)
        metric_text = "# NOT CONVERGED: last iterate after " + std::to_string(result.iterations) +
                      " iterations, residual " + format_double(result.residual) + "\n" +
                      metric_text;
    write_output(out_dir, "metric.txt", metric_text);

    ordered_json summary;
    summary["command"] = "solve";
    summary["operator"] = operator_name;
    summary["c"] = kind.c;
    summary["tol"] = tol;
    summary["max_iter"] = max_iter;
    summary["iterations"] = result.iterations;
    summary["residual"] = result.residual;
    summary["converged"] = result.converged;
    summary["max_distance"] = result.metric.max_entry();
    write_output(out_dir, "solve_summary.json", summary.dump(2) + "\n");

    std::cout << "solve: operator=" << operator_name << " iterations=" << result.iterations
              << " residual=" << format_double(result.residual)
              << " converged=" << (result.converged ? "true" : "false") << "\n";
    return result.converged ? 0 : 2;
}

// ---------------------------------------------------------------------------
// estimate

std::vector<std::pair<std::size_t, std::size_t>> load_pairs(const KeyValueConfig& cfg,
                                                            std::size_t n_states) {
    const std::string spec = cfg.get_string("pairs", "all");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (spec == "all") {
        for (std::size_t i = 0; i < n_states; ++i)
            for (std::size_t j = i; j < n_states; ++j) pairs.emplace_back(i, j);
        return pairs;
    }
    if (spec == "diagonal") {
        for (std::size_t i = 0; i < n_states; ++i) pairs.emplace_back(i, i);
        return pairs;
    }
    pairs = parse_pairs(read_text_file(spec));
    for (const auto& [a, b] : pairs)
        if (a >= n_states || b >= n_states)
            throw ArgumentError("pair (" + std::to_string(a) + ", " + std::to_string(b) +
                                ") out of range for " + std::to_string(n_states) + " states");
    return pairs;
}

int cmd_estimate(const CommonFlags& flags) {
    const KeyValueConfig cfg = load_config(flags);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    const FiniteMdp mdp = load_mdp(cfg, seed);
    const TabularPolicy policy = load_policy(cfg, mdp, seed);

    EstimatorMethod method;
    const std::string method_name = cfg.get_string("method", "eps");
    const std::string mode_name =
        cfg.get_string("mode", method_name == "eps" ? "entangled" : "independent");
    if (method_name == "eps")
        method.tag = OperatorTag::Eps;
    else if (method_name == "dbc")
        method.tag = OperatorTag::DbcStyle;
    else if (method_name == "psm")
        method.tag = OperatorTag::PsmStyle;
    else
        throw ArgumentError("config key 'method': expected eps, dbc or psm, got '" + method_name +
                            "'");
    if (mode_name == "entangled")
        method.mode = SamplingMode::Entangled;
    else if (mode_name == "independent")
        method.mode = SamplingMode::Independent;
    else
        throw ArgumentError("config key 'mode': expected entangled or independent, got '" +
                            mode_name + "'");
    method.c = cfg.get_double("c", mdp.discount());
    if (method.tag == OperatorTag::Eps) method.similarity = load_similarity(cfg, mdp, policy);

    const std::string metric_spec = cfg.get_string("metric", "zero");
    StateMetric d = metric_spec == "zero" ? StateMetric::zero(mdp.n_states())
                                          : parse_metric(read_text_file(metric_spec));
    if (d.n_states() != mdp.n_states())
        throw ArgumentError("metric is " + std::to_string(d.n_states()) + " states, MDP has " +
                            std::to_string(mdp.n_states()));

    const auto pairs = load_pairs(cfg, mdp.n_states());
    const std::size_t samples = cfg.get_size("samples", 10000);
    const int workers = cfg.get_int("workers", default_workers());
    const auto out_dir = resolve_out_dir(cfg);
    cfg.reject_unknown();

    const auto reports = bias_audit(method, mdp, policy, d, pairs, samples, seed, workers);
    write_output(out_dir, "estimates.csv", reports_to_csv(reports));
    write_output(out_dir, "estimates.json", reports_to_json(reports));

    double max_bias = 0.0, max_se = 0.0;
    for (const auto& r : reports) {
        max_bias = std::max(max_bias, std::abs(r.bias));
        max_se = std::max(max_se, r.std_error);
    }
    std::cout << "estimate: method=" << method_name << " mode=" << mode_name << " pairs="
              << reports.size() << " samples=" << samples << " max|bias|="
              << format_double(max_bias) << " max stderr=" << format_double(max_se) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// learn

std::string history_csv(const std::vector<TrainHistoryRow>& history) {
    std::string csv = "step,loss,sup_error\n";
    for (const auto& row : history)
        csv += std::to_string(row.step) + "," + format_double(row.loss) + "," +
               format_double(row.sup_error) + "\n";
    return csv;
}

int cmd_learn_tabular(const KeyValueConfig& cfg, const std::filesystem::path& out_dir) {
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    const FiniteMdp mdp = load_mdp(cfg, seed);
    const TabularPolicy policy = load_policy(cfg, mdp, seed);
    const SimilarityG g = load_similarity(cfg, mdp, policy);
    const double c = cfg.get_double("c", mdp.discount());
    const std::size_t steps = cfg.get_size("steps", 20000);
    const double step_size = cfg.get_double("step_size", 1e-3);
    const std::size_t batch = cfg.get_size("batch", 128);
    TrainTabularOptions options;
    options.init_raw = cfg.get_double("init_raw", options.init_raw);
    cfg.reject_unknown();

    const TabularTrainResult result =
        train_tabular(mdp, policy, g, c, steps, step_size, batch, seed, options);

    write_output(out_dir, "history.csv", history_csv(result.history));
    if (!result.diverged)
        write_output(out_dir, "params.txt", format_metric(result.params.realize()));

    if (result.diverged) {
        std::cout << "learn: diverged at step " << result.diverged_step << ", partial history ("
                  << result.history.size() << " rows) written\n";
        return 2;
    }
    const double final_sup = result.history.empty() ? 0.0 : result.history.back().sup_error;
    std::cout << "learn: mode=tabular steps=" << steps << " final sup error="
              << format_double(final_sup) << "\n";
    return 0;
}

int cmd_learn_separable(const KeyValueConfig& cfg, const std::filesystem::path& out_dir) {
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    const std::size_t state_dim = cfg.get_size("state_dim", 3);
    const std::size_t action_dim = cfg.get_size("action_dim", 2);
    GaussianMdpOptions mdp_options;
    mdp_options.stddev_affine_scale = cfg.get_double("stddev_affine_scale", 0.05);
    const GaussianLinearMdp mdp = random_gaussian_mdp(state_dim, action_dim,
                                                      derive_stream(seed, "testbed-mdp"),
                                                      mdp_options);
    const GaussianPolicy policy =
        random_gaussian_policy(state_dim, action_dim, derive_stream(seed, "testbed-policy"));

    const std::string g_name = cfg.get_string("similarity", "reward_diff");
    ContinuousSimilarity g;
    if (g_name == "reward_diff")
        g = ContinuousSimilarity::RewardDiff;
    else if (g_name == "policy_mean_diff")
        g = ContinuousSimilarity::PolicyMeanDiff;
    else
        throw ArgumentError(
            "config key 'similarity': expected reward_diff or policy_mean_diff, got '" + g_name +
            "'");

    const double c = cfg.get_double("c", 0.9);
    const std::size_t steps = cfg.get_size("steps", 2000);
    const double step_size = cfg.get_double("step_size", 1e-2);
    const std::size_t batch = cfg.get_size("batch", 16);
    const std::size_t n_mc = cfg.get_size("samples", 4);
    const std::size_t max_power = cfg.get_size("max_power", 2);
    cfg.reject_unknown();

    const SeparableTrainResult result = train_separable_gaussian(
        mdp, policy, g, c, steps, step_size, batch, n_mc, max_power, seed);

    write_output(out_dir, "history.csv", history_csv(result.history));
    if (!result.diverged) write_output(out_dir, "params.txt", format_separable(result.params));

    if (result.diverged) {
        std::cout << "learn: diverged at step " << result.diverged_step << ", partial history ("
                  << result.history.size() << " rows) written\n";
        return 2;
    }
    const double final_loss = result.history.empty() ? 0.0 : result.history.back().loss;
    std::cout << "learn: mode=separable steps=" << steps << " final batch loss="
              << format_double(final_loss) << "\n";
    return 0;
}

int cmd_learn(const CommonFlags& flags) {
    const KeyValueConfig cfg = load_config(flags);
    const std::string mode = cfg.get_string("mode", "tabular");
    const auto out_dir = resolve_out_dir(cfg);
    if (mode == "tabular") return cmd_learn_tabular(cfg, out_dir);
    if (mode == "separable") return cmd_learn_separable(cfg, out_dir);
    throw ArgumentError("config key 'mode': expected tabular or separable, got '" + mode + "'");
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const CommonFlags& flags) {
    const KeyValueConfig cfg = load_config(flags);
    VerifyOptions options;
    options.seed = cfg.get_u64("seed", options.seed);
    options.workers = cfg.get_int("workers", default_workers());
    options.ot_instances = cfg.get_size("ot_instances", options.ot_instances);
    options.inflation_samples = cfg.get_size("inflation_samples", options.inflation_samples);
    options.self_similarity_mdps =
        cfg.get_size("self_similarity_mdps", options.self_similarity_mdps);
    options.self_similarity_draws =
        cfg.get_size("self_similarity_draws", options.self_similarity_draws);
    options.dbc_diagonal_samples =
        cfg.get_size("dbc_diagonal_samples", options.dbc_diagonal_samples);
    options.psm_diagonal_samples =
        cfg.get_size("psm_diagonal_samples", options.psm_diagonal_samples);
    options.contraction_mdps = cfg.get_size("contraction_mdps", options.contraction_mdps);
    options.ordering_mdps = cfg.get_size("ordering_mdps", options.ordering_mdps);
    options.duplicated_mdps = cfg.get_size("duplicated_mdps", options.duplicated_mdps);
    options.tightness_pairs = cfg.get_size("tightness_pairs", options.tightness_pairs);
    options.tightness_samples = cfg.get_size("tightness_samples", options.tightness_samples);
    options.tightness_quad_cells =
        cfg.get_int("tightness_quad_cells", options.tightness_quad_cells);
    options.unbiasedness_cases = cfg.get_size("unbiasedness_cases", options.unbiasedness_cases);
    options.unbiasedness_samples =
        cfg.get_size("unbiasedness_samples", options.unbiasedness_samples);
    options.learner_steps = cfg.get_size("learner_steps", options.learner_steps);
    options.learner_step_size = cfg.get_double("learner_step_size", options.learner_step_size);
    options.learner_batch = cfg.get_size("learner_batch", options.learner_batch);
    options.axiom_instances = cfg.get_size("axiom_instances", options.axiom_instances);
    const auto out_dir = resolve_out_dir(cfg);
    cfg.reject_unknown();

    const VerifyReport report = run_verification(options);

    const std::string text = report.to_text();
    write_output(out_dir, "verify_report.txt", text);
    std::cout << text;
    for (const auto& check : report.checks)
        std::cerr << "# " << check.name << " took " << check.seconds << " s\n";
    return report.all_passed() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bisimlab: compute, estimate and audit bisimulation metrics on MDPs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "bisim 1.0.0");

    CommonFlags gen_flags, solve_flags, estimate_flags, learn_flags, verify_flags;
    CLI::App* gen = app.add_subcommand("gen", "generate a random MDP, policy and pair files");
    add_common_flags(gen, gen_flags);
    CLI::App* solve = app.add_subcommand("solve", "iterate an operator to its fixed point");
    add_common_flags(solve, solve_flags);
    CLI::App* estimate =
        app.add_subcommand("estimate", "Monte Carlo bias audit of the sampled estimators");
    add_common_flags(estimate, estimate_flags);
    CLI::App* learn =
        app.add_subcommand("learn", "stochastic-gradient metric learning experiments");
    add_common_flags(learn, learn_flags);
    CLI::App* verify = app.add_subcommand("verify", "run the full verification suite");
    add_common_flags(verify, verify_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_flags);
        if (solve->parsed()) return cmd_solve(solve_flags);
        if (estimate->parsed()) return cmd_estimate(estimate_flags);
        if (learn->parsed()) return cmd_learn(learn_flags);
        if (verify->parsed()) return cmd_verify(verify_flags);
        std::cerr << "error: no subcommand given\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
