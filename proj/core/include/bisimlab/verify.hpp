#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bisimlab/distributions.hpp"
#include "bisimlab/types.hpp"

namespace bisimlab {

/**
 * Scale knobs for the verification suite. The defaults are the acceptance
 * scale; shrinking them gives a faster smoke run, the checks themselves do
 * not change. All randomness derives from `seed`, so two runs with the same
 * options produce identical reports byte for byte.
 */
struct VerifyOptions {
    std::uint64_t seed = 1;
    int workers = 1;

    std::size_t ot_instances = 1000;
    std::size_t inflation_samples = 100000;

    std::size_t self_similarity_mdps = 20;
    std::size_t self_similarity_draws = 10000;
    std::size_t dbc_diagonal_samples = 100000;
    std::size_t psm_diagonal_samples = 10000;

    std::size_t contraction_mdps = 100;
    std::size_t ordering_mdps = 100;
    std::size_t duplicated_mdps = 50;

    std::size_t tightness_pairs = 50;
    std::size_t tightness_samples = 100000;
    int tightness_quad_cells = 100000;

    std::size_t unbiasedness_cases = 100;
    std::size_t unbiasedness_samples = 10000;

    std::size_t learner_steps = 20000;
    double learner_step_size = 1e-3;
    std::size_t learner_batch = 128;

    std::size_t axiom_instances = 20;

    /**
     * Test hook: replaces the production W1 solver inside the oracle
     * equivalence check. Injecting a corrupted solver here must make that
     * check fail; nothing else uses the hook.
     */
    std::function<double(const DiscreteDistribution&, const DiscreteDistribution&, const Matrix&)>
        w1_override;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    /// Wall time, reported on the log stream only; never part of to_text().
    double seconds = 0.0;
};

struct VerifyReport {
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;

    bool all_passed() const {
        for (const CheckResult& c : checks)
            if (!c.passed) return false;
        return true;
    }

    /// Deterministic report text: one [PASS]/[FAIL] line per check with the
    /// measured values, no timestamps or timing.
    std::string to_text() const;
};

VerifyReport run_verification(const VerifyOptions& options = {});

}  // namespace bisimlab
