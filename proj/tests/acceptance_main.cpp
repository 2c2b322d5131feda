// Acceptance gate: exercises the full verification suite at default scale and
// the end-to-end reproducibility of the verify subcommand. Prints one
// [PASS]/[FAIL] line per criterion and exits nonzero if any criterion fails.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "bisimlab/io.hpp"
#include "bisimlab/verify.hpp"

using namespace bisimlab;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    bool passed = false;
    std::string detail;
};

int run_command(const std::string& command) {
    const int raw = std::system(command.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string seconds_text(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", s);
    return buf;
}

}  // namespace

int main() {
    const unsigned hw = std::thread::hardware_concurrency();

    VerifyOptions options;
    options.seed = 1;
    options.workers = hw > 0 ? static_cast<int>(hw) : 1;
    const VerifyReport report = run_verification(options);

    const std::vector<std::string> expected_names{
        "ot_oracle_equivalence",
        "independent_sampling_inflation",
        "estimator_self_similarity",
        "fixed_point_convergence",
        "operator_ordering",
        "duplicated_state_zero_distance",
        "separable_tightness",
        "estimator_unbiasedness",
        "learner_convergence",
        "metric_and_similarity_axioms",
    };
    if (report.checks.size() != expected_names.size()) {
        std::fprintf(stderr, "verification returned %zu checks, expected %zu\n",
                     report.checks.size(), expected_names.size());
        return 1;
    }

    std::vector<Criterion> criteria(11);
    for (std::size_t i = 0; i < expected_names.size(); ++i) {
        const CheckResult& check = report.checks[i];
        Criterion& crit = criteria[i];
        if (check.name != expected_names[i]) {
            crit.passed = false;
            crit.detail = "check order mismatch: found " + check.name;
            continue;
        }
        crit.passed = check.passed;
        crit.detail = check.name + ": " + check.detail;
        // Budgeted checks: the transport oracle sweep and the tightness audit
        // carry their own wall-clock limits.
        if (i == 0 && check.seconds >= 30.0) {
            crit.passed = false;
            crit.detail += " [over budget: " + seconds_text(check.seconds) + " s >= 30 s]";
        }
        if (i == 6 && check.seconds >= 300.0) {
            crit.passed = false;
            crit.detail += " [over budget: " + seconds_text(check.seconds) + " s >= 300 s]";
        }
    }

    // Criterion 11: the verify subcommand at default scale must exit 0 and
    // produce byte-identical reports across reruns with the same seed.
    {
        const fs::path base = fs::temp_directory_path() / "bisimlab-acceptance";
        fs::remove_all(base);
        fs::create_directories(base);
        const std::string binary = BISIM_CLI_PATH;
        const auto t0 = std::chrono::steady_clock::now();
        const int code_a = run_command(binary + " verify --seed 1 --out " +
                                       (base / "a").string() + " > " +
                                       (base / "a.out").string() + " 2> " +
                                       (base / "a.err").string());
        const int code_b = run_command(binary + " verify --seed 1 --out " +
                                       (base / "b").string() + " > " +
                                       (base / "b.out").string() + " 2> " +
                                       (base / "b.err").string());
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        Criterion& crit = criteria[10];
        if (code_a != 0 || code_b != 0) {
            crit.passed = false;
            crit.detail = "verify exited " + std::to_string(code_a) + " and " +
                          std::to_string(code_b) + ", expected 0";
        } else {
            const std::string report_a = read_text_file((base / "a" / "verify_report.txt").string());
            const std::string report_b = read_text_file((base / "b" / "verify_report.txt").string());
            if (report_a != report_b) {
                crit.passed = false;
                crit.detail = "rerun reports differ byte-wise";
            } else if (elapsed >= 600.0) {
                crit.passed = false;
                crit.detail = "two verify runs took " + seconds_text(elapsed) + " s >= 600 s";
            } else {
                crit.passed = true;
                crit.detail = "verify exits 0, reruns byte-identical, two runs in " +
                              seconds_text(elapsed) + " s";
            }
        }
    }

    bool all_passed = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        all_passed = all_passed && criteria[i].passed;
        std::printf("[%s] criterion %zu: %s\n", criteria[i].passed ? "PASS" : "FAIL", i + 1,
                    criteria[i].detail.c_str());
    }
    std::printf("acceptance %s (%zu/11 criteria)\n", all_passed ? "PASS" : "FAIL",
                [&] {
                    std::size_t n = 0;
                    for (const Criterion& c : criteria) n += c.passed ? 1 : 0;
                    return n;
                }());
    return all_passed ? 0 : 1;
}
