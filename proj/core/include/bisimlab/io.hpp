#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bisimlab/learner.hpp"
#include "bisimlab/mdp.hpp"
#include "bisimlab/metric.hpp"

namespace bisimlab {

/**
 * Text formats for the on-disk artifacts. Every format starts with a
 * one-line header naming the kind and version, followed by fixed-order
 * keyword lines. Values are written as the shortest decimals that parse back
 * to the exact doubles; '#' starts a comment, blank lines are
 * skipped. Parsers are strict: wrong order, missing lines, trailing tokens
 * or semantically invalid content all raise IoError with a line number.
 */

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double x);

// "bisimlab mdp v1": states, actions, discount, one reward line per state,
// one transition line per (state, action) in state-major order.
std::string format_mdp(const FiniteMdp& mdp);
FiniteMdp parse_mdp(const std::string& text);

// "bisimlab policy v1": states, actions, one row line per state.
std::string format_policy(const TabularPolicy& policy);
TabularPolicy parse_policy(const std::string& text);

// "bisimlab metric v1": states, one row line per state (full square matrix).
std::string format_metric(const StateMetric& metric);
StateMetric parse_metric(const std::string& text);

// "bisimlab pairs v1": count, then one "pair i j" line each.
std::string format_pairs(const std::vector<std::pair<std::size_t, std::size_t>>& pairs);
std::vector<std::pair<std::size_t, std::size_t>> parse_pairs(const std::string& text);

// "bisimlab separable-distance v1": dims, powers, one weight row per
// coordinate (powers 1..P left to right).
std::string format_separable(const SeparableDistanceParams& params);
SeparableDistanceParams parse_separable(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace bisimlab
