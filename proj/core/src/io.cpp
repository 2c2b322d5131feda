#include "bisimlab/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bisimlab {

std::string format_double(double x) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, result.ptr);
}

namespace {

/// Splits a document into token lines, stripping comments and blanks, and
/// hands them out one at a time with line numbers for error reporting.
class LineScanner {
  public:
    LineScanner(const std::string& text, std::string what) : in_(text), what_(std::move(what)) {}

    /// Advances to the next non-blank line; false at end of input.
    bool next() {
        std::string raw;
        while (std::getline(in_, raw)) {
            ++line_no_;
            const std::size_t hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            tokens_.clear();
            std::istringstream ls(raw);
            std::string tok;
            while (ls >> tok) tokens_.push_back(tok);
            if (!tokens_.empty()) return true;
        }
        return false;
    }

    void expect_line() {
        if (!next()) fail("unexpected end of file");
    }

    const std::vector<std::string>& tokens() const { return tokens_; }

    void expect_keyword(const std::string& kw) {
        expect_line();
        if (tokens_[0] != kw) fail("expected '" + kw + "', found '" + tokens_[0] + "'");
    }

    void expect_count(std::size_t n) {
        if (tokens_.size() != n)
            fail("expected " + std::to_string(n) + " tokens, found " +
                 std::to_string(tokens_.size()));
    }

    std::size_t parse_index(const std::string& tok) {
        errno = 0;
        char* end = nullptr;
        const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
        if (errno != 0 || end == tok.c_str() || *end != '\0' || tok[0] == '-')
            fail("bad integer '" + tok + "'");
        return static_cast<std::size_t>(v);
    }

    double parse_real(const std::string& tok) {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (errno != 0 || end == tok.c_str() || *end != '\0' || !std::isfinite(v))
            fail("bad number '" + tok + "'");
        return v;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw IoError(what_ + ": line " + std::to_string(line_no_) + ": " + msg);
    }

  private:
    std::istringstream in_;
    std::string what_;
    std::vector<std::string> tokens_;
    std::size_t line_no_ = 0;
};

void expect_header(LineScanner& sc, const char* kind) {
    sc.expect_line();
    sc.expect_count(3);
    if (sc.tokens()[0] != "bisimlab" || sc.tokens()[1] != kind || sc.tokens()[2] != "v1")
        sc.fail(std::string("expected header 'bisimlab ") + kind + " v1'");
}

std::size_t parse_sized_field(LineScanner& sc, const char* keyword) {
    sc.expect_keyword(keyword);
    sc.expect_count(2);
    return sc.parse_index(sc.tokens()[1]);
}

void expect_no_trailer(LineScanner& sc) {
    if (sc.next()) sc.fail("unexpected content after the last record");
}

}  // namespace

std::string format_mdp(const FiniteMdp& mdp) {
    std::string out = "bisimlab mdp v1\n";
    out += "states " + std::to_string(mdp.n_states()) + "\n";
    out += "actions " + std::to_string(mdp.n_actions()) + "\n";
    out += "discount " + format_double(mdp.discount()) + "\n";
    for (std::size_t z = 0; z < mdp.n_states(); ++z) {
        out += "reward " + std::to_string(z);
        for (std::size_t a = 0; a < mdp.n_actions(); ++a)
            out += " " + format_double(mdp.reward(z, a));
        out += "\n";
    }
    for (std::size_t z = 0; z < mdp.n_states(); ++z)
        for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
            out += "transition " + std::to_string(z) + " " + std::to_string(a);
            const double* row = mdp.transition_row(z, a);
            for (std::size_t next = 0; next < mdp.n_states(); ++next)
                out += " " + format_double(row[next]);
            out += "\n";
        }
    return out;
}

FiniteMdp parse_mdp(const std::string& text) {
    LineScanner sc(text, "mdp");
    expect_header(sc, "mdp");
    const std::size_t n = parse_sized_field(sc, "states");
    const std::size_t n_actions = parse_sized_field(sc, "actions");
    if (n == 0 || n_actions == 0) sc.fail("states and actions must be positive");

    sc.expect_keyword("discount");
    sc.expect_count(2);
    const double discount = sc.parse_real(sc.tokens()[1]);

    FiniteMdp mdp(n, n_actions);
    for (std::size_t z = 0; z < n; ++z) {
        sc.expect_keyword("reward");
        sc.expect_count(2 + n_actions);
        if (sc.parse_index(sc.tokens()[1]) != z) sc.fail("reward lines must be in state order");
        for (std::size_t a = 0; a < n_actions; ++a)
            mdp.reward(z, a) = sc.parse_real(sc.tokens()[2 + a]);
    }
    for (std::size_t z = 0; z < n; ++z)
        for (std::size_t a = 0; a < n_actions; ++a) {
            sc.expect_keyword("transition");
            sc.expect_count(3 + n);
            if (sc.parse_index(sc.tokens()[1]) != z || sc.parse_index(sc.tokens()[2]) != a)
                sc.fail("transition lines must be in state-major, action-minor order");
            for (std::size_t next = 0; next < n; ++next)
                mdp.transition(z, a, next) = sc.parse_real(sc.tokens()[3 + next]);
        }
    expect_no_trailer(sc);

    try {
        mdp.set_discount(discount);
        mdp.validate();
    } catch (const ArgumentError& e) {
        throw IoError(std::string("mdp: invalid content: ") + e.what());
    }
    return mdp;
}

std::string format_policy(const TabularPolicy& policy) {
    std::string out = "bisimlab policy v1\n";
    out += "states " + std::to_string(policy.n_states()) + "\n";
    out += "actions " + std::to_string(policy.n_actions()) + "\n";
    for (std::size_t z = 0; z < policy.n_states(); ++z) {
        out += "row " + std::to_string(z);
        for (std::size_t a = 0; a < policy.n_actions(); ++a)
            out += " " + format_double(policy.prob(z, a));
        out += "\n";
    }
    return out;
}

TabularPolicy parse_policy(const std::string& text) {
    LineScanner sc(text, "policy");
    expect_header(sc, "policy");
    const std::size_t n = parse_sized_field(sc, "states");
    const std::size_t n_actions = parse_sized_field(sc, "actions");
    if (n == 0 || n_actions == 0) sc.fail("states and actions must be positive");

    TabularPolicy policy(n, n_actions);
    for (std::size_t z = 0; z < n; ++z) {
        sc.expect_keyword("row");
        sc.expect_count(2 + n_actions);
        if (sc.parse_index(sc.tokens()[1]) != z) sc.fail("rows must be in state order");
        for (std::size_t a = 0; a < n_actions; ++a)
            policy.prob(z, a) = sc.parse_real(sc.tokens()[2 + a]);
    }
    expect_no_trailer(sc);

    try {
        policy.validate();
    } catch (const ArgumentError& e) {
        throw IoError(std::string("policy: invalid content: ") + e.what());
    }
    return policy;
}

std::string format_metric(const StateMetric& metric) {
    std::string out = "bisimlab metric v1\n";
    out += "states " + std::to_string(metric.n_states()) + "\n";
    for (std::size_t i = 0; i < metric.n_states(); ++i) {
        out += "row " + std::to_string(i);
        for (std::size_t j = 0; j < metric.n_states(); ++j)
            out += " " + format_double(metric.at(i, j));
        out += "\n";
    }
    return out;
}

StateMetric parse_metric(const std::string& text) {
    LineScanner sc(text, "metric");
    expect_header(sc, "metric");
    const std::size_t n = parse_sized_field(sc, "states");
    if (n == 0) sc.fail("states must be positive");

    StateMetric metric(n);
    for (std::size_t i = 0; i < n; ++i) {
        sc.expect_keyword("row");
        sc.expect_count(2 + n);
        if (sc.parse_index(sc.tokens()[1]) != i) sc.fail("rows must be in state order");
        for (std::size_t j = 0; j < n; ++j)
            metric.values()(i, j) = sc.parse_real(sc.tokens()[2 + j]);
    }
    expect_no_trailer(sc);

    if (!metric.is_symmetric(0.0)) throw IoError("metric: invalid content: matrix not symmetric");
    if (!metric.is_nonnegative()) throw IoError("metric: invalid content: negative entry");
    return metric;
}

std::string format_pairs(const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    std::string out = "bisimlab pairs v1\n";
    out += "count " + std::to_string(pairs.size()) + "\n";
    for (const auto& [i, j] : pairs)
        out += "pair " + std::to_string(i) + " " + std::to_string(j) + "\n";
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_pairs(const std::string& text) {
    LineScanner sc(text, "pairs");
    expect_header(sc, "pairs");
    const std::size_t count = parse_sized_field(sc, "count");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        sc.expect_keyword("pair");
        sc.expect_count(3);
        pairs.emplace_back(sc.parse_index(sc.tokens()[1]), sc.parse_index(sc.tokens()[2]));
    }
    expect_no_trailer(sc);
    return pairs;
}

std::string format_separable(const SeparableDistanceParams& params) {
    std::string out = "bisimlab separable-distance v1\n";
    out += "dims " + std::to_string(params.state_dim) + "\n";
    out += "powers " + std::to_string(params.max_power) + "\n";
    for (std::size_t i = 0; i < params.state_dim; ++i) {
        out += "row " + std::to_string(i);
        for (std::size_t j = 0; j < params.max_power; ++j)
            out += " " + format_double(params.weights(i, j));
        out += "\n";
    }
    return out;
}

SeparableDistanceParams parse_separable(const std::string& text) {
    LineScanner sc(text, "separable-distance");
    expect_header(sc, "separable-distance");
    const std::size_t dims = parse_sized_field(sc, "dims");
    const std::size_t powers = parse_sized_field(sc, "powers");
    if (dims == 0 || powers == 0) sc.fail("dims and powers must be positive");

    SeparableDistanceParams params = SeparableDistanceParams::zeros(dims, powers);
    for (std::size_t i = 0; i < dims; ++i) {
        sc.expect_keyword("row");
        sc.expect_count(2 + powers);
        if (sc.parse_index(sc.tokens()[1]) != i) sc.fail("rows must be in coordinate order");
        for (std::size_t j = 0; j < powers; ++j)
            params.weights(i, j) = sc.parse_real(sc.tokens()[2 + j]);
    }
    expect_no_trailer(sc);

    try {
        params.validate();
    } catch (const ArgumentError& e) {
        throw IoError(std::string("separable-distance: invalid content: ") + e.what());
    }
    return params;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed on '" + path + "'");
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out.good()) throw IoError("write failed on '" + path + "'");
}

}  // namespace bisimlab
