#include "bisimlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace bisimlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Mass below this is treated as already routed; keeps the augmentation loop
// from chasing the last few ulps of a supply that sums to 1 only inexactly.
constexpr double kResidualMass = 1e-13;

void check_cost(const Matrix& cost, std::size_t m, std::size_t n) {
    if (cost.rows() != m || cost.cols() != n)
        throw ArgumentError("transport: cost matrix shape must be |p| x |q|");
    for (double v : cost.data())
        if (!std::isfinite(v) || v < 0.0)
            throw ArgumentError("transport: costs must be finite and nonnegative");
}

}  // namespace

double w1_discrete(const DiscreteDistribution& p, const DiscreteDistribution& q,
                   const Matrix& cost) {
    p.validate();
    q.validate();
    const std::size_t m = p.size(), n = q.size();
    check_cost(cost, m, n);

    Vec supply = p.weights, demand = q.weights;
    Matrix flow(m, n);
    // One potential per node: sources first, then sinks.
    Vec pot(m + n, 0.0);

    const std::size_t nodes = m + n;
    std::vector<double> dist(nodes);
    std::vector<int> parent(nodes);
    std::vector<char> done(nodes);

    const std::size_t max_rounds = 4 * nodes * std::max<std::size_t>(m * n, 1);
    for (std::size_t round = 0;; ++round) {
        double remaining = std::accumulate(supply.begin(), supply.end(), 0.0);
        if (remaining <= kResidualMass) break;
        if (round >= max_rounds)
            throw NumericalError("w1_discrete: augmentation did not terminate");

        // Dense Dijkstra over reduced costs from every source that still has mass.
        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(parent.begin(), parent.end(), -1);
        std::fill(done.begin(), done.end(), 0);
        for (std::size_t i = 0; i < m; ++i)
            if (supply[i] > kResidualMass) dist[i] = 0.0;

        for (;;) {
            std::size_t u = nodes;
            double best = kInf;
            for (std::size_t v = 0; v < nodes; ++v)
                if (!done[v] && dist[v] < best) { best = dist[v]; u = v; }
            if (u == nodes) break;
            done[u] = 1;

            if (u < m) {
                for (std::size_t j = 0; j < n; ++j) {
                    double rc = cost(u, j) + pot[u] - pot[m + j];
                    if (rc < 0.0) rc = 0.0;
                    if (dist[u] + rc < dist[m + j]) {
                        dist[m + j] = dist[u] + rc;
                        parent[m + j] = static_cast<int>(u);
                    }
                }
            } else {
                const std::size_t j = u - m;
                for (std::size_t i = 0; i < m; ++i) {
                    if (flow(i, j) <= 0.0) continue;
                    double rc = -cost(i, j) + pot[m + j] - pot[i];
                    if (rc < 0.0) rc = 0.0;
                    if (dist[u] + rc < dist[i]) {
                        dist[i] = dist[u] + rc;
                        parent[i] = static_cast<int>(u);
                    }
                }
            }
        }

        // Closest sink that still wants mass.
        std::size_t target = nodes;
        double best = kInf;
        for (std::size_t j = 0; j < n; ++j)
            if (demand[j] > kResidualMass && dist[m + j] < best) { best = dist[m + j]; target = m + j; }
        if (target == nodes) break;  // nothing reachable: only float dust is left

        // Bottleneck along the augmenting path.
        double delta = demand[target - m];
        for (std::size_t v = target; parent[v] >= 0; v = static_cast<std::size_t>(parent[v])) {
            const std::size_t w = static_cast<std::size_t>(parent[v]);
            if (w < m && v >= m) continue;               // forward arc, uncapacitated
            delta = std::min(delta, flow(v, w - m));     // residual arc sink->source
        }
        {
            std::size_t v = target;
            while (parent[v] >= 0) v = static_cast<std::size_t>(parent[v]);
            delta = std::min(delta, supply[v]);
        }
        if (delta <= 0.0)
            throw NumericalError("w1_discrete: degenerate augmentation");

        // Apply the augmentation.
        std::size_t v = target;
        while (parent[v] >= 0) {
            const std::size_t w = static_cast<std::size_t>(parent[v]);
            if (w < m)
                flow(w, v - m) += delta;
            else
                flow(v, w - m) -= delta;
            v = w;
        }
        supply[v] -= delta;
        demand[target - m] -= delta;

        const double reach = dist[target];
        for (std::size_t k = 0; k < nodes; ++k) pot[k] += std::min(dist[k], reach);
    }

    if (std::accumulate(supply.begin(), supply.end(), 0.0) > 1e-9)
        throw NumericalError("w1_discrete: failed to route all mass");

    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) total += flow(i, j) * cost(i, j);
    return total;
}

double w1_discrete_bruteforce(const DiscreteDistribution& p, const DiscreteDistribution& q,
                              const Matrix& cost) {
    p.validate();
    q.validate();
    const std::size_t m = p.size(), n = q.size();
    check_cost(cost, m, n);
    if (m * n > 16)
        throw ArgumentError("w1_discrete_bruteforce: support product must be <= 16");

    const std::size_t cells = m * n;
    const std::size_t k = m + n - 1;  // basis size of the transportation polytope

    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;

    std::vector<int> uf(m + n);
    std::vector<int> degree(m + n);
    std::vector<double> residual(m + n);
    std::vector<char> alive(k);

    std::function<int(int)> find = [&](int a) {
        while (uf[a] != a) { uf[a] = uf[uf[a]]; a = uf[a]; }
        return a;
    };

    double best = kInf;
    for (;;) {
        // Keep only acyclic cell subsets; with m+n-1 edges acyclic means
        // spanning tree, which is exactly a basis of the polytope.
        std::iota(uf.begin(), uf.end(), 0);
        bool tree = true;
        for (std::size_t e = 0; e < k && tree; ++e) {
            const int a = find(static_cast<int>(pick[e] / n));
            const int b = find(static_cast<int>(m + pick[e] % n));
            if (a == b) tree = false;
            else uf[a] = b;
        }

        if (tree) {
            // Solve the tree system by repeatedly settling leaves.
            std::fill(degree.begin(), degree.end(), 0);
            for (std::size_t e = 0; e < k; ++e) {
                ++degree[pick[e] / n];
                ++degree[m + pick[e] % n];
            }
            for (std::size_t i = 0; i < m; ++i) residual[i] = p.weights[i];
            for (std::size_t j = 0; j < n; ++j) residual[m + j] = q.weights[j];
            std::fill(alive.begin(), alive.end(), 1);

            double total = 0.0;
            bool feasible = true;
            for (std::size_t settled = 0; settled < k && feasible; ++settled) {
                std::size_t leaf_edge = k;
                std::size_t leaf_node = 0;
                for (std::size_t e = 0; e < k; ++e) {
                    if (!alive[e]) continue;
                    const std::size_t i = pick[e] / n, j = m + pick[e] % n;
                    if (degree[i] == 1) { leaf_edge = e; leaf_node = i; break; }
                    if (degree[j] == 1) { leaf_edge = e; leaf_node = j; break; }
                }
                const std::size_t i = pick[leaf_edge] / n, j = pick[leaf_edge] % n;
                const std::size_t other = (leaf_node == i) ? m + j : i;
                double f = residual[leaf_node];
                if (f < -1e-11) { feasible = false; break; }
                if (f < 0.0) f = 0.0;
                total += f * cost(i, j);
                residual[other] -= f;
                residual[leaf_node] = 0.0;
                alive[leaf_edge] = 0;
                --degree[leaf_node];
                --degree[other];
            }
            if (feasible) best = std::min(best, total);
        }

        // Next k-combination of cells in lexicographic order.
        std::size_t pos = k;
        while (pos > 0 && pick[pos - 1] == cells - (k - pos) - 1) --pos;
        if (pos == 0) break;
        ++pick[pos - 1];
        for (std::size_t t = pos; t < k; ++t) pick[t] = pick[t - 1] + 1;
    }

    if (!std::isfinite(best))
        throw NumericalError("w1_discrete_bruteforce: no feasible basis found");
    return best;
}

namespace {

double quadrature_sum(const std::function<double(double)>& p_inv_cdf,
                      const std::function<double(double)>& q_inv_cdf, double power, int n_quad) {
    require(power >= 1.0, "wp_univariate: power must be >= 1");
    require(n_quad >= 1, "wp_univariate: n_quad must be >= 1");
    constexpr double clamp = 1e-12;

    double acc = 0.0;
    const double h = 1.0 / static_cast<double>(n_quad);
    for (int kk = 0; kk < n_quad; ++kk) {
        double u = (static_cast<double>(kk) + 0.5) * h;
        u = std::min(std::max(u, clamp), 1.0 - clamp);
        const double a = p_inv_cdf(u), b = q_inv_cdf(u);
        if (!std::isfinite(a) || !std::isfinite(b))
            throw NumericalError("wp_univariate: inverse CDF returned a non-finite value at u=" +
                                 std::to_string(u));
        const double d = std::fabs(a - b);
        if (power == 1.0) acc += d;
        else if (power == 2.0) acc += d * d;
        else acc += std::pow(d, power);
    }
    return acc * h;
}

}  // namespace

double wp_cost_univariate(const std::function<double(double)>& p_inv_cdf,
                          const std::function<double(double)>& q_inv_cdf, double power,
                          int n_quad) {
    return quadrature_sum(p_inv_cdf, q_inv_cdf, power, n_quad);
}

double wp_univariate(const std::function<double(double)>& p_inv_cdf,
                     const std::function<double(double)>& q_inv_cdf, double power, int n_quad) {
    return std::pow(quadrature_sum(p_inv_cdf, q_inv_cdf, power, n_quad), 1.0 / power);
}

double w2_diag_gaussian(const DiagonalGaussian& p, const DiagonalGaussian& q) {
    p.validate();
    q.validate();
    require(p.dim() == q.dim(), "w2_diag_gaussian: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.dim(); ++i) {
        const double dm = p.mean[i] - q.mean[i];
        const double ds = p.stddev[i] - q.stddev[i];
        acc += dm * dm + ds * ds;
    }
    return std::sqrt(acc);
}

}  // namespace bisimlab
