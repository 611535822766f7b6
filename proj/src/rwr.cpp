#include "cfbench/rwr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace cfbench {

namespace {

// Solves r = walk_weight * (T r + dangling_mass * t) + jump, where T is the
// transposed row-normalized adjacency, jump sums to 1 - walk_weight and
// t = jump / (1 - walk_weight). Redirecting the dangling mass onto t makes
// the combined operator column stochastic, so sum(r) stays 1 throughout.
struct IterationResult {
    Eigen::VectorXd r;
    int iterations;
    double residual;
};

IterationResult power_iterate(const NormalizedAdjacency& adj, double walk_weight,
                              const Eigen::VectorXd& jump, const Eigen::VectorXd& start,
                              const RwrParams& params, const char* what) {
    const double jump_total = 1.0 - walk_weight;
    if (!adj.dangling.empty() && jump_total <= 0.0)
        throw ConfigError(std::string(what) +
                          ": graph has dangling nodes but no jump distribution");

    Eigen::VectorXd target;
    if (!adj.dangling.empty()) target = jump / jump_total;

    Eigen::VectorXd r = start;
    Eigen::VectorXd next(adj.nodes);
    double residual = 0.0;
    for (int it = 1; it <= params.max_iter; ++it) {
        next.noalias() = adj.transition * r;
        if (!adj.dangling.empty()) {
            double mass = 0.0;
            for (int d : adj.dangling) mass += r[d];
            next += mass * target;
        }
        next = walk_weight * next + jump;
        residual = (next - r).lpNorm<1>();
        r.swap(next);
        if (residual < params.eps) {
            const double total = r.sum();
            if (std::abs(total - 1.0) > 1e-10)
                throw ConvergenceError(std::string(what) + ": converged mass " +
                                           std::to_string(total) + " != 1",
                                       residual);
            return {std::move(r), it, residual};
        }
    }
    throw ConvergenceError(std::string(what) + " did not converge in " +
                               std::to_string(params.max_iter) +
                               " iterations (residual " + std::to_string(residual) + ")",
                           residual);
}

}  // namespace

RwrScoreVector rwr_scores(const NormalizedAdjacency& adj, int query, double c,
                          const RwrParams& params) {
    if (!(c > 0.0 && c < 1.0)) throw ConfigError("rwr_scores: c must be in (0, 1)");
    if (query < 0 || query >= adj.nodes) throw ConfigError("rwr_scores: bad query node");

    Eigen::VectorXd jump = Eigen::VectorXd::Zero(adj.nodes);
    jump[query] = c;
    Eigen::VectorXd start =
        Eigen::VectorXd::Constant(adj.nodes, 1.0 / static_cast<double>(adj.nodes));
    IterationResult res = power_iterate(adj, 1.0 - c, jump, start, params, "rwr_scores");
    return {std::move(res.r), query, res.iterations, res.residual};
}

Eigen::VectorXd global_mean_vector(const BipartiteGraph& g) {
    if (g.edges().empty()) throw ConfigError("global_mean_vector: graph has no edges");

    const int n = g.node_count();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd cnt = Eigen::VectorXd::Zero(n);
    for (const BipartiteGraph::Edge& e : g.edges()) {
        sum[e.a] += e.weight;
        cnt[e.a] += 1.0;
        sum[e.b] += e.weight;
        cnt[e.b] += 1.0;
    }
    Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
    for (int v = 0; v < n; ++v)
        if (cnt[v] > 0 && g.kind(v) != NodeKind::Attribute) m[v] = sum[v] / cnt[v];

    const double total = m.sum();
    if (!(total > 0)) throw DataError("global_mean_vector: degenerate graph, all means zero");
    return m / total;
}

BiasVector bias_vector(const NormalizedAdjacency& adj, const Eigen::VectorXd& m_tilde,
                       double c, const RwrParams& params) {
    if (!(c > 0.0 && c < 1.0)) throw ConfigError("bias_vector: c must be in (0, 1)");
    if (std::abs(m_tilde.sum() - 1.0) > 1e-9)
        throw ConfigError("bias_vector: m_tilde must sum to 1");

    IterationResult res =
        power_iterate(adj, 1.0 - c, (c * m_tilde).eval(), m_tilde, params, "bias_vector");
    return {std::move(res.r), m_tilde, res.iterations, res.residual};
}

RwrScoreVector rwr_bias_scores(const NormalizedAdjacency& adj, int query, double beta,
                               double gamma, const BiasVector& bias,
                               const RwrParams& params) {
    if (beta < 0 || gamma < 0 || beta + gamma > 1.0)
        throw ConfigError("rwr_bias_scores: need beta, gamma >= 0 and beta + gamma <= 1");
    if (query < 0 || query >= adj.nodes) throw ConfigError("rwr_bias_scores: bad query node");

    Eigen::VectorXd jump = (1.0 - beta - gamma) * bias.b;
    jump[query] += gamma;
    Eigen::VectorXd start =
        Eigen::VectorXd::Constant(adj.nodes, 1.0 / static_cast<double>(adj.nodes));
    IterationResult res = power_iterate(adj, beta, jump, start, params, "rwr_bias_scores");
    return {std::move(res.r), query, res.iterations, res.residual};
}

std::vector<EntityId> rank_items(const RwrScoreVector& scores, const BipartiteGraph& g,
                                 std::span<const EntityId> candidates) {
    std::vector<std::pair<double, EntityId>> order;
    order.reserve(candidates.size());
    for (EntityId id : candidates) {
        auto node = g.item_node(id);
        if (!node) throw ConfigError("rank_items: candidate " + std::to_string(id) +
                                     " is not an item node");
        order.emplace_back(scores.scores[*node], id);
    }
    std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    std::vector<EntityId> out;
    out.reserve(order.size());
    for (const auto& [s, id] : order) out.push_back(id);
    return out;
}

void dump_scores(const RwrScoreVector& scores, const BipartiteGraph& g, std::ostream& out) {
    std::vector<int> order(static_cast<std::size_t>(g.node_count()));
    for (int v = 0; v < g.node_count(); ++v) order[static_cast<std::size_t>(v)] = v;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores.scores[a] != scores.scores[b]) return scores.scores[a] > scores.scores[b];
        return a < b;
    });
    char buf[64];
    for (int v : order) {
        std::snprintf(buf, sizeof buf, " %.12g\n", scores.scores[v]);
        out << g.node_label(v) << buf;
    }
}

}  // namespace cfbench
