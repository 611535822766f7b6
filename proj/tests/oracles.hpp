// Independent reference implementations used to cross-check the engine.
// Everything here is deliberately written the slow, obvious way and shares
// no code with the library paths it validates.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "cfbench/graph.hpp"
#include "cfbench/rng.hpp"

namespace oracles {

// Direct dense solve of r = walk_weight * M r + jump, where M is the
// transposed row-normalized adjacency with dangling columns replaced by the
// normalized jump distribution.
inline Eigen::VectorXd dense_fixed_point(const cfbench::NormalizedAdjacency& adj,
                                         double walk_weight, const Eigen::VectorXd& jump) {
    const int n = adj.nodes;
    Eigen::MatrixXd M = Eigen::MatrixXd(adj.transition);
    if (!adj.dangling.empty()) {
        Eigen::VectorXd t = jump / (1.0 - walk_weight);
        for (int d : adj.dangling) M.col(d) = t;
    }
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - walk_weight * M;
    return system.partialPivLu().solve(jump);
}

// Rank of element i with rank 1 for the largest value; tied values get the
// average of the positions they occupy.
inline double rank_of(const std::vector<double>& values, std::size_t i) {
    std::size_t better = 0, equal = 0;
    for (double v : values) {
        if (v > values[i]) ++better;
        if (v == values[i]) ++equal;
    }
    return static_cast<double>(better) + (1.0 + static_cast<double>(equal)) / 2.0;
}

// Pearson correlation of the two rank sequences, computed from the raw
// covariance sums. Returns NaN when a denominator vanishes.
inline double spearman(const std::vector<double>& predicted,
                       const std::vector<double>& actual) {
    const std::size_t n = predicted.size();
    std::vector<double> s(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = rank_of(predicted, i);
        t[i] = rank_of(actual, i);
    }
    double sum_s = 0, sum_t = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sum_s += s[i];
        sum_t += t[i];
    }
    const double mean_s = sum_s / static_cast<double>(n);
    const double mean_t = sum_t / static_cast<double>(n);
    double cov = 0, var_s = 0, var_t = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (s[i] - mean_s) * (t[i] - mean_t);
        var_s += (s[i] - mean_s) * (s[i] - mean_s);
        var_t += (t[i] - mean_t) * (t[i] - mean_t);
    }
    return cov / (std::sqrt(var_s) * std::sqrt(var_t));
}

// Random bipartite rating graph; a slice of users/items stays isolated so
// dangling handling gets exercised.
inline cfbench::BipartiteGraph random_graph(cfbench::Rng& rng, int max_users = 6,
                                            int max_items = 6) {
    const int nu = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_users - 1)));
    const int ni = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_items - 1)));
    std::vector<cfbench::EntityId> users, items;
    for (int u = 0; u < nu; ++u) users.push_back(u + 1);
    for (int i = 0; i < ni; ++i) items.push_back(100 + i);

    std::vector<cfbench::RatingTriple> triples;
    for (int u = 0; u < nu; ++u)
        for (int i = 0; i < ni; ++i)
            if (rng.next_double() < 0.45)
                triples.push_back({users[u], items[i], 0.5 + 4.5 * rng.next_double()});
    if (triples.empty()) triples.push_back({users[0], items[0], 2.5});

    auto ds = cfbench::RatingDataset::create(users, items, triples,
                                             cfbench::Feedback::Explicit, {0.1, 10.0, 0.1});
    return cfbench::build_graph(ds);
}

}  // namespace oracles
