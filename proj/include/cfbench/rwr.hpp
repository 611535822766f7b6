#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <vector>

#include "cfbench/graph.hpp"

namespace cfbench {

struct RwrParams {
    double eps = 1e-9;   // L1 stopping tolerance
    int max_iter = 1000;
};

struct RwrScoreVector {
    Eigen::VectorXd scores;
    int query = -1;  // -1 for the bias recursion
    int iterations = 0;
    double residual = 0.0;
};

struct BiasVector {
    Eigen::VectorXd b;
    Eigen::VectorXd m_tilde;
    int iterations = 0;
    double residual = 0.0;
};

// Power iteration for r = (1-c) A~^T r + c q with q the indicator of
// `query`. Mass leaving dangling nodes is redirected to the jump target so
// the iterate keeps summing to 1. Starts from the uniform vector.
RwrScoreVector rwr_scores(const NormalizedAdjacency& adj, int query, double c,
                          const RwrParams& params = {});

// Per-node global popularity: mean incident edge weight for users (ratings
// given) and items (ratings received), 0 for attribute nodes, normalized to
// sum to 1.
Eigen::VectorXd global_mean_vector(const BipartiteGraph& g);

// Fixed point of b = (1-c) A~^T b + c m_tilde, iterated from m_tilde.
BiasVector bias_vector(const NormalizedAdjacency& adj, const Eigen::VectorXd& m_tilde,
                       double c, const RwrParams& params = {});

// Fixed point of r = beta A~^T r + gamma q + (1-beta-gamma) b.
RwrScoreVector rwr_bias_scores(const NormalizedAdjacency& adj, int query, double beta,
                               double gamma, const BiasVector& bias,
                               const RwrParams& params = {});

// Candidate items sorted by score descending, ties by ascending item id.
std::vector<EntityId> rank_items(const RwrScoreVector& scores, const BipartiteGraph& g,
                                 std::span<const EntityId> candidates);

// `node_label score` lines, score descending (same tie-break as rank_items).
void dump_scores(const RwrScoreVector& scores, const BipartiteGraph& g, std::ostream& out);

}  // namespace cfbench
