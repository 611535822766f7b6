#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cfbench/dataset.hpp"

namespace cfbench {

struct ScoredItem {
    EntityId item;
    double score;
};

// Test-set items of one user with predicted scores and observed values.
// `predicted` and `actual` cover the same item set.
struct RankedPrediction {
    EntityId user;
    std::vector<ScoredItem> predicted;
    std::vector<ScoredItem> actual;
};

// Rank 1 for the largest value; tied values share the mean of the ranks
// they span.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of the two average-rank sequences. nullopt when the
// user has fewer than two items or either rank sequence is constant; such
// users are excluded from the aggregate.
std::optional<double> spearman_rho_user(const RankedPrediction& pred);

struct MetricSummary {
    double value = 0.0;
    std::size_t eligible = 0;
    std::size_t excluded = 0;
};

MetricSummary spearman_rho(std::span<const RankedPrediction> preds);

// |top-k actual ∩ top-k predicted| / k with the deterministic tie-break
// (score descending, item id ascending). nullopt when the user has fewer
// than k test items.
std::optional<double> precision_at_k_user(const RankedPrediction& pred, int k);

MetricSummary precision_at_k(std::span<const RankedPrediction> preds, int k);

// Top-k item ids of a scored list under the shared tie-break.
std::vector<EntityId> top_k_items(std::span<const ScoredItem> scored, std::size_t k);

}  // namespace cfbench
