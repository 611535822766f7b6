#include "cfbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace cfbench {

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < n; ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    std::vector<double> ranks(n, 0.0);
    std::size_t pos = 0;
    while (pos < n) {
        std::size_t end = pos + 1;
        while (end < n && values[order[end]] == values[order[pos]]) ++end;
        // positions pos..end-1 hold ranks pos+1..end; ties share the mean
        const double mean_rank = (static_cast<double>(pos + 1) + static_cast<double>(end)) / 2.0;
        for (std::size_t k = pos; k < end; ++k) ranks[order[k]] = mean_rank;
        pos = end;
    }
    return ranks;
}

std::optional<double> spearman_rho_user(const RankedPrediction& pred) {
    const std::size_t n = pred.actual.size();
    if (n < 2 || pred.predicted.size() != n) return std::nullopt;

    std::vector<double> ps(n), as(n);
    for (std::size_t k = 0; k < n; ++k) {
        ps[k] = pred.predicted[k].score;
        as[k] = pred.actual[k].score;
    }
    const std::vector<double> s = average_ranks(ps);
    const std::vector<double> s_star = average_ranks(as);

    double mean_s = 0.0, mean_t = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mean_s += s[k];
        mean_t += s_star[k];
    }
    mean_s /= static_cast<double>(n);
    mean_t /= static_cast<double>(n);

    double cov = 0.0, var_s = 0.0, var_t = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double ds = s[k] - mean_s;
        const double dt = s_star[k] - mean_t;
        cov += ds * dt;
        var_s += ds * ds;
        var_t += dt * dt;
    }
    if (var_s == 0.0 || var_t == 0.0) return std::nullopt;
    return cov / (std::sqrt(var_s) * std::sqrt(var_t));
}

MetricSummary spearman_rho(std::span<const RankedPrediction> preds) {
    MetricSummary out;
    double sum = 0.0;
    for (const RankedPrediction& p : preds) {
        auto rho = spearman_rho_user(p);
        if (rho) {
            sum += *rho;
            ++out.eligible;
        } else {
            ++out.excluded;
        }
    }
    if (out.eligible == 0)
        throw ConfigError("spearman_rho: no user has a defined rank correlation");
    out.value = sum / static_cast<double>(out.eligible);
    return out;
}

std::vector<EntityId> top_k_items(std::span<const ScoredItem> scored, std::size_t k) {
    std::vector<ScoredItem> sorted(scored.begin(), scored.end());
    std::sort(sorted.begin(), sorted.end(), [](const ScoredItem& a, const ScoredItem& b) {
        return a.score != b.score ? a.score > b.score : a.item < b.item;
    });
    if (sorted.size() > k) sorted.resize(k);
    std::vector<EntityId> out;
    out.reserve(sorted.size());
    for (const ScoredItem& s : sorted) out.push_back(s.item);
    return out;
}

std::optional<double> precision_at_k_user(const RankedPrediction& pred, int k) {
    if (k < 1) throw ConfigError("precision_at_k: k must be >= 1");
    const std::size_t kk = static_cast<std::size_t>(k);
    if (pred.actual.size() < kk) return std::nullopt;

    const std::vector<EntityId> actual = top_k_items(pred.actual, kk);
    const std::vector<EntityId> predicted = top_k_items(pred.predicted, kk);
    std::unordered_set<EntityId> actual_set(actual.begin(), actual.end());
    std::size_t hits = 0;
    for (EntityId i : predicted) hits += actual_set.count(i);
    return static_cast<double>(hits) / static_cast<double>(k);
}

MetricSummary precision_at_k(std::span<const RankedPrediction> preds, int k) {
    MetricSummary out;
    double sum = 0.0;
    for (const RankedPrediction& p : preds) {
        auto prec = precision_at_k_user(p, k);
        if (prec) {
            sum += *prec;
            ++out.eligible;
        } else {
            ++out.excluded;
        }
    }
    if (out.eligible == 0)
        throw ConfigError("precision_at_k: no user has " + std::to_string(k) + " test items");
    out.value = sum / static_cast<double>(out.eligible);
    return out;
}

}  // namespace cfbench
