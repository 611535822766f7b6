#include "cfbench/graph.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace cfbench {

BipartiteGraph BipartiteGraph::build(const RatingDataset& train) {
    BipartiteGraph g;
    g.n_users_ = static_cast<int>(train.n_users());
    g.n_items_ = static_cast<int>(train.n_items());
    g.user_ids_ = train.users();
    g.item_ids_ = train.items();
    g.kind_.assign(static_cast<std::size_t>(g.n_users_), NodeKind::User);
    g.kind_.insert(g.kind_.end(), static_cast<std::size_t>(g.n_items_), NodeKind::Item);
    for (int k = 0; k < g.n_users_; ++k) g.user_node_[g.user_ids_[k]] = k;
    for (int k = 0; k < g.n_items_; ++k) g.item_node_[g.item_ids_[k]] = g.n_users_ + k;

    g.edges_.reserve(train.ratings().size());
    for (const RatingTriple& t : train.ratings()) {
        if (!(t.value > 0))
            throw DataError("graph edge weight must be positive, got " +
                            std::to_string(t.value));
        g.add_edge(g.user_node_.at(t.user), g.item_node_.at(t.item), t.value);
    }
    return g;
}

BipartiteGraph BipartiteGraph::build(const ImplicitDataset& train) {
    BipartiteGraph g = build(train.base());
    // Replace raw counts by confidence levels, edge order matches ratings().
    for (std::size_t k = 0; k < g.edges_.size(); ++k)
        g.edges_[k].weight = train.confidence(k);
    return g;
}

void BipartiteGraph::add_edge(int a, int b, double w) {
    if (!(w > 0)) throw DataError("graph edge weight must be positive");
    if (kind_[a] == NodeKind::Item && kind_[b] == NodeKind::Item)
        throw DataError("item-item edges are not allowed");
    edges_.push_back({a, b, w});
}

BipartiteGraph BipartiteGraph::augmented(const SideInfo& side, double delta) const {
    if (!(delta > 0)) throw ConfigError("augment_graph: delta must be positive");
    BipartiteGraph g = *this;

    auto attr_node_of = [&g](const std::string& name) {
        auto it = g.attr_node_.find(name);
        if (it != g.attr_node_.end()) return it->second;
        int node = g.node_count();
        g.attr_names_.push_back(name);
        g.kind_.push_back(NodeKind::Attribute);
        g.attr_node_.emplace(name, node);
        return node;
    };

    // Deduplicate: repeated observations of the same relation add one edge.
    std::set<std::pair<int, int>> seen;
    auto add_once = [&](int a, int b) {
        auto key = std::minmax(a, b);
        if (a != b && seen.emplace(key.first, key.second).second)
            g.add_edge(a, b, delta);
    };

    for (const UserAttribute& a : side.user_attributes) {
        auto un = g.user_node_.find(a.user);
        if (un == g.user_node_.end())
            throw DataError("side info references unknown user " + std::to_string(a.user));
        add_once(un->second, attr_node_of(a.attribute));
    }
    for (const ItemAttribute& a : side.item_attributes) {
        auto in = g.item_node_.find(a.item);
        if (in == g.item_node_.end())
            throw DataError("side info references unknown item " + std::to_string(a.item));
        add_once(attr_node_of(a.attribute), in->second);
    }
    for (const SocialLink& l : side.social_links) {
        auto a = g.user_node_.find(l.from);
        auto b = g.user_node_.find(l.to);
        if (a == g.user_node_.end() || b == g.user_node_.end())
            throw DataError("social link references unknown user");
        add_once(a->second, b->second);
    }
    return g;
}

std::optional<int> BipartiteGraph::user_node(EntityId u) const {
    auto it = user_node_.find(u);
    if (it == user_node_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> BipartiteGraph::item_node(EntityId i) const {
    auto it = item_node_.find(i);
    if (it == item_node_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> BipartiteGraph::attribute_node(const std::string& name) const {
    auto it = attr_node_.find(name);
    if (it == attr_node_.end()) return std::nullopt;
    return it->second;
}

std::string BipartiteGraph::node_label(int node) const {
    switch (kind_[node]) {
        case NodeKind::User: return "u" + std::to_string(user_id(node));
        case NodeKind::Item: return "i" + std::to_string(item_id(node));
        default: return attribute_name(node);
    }
}

NormalizedAdjacency row_normalize(const BipartiteGraph& g) {
    const int n = g.node_count();
    Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
    for (const BipartiteGraph::Edge& e : g.edges()) {
        degree[e.a] += e.weight;
        degree[e.b] += e.weight;
    }

    NormalizedAdjacency adj;
    adj.nodes = n;
    for (int v = 0; v < n; ++v)
        if (degree[v] == 0.0) adj.dangling.push_back(v);

    // Entry (v, u) of the transition matrix is A_uv / degree(u): the
    // probability that a walker at u steps to v.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(2 * g.edges().size());
    for (const BipartiteGraph::Edge& e : g.edges()) {
        trips.emplace_back(e.b, e.a, e.weight / degree[e.a]);
        trips.emplace_back(e.a, e.b, e.weight / degree[e.b]);
    }
    adj.transition.resize(n, n);
    adj.transition.setFromTriplets(trips.begin(), trips.end());
    adj.transition.makeCompressed();
    return adj;
}

Eigen::VectorXd NormalizedAdjacency::row_sums() const {
    // Rows of D^-1 A are columns of the stored transpose.
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(nodes);
    for (int r = 0; r < transition.outerSize(); ++r)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(transition, r);
             it; ++it)
            sums[it.col()] += it.value();
    return sums;
}

}  // namespace cfbench
