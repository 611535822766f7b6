#pragma once

#include <Eigen/SparseCore>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cfbench/dataset.hpp"

namespace cfbench {

enum class NodeKind { User, Item, Attribute };

// Weighted undirected graph over user, item and (after augmentation)
// attribute nodes. Node indices are laid out as [users | items | attributes]
// so the kind of a node follows from its index.
class BipartiteGraph {
public:
    struct Edge {
        int a;
        int b;
        double weight;
    };

    static BipartiteGraph build(const RatingDataset& train);
    static BipartiteGraph build(const ImplicitDataset& train);

    // Adds one node per distinct attribute, user-attribute and item-attribute
    // edges plus user-user social edges, all with weight delta.
    BipartiteGraph augmented(const SideInfo& side, double delta) const;

    int node_count() const { return static_cast<int>(kind_.size()); }
    int user_count() const { return n_users_; }
    int item_count() const { return n_items_; }
    NodeKind kind(int node) const { return kind_[node]; }

    const std::vector<Edge>& edges() const { return edges_; }

    std::optional<int> user_node(EntityId u) const;
    std::optional<int> item_node(EntityId i) const;
    std::optional<int> attribute_node(const std::string& name) const;

    // Raw id of a user/item node; attribute nodes have names instead.
    EntityId user_id(int node) const { return user_ids_[node]; }
    EntityId item_id(int node) const { return item_ids_[node - n_users_]; }
    const std::string& attribute_name(int node) const {
        return attr_names_[node - n_users_ - n_items_];
    }

    // Printable identifier for dumps: raw id for users/items, name for attributes.
    std::string node_label(int node) const;

private:
    BipartiteGraph() = default;

    void add_edge(int a, int b, double w);

    int n_users_ = 0;
    int n_items_ = 0;
    std::vector<EntityId> user_ids_;
    std::vector<EntityId> item_ids_;
    std::vector<std::string> attr_names_;
    std::vector<NodeKind> kind_;
    std::vector<Edge> edges_;
    std::unordered_map<EntityId, int> user_node_;
    std::unordered_map<EntityId, int> item_node_;
    std::unordered_map<std::string, int> attr_node_;
};

inline BipartiteGraph build_graph(const RatingDataset& train) {
    return BipartiteGraph::build(train);
}
inline BipartiteGraph build_graph(const ImplicitDataset& train) {
    return BipartiteGraph::build(train);
}
inline BipartiteGraph augment_graph(const BipartiteGraph& g, const SideInfo& side,
                                    double delta) {
    return g.augmented(side, delta);
}

// Row-normalized adjacency. `transition` stores the transpose of D^-1 A in
// row-major CSR, so one matvec per power-iteration step walks incoming
// edges of each node. Zero-degree nodes are listed in `dangling`.
struct NormalizedAdjacency {
    Eigen::SparseMatrix<double, Eigen::RowMajor> transition;  // (D^-1 A)^T
    std::vector<int> dangling;
    int nodes = 0;

    // Row sums of D^-1 A (1 for every non-dangling row); used by tests.
    Eigen::VectorXd row_sums() const;
};

NormalizedAdjacency row_normalize(const BipartiteGraph& g);

}  // namespace cfbench
