#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cfbench/errors.hpp"

namespace cfbench {

using EntityId = std::int64_t;

enum class Feedback { Explicit, Implicit };

struct RatingTriple {
    EntityId user;
    EntityId item;
    double value;
};

// Closed rating scale for explicit data, e.g. {1.0, 5.0, 1.0} for 1-5 stars.
struct RatingRange {
    double min_value = 1.0;
    double max_value = 5.0;
    double step = 1.0;
};

// Immutable universe of users, items and observed ratings. Construction
// validates the invariants (unique sorted entities, no duplicate (user, item)
// pair, values inside the declared range / positive counts).
class RatingDataset {
public:
    static RatingDataset create(std::vector<EntityId> users,
                                std::vector<EntityId> items,
                                std::vector<RatingTriple> ratings,
                                Feedback kind,
                                RatingRange range = {});

    const std::vector<EntityId>& users() const { return users_; }
    const std::vector<EntityId>& items() const { return items_; }
    const std::vector<RatingTriple>& ratings() const { return ratings_; }
    Feedback kind() const { return kind_; }
    const RatingRange& range() const { return range_; }

    std::size_t n_users() const { return users_.size(); }
    std::size_t n_items() const { return items_.size(); }

    // Dense index of an entity, or nullopt when the id is not in the universe.
    std::optional<std::size_t> user_index(EntityId u) const;
    std::optional<std::size_t> item_index(EntityId i) const;

    // Index into ratings() for an observed pair.
    std::optional<std::size_t> rating_index(EntityId u, EntityId i) const;

    // Same triples, universe extended with extra (possibly rating-less) users.
    RatingDataset with_extra_users(const std::vector<EntityId>& extra) const;

    // Same universe, different triple subset (used by the splitters).
    RatingDataset with_ratings(std::vector<RatingTriple> subset) const;

private:
    RatingDataset() = default;

    std::vector<EntityId> users_;
    std::vector<EntityId> items_;
    std::vector<RatingTriple> ratings_;
    Feedback kind_ = Feedback::Explicit;
    RatingRange range_;
    std::unordered_map<EntityId, std::size_t> user_index_;
    std::unordered_map<EntityId, std::size_t> item_index_;
    std::unordered_map<std::uint64_t, std::size_t> pair_index_;
};

// Binarized view of an implicit dataset: p_ui = 1 for every observed pair
// and confidence c_ui = 1 + alpha * r_ui.
class ImplicitDataset {
public:
    ImplicitDataset(RatingDataset base, double alpha);

    const RatingDataset& base() const { return base_; }
    double alpha() const { return alpha_; }

    // Aligned with base().ratings().
    double confidence(std::size_t rating_idx) const { return confidence_[rating_idx]; }
    const std::vector<double>& confidences() const { return confidence_; }

    double binarized(EntityId u, EntityId i) const {
        return base_.rating_index(u, i) ? 1.0 : 0.0;
    }
    std::optional<double> confidence(EntityId u, EntityId i) const;

private:
    RatingDataset base_;
    double alpha_;
    std::vector<double> confidence_;
};

ImplicitDataset binarize_and_confidence(const RatingDataset& ds, double alpha);

struct UserAttribute {
    EntityId user;
    std::string attribute;  // namespaced, e.g. "age:25-34" or "user:42"
    double value;
};

struct ItemAttribute {
    std::string attribute;
    EntityId item;
    double value;
};

struct SocialLink {
    EntityId from;
    EntityId to;
};

struct SideInfo {
    std::vector<UserAttribute> user_attributes;
    std::vector<ItemAttribute> item_attributes;
    std::vector<SocialLink> social_links;

    bool empty() const {
        return user_attributes.empty() && item_attributes.empty() && social_links.empty();
    }

    // Users that carry at least one attribute or social link.
    std::vector<EntityId> users_with_side() const;

    // Distinct users appearing as link endpoints.
    std::vector<EntityId> link_users() const;
};

struct SideLoadReport {
    std::size_t rows_read = 0;
    std::size_t duplicate_links = 0;
    std::size_t self_loops = 0;
};

enum class DuplicatePolicy { Error, KeepFirst };

// Column layout for load_edge_list. delimiter == '\0' means "any run of
// whitespace". header_lines are skipped. keep_first tolerates duplicate
// (user, item) rows, keeping the first occurrence and counting the rest.
struct EdgeListSchema {
    char delimiter = '\0';
    std::size_t header_lines = 0;
    DuplicatePolicy on_duplicate = DuplicatePolicy::Error;
    RatingRange range = {};  // explicit data only
};

struct EdgeListLoad {
    RatingDataset dataset;
    std::size_t duplicate_rows = 0;
};

struct MovielensLoad {
    RatingDataset dataset;
    SideInfo side;
};

// u.data (TSV user/item/rating/timestamp) + u.user (pipe-separated
// demographics). Ages are discretized into the standard MovieLens bins and
// zip codes truncated to their first character; every demographic becomes a
// unit-valued user attribute.
MovielensLoad load_movielens(const std::string& ratings_path, const std::string& users_path);

EdgeListLoad load_edge_list(const std::string& path, const EdgeListSchema& schema, Feedback kind);

struct SocialLinksLoad {
    SideInfo side;
    SideLoadReport report;
};

// Rows of `user user [weight]`; links are stored directed as read,
// deduplicated on the ordered pair.
SocialLinksLoad load_social_links(const std::string& path);

// MovieLens age bin label, e.g. 30 -> "25-34".
std::string age_bin_label(int age);

struct Fold {
    RatingDataset train;
    RatingDataset test;
};

struct FoldSplit {
    std::vector<Fold> folds;
    std::uint64_t seed = 0;
};

// Seeded shuffle of the triples, partitioned into k near-equal test chunks.
// Train and test of every fold share the full entity universe of `ds`.
FoldSplit kfold_split(const RatingDataset& ds, int k, std::uint64_t seed);

struct ColdStartSplit {
    std::vector<EntityId> cold_users;  // sorted
    RatingDataset train;
    RatingDataset test;
    SideInfo side;
};

// Samples floor(fraction * |U|) of the eligible users (>= 1 rating and some
// side information) as cold; their ratings form the test set, everything
// else plus all side info forms the training input.
ColdStartSplit cold_start_split(const RatingDataset& ds, const SideInfo& side,
                                double fraction, std::uint64_t seed);

// Canonical line-oriented text serialization; sorted and versioned so a
// save/load/save round trip is byte-identical.
void save_dataset(const RatingDataset& ds, std::ostream& out);
RatingDataset load_dataset(std::istream& in);

}  // namespace cfbench
