#include "cfbench/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "cfbench/rng.hpp"

namespace cfbench {

namespace {

std::uint64_t pair_key(std::size_t u_idx, std::size_t i_idx) {
    return (static_cast<std::uint64_t>(u_idx) << 32) | static_cast<std::uint64_t>(i_idx);
}

std::vector<EntityId> sorted_unique(std::vector<EntityId> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// strtod-based parse that rejects trailing garbage.
bool parse_double(const std::string& tok, double& out) {
    if (tok.empty()) return false;
    char* end = nullptr;
    out = std::strtod(tok.c_str(), &end);
    return end == tok.c_str() + tok.size() && std::isfinite(out);
}

bool parse_id(const std::string& tok, EntityId& out) {
    if (tok.empty()) return false;
    char* end = nullptr;
    long long v = std::strtoll(tok.c_str(), &end, 10);
    if (end != tok.c_str() + tok.size()) return false;
    out = static_cast<EntityId>(v);
    return true;
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    if (delim == '\0') {
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) out.push_back(tok);
    } else {
        std::string tok;
        std::istringstream ss(line);
        while (std::getline(ss, tok, delim)) out.push_back(tok);
    }
    return out;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return in;
}

}  // namespace

RatingDataset RatingDataset::create(std::vector<EntityId> users,
                                    std::vector<EntityId> items,
                                    std::vector<RatingTriple> ratings,
                                    Feedback kind,
                                    RatingRange range) {
    RatingDataset ds;
    ds.users_ = sorted_unique(std::move(users));
    ds.items_ = sorted_unique(std::move(items));
    ds.kind_ = kind;
    ds.range_ = range;

    ds.user_index_.reserve(ds.users_.size());
    for (std::size_t k = 0; k < ds.users_.size(); ++k) ds.user_index_[ds.users_[k]] = k;
    ds.item_index_.reserve(ds.items_.size());
    for (std::size_t k = 0; k < ds.items_.size(); ++k) ds.item_index_[ds.items_[k]] = k;

    ds.pair_index_.reserve(ratings.size());
    for (std::size_t k = 0; k < ratings.size(); ++k) {
        const RatingTriple& t = ratings[k];
        auto ui = ds.user_index_.find(t.user);
        auto ii = ds.item_index_.find(t.item);
        if (ui == ds.user_index_.end())
            throw DataError("rating references unknown user " + std::to_string(t.user));
        if (ii == ds.item_index_.end())
            throw DataError("rating references unknown item " + std::to_string(t.item));
        if (!ds.pair_index_.emplace(pair_key(ui->second, ii->second), k).second)
            throw DataError("duplicate rating for user " + std::to_string(t.user) +
                            ", item " + std::to_string(t.item));
        if (kind == Feedback::Explicit) {
            if (t.value < range.min_value || t.value > range.max_value)
                throw DataError("explicit rating " + std::to_string(t.value) +
                                " outside [" + std::to_string(range.min_value) + ", " +
                                std::to_string(range.max_value) + "]");
        } else {
            if (!(t.value > 0))
                throw DataError("implicit count must be positive, got " +
                                std::to_string(t.value));
        }
    }
    ds.ratings_ = std::move(ratings);
    return ds;
}

std::optional<std::size_t> RatingDataset::user_index(EntityId u) const {
    auto it = user_index_.find(u);
    if (it == user_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> RatingDataset::item_index(EntityId i) const {
    auto it = item_index_.find(i);
    if (it == item_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> RatingDataset::rating_index(EntityId u, EntityId i) const {
    auto ui = user_index_.find(u);
    auto ii = item_index_.find(i);
    if (ui == user_index_.end() || ii == item_index_.end()) return std::nullopt;
    auto it = pair_index_.find(pair_key(ui->second, ii->second));
    if (it == pair_index_.end()) return std::nullopt;
    return it->second;
}

RatingDataset RatingDataset::with_extra_users(const std::vector<EntityId>& extra) const {
    std::vector<EntityId> users = users_;
    users.insert(users.end(), extra.begin(), extra.end());
    return create(std::move(users), items_, ratings_, kind_, range_);
}

RatingDataset RatingDataset::with_ratings(std::vector<RatingTriple> subset) const {
    return create(users_, items_, std::move(subset), kind_, range_);
}

ImplicitDataset::ImplicitDataset(RatingDataset base, double alpha)
    : base_(std::move(base)), alpha_(alpha) {
    confidence_.reserve(base_.ratings().size());
    for (const RatingTriple& t : base_.ratings())
        confidence_.push_back(1.0 + alpha_ * t.value);
}

std::optional<double> ImplicitDataset::confidence(EntityId u, EntityId i) const {
    auto idx = base_.rating_index(u, i);
    if (!idx) return std::nullopt;
    return confidence_[*idx];
}

ImplicitDataset binarize_and_confidence(const RatingDataset& ds, double alpha) {
    if (ds.kind() != Feedback::Implicit)
        throw ConfigError("binarize_and_confidence requires an implicit dataset");
    if (!(alpha > 0)) throw ConfigError("alpha must be positive");
    return ImplicitDataset(ds, alpha);
}

std::vector<EntityId> SideInfo::users_with_side() const {
    std::vector<EntityId> out;
    for (const UserAttribute& a : user_attributes) out.push_back(a.user);
    for (const SocialLink& l : social_links) {
        out.push_back(l.from);
        out.push_back(l.to);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<EntityId> SideInfo::link_users() const {
    std::vector<EntityId> out;
    for (const SocialLink& l : social_links) {
        out.push_back(l.from);
        out.push_back(l.to);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string age_bin_label(int age) {
    if (age <= 17) return "0-17";
    if (age <= 24) return "18-24";
    if (age <= 34) return "25-34";
    if (age <= 44) return "35-44";
    if (age <= 49) return "45-49";
    if (age <= 55) return "50-55";
    return "56+";
}

MovielensLoad load_movielens(const std::string& ratings_path, const std::string& users_path) {
    std::ifstream rin = open_or_throw(ratings_path);

    std::vector<EntityId> users, items;
    std::vector<RatingTriple> triples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(rin, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto toks = split_line(line, '\t');
        if (toks.size() < 3)
            throw ParseError(ratings_path, line_no, "expected user<TAB>item<TAB>rating");
        EntityId u, i;
        double r;
        if (!parse_id(toks[0], u) || !parse_id(toks[1], i) || !parse_double(toks[2], r))
            throw ParseError(ratings_path, line_no, "non-numeric field");
        users.push_back(u);
        items.push_back(i);
        triples.push_back({u, i, r});
    }

    std::ifstream uin = open_or_throw(users_path);
    SideInfo side;
    std::unordered_set<EntityId> known(users.begin(), users.end());
    line_no = 0;
    while (std::getline(uin, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto toks = split_line(line, '|');
        if (toks.size() < 5)
            throw ParseError(users_path, line_no, "expected user|age|gender|occupation|zip");
        EntityId u;
        double age;
        if (!parse_id(toks[0], u) || !parse_double(toks[1], age))
            throw ParseError(users_path, line_no, "non-numeric user or age");
        if (!known.count(u))
            throw DataError(users_path + ":" + std::to_string(line_no) +
                            ": demographic row for unknown user " + std::to_string(u));
        side.user_attributes.push_back({u, "age:" + age_bin_label(static_cast<int>(age)), 1.0});
        side.user_attributes.push_back({u, "gender:" + toks[2], 1.0});
        side.user_attributes.push_back({u, "occupation:" + toks[3], 1.0});
        if (!toks[4].empty())
            side.user_attributes.push_back({u, std::string("zip:") + toks[4][0], 1.0});
    }

    MovielensLoad out{RatingDataset::create(std::move(users), std::move(items),
                                            std::move(triples), Feedback::Explicit,
                                            {1.0, 5.0, 1.0}),
                      std::move(side)};
    return out;
}

EdgeListLoad load_edge_list(const std::string& path, const EdgeListSchema& schema,
                            Feedback kind) {
    std::ifstream in = open_or_throw(path);

    std::vector<EntityId> users, items;
    std::vector<RatingTriple> triples;
    std::unordered_set<std::string> seen;
    std::size_t duplicates = 0;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no <= schema.header_lines) continue;
        if (line.empty()) continue;
        auto toks = split_line(line, schema.delimiter);
        if (toks.size() < 3) throw ParseError(path, line_no, "expected user item value");
        EntityId u, i;
        double v;
        if (!parse_id(toks[0], u) || !parse_id(toks[1], i))
            throw ParseError(path, line_no, "non-numeric id");
        if (!parse_double(toks[2], v)) throw ParseError(path, line_no, "non-numeric value");
        if (kind == Feedback::Implicit && v < 0)
            throw DataError(path + ":" + std::to_string(line_no) + ": negative implicit count");

        std::string key = std::to_string(u) + "," + std::to_string(i);
        if (!seen.insert(key).second) {
            if (schema.on_duplicate == DuplicatePolicy::KeepFirst) {
                ++duplicates;
                continue;
            }
            throw DataError(path + ":" + std::to_string(line_no) + ": duplicate pair " + key);
        }
        users.push_back(u);
        items.push_back(i);
        triples.push_back({u, i, v});
    }

    return {RatingDataset::create(std::move(users), std::move(items), std::move(triples),
                                  kind, schema.range),
            duplicates};
}

SocialLinksLoad load_social_links(const std::string& path) {
    std::ifstream in = open_or_throw(path);

    SocialLinksLoad out;
    std::set<std::pair<EntityId, EntityId>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto toks = split_line(line, '\0');
        if (toks.size() < 2) throw ParseError(path, line_no, "expected user user");
        EntityId a, b;
        if (!parse_id(toks[0], a) || !parse_id(toks[1], b)) {
            // Tolerate a single header row of column names.
            if (line_no == 1) continue;
            throw ParseError(path, line_no, "non-numeric user id");
        }
        ++out.report.rows_read;
        if (a == b) ++out.report.self_loops;
        if (!seen.emplace(a, b).second) {
            ++out.report.duplicate_links;
            continue;
        }
        out.side.social_links.push_back({a, b});
    }
    return out;
}

FoldSplit kfold_split(const RatingDataset& ds, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("kfold_split requires k >= 2");
    const std::size_t n = ds.ratings().size();
    if (n == 0) throw ConfigError("kfold_split requires a nonempty dataset");
    if (static_cast<std::size_t>(k) > n)
        throw ConfigError("kfold_split: k=" + std::to_string(k) + " exceeds " +
                          std::to_string(n) + " ratings");

    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < n; ++j) order[j] = j;
    Rng rng(seed);
    rng.shuffle(order);

    FoldSplit split;
    split.seed = seed;
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        std::vector<bool> in_test(n, false);
        for (std::size_t j = 0; j < size; ++j) in_test[order[pos + j]] = true;
        pos += size;

        std::vector<RatingTriple> train, test;
        train.reserve(n - size);
        test.reserve(size);
        for (std::size_t j = 0; j < n; ++j)
            (in_test[j] ? test : train).push_back(ds.ratings()[j]);
        split.folds.push_back({ds.with_ratings(std::move(train)),
                               ds.with_ratings(std::move(test))});
    }
    return split;
}

ColdStartSplit cold_start_split(const RatingDataset& ds, const SideInfo& side,
                                double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("cold_start_split: fraction must be in (0, 1)");
    if (side.empty()) throw ConfigError("cold_start_split: side info is empty");

    std::unordered_set<EntityId> has_side;
    for (EntityId u : side.users_with_side()) has_side.insert(u);
    std::unordered_set<EntityId> has_rating;
    for (const RatingTriple& t : ds.ratings()) has_rating.insert(t.user);

    std::vector<EntityId> eligible;
    for (EntityId u : ds.users())
        if (has_rating.count(u) && has_side.count(u)) eligible.push_back(u);

    const std::size_t want =
        static_cast<std::size_t>(fraction * static_cast<double>(ds.n_users()));
    if (want == 0)
        throw ConfigError("cold_start_split: requested sample size is zero");
    if (eligible.size() < want)
        throw ConfigError("cold_start_split: only " + std::to_string(eligible.size()) +
                          " eligible users for a sample of " + std::to_string(want));

    Rng rng(seed);
    rng.shuffle(eligible);
    eligible.resize(want);
    std::sort(eligible.begin(), eligible.end());
    std::unordered_set<EntityId> cold(eligible.begin(), eligible.end());

    std::vector<RatingTriple> train, test;
    for (const RatingTriple& t : ds.ratings())
        (cold.count(t.user) ? test : train).push_back(t);

    return {std::move(eligible), ds.with_ratings(std::move(train)),
            ds.with_ratings(std::move(test)), side};
}

namespace {

// %.17g round-trips any double exactly.
std::string fmt_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_dataset(const RatingDataset& ds, std::ostream& out) {
    out << "cfbench-dataset v1\n";
    out << "kind " << (ds.kind() == Feedback::Explicit ? "explicit" : "implicit") << "\n";
    out << "range " << fmt_value(ds.range().min_value) << ' '
        << fmt_value(ds.range().max_value) << ' ' << fmt_value(ds.range().step) << "\n";
    out << "counts " << ds.n_users() << ' ' << ds.n_items() << ' ' << ds.ratings().size()
        << "\n";
    for (EntityId u : ds.users()) out << "u " << u << "\n";
    for (EntityId i : ds.items()) out << "i " << i << "\n";
    std::vector<RatingTriple> sorted = ds.ratings();
    std::sort(sorted.begin(), sorted.end(), [](const RatingTriple& a, const RatingTriple& b) {
        return a.user != b.user ? a.user < b.user : a.item < b.item;
    });
    for (const RatingTriple& t : sorted)
        out << "r " << t.user << ' ' << t.item << ' ' << fmt_value(t.value) << "\n";
}

RatingDataset load_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "cfbench-dataset v1")
        throw ParseError("<stream>", 1, "bad header, expected 'cfbench-dataset v1'");

    Feedback kind = Feedback::Explicit;
    RatingRange range;
    std::size_t nu = 0, ni = 0, nr = 0;
    std::vector<EntityId> users, items;
    std::vector<RatingTriple> triples;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "kind") {
            std::string k;
            ss >> k;
            kind = (k == "implicit") ? Feedback::Implicit : Feedback::Explicit;
        } else if (tag == "range") {
            ss >> range.min_value >> range.max_value >> range.step;
        } else if (tag == "counts") {
            ss >> nu >> ni >> nr;
        } else if (tag == "u") {
            EntityId u;
            ss >> u;
            users.push_back(u);
        } else if (tag == "i") {
            EntityId i;
            ss >> i;
            items.push_back(i);
        } else if (tag == "r") {
            RatingTriple t;
            ss >> t.user >> t.item >> t.value;
            triples.push_back(t);
        } else {
            throw ParseError("<stream>", line_no, "unknown record tag '" + tag + "'");
        }
        if (ss.fail()) throw ParseError("<stream>", line_no, "malformed record");
    }
    if (users.size() != nu || items.size() != ni || triples.size() != nr)
        throw ParseError("<stream>", line_no, "counts header does not match records");
    return RatingDataset::create(std::move(users), std::move(items), std::move(triples),
                                 kind, range);
}

}  // namespace cfbench
