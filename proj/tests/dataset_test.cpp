#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cfbench/dataset.hpp"
#include "cfbench/rng.hpp"

using namespace cfbench;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

RatingDataset small_explicit() {
    return RatingDataset::create({1, 2, 3}, {10, 11, 12, 13},
                                 {{1, 10, 4.0},
                                  {1, 11, 3.0},
                                  {2, 10, 5.0},
                                  {2, 12, 2.0},
                                  {3, 11, 1.0},
                                  {3, 13, 4.0}},
                                 Feedback::Explicit, {1.0, 5.0, 1.0});
}

}  // namespace

TEST_CASE("dataset invariants at construction") {
    CHECK_THROWS_AS(RatingDataset::create({1}, {10}, {{1, 10, 3.0}, {1, 10, 4.0}},
                                          Feedback::Explicit, {1, 5, 1}),
                    DataError);
    CHECK_THROWS_AS(RatingDataset::create({1}, {10}, {{2, 10, 3.0}}, Feedback::Explicit,
                                          {1, 5, 1}),
                    DataError);
    CHECK_THROWS_AS(RatingDataset::create({1}, {10}, {{1, 10, 9.0}}, Feedback::Explicit,
                                          {1, 5, 1}),
                    DataError);
    CHECK_THROWS_AS(RatingDataset::create({1}, {10}, {{1, 10, 0.0}}, Feedback::Implicit),
                    DataError);
}

TEST_CASE("load_movielens parses ratings and demographics") {
    std::string ratings = write_temp("ml_ratings.tsv",
                                     "1\t10\t4\t881250949\n"
                                     "1\t11\t3\t881250950\n"
                                     "2\t10\t5\t881250951\n");
    std::string users = write_temp("ml_users.txt",
                                   "1|24|M|technician|85711\n"
                                   "2|53|F|other|94043\n");
    MovielensLoad ml = load_movielens(ratings, users);
    CHECK(ml.dataset.n_users() == 2);
    CHECK(ml.dataset.n_items() == 2);
    CHECK(ml.dataset.ratings().size() == 3);
    CHECK(ml.dataset.range().min_value == 1.0);
    CHECK(ml.dataset.range().max_value == 5.0);

    std::set<std::string> attrs;
    for (const UserAttribute& a : ml.side.user_attributes)
        if (a.user == 1) attrs.insert(a.attribute);
    CHECK(attrs == std::set<std::string>{"age:18-24", "gender:M", "occupation:technician",
                                         "zip:8"});

    SUBCASE("empty ratings file gives an empty dataset") {
        std::string none = write_temp("ml_empty.tsv", "");
        std::string no_users = write_temp("ml_nousers.txt", "");
        MovielensLoad empty = load_movielens(none, no_users);
        CHECK(empty.dataset.ratings().empty());
        CHECK(empty.dataset.n_users() == 0);
    }
    SUBCASE("duplicate pair is rejected") {
        std::string dup = write_temp("ml_dup.tsv",
                                     "1\t10\t4\t1\n"
                                     "2\t10\t3\t2\n"
                                     "1\t10\t5\t3\n");
        CHECK_THROWS_AS(load_movielens(dup, users), DataError);
    }
    SUBCASE("unknown user in side file is a referential error") {
        std::string stray = write_temp("ml_stray.txt", "7|30|F|artist|10001\n");
        CHECK_THROWS_AS(load_movielens(ratings, stray), DataError);
    }
    SUBCASE("malformed line reports its number") {
        std::string bad = write_temp("ml_bad.tsv", "1\t10\t4\t1\n1\tx\t3\t2\n");
        try {
            load_movielens(bad, users);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
}

TEST_CASE("movielens age bins") {
    CHECK(age_bin_label(5) == "0-17");
    CHECK(age_bin_label(17) == "0-17");
    CHECK(age_bin_label(18) == "18-24");
    CHECK(age_bin_label(34) == "25-34");
    CHECK(age_bin_label(45) == "45-49");
    CHECK(age_bin_label(55) == "50-55");
    CHECK(age_bin_label(90) == "56+");
}

TEST_CASE("load_edge_list") {
    SUBCASE("single row") {
        std::string p = write_temp("el_one.txt", "1 7 3.0\n");
        EdgeListSchema schema;
        schema.range = {0.5, 4.0, 0.5};
        EdgeListLoad load = load_edge_list(p, schema, Feedback::Explicit);
        CHECK(load.dataset.ratings().size() == 1);
        CHECK(load.dataset.ratings()[0].value == 3.0);
    }
    SUBCASE("non-numeric value") {
        std::string p = write_temp("el_bad.txt", "1 7 high\n");
        CHECK_THROWS_AS(load_edge_list(p, {}, Feedback::Explicit), ParseError);
    }
    SUBCASE("negative implicit count") {
        std::string p = write_temp("el_neg.txt", "1 7 -3\n");
        CHECK_THROWS_AS(load_edge_list(p, {}, Feedback::Implicit), DataError);
    }
    SUBCASE("duplicate policy") {
        std::string p = write_temp("el_dup.txt", "1 7 3.0\n1 7 2.0\n2 7 1.0\n");
        EdgeListSchema schema;
        schema.range = {0.5, 4.0, 0.5};
        CHECK_THROWS_AS(load_edge_list(p, schema, Feedback::Explicit), DataError);
        schema.on_duplicate = DuplicatePolicy::KeepFirst;
        EdgeListLoad load = load_edge_list(p, schema, Feedback::Explicit);
        CHECK(load.duplicate_rows == 1);
        CHECK(load.dataset.ratings().size() == 2);
        CHECK(load.dataset.ratings()[0].value == 3.0);  // first occurrence wins
    }
    SUBCASE("tab delimiter with header") {
        std::string p = write_temp("el_hdr.tsv", "userID\titemID\tweight\n1\t7\t120\n");
        EdgeListSchema schema;
        schema.delimiter = '\t';
        schema.header_lines = 1;
        EdgeListLoad load = load_edge_list(p, schema, Feedback::Implicit);
        CHECK(load.dataset.ratings().size() == 1);
        CHECK(load.dataset.ratings()[0].value == 120.0);
    }
}

TEST_CASE("load_social_links dedup and self-loop report") {
    std::string p = write_temp("links.txt", "1 2\n2 1\n1 2\n3 3\n4 5\n");
    SocialLinksLoad load = load_social_links(p);
    // set-based recount: distinct ordered pairs
    std::set<std::pair<EntityId, EntityId>> expect{{1, 2}, {2, 1}, {3, 3}, {4, 5}};
    CHECK(load.side.social_links.size() == expect.size());
    CHECK(load.report.duplicate_links == 1);
    CHECK(load.report.self_loops == 1);
    CHECK(load.report.rows_read == 5);

    SUBCASE("empty file") {
        std::string e = write_temp("links_empty.txt", "");
        CHECK(load_social_links(e).side.social_links.empty());
    }
    SUBCASE("malformed row") {
        std::string b = write_temp("links_bad.txt", "1 2\nnope\n");
        CHECK_THROWS_AS(load_social_links(b), ParseError);
    }
}

TEST_CASE("binarize_and_confidence") {
    auto ds = RatingDataset::create({1}, {7}, {{1, 7, 100.0}}, Feedback::Implicit);
    ImplicitDataset imp = binarize_and_confidence(ds, 0.0001);
    CHECK(imp.confidence(0) == doctest::Approx(1.01).epsilon(1e-12));
    CHECK(imp.binarized(1, 7) == 1.0);
    CHECK(imp.binarized(1, 8) == 0.0);

    auto ds1 = RatingDataset::create({1}, {7}, {{1, 7, 1.0}}, Feedback::Implicit);
    CHECK(binarize_and_confidence(ds1, 0.0001).confidence(0) ==
          doctest::Approx(1.0001).epsilon(1e-12));

    CHECK_THROWS_AS(binarize_and_confidence(ds, 0.0), ConfigError);
    CHECK_THROWS_AS(binarize_and_confidence(small_explicit(), 0.1), ConfigError);

    SUBCASE("confidence is monotone in the count") {
        Rng rng(7);
        std::vector<RatingTriple> triples;
        std::vector<EntityId> items;
        for (int i = 0; i < 50; ++i) {
            items.push_back(i);
            triples.push_back({1, i, 1.0 + std::floor(rng.next_double() * 1000.0)});
        }
        ImplicitDataset big = binarize_and_confidence(
            RatingDataset::create({1}, items, triples, Feedback::Implicit), 0.01);
        for (std::size_t a = 0; a < triples.size(); ++a)
            for (std::size_t b = 0; b < triples.size(); ++b)
                if (triples[a].value > triples[b].value)
                    CHECK(big.confidence(a) > big.confidence(b));
    }
}

TEST_CASE("kfold_split partitions exactly and deterministically") {
    auto ds = small_explicit();
    FoldSplit split = kfold_split(ds, 3, 99);
    CHECK(split.folds.size() == 3);

    std::multiset<std::string> all, original;
    for (const RatingTriple& t : ds.ratings())
        original.insert(std::to_string(t.user) + "/" + std::to_string(t.item));
    std::size_t total_test = 0;
    for (const Fold& f : split.folds) {
        total_test += f.test.ratings().size();
        CHECK(f.train.ratings().size() + f.test.ratings().size() == ds.ratings().size());
        CHECK(f.train.n_users() == ds.n_users());  // universe preserved
        for (const RatingTriple& t : f.test.ratings())
            all.insert(std::to_string(t.user) + "/" + std::to_string(t.item));
        // disjointness
        for (const RatingTriple& t : f.train.ratings())
            CHECK(!f.test.rating_index(t.user, t.item));
    }
    CHECK(total_test == ds.ratings().size());
    CHECK(all == original);

    FoldSplit again = kfold_split(ds, 3, 99);
    for (std::size_t f = 0; f < 3; ++f) {
        REQUIRE(again.folds[f].test.ratings().size() == split.folds[f].test.ratings().size());
        for (std::size_t k = 0; k < split.folds[f].test.ratings().size(); ++k)
            CHECK(again.folds[f].test.ratings()[k].item == split.folds[f].test.ratings()[k].item);
    }

    FoldSplit other = kfold_split(ds, 3, 100);
    bool identical = true;
    for (std::size_t f = 0; f < 3 && identical; ++f) {
        if (other.folds[f].test.ratings().size() != split.folds[f].test.ratings().size()) {
            identical = false;
            break;
        }
        for (std::size_t k = 0; k < split.folds[f].test.ratings().size(); ++k)
            if (other.folds[f].test.ratings()[k].item != split.folds[f].test.ratings()[k].item ||
                other.folds[f].test.ratings()[k].user != split.folds[f].test.ratings()[k].user)
                identical = false;
    }
    CHECK_FALSE(identical);

    CHECK_THROWS_AS(kfold_split(ds, 7, 1), ConfigError);  // k exceeds triple count
    CHECK_THROWS_AS(kfold_split(ds, 1, 1), ConfigError);
}

TEST_CASE("near-equal kfold test sizes") {
    std::vector<RatingTriple> triples;
    std::vector<EntityId> items;
    for (int i = 0; i < 103; ++i) {
        items.push_back(i);
        triples.push_back({1, i, 3.0});
    }
    auto ds = RatingDataset::create({1}, items, triples, Feedback::Explicit, {1, 5, 1});
    FoldSplit split = kfold_split(ds, 5, 0);
    std::multiset<std::size_t> sizes;
    for (const Fold& f : split.folds) sizes.insert(f.test.ratings().size());
    CHECK(sizes == std::multiset<std::size_t>{20, 20, 21, 21, 21});
}

TEST_CASE("cold_start_split") {
    auto ds = small_explicit();
    SideInfo side;
    side.user_attributes = {{1, "gender:F", 1.0}, {2, "gender:M", 1.0}, {3, "gender:F", 1.0}};

    ColdStartSplit split = cold_start_split(ds, side, 0.4, 5);
    CHECK(split.cold_users.size() == 1);  // floor(0.4 * 3)

    // independent membership recount
    std::set<EntityId> cold(split.cold_users.begin(), split.cold_users.end());
    for (const RatingTriple& t : split.train.ratings()) CHECK(!cold.count(t.user));
    for (const RatingTriple& t : split.test.ratings()) CHECK(cold.count(t.user) == 1);
    CHECK(split.train.ratings().size() + split.test.ratings().size() == ds.ratings().size());

    ColdStartSplit again = cold_start_split(ds, side, 0.4, 5);
    CHECK(again.cold_users == split.cold_users);

    CHECK_THROWS_AS(cold_start_split(ds, side, 0.1, 5), ConfigError);  // sample size 0
    CHECK_THROWS_AS(cold_start_split(ds, SideInfo{}, 0.4, 5), ConfigError);
    SideInfo only_one;
    only_one.user_attributes = {{1, "gender:F", 1.0}};
    CHECK_THROWS_AS(cold_start_split(ds, only_one, 0.9, 5), ConfigError);  // shortfall
}

TEST_CASE("canonical serialization round trip is byte stable") {
    Rng rng(123);
    std::vector<EntityId> users{5, 1, 9}, items{100, 42};
    std::vector<RatingTriple> triples;
    for (EntityId u : users)
        for (EntityId i : items)
            if (rng.next_double() < 0.8) triples.push_back({u, i, 0.5 + rng.below(8) * 0.5});
    auto ds =
        RatingDataset::create(users, items, triples, Feedback::Explicit, {0.5, 4.0, 0.5});

    std::ostringstream first;
    save_dataset(ds, first);
    std::istringstream in(first.str());
    RatingDataset reloaded = load_dataset(in);
    std::ostringstream second;
    save_dataset(reloaded, second);
    CHECK(first.str() == second.str());

    std::multiset<std::string> a, b;
    for (const RatingTriple& t : ds.ratings())
        a.insert(std::to_string(t.user) + "," + std::to_string(t.item) + "," +
                 std::to_string(t.value));
    for (const RatingTriple& t : reloaded.ratings())
        b.insert(std::to_string(t.user) + "," + std::to_string(t.item) + "," +
                 std::to_string(t.value));
    CHECK(a == b);
}
