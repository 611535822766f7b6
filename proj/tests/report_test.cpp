#include <doctest.h>

#include <sstream>

#include "cfbench/report.hpp"

using namespace cfbench;

namespace {

EvalReport sample_report() {
    EvalReport r;
    r.method = "mf_exp";
    r.dataset = "movielens";
    r.protocol = "kfold5";
    r.seed = 42;
    r.ks = {1, 2, 3};
    r.spearman_rho = 0.3275;
    r.precision_at = {{1, 0.1441}, {2, 0.2602}, {3, 0.3651}};
    FoldMetrics fm;
    fm.rho = 0.3275;
    fm.precision = {{1, 0.1441}, {2, 0.2602}, {3, 0.3651}};
    fm.rho_eligible = 900;
    fm.rho_excluded = 43;
    fm.precision_eligible = {{1, 940}, {2, 930}, {3, 920}};
    fm.precision_excluded = {{1, 3}, {2, 13}, {3, 23}};
    r.per_fold.push_back(fm);
    PerUserRow row;
    row.fold = 0;
    row.user = 7;
    row.rho = 0.5;
    row.precision[1] = 1.0;
    row.precision[2] = std::nullopt;
    row.precision[3] = std::nullopt;
    r.per_user.push_back(row);
    return r;
}

}  // namespace

TEST_CASE("report csv header and shape") {
    std::ostringstream os;
    emit_report(sample_report(), OutputFormat::Csv, os);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "method,dataset,rho,p@1,p@2,p@3");
    REQUIRE(std::getline(is, line));
    CHECK(line == "mf_exp,movielens,0.328,0.144,0.260,0.365");
    REQUIRE(std::getline(is, line));
    CHECK(line == "mf_exp,movielens/fold0,0.328,0.144,0.260,0.365");
}

TEST_CASE("emission is byte stable") {
    std::ostringstream a, b;
    emit_report(sample_report(), OutputFormat::JsonLines, a);
    emit_report(sample_report(), OutputFormat::JsonLines, b);
    CHECK(a.str() == b.str());
}

TEST_CASE("empty table emits the header only") {
    ComparisonTable t;
    t.scenario = "explicit";
    t.ks = {1, 2, 3};
    std::ostringstream os;
    emit_table(t, OutputFormat::Csv, os);
    CHECK(os.str() == "method,dataset,rho,p@1,p@2,p@3\n");
}

TEST_CASE("improvement row is computed from the cells") {
    ComparisonTable t;
    t.scenario = "bias";
    t.ks = {1};
    t.methods = {"mf_exp", "mf_bias"};
    t.datasets = {"movielens"};
    t.cells["mf_exp"]["movielens"] = {0.328, {{1, 0.144}}};
    t.cells["mf_bias"]["movielens"] = {0.351, {{1, 0.152}}};
    t.improvements.push_back({"improvement_bias_mf", "mf_exp", "mf_bias"});

    auto rho = t.improvement_percent(t.improvements[0], "movielens", 0);
    REQUIRE(rho);
    CHECK(*rho == doctest::Approx(7.0).epsilon(1e-12));  // (0.351-0.328)/0.328 -> 7.0%
    auto p1 = t.improvement_percent(t.improvements[0], "movielens", 1);
    REQUIRE(p1);
    CHECK(*p1 == doctest::Approx(5.6).epsilon(1e-12));

    std::ostringstream os;
    emit_table(t, OutputFormat::Csv, os);
    std::string expect =
        "method,dataset,rho,p@1\n"
        "mf_exp,movielens,0.328,0.144\n"
        "mf_bias,movielens,0.351,0.152\n"
        "improvement_bias_mf,movielens,7.0,5.6\n";
    CHECK(os.str() == expect);
}

TEST_CASE("per-user dump carries exclusion flags and reproduces aggregates") {
    EvalReport r = sample_report();
    std::ostringstream os;
    write_per_user_dump(r, os);
    std::istringstream is(os.str());
    std::string header, row;
    REQUIRE(std::getline(is, header));
    CHECK(header == "fold user rho p@1 p@2 p@3 flags");
    REQUIRE(std::getline(is, row));
    CHECK(row == "0 7 0.5 1 NA NA p@2_excluded,p@3_excluded");
}
