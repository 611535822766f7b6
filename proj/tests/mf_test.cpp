#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cfbench/mf.hpp"
#include "cfbench/rng.hpp"

using namespace cfbench;

namespace {

RatingDataset tiny_explicit() {
    return RatingDataset::create({1, 2, 3, 4, 5}, {10, 11, 12, 13, 14},
                                 {{1, 10, 4.0}, {1, 11, 3.0}, {2, 10, 5.0}, {2, 12, 2.0},
                                  {3, 11, 1.0}, {3, 13, 4.0}, {4, 12, 3.0}, {4, 14, 5.0},
                                  {5, 10, 2.0}, {5, 14, 1.0}},
                                 Feedback::Explicit, {1.0, 5.0, 1.0});
}

RatingDataset tiny_implicit() {
    return RatingDataset::create({1, 2, 3}, {10, 11, 12},
                                 {{1, 10, 120.0}, {1, 11, 3.0}, {2, 10, 40.0},
                                  {2, 12, 7.0}, {3, 11, 5.0}},
                                 Feedback::Implicit);
}

// Second, independent evaluation of the losses, working straight off the
// dataset and the model tables.
double reference_loss(const FactorModel& m, const RatingDataset& data,
                      const std::vector<double>* conf, const SideInfo* side) {
    auto dotv = [&](const double* a, const double* b) {
        double s = 0;
        for (int t = 0; t < m.d; ++t) s += a[t] * b[t];
        return s;
    };
    auto nrm = [&](const double* a) { return dotv(a, a); };
    double L = 0;
    for (std::size_t k = 0; k < data.ratings().size(); ++k) {
        const RatingTriple& t = data.ratings()[k];
        const double* xu = m.user_vec(*m.user_slot(t.user));
        const double* yi = m.item_vec(*m.item_slot(t.item));
        const double target = conf ? 1.0 : t.value;
        const double weight = conf ? (*conf)[k] : 1.0;
        double e = target - dotv(xu, yi);
        double reg = nrm(xu) + nrm(yi);
        if (m.variant == MfVariant::Bias) {
            e -= m.mu + m.b_user[*m.user_slot(t.user)] + m.b_item[*m.item_slot(t.item)];
            reg += std::pow(m.b_user[*m.user_slot(t.user)], 2) +
                   std::pow(m.b_item[*m.item_slot(t.item)], 2);
        }
        L += 0.5 * (weight * e * e + m.lambda * reg);
    }
    if (side) {
        const SideInfo obs = mf_side_observations(*side);
        for (const UserAttribute& a : obs.user_attributes) {
            const double* xu = m.user_vec(*m.user_slot(a.user));
            const double* w = &m.w[*m.user_attr_slot(a.attribute) * (std::size_t)m.d];
            const double e = a.value - dotv(xu, w);
            L += 0.5 * (e * e + m.lambda * (nrm(xu) + nrm(w)));
        }
        for (const ItemAttribute& a : obs.item_attributes) {
            const double* z = &m.z[*m.item_attr_slot(a.attribute) * (std::size_t)m.d];
            const double* yi = m.item_vec(*m.item_slot(a.item));
            const double e = a.value - dotv(z, yi);
            L += 0.5 * (e * e + m.lambda * (nrm(z) + nrm(yi)));
        }
    }
    return L;
}

}  // namespace

TEST_CASE("single gradient step arithmetic") {
    // one observation r=4, d=1, x=[1], y=[1], lambda=0, eta=0.05: e=3
    std::vector<double> x{1.0}, y{1.0};
    sgd_pair_update(x, y, 3.0, 1.0, 0.05, 0.0);
    CHECK(x[0] == doctest::Approx(1.15).epsilon(1e-15));
    CHECK(y[0] == doctest::Approx(1.15).epsilon(1e-15));

    SUBCASE("zero error is a fixed point") {
        std::vector<double> a{1.0}, b{1.0};
        sgd_pair_update(a, b, 0.0, 1.0, 0.05, 0.0);
        CHECK(a[0] == 1.0);
        CHECK(b[0] == 1.0);
    }
    SUBCASE("confidence scales the data term only") {
        std::vector<double> a{1.0}, b{1.0};
        sgd_pair_update(a, b, 3.0, 2.0, 0.05, 0.0);
        CHECK(a[0] == doctest::Approx(1.30).epsilon(1e-15));
    }
}

TEST_CASE("zero learning rate keeps the initialization") {
    TrainConfig cfg;
    cfg.d = 3;
    cfg.lambda = 0.0;
    cfg.eta = 0.0;
    cfg.epochs = 5;
    cfg.seed = 11;
    FactorModel m = train_mf_exp(tiny_explicit(), cfg);

    // replay the init stream: users then items, d coordinates each
    Rng init(derive_seed(cfg.seed, "init"));
    for (double v : m.x) CHECK(v == init.uniform(-cfg.init_scale, cfg.init_scale));
    for (double v : m.y) CHECK(v == init.uniform(-cfg.init_scale, cfg.init_scale));
}

TEST_CASE("objective values") {
    SUBCASE("single pair with error 3 and lambda 0") {
        auto ds = RatingDataset::create({1}, {10}, {{1, 10, 4.0}}, Feedback::Explicit,
                                        {1, 5, 1});
        TrainConfig cfg;
        cfg.d = 1;
        cfg.lambda = 0.0;
        cfg.eta = 0.0;
        cfg.epochs = 1;
        cfg.init_scale = 0.0;  // x = y = 0, so e = 4
        FactorModel m = train_mf_exp(ds, cfg);
        CHECK(objective(m, ds) == doctest::Approx(8.0).epsilon(1e-15));  // 0.5 * 4^2
        // hand-build e = 3: x = [1], y = [1], r = 4
        m.x = {1.0};
        m.y = {1.0};
        CHECK(objective(m, ds) == doctest::Approx(4.5).epsilon(1e-15));
    }
    SUBCASE("zero-error model scores zero") {
        auto ds = RatingDataset::create({1}, {10}, {{1, 10, 1.0}}, Feedback::Explicit,
                                        {1, 1, 1});
        TrainConfig cfg;
        cfg.d = 1;
        cfg.lambda = 0.0;
        cfg.eta = 0.0;
        cfg.epochs = 1;
        FactorModel m = train_mf_exp(ds, cfg);
        m.x = {1.0};
        m.y = {1.0};
        CHECK(objective(m, ds) == 0.0);
    }
    SUBCASE("matches an independently coded evaluator") {
        TrainConfig cfg;
        cfg.seed = 3;
        cfg.epochs = 4;
        auto exp_ds = tiny_explicit();
        FactorModel exp_m = train_mf_exp(exp_ds, cfg);
        CHECK(objective(exp_m, exp_ds) ==
              doctest::Approx(reference_loss(exp_m, exp_ds, nullptr, nullptr))
                  .epsilon(1e-12));

        ImplicitDataset imp_ds = binarize_and_confidence(tiny_implicit(), 0.01);
        FactorModel imp_m = train_mf_imp(imp_ds, cfg);
        CHECK(objective(imp_m, imp_ds) ==
              doctest::Approx(reference_loss(imp_m, imp_ds.base(), &imp_ds.confidences(),
                                             nullptr))
                  .epsilon(1e-12));

        FactorModel bias_m = train_mf_bias(exp_ds, cfg);
        CHECK(objective(bias_m, exp_ds) ==
              doctest::Approx(reference_loss(bias_m, exp_ds, nullptr, nullptr))
                  .epsilon(1e-12));

        SideInfo side;
        side.user_attributes = {{1, "gender:F", 1.0}, {2, "gender:F", 1.0}};
        side.item_attributes = {{"genre:a", 10, 1.0}, {"genre:a", 12, 1.0}};
        side.social_links = {{1, 3}};
        FactorModel side_m = train_mf_side(exp_ds, side, cfg);
        CHECK(objective(side_m, exp_ds, side) ==
              doctest::Approx(reference_loss(side_m, exp_ds, nullptr, &side)).epsilon(1e-12));
    }
    SUBCASE("variant and data mismatch is an error") {
        TrainConfig cfg;
        FactorModel m = train_mf_exp(tiny_explicit(), cfg);
        CHECK_THROWS_AS(objective(m, binarize_and_confidence(tiny_implicit(), 0.01)),
                        ConfigError);
    }
}

TEST_CASE("gradient check") {
    TrainConfig cfg;
    cfg.seed = 17;
    cfg.epochs = 2;
    cfg.lambda = 0.3;
    auto exp_ds = tiny_explicit();

    SUBCASE("all four variants pass at 1e-4") {
        FactorModel exp_m = train_mf_exp(exp_ds, cfg);
        CHECK(gradient_check(exp_m, exp_ds, 1e-5) < 1e-4);

        ImplicitDataset imp_ds = binarize_and_confidence(tiny_implicit(), 0.01);
        FactorModel imp_m = train_mf_imp(imp_ds, cfg);
        CHECK(gradient_check(imp_m, imp_ds, 1e-5) < 1e-4);

        FactorModel bias_m = train_mf_bias(exp_ds, cfg);
        CHECK(gradient_check(bias_m, exp_ds, 1e-5) < 1e-4);

        SideInfo side;
        side.user_attributes = {{1, "gender:F", 1.0}, {4, "gender:F", 1.0}};
        side.item_attributes = {{"genre:a", 10, 1.0}};
        side.social_links = {{2, 3}};
        FactorModel side_m = train_mf_side(exp_ds, side, cfg);
        CHECK(gradient_check(side_m, exp_ds, side, 1e-5) < 1e-4);

        SideInfo imp_side;
        imp_side.social_links = {{1, 2}, {2, 3}};
        FactorModel side_imp = train_mf_side(imp_ds, imp_side, cfg);
        CHECK(gradient_check(side_imp, imp_ds, imp_side, 1e-5) < 1e-4);
    }
    SUBCASE("regularization-only gradient is linear and exact") {
        // target equals the prediction, so only the lambda terms remain and
        // the analytic gradient is lambda * parameter
        auto one = RatingDataset::create({1}, {10}, {{1, 10, 1.0}}, Feedback::Explicit,
                                         {1, 1, 1});
        FactorModel m;
        m.variant = MfVariant::Exp;
        m.d = 1;
        m.lambda = 0.3;
        m.user_ids = {1};
        m.item_ids = {10};
        m.x = {1.0};
        m.y = {1.0};
        m.rebuild_index();
        CHECK(objective(m, one) == doctest::Approx(0.3).epsilon(1e-15));
        CHECK(gradient_check(m, one, 1e-5) < 1e-10);
    }
    SUBCASE("zero model, zero data") {
        auto empty = RatingDataset::create({1}, {10}, {}, Feedback::Explicit, {1, 5, 1});
        TrainConfig zcfg = cfg;
        zcfg.init_scale = 0.0;
        zcfg.lambda = 0.0;
        FactorModel m = train_mf_exp(empty, zcfg);
        CHECK(gradient_check(m, empty, 1e-5) == 0.0);
    }
}

TEST_CASE("prediction") {
    FactorModel m;
    m.variant = MfVariant::Exp;
    m.d = 2;
    m.user_ids = {1};
    m.item_ids = {10};
    m.x = {1.0, 2.0};
    m.y = {3.0, 4.0};
    m.rebuild_index();

    CHECK(m.predict(1, 10).value == doctest::Approx(11.0).epsilon(1e-15));
    CHECK_FALSE(m.predict(1, 10).cold);

    SUBCASE("unknown item falls back to 0 and is flagged") {
        auto p = m.predict(1, 99);
        CHECK(p.value == 0.0);
        CHECK(p.cold);
    }
    SUBCASE("bias fallback keeps the known side") {
        m.variant = MfVariant::Bias;
        m.mu = 3.5;
        m.b_user = {0.2};
        m.b_item = {-0.1};
        auto p = m.predict(1, 99);
        CHECK(p.value == doctest::Approx(3.7).epsilon(1e-15));
        CHECK(p.cold);
        CHECK(m.predict(1, 10).value == doctest::Approx(3.5 + 0.2 - 0.1 + 11.0).epsilon(1e-15));
    }
}

TEST_CASE("training is bit-deterministic for a fixed seed") {
    TrainConfig cfg;
    cfg.seed = 123;
    cfg.epochs = 6;
    std::ostringstream a, b;
    save_model(train_mf_exp(tiny_explicit(), cfg), a);
    save_model(train_mf_exp(tiny_explicit(), cfg), b);
    CHECK(a.str() == b.str());

    cfg.seed = 124;
    std::ostringstream c;
    save_model(train_mf_exp(tiny_explicit(), cfg), c);
    CHECK(a.str() != c.str());
}

TEST_CASE("model serialization reloads bit-exactly") {
    TrainConfig cfg;
    cfg.seed = 5;
    cfg.epochs = 3;
    SideInfo side;
    side.user_attributes = {{1, "age:18-24", 1.0}, {2, "age:18-24", 1.0}};
    side.item_attributes = {{"genre:a", 10, 1.0}};
    FactorModel m = train_mf_side(tiny_explicit(), side, cfg);

    std::ostringstream first;
    save_model(m, first);
    std::istringstream in(first.str());
    FactorModel re = load_model(in);
    std::ostringstream second;
    save_model(re, second);
    CHECK(first.str() == second.str());
    CHECK(re.predict(1, 10).value == m.predict(1, 10).value);
}

TEST_CASE("objective history is non-increasing and ends converged") {
    TrainConfig cfg;
    cfg.seed = 29;
    cfg.epochs = 60;
    cfg.eta = 0.05;
    FactorModel m = train_mf_exp(tiny_explicit(), cfg);
    REQUIRE(m.objective_history.size() >= 2);
    for (std::size_t e = 1; e < m.objective_history.size(); ++e)
        CHECK(m.objective_history[e] <= m.objective_history[e - 1]);
    CHECK(m.objective_history.front() > m.objective_history.back());
}

TEST_CASE("implicit training with unit confidence coincides with explicit on p") {
    // alpha * r -> 0 makes c_ui -> 1, reducing the implicit update to the
    // explicit rule applied to the binarized target.
    auto imp = binarize_and_confidence(
        RatingDataset::create({1, 2}, {10, 11}, {{1, 10, 1.0}, {2, 11, 1.0}},
                              Feedback::Implicit),
        1e-13);
    auto exp_on_p = RatingDataset::create({1, 2}, {10, 11},
                                          {{1, 10, 1.0}, {2, 11, 1.0}}, Feedback::Explicit,
                                          {1.0, 1.0, 1.0});
    TrainConfig cfg;
    cfg.seed = 8;
    cfg.epochs = 10;
    FactorModel a = train_mf_imp(imp, cfg);
    FactorModel b = train_mf_exp(exp_on_p, cfg);
    REQUIRE(a.x.size() == b.x.size());
    for (std::size_t k = 0; k < a.x.size(); ++k)
        CHECK(a.x[k] == doctest::Approx(b.x[k]).epsilon(1e-9));
}

TEST_CASE("bias on binarized implicit data decays toward zero parameters") {
    // All targets equal the global mean, so zero parameters are optimal for
    // the data term and regularization only shrinks the initialization.
    std::vector<RatingTriple> triples;
    std::vector<EntityId> users, items;
    for (EntityId u = 1; u <= 4; ++u) {
        users.push_back(u);
        for (EntityId i = 10; i <= 13; ++i) triples.push_back({u, i, 1.0});
    }
    for (EntityId i = 10; i <= 13; ++i) items.push_back(i);
    auto ones = RatingDataset::create(users, items, triples, Feedback::Explicit,
                                      {1.0, 1.0, 1.0});
    TrainConfig cfg;
    cfg.seed = 2;
    cfg.epochs = 80;
    cfg.lambda = 0.3;
    FactorModel m = train_mf_bias(ones, cfg);
    CHECK(m.mu == 1.0);
    for (double b : m.b_user) CHECK(std::abs(b) < 0.05);
    for (double b : m.b_item) CHECK(std::abs(b) < 0.05);
    for (double v : m.x) CHECK(std::abs(v) <= cfg.init_scale);
    for (double v : m.y) CHECK(std::abs(v) <= cfg.init_scale);
}

TEST_CASE("side term moves a cold user off its initialization") {
    // user 3 has no ratings but shares an attribute with user 1
    auto ds = RatingDataset::create({1, 2, 3}, {10, 11},
                                    {{1, 10, 4.0}, {2, 11, 2.0}}, Feedback::Explicit,
                                    {1, 5, 1});
    SideInfo side;
    side.user_attributes = {{1, "occupation:artist", 1.0}, {3, "occupation:artist", 1.0}};
    TrainConfig cfg;
    cfg.seed = 31;
    cfg.epochs = 20;
    FactorModel m = train_mf_side(ds, side, cfg);

    Rng init(derive_seed(cfg.seed, "init"));
    std::vector<double> x0(m.x.size());
    for (double& v : x0) v = init.uniform(-cfg.init_scale, cfg.init_scale);
    const std::size_t slot = *m.user_slot(3);
    double moved = 0;
    for (int t = 0; t < m.d; ++t)
        moved += std::abs(m.x[slot * (std::size_t)m.d + t] - x0[slot * (std::size_t)m.d + t]);
    CHECK(moved > 0.0);

    SUBCASE("empty side info is a configuration error") {
        CHECK_THROWS_AS(train_mf_side(ds, SideInfo{}, cfg), ConfigError);
    }
}

TEST_CASE("divergence raises with the epoch attached") {
    TrainConfig cfg;
    cfg.seed = 1;
    cfg.eta = 50.0;  // far past stability
    cfg.epochs = 200;
    try {
        train_mf_exp(tiny_explicit(), cfg);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.epoch() >= 1);
    }
}
