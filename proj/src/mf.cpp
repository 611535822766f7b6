#include "cfbench/mf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <span>
#include <sstream>

#include "cfbench/rng.hpp"

namespace cfbench {

void sgd_pair_update(std::span<double> a, std::span<double> b, double e, double weight,
                     double eta, double lambda) {
    const double we = weight * e;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double at = a[t];
        const double bt = b[t];
        a[t] = at + eta * (we * bt - lambda * at);
        b[t] = bt + eta * (we * at - lambda * bt);
    }
}

std::string to_string(MfVariant v) {
    switch (v) {
        case MfVariant::Exp: return "exp";
        case MfVariant::Imp: return "imp";
        case MfVariant::Bias: return "bias";
        default: return "side";
    }
}

void TrainConfig::validate() const {
    if (d < 1) throw ConfigError("TrainConfig: d must be >= 1");
    if (lambda < 0) throw ConfigError("TrainConfig: lambda must be >= 0");
    if (eta < 0) throw ConfigError("TrainConfig: eta must be >= 0");
    if (epochs < 1) throw ConfigError("TrainConfig: epochs must be >= 1");
    if (init_scale < 0) throw ConfigError("TrainConfig: init_scale must be >= 0");
}

std::optional<std::size_t> FactorModel::user_slot(EntityId u) const {
    auto it = user_index_.find(u);
    if (it == user_index_.end()) return std::nullopt;
    return it->second;
}
std::optional<std::size_t> FactorModel::item_slot(EntityId i) const {
    auto it = item_index_.find(i);
    if (it == item_index_.end()) return std::nullopt;
    return it->second;
}
std::optional<std::size_t> FactorModel::user_attr_slot(const std::string& a) const {
    auto it = user_attr_index_.find(a);
    if (it == user_attr_index_.end()) return std::nullopt;
    return it->second;
}
std::optional<std::size_t> FactorModel::item_attr_slot(const std::string& a) const {
    auto it = item_attr_index_.find(a);
    if (it == item_attr_index_.end()) return std::nullopt;
    return it->second;
}

void FactorModel::rebuild_index() {
    user_index_.clear();
    item_index_.clear();
    user_attr_index_.clear();
    item_attr_index_.clear();
    for (std::size_t k = 0; k < user_ids.size(); ++k) user_index_[user_ids[k]] = k;
    for (std::size_t k = 0; k < item_ids.size(); ++k) item_index_[item_ids[k]] = k;
    for (std::size_t k = 0; k < user_attr_ids.size(); ++k) user_attr_index_[user_attr_ids[k]] = k;
    for (std::size_t k = 0; k < item_attr_ids.size(); ++k) item_attr_index_[item_attr_ids[k]] = k;
}

namespace {

double dot(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int t = 0; t < d; ++t) s += a[t] * b[t];
    return s;
}

double sqnorm(const double* a, int d) { return dot(a, a, d); }

// One indexed observation; weight is the confidence level (1 when unused).
struct Obs {
    std::size_t a;
    std::size_t b;
    double value;
    double weight;
};

struct Workspace {
    FactorModel model;
    TrainConfig cfg;
    std::vector<Obs> ratings;  // a: user slot, b: item slot
    std::vector<Obs> uattrs;   // a: user slot, b: user-attr slot
    std::vector<Obs> iattrs;   // a: item-attr slot, b: item slot
};

void init_table(std::vector<double>& tab, std::size_t n, int d, double scale, Rng& rng) {
    tab.resize(n * static_cast<std::size_t>(d));
    for (double& v : tab) v = rng.uniform(-scale, scale);
}

double batch_objective(const Workspace& ws) {
    const FactorModel& m = ws.model;
    const int d = m.d;
    const double lambda = ws.cfg.lambda;
    const bool biased = m.variant == MfVariant::Bias;

    double L = 0.0;
    for (const Obs& o : ws.ratings) {
        const double* xu = &m.x[o.a * static_cast<std::size_t>(d)];
        const double* yi = &m.y[o.b * static_cast<std::size_t>(d)];
        double e = o.value - dot(xu, yi, d);
        double reg = sqnorm(xu, d) + sqnorm(yi, d);
        if (biased) {
            e -= m.mu + m.b_user[o.a] + m.b_item[o.b];
            reg += m.b_user[o.a] * m.b_user[o.a] + m.b_item[o.b] * m.b_item[o.b];
        }
        L += 0.5 * (o.weight * e * e + lambda * reg);
    }
    for (const Obs& o : ws.uattrs) {
        const double* xu = &m.x[o.a * static_cast<std::size_t>(d)];
        const double* wsv = &m.w[o.b * static_cast<std::size_t>(d)];
        const double e = o.value - dot(xu, wsv, d);
        L += 0.5 * (e * e + lambda * (sqnorm(xu, d) + sqnorm(wsv, d)));
    }
    for (const Obs& o : ws.iattrs) {
        const double* zt = &m.z[o.a * static_cast<std::size_t>(d)];
        const double* yi = &m.y[o.b * static_cast<std::size_t>(d)];
        const double e = o.value - dot(zt, yi, d);
        L += 0.5 * (e * e + lambda * (sqnorm(zt, d) + sqnorm(yi, d)));
    }
    return L;
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Shuffled per-observation sweeps, batch objective once per epoch, stop on
// small relative improvement (also catches any increase).
void run_epochs(Workspace& ws) {
    FactorModel& m = ws.model;
    const int d = m.d;
    const double eta = ws.cfg.eta;
    const double lambda = ws.cfg.lambda;
    const bool biased = m.variant == MfVariant::Bias;

    Rng sched(derive_seed(ws.cfg.seed, "schedule"));
    std::vector<std::size_t> r_idx(ws.ratings.size()), a_idx(ws.uattrs.size()),
        b_idx(ws.iattrs.size());
    for (std::size_t k = 0; k < r_idx.size(); ++k) r_idx[k] = k;
    for (std::size_t k = 0; k < a_idx.size(); ++k) a_idx[k] = k;
    for (std::size_t k = 0; k < b_idx.size(); ++k) b_idx[k] = k;

    m.objective_history.clear();
    m.objective_history.push_back(batch_objective(ws));

    std::vector<double> snap_x, snap_y, snap_w, snap_z, snap_bu, snap_bi;
    int rejections = 0;
    for (int epoch = 1; epoch <= ws.cfg.epochs; ++epoch) {
        snap_x = m.x;
        snap_y = m.y;
        snap_w = m.w;
        snap_z = m.z;
        snap_bu = m.b_user;
        snap_bi = m.b_item;

        sched.shuffle(r_idx);
        for (std::size_t k : r_idx) {
            const Obs& o = ws.ratings[k];
            double* xu = &m.x[o.a * static_cast<std::size_t>(d)];
            double* yi = &m.y[o.b * static_cast<std::size_t>(d)];
            double e = o.value - dot(xu, yi, d);
            if (biased) {
                e -= m.mu + m.b_user[o.a] + m.b_item[o.b];
                m.b_user[o.a] += eta * (e - lambda * m.b_user[o.a]);
                m.b_item[o.b] += eta * (e - lambda * m.b_item[o.b]);
            }
            sgd_pair_update({xu, static_cast<std::size_t>(d)},
                            {yi, static_cast<std::size_t>(d)}, e, o.weight, eta, lambda);
        }

        sched.shuffle(a_idx);
        for (std::size_t k : a_idx) {
            const Obs& o = ws.uattrs[k];
            double* xu = &m.x[o.a * static_cast<std::size_t>(d)];
            double* wsv = &m.w[o.b * static_cast<std::size_t>(d)];
            const double e = o.value - dot(xu, wsv, d);
            sgd_pair_update({xu, static_cast<std::size_t>(d)},
                            {wsv, static_cast<std::size_t>(d)}, e, 1.0, eta, lambda);
        }

        sched.shuffle(b_idx);
        for (std::size_t k : b_idx) {
            const Obs& o = ws.iattrs[k];
            double* zt = &m.z[o.a * static_cast<std::size_t>(d)];
            double* yi = &m.y[o.b * static_cast<std::size_t>(d)];
            const double e = o.value - dot(zt, yi, d);
            sgd_pair_update({zt, static_cast<std::size_t>(d)},
                            {yi, static_cast<std::size_t>(d)}, e, 1.0, eta, lambda);
        }

        if (!all_finite(m.x) || !all_finite(m.y) || !all_finite(m.w) || !all_finite(m.z) ||
            !all_finite(m.b_user) || !all_finite(m.b_item))
            throw DivergenceError("training diverged at epoch " + std::to_string(epoch),
                                  epoch);
        const double obj = batch_objective(ws);
        if (!std::isfinite(obj))
            throw DivergenceError("training diverged at epoch " + std::to_string(epoch),
                                  epoch);

        const double prev = m.objective_history.back();
        if (obj > prev * 1.5 + 1e-9)
            throw DivergenceError("objective jumped at epoch " + std::to_string(epoch) +
                                      " (" + std::to_string(prev) + " -> " +
                                      std::to_string(obj) + ")",
                                  epoch);
        if (obj > prev) {
            // A shuffled sweep can bounce the batch objective; reject the
            // epoch and retry with the next shuffle. Three rejections in a
            // row mean the noise floor is reached.
            m.x = snap_x;
            m.y = snap_y;
            m.w = snap_w;
            m.z = snap_z;
            m.b_user = snap_bu;
            m.b_item = snap_bi;
            if (++rejections >= 3) break;
            continue;
        }
        rejections = 0;
        m.objective_history.push_back(obj);
        m.epochs_run = epoch;
        if (prev - obj <= ws.cfg.early_stop_rel * std::max(std::abs(prev), 1e-12)) break;
    }
}

Workspace make_workspace(const RatingDataset& train, const TrainConfig& cfg,
                         MfVariant variant, const std::vector<double>* confidences) {
    cfg.validate();
    Workspace ws;
    ws.cfg = cfg;
    FactorModel& m = ws.model;
    m.variant = variant;
    m.d = cfg.d;
    m.lambda = cfg.lambda;
    m.user_ids = train.users();
    m.item_ids = train.items();
    m.rebuild_index();

    ws.ratings.reserve(train.ratings().size());
    const bool implicit_target = confidences != nullptr;
    double sum = 0.0;
    for (std::size_t k = 0; k < train.ratings().size(); ++k) {
        const RatingTriple& t = train.ratings()[k];
        Obs o;
        o.a = *m.user_slot(t.user);
        o.b = *m.item_slot(t.item);
        o.value = implicit_target ? 1.0 : t.value;  // binarized p_ui for implicit data
        o.weight = implicit_target ? (*confidences)[k] : 1.0;
        ws.ratings.push_back(o);
        sum += t.value;
    }

    Rng init(derive_seed(cfg.seed, "init"));
    init_table(m.x, m.user_ids.size(), m.d, cfg.init_scale, init);
    init_table(m.y, m.item_ids.size(), m.d, cfg.init_scale, init);
    if (variant == MfVariant::Bias) {
        if (train.ratings().empty()) throw ConfigError("train_mf_bias: empty training set");
        m.mu = sum / static_cast<double>(train.ratings().size());
        m.b_user.assign(m.user_ids.size(), 0.0);
        m.b_item.assign(m.item_ids.size(), 0.0);
    }
    return ws;
}

void attach_side(Workspace& ws, const SideInfo& side, Rng& init) {
    FactorModel& m = ws.model;
    const SideInfo obs = mf_side_observations(side);
    if (obs.user_attributes.empty() && obs.item_attributes.empty())
        throw ConfigError("train_mf_side: side info has no observations");

    std::set<std::string> ua, ia;
    for (const UserAttribute& a : obs.user_attributes) ua.insert(a.attribute);
    for (const ItemAttribute& a : obs.item_attributes) ia.insert(a.attribute);
    m.user_attr_ids.assign(ua.begin(), ua.end());
    m.item_attr_ids.assign(ia.begin(), ia.end());
    m.rebuild_index();

    init_table(m.w, m.user_attr_ids.size(), m.d, ws.cfg.init_scale, init);
    init_table(m.z, m.item_attr_ids.size(), m.d, ws.cfg.init_scale, init);

    for (const UserAttribute& a : obs.user_attributes) {
        auto us = m.user_slot(a.user);
        if (!us) throw DataError("side info references user " + std::to_string(a.user) +
                                 " outside the training universe");
        ws.uattrs.push_back({*us, *m.user_attr_slot(a.attribute), a.value, 1.0});
    }
    for (const ItemAttribute& a : obs.item_attributes) {
        auto is = m.item_slot(a.item);
        if (!is) throw DataError("side info references item " + std::to_string(a.item) +
                                 " outside the training universe");
        ws.iattrs.push_back({*m.item_attr_slot(a.attribute), *is, a.value, 1.0});
    }
}

}  // namespace

SideInfo mf_side_observations(const SideInfo& side) {
    SideInfo out;
    std::set<std::pair<EntityId, std::string>> seen_u;
    for (const UserAttribute& a : side.user_attributes)
        if (seen_u.emplace(a.user, a.attribute).second) out.user_attributes.push_back(a);
    for (const SocialLink& l : side.social_links) {
        const std::pair<EntityId, EntityId> dirs[2] = {{l.from, l.to}, {l.to, l.from}};
        for (const auto& [u, v] : dirs) {
            std::string attr = "user:" + std::to_string(v);
            if (seen_u.emplace(u, attr).second)
                out.user_attributes.push_back({u, std::move(attr), 1.0});
        }
    }
    std::set<std::pair<std::string, EntityId>> seen_i;
    for (const ItemAttribute& a : side.item_attributes)
        if (seen_i.emplace(a.attribute, a.item).second) out.item_attributes.push_back(a);
    return out;
}

FactorModel train_mf_exp(const RatingDataset& train, const TrainConfig& cfg) {
    if (train.kind() != Feedback::Explicit)
        throw ConfigError("train_mf_exp requires explicit feedback data");
    Workspace ws = make_workspace(train, cfg, MfVariant::Exp, nullptr);
    run_epochs(ws);
    return std::move(ws.model);
}

FactorModel train_mf_imp(const ImplicitDataset& train, const TrainConfig& cfg) {
    Workspace ws = make_workspace(train.base(), cfg, MfVariant::Imp, &train.confidences());
    run_epochs(ws);
    return std::move(ws.model);
}

FactorModel train_mf_bias(const RatingDataset& train, const TrainConfig& cfg) {
    if (train.kind() != Feedback::Explicit)
        throw ConfigError("train_mf_bias requires explicit feedback data");
    Workspace ws = make_workspace(train, cfg, MfVariant::Bias, nullptr);
    run_epochs(ws);
    return std::move(ws.model);
}

FactorModel train_mf_side(const RatingDataset& train, const SideInfo& side,
                          const TrainConfig& cfg) {
    if (train.kind() != Feedback::Explicit)
        throw ConfigError("explicit train_mf_side called with implicit data");
    Workspace ws = make_workspace(train, cfg, MfVariant::Side, nullptr);
    Rng init(derive_seed(cfg.seed, "init-side"));
    attach_side(ws, side, init);
    run_epochs(ws);
    return std::move(ws.model);
}

FactorModel train_mf_side(const ImplicitDataset& train, const SideInfo& side,
                          const TrainConfig& cfg) {
    Workspace ws = make_workspace(train.base(), cfg, MfVariant::Side, &train.confidences());
    Rng init(derive_seed(cfg.seed, "init-side"));
    attach_side(ws, side, init);
    run_epochs(ws);
    return std::move(ws.model);
}

FactorModel::Prediction FactorModel::predict(EntityId u, EntityId i) const {
    auto us = user_slot(u);
    auto is = item_slot(i);
    if (!us || !is) {
        double fallback = 0.0;
        if (variant == MfVariant::Bias) {
            fallback = mu;
            if (us) fallback += b_user[*us];
            if (is) fallback += b_item[*is];
        }
        return {fallback, true};
    }
    double value = dot(user_vec(*us), item_vec(*is), d);
    if (variant == MfVariant::Bias) value += mu + b_user[*us] + b_item[*is];
    return {value, false};
}

namespace {

// Rebuilds the observation lists for an existing model so the objective and
// the analytic gradient can be evaluated against arbitrary (matching) data.
Workspace workspace_for(const FactorModel& model, const RatingDataset& data,
                        const std::vector<double>* confidences, const SideInfo* side) {
    Workspace ws;
    ws.model = model;
    ws.cfg.d = model.d;
    ws.cfg.lambda = model.lambda;
    for (std::size_t k = 0; k < data.ratings().size(); ++k) {
        const RatingTriple& t = data.ratings()[k];
        auto us = ws.model.user_slot(t.user);
        auto is = ws.model.item_slot(t.item);
        if (!us || !is)
            throw DataError("objective: data references entities unknown to the model");
        ws.ratings.push_back({*us, *is, confidences ? 1.0 : t.value,
                              confidences ? (*confidences)[k] : 1.0});
    }
    if (side) {
        const SideInfo obs = mf_side_observations(*side);
        for (const UserAttribute& a : obs.user_attributes) {
            auto us = ws.model.user_slot(a.user);
            auto as = ws.model.user_attr_slot(a.attribute);
            if (!us || !as)
                throw DataError("objective: side observation unknown to the model");
            ws.uattrs.push_back({*us, *as, a.value, 1.0});
        }
        for (const ItemAttribute& a : obs.item_attributes) {
            auto is = ws.model.item_slot(a.item);
            auto as = ws.model.item_attr_slot(a.attribute);
            if (!is || !as)
                throw DataError("objective: side observation unknown to the model");
            ws.iattrs.push_back({*as, *is, a.value, 1.0});
        }
    }
    return ws;
}

void require_variant(const FactorModel& m, MfVariant want, const char* what) {
    if (m.variant != want)
        throw ConfigError(std::string(what) + ": model variant is " + to_string(m.variant));
}

struct GradTables {
    std::vector<double> x, y, w, z, b_user, b_item;
};

GradTables analytic_gradient(const Workspace& ws, double lambda) {
    const FactorModel& m = ws.model;
    const int d = m.d;
    GradTables g;
    g.x.assign(m.x.size(), 0.0);
    g.y.assign(m.y.size(), 0.0);
    g.w.assign(m.w.size(), 0.0);
    g.z.assign(m.z.size(), 0.0);
    g.b_user.assign(m.b_user.size(), 0.0);
    g.b_item.assign(m.b_item.size(), 0.0);
    const bool biased = m.variant == MfVariant::Bias;

    for (const Obs& o : ws.ratings) {
        const double* xu = &m.x[o.a * static_cast<std::size_t>(d)];
        const double* yi = &m.y[o.b * static_cast<std::size_t>(d)];
        double e = o.value - dot(xu, yi, d);
        if (biased) e -= m.mu + m.b_user[o.a] + m.b_item[o.b];
        const double we = o.weight * e;
        for (int t = 0; t < d; ++t) {
            g.x[o.a * static_cast<std::size_t>(d) + t] += -we * yi[t] + lambda * xu[t];
            g.y[o.b * static_cast<std::size_t>(d) + t] += -we * xu[t] + lambda * yi[t];
        }
        if (biased) {
            g.b_user[o.a] += -e + lambda * m.b_user[o.a];
            g.b_item[o.b] += -e + lambda * m.b_item[o.b];
        }
    }
    for (const Obs& o : ws.uattrs) {
        const double* xu = &m.x[o.a * static_cast<std::size_t>(d)];
        const double* wsv = &m.w[o.b * static_cast<std::size_t>(d)];
        const double e = o.value - dot(xu, wsv, d);
        for (int t = 0; t < d; ++t) {
            g.x[o.a * static_cast<std::size_t>(d) + t] += -e * wsv[t] + lambda * xu[t];
            g.w[o.b * static_cast<std::size_t>(d) + t] += -e * xu[t] + lambda * wsv[t];
        }
    }
    for (const Obs& o : ws.iattrs) {
        const double* zt = &m.z[o.a * static_cast<std::size_t>(d)];
        const double* yi = &m.y[o.b * static_cast<std::size_t>(d)];
        const double e = o.value - dot(zt, yi, d);
        for (int t = 0; t < d; ++t) {
            g.z[o.a * static_cast<std::size_t>(d) + t] += -e * yi[t] + lambda * zt[t];
            g.y[o.b * static_cast<std::size_t>(d) + t] += -e * zt[t] + lambda * yi[t];
        }
    }
    return g;
}

double check_gradients(Workspace ws, double lambda, double epsilon) {
    ws.cfg.lambda = lambda;
    const GradTables g = analytic_gradient(ws, lambda);

    std::vector<std::pair<std::vector<double>*, const std::vector<double>*>> tables = {
        {&ws.model.x, &g.x},           {&ws.model.y, &g.y},
        {&ws.model.w, &g.w},           {&ws.model.z, &g.z},
        {&ws.model.b_user, &g.b_user}, {&ws.model.b_item, &g.b_item}};

    double worst = 0.0;
    for (auto& [params, grads] : tables) {
        for (std::size_t k = 0; k < params->size(); ++k) {
            const double orig = (*params)[k];
            (*params)[k] = orig + epsilon;
            const double hi = batch_objective(ws);
            (*params)[k] = orig - epsilon;
            const double lo = batch_objective(ws);
            (*params)[k] = orig;
            const double numeric = (hi - lo) / (2.0 * epsilon);
            const double analytic = (*grads)[k];
            const double rel = std::abs(numeric - analytic) /
                               std::max({1.0, std::abs(numeric), std::abs(analytic)});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace

double objective(const FactorModel& model, const RatingDataset& data) {
    if (model.variant != MfVariant::Exp && model.variant != MfVariant::Bias)
        throw ConfigError("objective: rating-only data requires an exp or bias model");
    return batch_objective(workspace_for(model, data, nullptr, nullptr));
}

double objective(const FactorModel& model, const ImplicitDataset& data) {
    require_variant(model, MfVariant::Imp, "objective");
    Workspace ws = workspace_for(model, data.base(), &data.confidences(), nullptr);
    return batch_objective(ws);
}

double objective(const FactorModel& model, const RatingDataset& data, const SideInfo& side) {
    require_variant(model, MfVariant::Side, "objective");
    Workspace ws = workspace_for(model, data, nullptr, &side);
    return batch_objective(ws);
}

double objective(const FactorModel& model, const ImplicitDataset& data,
                 const SideInfo& side) {
    require_variant(model, MfVariant::Side, "objective");
    Workspace ws = workspace_for(model, data.base(), &data.confidences(), &side);
    return batch_objective(ws);
}

double gradient_check(const FactorModel& model, const RatingDataset& data, double epsilon) {
    if (model.variant != MfVariant::Exp && model.variant != MfVariant::Bias)
        throw ConfigError("gradient_check: rating-only data requires exp or bias model");
    return check_gradients(workspace_for(model, data, nullptr, nullptr), model.lambda, epsilon);
}

double gradient_check(const FactorModel& model, const ImplicitDataset& data, double epsilon) {
    require_variant(model, MfVariant::Imp, "gradient_check");
    return check_gradients(workspace_for(model, data.base(), &data.confidences(), nullptr),
                           model.lambda, epsilon);
}

double gradient_check(const FactorModel& model, const RatingDataset& data,
                      const SideInfo& side, double epsilon) {
    require_variant(model, MfVariant::Side, "gradient_check");
    return check_gradients(workspace_for(model, data, nullptr, &side), model.lambda, epsilon);
}

double gradient_check(const FactorModel& model, const ImplicitDataset& data,
                      const SideInfo& side, double epsilon) {
    require_variant(model, MfVariant::Side, "gradient_check");
    return check_gradients(workspace_for(model, data.base(), &data.confidences(), &side),
                           model.lambda, epsilon);
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_table(std::ostream& out, const char* tag, const std::vector<EntityId>& ids,
                 const std::vector<double>& tab, int d) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
        out << tag << ' ' << ids[k];
        for (int t = 0; t < d; ++t) out << ' ' << fmt(tab[k * static_cast<std::size_t>(d) + t]);
        out << '\n';
    }
}

void write_attr_table(std::ostream& out, const char* tag, const std::vector<std::string>& ids,
                      const std::vector<double>& tab, int d) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
        out << tag << ' ' << ids[k];
        for (int t = 0; t < d; ++t) out << ' ' << fmt(tab[k * static_cast<std::size_t>(d) + t]);
        out << '\n';
    }
}

}  // namespace

void save_model(const FactorModel& m, std::ostream& out) {
    out << "cfbench-model v1\n";
    out << "variant " << to_string(m.variant) << '\n';
    out << "d " << m.d << '\n';
    out << "mu " << fmt(m.mu) << '\n';
    out << "lambda " << fmt(m.lambda) << '\n';
    out << "counts " << m.user_ids.size() << ' ' << m.item_ids.size() << ' '
        << m.user_attr_ids.size() << ' ' << m.item_attr_ids.size() << '\n';
    write_table(out, "xu", m.user_ids, m.x, m.d);
    write_table(out, "yi", m.item_ids, m.y, m.d);
    write_attr_table(out, "wa", m.user_attr_ids, m.w, m.d);
    write_attr_table(out, "za", m.item_attr_ids, m.z, m.d);
    for (std::size_t k = 0; k < m.b_user.size(); ++k)
        out << "bu " << m.user_ids[k] << ' ' << fmt(m.b_user[k]) << '\n';
    for (std::size_t k = 0; k < m.b_item.size(); ++k)
        out << "bi " << m.item_ids[k] << ' ' << fmt(m.b_item[k]) << '\n';
}

FactorModel load_model(std::istream& in) {
    FactorModel m;
    std::string line;
    if (!std::getline(in, line) || line != "cfbench-model v1")
        throw ParseError("<model>", 1, "bad header, expected 'cfbench-model v1'");

    std::size_t line_no = 1;
    auto read_vec = [&](std::istringstream& ss, std::vector<double>& tab) {
        for (int t = 0; t < m.d; ++t) {
            double v;
            ss >> v;
            tab.push_back(v);
        }
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "variant") {
            std::string v;
            ss >> v;
            if (v == "exp") m.variant = MfVariant::Exp;
            else if (v == "imp") m.variant = MfVariant::Imp;
            else if (v == "bias") m.variant = MfVariant::Bias;
            else if (v == "side") m.variant = MfVariant::Side;
            else throw ParseError("<model>", line_no, "unknown variant " + v);
        } else if (tag == "d") {
            ss >> m.d;
        } else if (tag == "mu") {
            ss >> m.mu;
        } else if (tag == "lambda") {
            ss >> m.lambda;
        } else if (tag == "counts") {
            // informational; sizes are implied by the rows
        } else if (tag == "xu") {
            EntityId id;
            ss >> id;
            m.user_ids.push_back(id);
            read_vec(ss, m.x);
        } else if (tag == "yi") {
            EntityId id;
            ss >> id;
            m.item_ids.push_back(id);
            read_vec(ss, m.y);
        } else if (tag == "wa") {
            std::string id;
            ss >> id;
            m.user_attr_ids.push_back(id);
            read_vec(ss, m.w);
        } else if (tag == "za") {
            std::string id;
            ss >> id;
            m.item_attr_ids.push_back(id);
            read_vec(ss, m.z);
        } else if (tag == "bu") {
            EntityId id;
            double v;
            ss >> id >> v;
            m.b_user.push_back(v);
        } else if (tag == "bi") {
            EntityId id;
            double v;
            ss >> id >> v;
            m.b_item.push_back(v);
        } else {
            throw ParseError("<model>", line_no, "unknown record tag '" + tag + "'");
        }
        if (ss.fail()) throw ParseError("<model>", line_no, "malformed record");
    }
    m.rebuild_index();
    return m;
}

}  // namespace cfbench
