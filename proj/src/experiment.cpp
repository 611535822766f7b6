#include "cfbench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <thread>

#include "cfbench/graph.hpp"
#include "cfbench/metrics.hpp"
#include "cfbench/mf.hpp"
#include "cfbench/rng.hpp"
#include "cfbench/rwr.hpp"

namespace cfbench {

std::string to_string(Method m) {
    switch (m) {
        case Method::MfExp: return "mf_exp";
        case Method::MfImp: return "mf_imp";
        case Method::MfBias: return "mf_bias";
        case Method::MfSide: return "mf_side";
        case Method::RwrExp: return "rwr_exp";
        case Method::RwrImp: return "rwr_imp";
        case Method::RwrBias: return "rwr_bias";
        default: return "rwr_side";
    }
}

Method method_from_string(const std::string& s) {
    static const std::map<std::string, Method> table = {
        {"mf_exp", Method::MfExp},   {"mf_imp", Method::MfImp},
        {"mf_bias", Method::MfBias}, {"mf_side", Method::MfSide},
        {"rwr_exp", Method::RwrExp}, {"rwr_imp", Method::RwrImp},
        {"rwr_bias", Method::RwrBias}, {"rwr_side", Method::RwrSide}};
    auto it = table.find(s);
    if (it == table.end()) throw ConfigError("unknown method '" + s + "'");
    return it->second;
}

bool method_uses_side(Method m) { return m == Method::MfSide || m == Method::RwrSide; }

bool method_is_mf(Method m) {
    return m == Method::MfExp || m == Method::MfImp || m == Method::MfBias ||
           m == Method::MfSide;
}

Hyperparameters default_hyperparameters(Method m, const std::string& dataset) {
    Hyperparameters hp;
    switch (m) {
        case Method::MfExp:
        case Method::MfImp:
        case Method::MfBias:
            hp.lambda = 0.3;
            hp.eta = 0.05;
            break;
        case Method::MfSide:
            if (dataset == "filmtrust") {
                hp.lambda = 0.25;
                hp.eta = 0.02;
            } else if (dataset == "epinions") {
                hp.lambda = 0.25;
                hp.eta = 0.03;
            } else if (dataset == "lastfm") {
                hp.lambda = 0.3;
                hp.eta = 0.05;
            } else {
                hp.lambda = 0.3;
                hp.eta = 0.01;
            }
            break;
        case Method::RwrExp:
            hp.c = (dataset == "epinions") ? 0.5 : 0.2;
            break;
        case Method::RwrImp:
            hp.c = 0.1;
            break;
        case Method::RwrBias:
            if (dataset == "filmtrust") {
                hp.beta = 0.25;
                hp.gamma = 0.1;
            } else if (dataset == "epinions") {
                hp.beta = 0.5;
                hp.gamma = 0.3;
            } else {
                hp.beta = 0.4;
                hp.gamma = 0.3;
            }
            hp.c = 0.2;
            break;
        case Method::RwrSide:
            hp.delta = (dataset == "movielens") ? 2.0 : 1.0;
            hp.c = 0.2;
            break;
    }
    return hp;
}

std::optional<DatasetSpec> dataset_spec_for(const std::string& name,
                                            const std::string& data_dir) {
    namespace fs = std::filesystem;
    DatasetSpec spec;
    spec.name = name;
    if (name == "movielens") {
        spec.format = "movielens";
        spec.ratings_path = (fs::path(data_dir) / "ml-100k" / "u.data").string();
        spec.users_path = (fs::path(data_dir) / "ml-100k" / "u.user").string();
        spec.kind = Feedback::Explicit;
        spec.range = {1.0, 5.0, 1.0};
        return spec;
    }
    if (name == "filmtrust") {
        spec.format = "edge_list";
        spec.ratings_path = (fs::path(data_dir) / "filmtrust" / "ratings.txt").string();
        spec.links_path = (fs::path(data_dir) / "filmtrust" / "trust.txt").string();
        spec.kind = Feedback::Explicit;
        spec.range = {0.5, 4.0, 0.5};
        // The published file carries a handful of repeated pairs.
        spec.on_duplicate = DuplicatePolicy::KeepFirst;
        return spec;
    }
    if (name == "lastfm") {
        spec.format = "edge_list";
        spec.ratings_path = (fs::path(data_dir) / "lastfm" / "user_artists.dat").string();
        spec.links_path = (fs::path(data_dir) / "lastfm" / "user_friends.dat").string();
        spec.kind = Feedback::Implicit;
        spec.header_lines = 1;
        return spec;
    }
    if (name == "epinions") {
        spec.format = "edge_list";
        spec.ratings_path = (fs::path(data_dir) / "epinions" / "ratings.txt").string();
        spec.links_path = (fs::path(data_dir) / "epinions" / "trust.txt").string();
        spec.kind = Feedback::Explicit;
        spec.range = {1.0, 5.0, 1.0};
        spec.on_duplicate = DuplicatePolicy::KeepFirst;
        return spec;
    }
    if (name == "audioscrobbler") {
        spec.format = "edge_list";
        spec.ratings_path =
            (fs::path(data_dir) / "audioscrobbler" / "user_artist_data.txt").string();
        spec.kind = Feedback::Implicit;
        return spec;
    }
    return std::nullopt;
}

LoadedData load_dataset_spec(const DatasetSpec& spec) {
    LoadedData out{RatingDataset::create({}, {}, {}, spec.kind, spec.range), {}, {}, 0};
    if (spec.format == "movielens") {
        MovielensLoad ml = load_movielens(spec.ratings_path, spec.users_path);
        out.ratings = std::move(ml.dataset);
        out.side = std::move(ml.side);
    } else if (spec.format == "edge_list") {
        EdgeListSchema schema;
        schema.delimiter = spec.delimiter;
        schema.header_lines = spec.header_lines;
        schema.on_duplicate = spec.on_duplicate;
        schema.range = spec.range;
        EdgeListLoad load = load_edge_list(spec.ratings_path, schema, spec.kind);
        out.ratings = std::move(load.dataset);
        out.duplicate_rows = load.duplicate_rows;
    } else {
        throw ConfigError("unknown dataset format '" + spec.format + "'");
    }

    if (!spec.links_path.empty()) {
        SocialLinksLoad links = load_social_links(spec.links_path);
        out.side.social_links = std::move(links.side.social_links);
        out.side_report = links.report;
        // Trust networks may mention users that never rated; widen the
        // universe so they become graph nodes and factor slots.
        std::vector<EntityId> extra;
        for (EntityId u : out.side.link_users())
            if (!out.ratings.user_index(u)) extra.push_back(u);
        if (!extra.empty()) out.ratings = out.ratings.with_extra_users(extra);
    }
    return out;
}

std::string ProtocolSpec::to_string() const {
    if (kind == Kind::KFold) return "kfold" + std::to_string(k);
    return "cold_start" + std::to_string(fraction);
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["dataset"]["name"] = dataset.name;
    j["dataset"]["format"] = dataset.format;
    j["dataset"]["ratings"] = dataset.ratings_path;
    if (!dataset.users_path.empty()) j["dataset"]["users"] = dataset.users_path;
    if (!dataset.links_path.empty()) j["dataset"]["links"] = dataset.links_path;
    j["dataset"]["kind"] = dataset.kind == Feedback::Explicit ? "explicit" : "implicit";
    j["dataset"]["range"] = {dataset.range.min_value, dataset.range.max_value,
                             dataset.range.step};
    if (dataset.delimiter != '\0') j["dataset"]["delimiter"] = std::string(1, dataset.delimiter);
    if (dataset.header_lines != 0) j["dataset"]["header_lines"] = dataset.header_lines;
    j["dataset"]["on_duplicate"] =
        dataset.on_duplicate == DuplicatePolicy::Error ? "error" : "keep_first";
    j["method"] = cfbench::to_string(method);
    if (protocol.kind == ProtocolSpec::Kind::KFold) {
        j["protocol"]["type"] = "kfold";
        j["protocol"]["k"] = protocol.k;
    } else {
        j["protocol"]["type"] = "cold_start";
        j["protocol"]["fraction"] = protocol.fraction;
    }
    j["hyperparameters"] = {{"d", hp.d},         {"lambda", hp.lambda},
                            {"eta", hp.eta},     {"epochs", hp.epochs},
                            {"init_scale", hp.init_scale}, {"alpha", hp.alpha},
                            {"c", hp.c},         {"beta", hp.beta},
                            {"gamma", hp.gamma}, {"delta", hp.delta},
                            {"eps", hp.eps},     {"max_iter", hp.max_iter}};
    j["seed"] = seed;
    j["ks"] = ks;
    // threads is an execution knob with no effect on results; keeping it out
    // of the echo keeps reports byte-identical across machines.
    return j;
}

namespace {

void require_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                  const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
    require_keys(j, {"dataset", "method", "protocol", "hyperparameters", "seed", "ks",
                     "threads"},
                 "config");
    if (!j.contains("dataset") || !j.contains("method"))
        throw ConfigError("config requires 'dataset' and 'method'");

    ExperimentConfig cfg;
    cfg.method = method_from_string(j.at("method").get<std::string>());

    const nlohmann::json& dj = j.at("dataset");
    require_keys(dj, {"name", "dir", "format", "ratings", "users", "links", "kind", "range",
                      "delimiter", "header_lines", "on_duplicate"},
                 "dataset");
    const std::string name = dj.at("name").get<std::string>();
    if (dj.contains("dir")) {
        auto spec = dataset_spec_for(name, dj.at("dir").get<std::string>());
        if (!spec) throw ConfigError("no built-in layout for dataset '" + name + "'");
        cfg.dataset = *spec;
    } else {
        cfg.dataset.name = name;
        cfg.dataset.format = dj.value("format", std::string("edge_list"));
        cfg.dataset.ratings_path = dj.at("ratings").get<std::string>();
        cfg.dataset.users_path = dj.value("users", std::string());
        cfg.dataset.links_path = dj.value("links", std::string());
        const std::string kind = dj.value("kind", std::string("explicit"));
        if (kind != "explicit" && kind != "implicit")
            throw ConfigError("dataset.kind must be 'explicit' or 'implicit'");
        cfg.dataset.kind = kind == "explicit" ? Feedback::Explicit : Feedback::Implicit;
        if (dj.contains("range")) {
            auto r = dj.at("range");
            if (!r.is_array() || r.size() != 3)
                throw ConfigError("dataset.range must be [min, max, step]");
            cfg.dataset.range = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>()};
        }
        const std::string delim = dj.value("delimiter", std::string());
        if (delim.size() > 1) throw ConfigError("dataset.delimiter must be one character");
        cfg.dataset.delimiter = delim.empty() ? '\0' : delim[0];
        cfg.dataset.header_lines = dj.value("header_lines", std::size_t{0});
        const std::string dup = dj.value("on_duplicate", std::string("error"));
        if (dup == "error") cfg.dataset.on_duplicate = DuplicatePolicy::Error;
        else if (dup == "keep_first") cfg.dataset.on_duplicate = DuplicatePolicy::KeepFirst;
        else throw ConfigError("dataset.on_duplicate must be 'error' or 'keep_first'");
    }

    if (j.contains("protocol")) {
        const nlohmann::json& pj = j.at("protocol");
        require_keys(pj, {"type", "k", "fraction"}, "protocol");
        const std::string type = pj.at("type").get<std::string>();
        if (type == "kfold") {
            cfg.protocol.kind = ProtocolSpec::Kind::KFold;
            cfg.protocol.k = pj.value("k", 5);
        } else if (type == "cold_start") {
            cfg.protocol.kind = ProtocolSpec::Kind::ColdStart;
            cfg.protocol.fraction = pj.value("fraction", 0.2);
        } else {
            throw ConfigError("protocol.type must be 'kfold' or 'cold_start'");
        }
    }

    cfg.hp = default_hyperparameters(cfg.method, cfg.dataset.name);
    if (j.contains("hyperparameters")) {
        const nlohmann::json& hj = j.at("hyperparameters");
        require_keys(hj, {"d", "lambda", "eta", "epochs", "init_scale", "alpha", "c", "beta",
                          "gamma", "delta", "eps", "max_iter"},
                     "hyperparameters");
        cfg.hp.d = hj.value("d", cfg.hp.d);
        cfg.hp.lambda = hj.value("lambda", cfg.hp.lambda);
        cfg.hp.eta = hj.value("eta", cfg.hp.eta);
        cfg.hp.epochs = hj.value("epochs", cfg.hp.epochs);
        cfg.hp.init_scale = hj.value("init_scale", cfg.hp.init_scale);
        cfg.hp.alpha = hj.value("alpha", cfg.hp.alpha);
        cfg.hp.c = hj.value("c", cfg.hp.c);
        cfg.hp.beta = hj.value("beta", cfg.hp.beta);
        cfg.hp.gamma = hj.value("gamma", cfg.hp.gamma);
        cfg.hp.delta = hj.value("delta", cfg.hp.delta);
        cfg.hp.eps = hj.value("eps", cfg.hp.eps);
        cfg.hp.max_iter = hj.value("max_iter", cfg.hp.max_iter);
    }

    cfg.seed = j.value("seed", std::uint64_t{42});
    if (j.contains("ks")) cfg.ks = j.at("ks").get<std::vector<int>>();
    cfg.threads = j.value("threads", 0);
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return parse_config(j);
}

namespace {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t nt = threads > 0 ? static_cast<std::size_t>(threads)
                                 : std::max<std::size_t>(1, hw);
    nt = std::min(nt, n);
    if (nt <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(nt);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t k = next.fetch_add(1); k < n; k = next.fetch_add(1)) fn(k);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

// The trainer already rolls back a bounced final epoch, so any recorded
// increase is a bug; fail the run if one slips through.
void check_monotone_objective(const FactorModel& model, const std::string& what) {
    const std::vector<double>& h = model.objective_history;
    for (std::size_t e = 1; e < h.size(); ++e)
        if (h[e] > h[e - 1])
            throw DivergenceError(what + ": objective increased at epoch " +
                                      std::to_string(e) + " (" + std::to_string(h[e - 1]) +
                                      " -> " + std::to_string(h[e]) + ")",
                                  static_cast<int>(e));
}

struct TestGroup {
    EntityId user;
    std::vector<ScoredItem> actual;
};

std::vector<TestGroup> group_test_by_user(const RatingDataset& test) {
    std::map<EntityId, std::vector<ScoredItem>> buckets;
    for (const RatingTriple& t : test.ratings())
        buckets[t.user].push_back({t.item, t.value});
    std::vector<TestGroup> out;
    out.reserve(buckets.size());
    for (auto& [user, items] : buckets) {
        std::sort(items.begin(), items.end(),
                  [](const ScoredItem& a, const ScoredItem& b) { return a.item < b.item; });
        out.push_back({user, std::move(items)});
    }
    return out;
}

TrainConfig train_config_from(const Hyperparameters& hp, std::uint64_t seed) {
    TrainConfig tc;
    tc.d = hp.d;
    tc.lambda = hp.lambda;
    tc.eta = hp.eta;
    tc.epochs = hp.epochs;
    tc.seed = seed;
    tc.alpha = hp.alpha;
    tc.init_scale = hp.init_scale;
    return tc;
}

std::vector<RankedPrediction> evaluate_fold_mf(const ExperimentConfig& cfg,
                                               const LoadedData& data,
                                               const RatingDataset& train,
                                               const std::vector<TestGroup>& groups,
                                               std::uint64_t fold_seed) {
    const TrainConfig tc = train_config_from(cfg.hp, fold_seed);
    FactorModel model;
    switch (cfg.method) {
        case Method::MfExp:
            model = train_mf_exp(train, tc);
            break;
        case Method::MfImp:
            model = train_mf_imp(binarize_and_confidence(train, cfg.hp.alpha), tc);
            break;
        case Method::MfBias:
            model = train_mf_bias(train, tc);
            break;
        case Method::MfSide:
            if (train.kind() == Feedback::Implicit)
                model = train_mf_side(binarize_and_confidence(train, cfg.hp.alpha),
                                      data.side, tc);
            else
                model = train_mf_side(train, data.side, tc);
            break;
        default:
            throw ConfigError("evaluate_fold_mf called with a non-MF method");
    }
    check_monotone_objective(model, cfbench::to_string(cfg.method));

    std::vector<RankedPrediction> preds(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        RankedPrediction rp;
        rp.user = groups[g].user;
        rp.actual = groups[g].actual;
        rp.predicted.reserve(rp.actual.size());
        for (const ScoredItem& it : groups[g].actual)
            rp.predicted.push_back({it.item, model.predict(rp.user, it.item).value});
        preds[g] = std::move(rp);
    }
    return preds;
}

std::vector<RankedPrediction> evaluate_fold_rwr(const ExperimentConfig& cfg,
                                                const LoadedData& data,
                                                const RatingDataset& train,
                                                const std::vector<TestGroup>& groups) {
    BipartiteGraph graph = (train.kind() == Feedback::Implicit)
                               ? build_graph(binarize_and_confidence(train, cfg.hp.alpha))
                               : build_graph(train);
    if (cfg.method == Method::RwrSide) {
        if (data.side.empty())
            throw ConfigError("rwr_side requires side information");
        graph = augment_graph(graph, data.side, cfg.hp.delta);
    }
    const NormalizedAdjacency adj = row_normalize(graph);
    const RwrParams params{cfg.hp.eps, cfg.hp.max_iter};

    std::optional<BiasVector> bias;
    if (cfg.method == Method::RwrBias)
        bias = bias_vector(adj, global_mean_vector(graph), cfg.hp.c, params);

    std::vector<RankedPrediction> preds(groups.size());
    parallel_for(groups.size(), cfg.threads, [&](std::size_t g) {
        RankedPrediction rp;
        rp.user = groups[g].user;
        rp.actual = groups[g].actual;
        rp.predicted.reserve(rp.actual.size());
        auto node = graph.user_node(rp.user);
        if (!node) {
            for (const ScoredItem& it : groups[g].actual) rp.predicted.push_back({it.item, 0.0});
        } else {
            const RwrScoreVector scores =
                (cfg.method == Method::RwrBias)
                    ? rwr_bias_scores(adj, *node, cfg.hp.beta, cfg.hp.gamma, *bias, params)
                    : rwr_scores(adj, *node, cfg.hp.c, params);
            for (const ScoredItem& it : groups[g].actual) {
                auto in = graph.item_node(it.item);
                rp.predicted.push_back({it.item, in ? scores.scores[*in] : 0.0});
            }
        }
        preds[g] = std::move(rp);
    });
    return preds;
}

FoldMetrics fold_metrics_from(const std::vector<RankedPrediction>& preds,
                              const std::vector<int>& ks) {
    FoldMetrics fm;
    const MetricSummary rho = spearman_rho(preds);
    fm.rho = rho.value;
    fm.rho_eligible = rho.eligible;
    fm.rho_excluded = rho.excluded;
    for (int k : ks) {
        const MetricSummary p = precision_at_k(preds, k);
        fm.precision[k] = p.value;
        fm.precision_eligible[k] = p.eligible;
        fm.precision_excluded[k] = p.excluded;
    }
    return fm;
}

}  // namespace

EvalReport run_experiment(const ExperimentConfig& cfg) {
    const LoadedData data = load_dataset_spec(cfg.dataset);
    if (method_uses_side(cfg.method) && data.side.empty())
        throw ConfigError(cfbench::to_string(cfg.method) + " requires side information for '" +
                          cfg.dataset.name + "'");

    std::vector<Fold> folds;
    if (cfg.protocol.kind == ProtocolSpec::Kind::KFold) {
        FoldSplit split = kfold_split(data.ratings, cfg.protocol.k,
                                      derive_seed(cfg.seed, "kfold"));
        folds = std::move(split.folds);
    } else {
        ColdStartSplit split = cold_start_split(data.ratings, data.side,
                                                cfg.protocol.fraction,
                                                derive_seed(cfg.seed, "cold_start"));
        folds.push_back({std::move(split.train), std::move(split.test)});
    }

    EvalReport report;
    report.method = to_string(cfg.method);
    report.dataset = cfg.dataset.name;
    report.protocol = cfg.protocol.to_string();
    report.seed = cfg.seed;
    report.ks = cfg.ks;
    report.config_echo = cfg.to_json();

    double rho_sum = 0.0;
    std::map<int, double> prec_sum;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const std::vector<TestGroup> groups = group_test_by_user(folds[f].test);
        const std::uint64_t fold_seed =
            derive_seed(cfg.seed, to_string(cfg.method) + "/fold" + std::to_string(f));
        std::vector<RankedPrediction> preds =
            method_is_mf(cfg.method)
                ? evaluate_fold_mf(cfg, data, folds[f].train, groups, fold_seed)
                : evaluate_fold_rwr(cfg, data, folds[f].train, groups);

        FoldMetrics fm = fold_metrics_from(preds, cfg.ks);
        rho_sum += fm.rho;
        for (int k : cfg.ks) prec_sum[k] += fm.precision.at(k);
        report.per_fold.push_back(std::move(fm));

        for (const RankedPrediction& p : preds) {
            PerUserRow row;
            row.fold = static_cast<int>(f);
            row.user = p.user;
            row.rho = spearman_rho_user(p);
            for (int k : cfg.ks) row.precision[k] = precision_at_k_user(p, k);
            report.per_user.push_back(std::move(row));
        }
    }

    const double nf = static_cast<double>(folds.size());
    report.spearman_rho = rho_sum / nf;
    for (int k : cfg.ks) report.precision_at[k] = prec_sum[k] / nf;
    return report;
}

std::vector<std::string> scenario_names() {
    return {"explicit", "implicit", "bias", "side", "cold_start"};
}

namespace {

struct ScenarioJob {
    Method method;
    std::string dataset;
};

bool dataset_available(const std::string& name, const std::string& data_dir,
                       std::string& why_not) {
    auto spec = dataset_spec_for(name, data_dir);
    if (!spec) {
        why_not = "no built-in layout";
        return false;
    }
    if (!std::filesystem::exists(spec->ratings_path)) {
        why_not = "missing " + spec->ratings_path;
        return false;
    }
    return true;
}

}  // namespace

ComparisonTable run_scenario(const std::string& name, const std::string& data_dir,
                             const std::string& out_dir, std::uint64_t seed, bool large,
                             int threads) {
    ComparisonTable table;
    table.scenario = name;
    table.ks = {1, 2, 3};

    ProtocolSpec protocol;
    std::vector<std::string> explicit_sets = {"movielens", "filmtrust"};
    if (large) explicit_sets.push_back("epinions");

    std::vector<ScenarioJob> jobs;
    if (name == "explicit") {
        table.methods = {"mf_exp", "rwr_exp"};
        table.datasets = explicit_sets;
        for (const std::string& d : table.datasets)
            for (Method m : {Method::MfExp, Method::RwrExp}) jobs.push_back({m, d});
    } else if (name == "implicit") {
        table.methods = {"mf_imp", "rwr_imp"};
        table.datasets = {"lastfm", "audioscrobbler"};
        for (Method m : {Method::MfImp, Method::RwrImp}) jobs.push_back({m, "lastfm"});
        table.notes.push_back("audioscrobbler: skipped (load-only corpus)");
    } else if (name == "bias") {
        table.methods = {"mf_exp", "mf_bias", "rwr_exp", "rwr_bias"};
        table.datasets = explicit_sets;
        for (const std::string& d : table.datasets)
            for (Method m : {Method::MfExp, Method::MfBias, Method::RwrExp, Method::RwrBias})
                jobs.push_back({m, d});
        table.improvements.push_back({"improvement_bias_mf", "mf_exp", "mf_bias"});
        table.improvements.push_back({"improvement_bias_rwr", "rwr_exp", "rwr_bias"});
    } else if (name == "side") {
        table.methods = {"mf_exp", "mf_imp", "mf_side", "rwr_exp", "rwr_imp", "rwr_side"};
        table.datasets = explicit_sets;
        table.datasets.push_back("lastfm");
        for (const std::string& d : explicit_sets)
            for (Method m : {Method::MfExp, Method::MfSide, Method::RwrExp, Method::RwrSide})
                jobs.push_back({m, d});
        for (Method m : {Method::MfImp, Method::MfSide, Method::RwrImp, Method::RwrSide})
            jobs.push_back({m, "lastfm"});
        table.improvements.push_back({"improvement_side_mf_exp", "mf_exp", "mf_side"});
        table.improvements.push_back({"improvement_side_rwr_exp", "rwr_exp", "rwr_side"});
        table.improvements.push_back({"improvement_side_mf_imp", "mf_imp", "mf_side"});
        table.improvements.push_back({"improvement_side_rwr_imp", "rwr_imp", "rwr_side"});
    } else if (name == "cold_start") {
        protocol.kind = ProtocolSpec::Kind::ColdStart;
        table.methods = {"mf_side", "rwr_side"};
        table.datasets = {"movielens", "filmtrust", "lastfm"};
        if (large) table.datasets.push_back("epinions");
        for (const std::string& d : table.datasets)
            for (Method m : {Method::MfSide, Method::RwrSide}) jobs.push_back({m, d});
    } else {
        throw ConfigError("unknown scenario '" + name + "'");
    }

    // MovieLens demographics have no social network, so its side experiments
    // use attributes only; filmtrust/lastfm use their trust links.
    for (const ScenarioJob& job : jobs) {
        std::string why;
        if (!dataset_available(job.dataset, data_dir, why)) {
            std::string note = job.dataset + ": skipped (" + why + ")";
            if (std::find(table.notes.begin(), table.notes.end(), note) == table.notes.end())
                table.notes.push_back(note);
            continue;
        }
        ExperimentConfig cfg;
        cfg.dataset = *dataset_spec_for(job.dataset, data_dir);
        cfg.method = job.method;
        cfg.protocol = protocol;
        cfg.hp = default_hyperparameters(job.method, job.dataset);
        cfg.seed = seed;
        cfg.threads = threads;
        EvalReport report;
        try {
            report = run_experiment(cfg);
        } catch (const ConfigError& e) {
            table.notes.push_back(to_string(job.method) + " on " + job.dataset +
                                  ": skipped (" + e.what() + ")");
            continue;
        }

        ComparisonTable::Cell cell;
        cell.rho = report.spearman_rho;
        cell.precision = report.precision_at;
        table.cells[to_string(job.method)][job.dataset] = cell;

        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
            const std::string base =
                (std::filesystem::path(out_dir) /
                 (name + "_" + to_string(job.method) + "_" + job.dataset))
                    .string();
            emit_report_file(report, OutputFormat::Csv, base + ".csv");
            emit_report_file(report, OutputFormat::JsonLines, base + ".jsonl");
            std::ofstream dump(base + "_users.txt");
            if (!dump) throw IoError("cannot write " + base + "_users.txt");
            write_per_user_dump(report, dump);
        }
    }
    return table;
}

}  // namespace cfbench
