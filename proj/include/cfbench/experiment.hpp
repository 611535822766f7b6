#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfbench/dataset.hpp"
#include "cfbench/report.hpp"

namespace cfbench {

enum class Method { MfExp, MfImp, MfBias, MfSide, RwrExp, RwrImp, RwrBias, RwrSide };

std::string to_string(Method m);
Method method_from_string(const std::string& s);
bool method_uses_side(Method m);
bool method_is_mf(Method m);

// Per-method hyperparameters; which fields matter depends on the method.
struct Hyperparameters {
    int d = 5;
    double lambda = 0.3;
    double eta = 0.05;
    int epochs = 100;
    double init_scale = 0.1;
    double alpha = 0.0001;  // implicit confidence coefficient
    double c = 0.2;         // restart probability
    double beta = 0.4;      // walk coefficient (biased RWR)
    double gamma = 0.3;     // jump coefficient (biased RWR)
    double delta = 2.0;     // side-information link weight
    double eps = 1e-9;      // power-iteration tolerance
    int max_iter = 1000;
};

// Best-performing settings per (method, dataset); unknown datasets fall back
// to the movielens values of the method.
Hyperparameters default_hyperparameters(Method m, const std::string& dataset);

struct DatasetSpec {
    std::string name;
    std::string format;  // "movielens" or "edge_list"
    std::string ratings_path;
    std::string users_path;  // movielens demographics
    std::string links_path;  // social links
    Feedback kind = Feedback::Explicit;
    RatingRange range{1.0, 5.0, 1.0};
    char delimiter = '\0';
    std::size_t header_lines = 0;
    DuplicatePolicy on_duplicate = DuplicatePolicy::Error;
};

// Built-in file layout for the known corpora under a data directory.
// Returns nullopt for names this build has no layout for.
std::optional<DatasetSpec> dataset_spec_for(const std::string& name,
                                            const std::string& data_dir);

struct ProtocolSpec {
    enum class Kind { KFold, ColdStart };
    Kind kind = Kind::KFold;
    int k = 5;
    double fraction = 0.2;

    std::string to_string() const;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    Method method = Method::MfExp;
    ProtocolSpec protocol;
    Hyperparameters hp;
    std::uint64_t seed = 42;
    std::vector<int> ks{1, 2, 3};
    int threads = 0;  // 0 = hardware concurrency

    nlohmann::json to_json() const;
};

// Parses the declarative config document; unknown keys are errors.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

struct LoadedData {
    RatingDataset ratings;
    SideInfo side;
    SideLoadReport side_report;
    std::size_t duplicate_rows = 0;
};

// Loads ratings plus side information and, when social links mention users
// absent from the rating file, extends the user universe to cover them.
LoadedData load_dataset_spec(const DatasetSpec& spec);

EvalReport run_experiment(const ExperimentConfig& cfg);

// Scenario runner for the standard study designs. Writes one report bundle
// (csv, jsonl, per-user dump) per experiment into out_dir when non-empty.
ComparisonTable run_scenario(const std::string& name, const std::string& data_dir,
                             const std::string& out_dir, std::uint64_t seed, bool large,
                             int threads = 0);

std::vector<std::string> scenario_names();

}  // namespace cfbench
