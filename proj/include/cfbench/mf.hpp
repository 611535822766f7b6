#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cfbench/dataset.hpp"

namespace cfbench {

enum class MfVariant { Exp, Imp, Bias, Side };

std::string to_string(MfVariant v);

struct TrainConfig {
    int d = 5;
    double lambda = 0.3;
    double eta = 0.05;
    int epochs = 100;
    std::uint64_t seed = 0;
    double alpha = 0.0001;  // echoed for implicit runs; confidences live in the dataset
    double init_scale = 0.1;
    double early_stop_rel = 1e-6;

    void validate() const;
};

// Latent factor model. Factors are row-major [entity][d]; entity tables are
// sorted by id so training and serialization are order-stable.
struct FactorModel {
    MfVariant variant = MfVariant::Exp;
    int d = 0;
    double mu = 0.0;
    double lambda = 0.0;  // regularization the model was trained with

    std::vector<EntityId> user_ids;
    std::vector<EntityId> item_ids;
    std::vector<std::string> user_attr_ids;
    std::vector<std::string> item_attr_ids;

    std::vector<double> x;       // user factors
    std::vector<double> y;       // item factors
    std::vector<double> w;       // user-attribute factors (Side)
    std::vector<double> z;       // item-attribute factors (Side)
    std::vector<double> b_user;  // biases (Bias)
    std::vector<double> b_item;

    // Batch objective after initialization and after each epoch.
    std::vector<double> objective_history;
    int epochs_run = 0;

    std::optional<std::size_t> user_slot(EntityId u) const;
    std::optional<std::size_t> item_slot(EntityId i) const;
    std::optional<std::size_t> user_attr_slot(const std::string& a) const;
    std::optional<std::size_t> item_attr_slot(const std::string& a) const;

    const double* user_vec(std::size_t slot) const { return &x[slot * static_cast<std::size_t>(d)]; }
    const double* item_vec(std::size_t slot) const { return &y[slot * static_cast<std::size_t>(d)]; }

    struct Prediction {
        double value;
        bool cold;  // user or item unknown to the model; value is the fallback
    };
    Prediction predict(EntityId u, EntityId i) const;

    void rebuild_index();

private:
    std::unordered_map<EntityId, std::size_t> user_index_;
    std::unordered_map<EntityId, std::size_t> item_index_;
    std::unordered_map<std::string, std::size_t> user_attr_index_;
    std::unordered_map<std::string, std::size_t> item_attr_index_;
};

// One coupled gradient step for an observation with precomputed error e:
//   a <- a + eta * (weight * e * b - lambda * a)
//   b <- b + eta * (weight * e * a_old - lambda * b)
// Used for (x_u, y_i), (x_u, w_s) and (z_t, y_i) pairs alike.
void sgd_pair_update(std::span<double> a, std::span<double> b, double e, double weight,
                     double eta, double lambda);

FactorModel train_mf_exp(const RatingDataset& train, const TrainConfig& cfg);
FactorModel train_mf_imp(const ImplicitDataset& train, const TrainConfig& cfg);
FactorModel train_mf_bias(const RatingDataset& train, const TrainConfig& cfg);
FactorModel train_mf_side(const RatingDataset& train, const SideInfo& side,
                          const TrainConfig& cfg);
FactorModel train_mf_side(const ImplicitDataset& train, const SideInfo& side,
                          const TrainConfig& cfg);

// Observation lists the side-coupled factorization actually trains on:
// social links are folded into symmetric unit-valued user attributes with
// the neighbour user as the attribute id.
SideInfo mf_side_observations(const SideInfo& side);

double objective(const FactorModel& model, const RatingDataset& data);
double objective(const FactorModel& model, const ImplicitDataset& data);
double objective(const FactorModel& model, const RatingDataset& data, const SideInfo& side);
double objective(const FactorModel& model, const ImplicitDataset& data, const SideInfo& side);

// Worst relative discrepancy between the analytic batch gradient and a
// central finite difference of the matching objective. Meant for small
// instances; cost is O(parameters^2).
double gradient_check(const FactorModel& model, const RatingDataset& data, double epsilon);
double gradient_check(const FactorModel& model, const ImplicitDataset& data, double epsilon);
double gradient_check(const FactorModel& model, const RatingDataset& data,
                      const SideInfo& side, double epsilon);
double gradient_check(const FactorModel& model, const ImplicitDataset& data,
                      const SideInfo& side, double epsilon);

void save_model(const FactorModel& model, std::ostream& out);
FactorModel load_model(std::istream& in);

}  // namespace cfbench
