#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "triage/features.hpp"

namespace triage {

enum class LossKind : int { logistic = 0, hinge = 1 };

std::string_view loss_kind_name(LossKind k);
LossKind loss_kind_from_name(std::string_view name);

struct Hyperparams {
    double learning_rate = 0.1;
    int epochs = 500;
    double l2_lambda = 0.01;
    // Weight applied to pertinent samples; unset = n_benign / n_pertinent.
    std::optional<double> positive_class_weight;
    std::uint64_t seed = 0;
};

struct TrainConfig {
    LossKind loss = LossKind::logistic;
    Hyperparams hyper;
    // Stored into the model for scoring raw vectors later. Empty = identity.
    ScalingParams scaling;
};

struct LinearModel {
    LossKind loss_kind = LossKind::logistic;
    std::vector<std::string> feature_names;
    std::vector<double> weights;
    double bias = 0.0;
    ScalingParams scaling;
    Hyperparams hyper;  // positive_class_weight holds the resolved value
    std::uint64_t training_seed = 0;
    std::string schema_fingerprint;
};

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad_w;
    double grad_b = 0.0;
};

double sigmoid(double z);

// Objective: mean_i cw_i * loss(y_i * (w.x_i + b)) + lambda * |w|^2, bias
// unregularized. `order`, when given, fixes the accumulation order (the
// trainer shuffles it per epoch); it never changes the math, only float
// summation order.
LossGrad loss_and_gradient(const std::vector<double>& w, double b,
                           const std::vector<FeatureVector>& matrix,
                           const std::vector<int>& labels, LossKind loss, double l2_lambda,
                           double positive_class_weight,
                           const std::vector<std::size_t>* order = nullptr);

// Full-batch gradient descent, one update per epoch, accumulation order
// reshuffled each epoch from hyper.seed. Labels: pertinent = +1, benign = 0 or
// -1. The matrix is expected standardized already; config.scaling is what gets
// stored for later raw-vector scoring. Same inputs + seed give a bit-identical
// model.
LinearModel train(const std::vector<FeatureVector>& matrix, const std::vector<int>& labels,
                  const FeatureSchema& schema, const TrainConfig& config);

struct Score {
    double value = 0.0;                   // decision value w.x + b, used for ranking
    std::optional<double> probability;    // sigmoid(value), logistic models only
};

// x is raw; the model's stored scaling is applied internally.
Score score(const LinearModel& model, const FeatureVector& x, const FeatureSchema& schema);

// Parallel across artefacts when OpenMP is enabled; output order is input order.
std::vector<Score> score_all(const LinearModel& model, const std::vector<FeatureVector>& matrix,
                             const FeatureSchema& schema);

// (feature name, weight) pairs in schema order; bias rides on the model.
std::vector<std::pair<std::string, double>> coefficients(const LinearModel& model);

std::string model_to_json(const LinearModel& model);
LinearModel model_from_json(std::string_view json_text);
void save_model(const LinearModel& model, std::ostream& output);
LinearModel load_model(std::istream& input);

}  // namespace triage
