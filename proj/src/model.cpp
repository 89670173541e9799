#include "triage/model.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "triage/errors.hpp"
#include "triage/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace triage {

std::string_view loss_kind_name(LossKind k) {
    return k == LossKind::logistic ? "logistic" : "hinge";
}

LossKind loss_kind_from_name(std::string_view name) {
    if (name == "logistic") return LossKind::logistic;
    if (name == "hinge") return LossKind::hinge;
    throw CorruptModel("unknown loss kind: " + std::string(name));
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

int to_pm1(int label) { return label > 0 ? 1 : -1; }

}  // namespace

LossGrad loss_and_gradient(const std::vector<double>& w, double b,
                           const std::vector<FeatureVector>& matrix,
                           const std::vector<int>& labels, LossKind loss, double l2_lambda,
                           double positive_class_weight,
                           const std::vector<std::size_t>* order) {
    const std::size_t n = matrix.size();
    const std::size_t d = w.size();
    LossGrad out;
    out.grad_w.assign(d, 0.0);
    if (n == 0) return out;

    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t idx = 0; idx < n; ++idx) {
        const std::size_t i = order ? (*order)[idx] : idx;
        const auto& x = matrix[i].values;
        const double y = to_pm1(labels[i]);
        const double cw = labels[i] > 0 ? positive_class_weight : 1.0;
        double margin = b;
        for (std::size_t c = 0; c < d; ++c) margin += w[c] * x[c];
        margin *= y;

        double dmargin;  // d(loss)/d(margin)
        if (loss == LossKind::logistic) {
            out.loss += cw * softplus(-margin);
            dmargin = -sigmoid(-margin);
        } else {
            if (margin < 1.0) {
                out.loss += cw * (1.0 - margin);
                dmargin = -1.0;
            } else {
                dmargin = 0.0;
            }
        }
        if (dmargin != 0.0) {
            const double g = cw * dmargin * y * inv_n;
            for (std::size_t c = 0; c < d; ++c) out.grad_w[c] += g * x[c];
            out.grad_b += g;
        }
    }
    out.loss *= inv_n;

    double norm_sq = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
        norm_sq += w[c] * w[c];
        out.grad_w[c] += 2.0 * l2_lambda * w[c];
    }
    out.loss += l2_lambda * norm_sq;
    return out;
}

LinearModel train(const std::vector<FeatureVector>& matrix, const std::vector<int>& labels,
                  const FeatureSchema& schema, const TrainConfig& config) {
    if (matrix.size() != labels.size()) throw DataError("labels misaligned with matrix");
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y > 0 ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0) {
        throw SingleClass("training needs both benign and pertinent samples (got " +
                          std::to_string(n_neg) + " benign, " + std::to_string(n_pos) +
                          " pertinent)");
    }
    const std::size_t d = schema.size();
    for (const auto& row : matrix) {
        if (row.values.size() != d) {
            throw SchemaMismatch(std::to_string(d), std::to_string(row.values.size()));
        }
    }

    LinearModel model;
    model.loss_kind = config.loss;
    model.hyper = config.hyper;
    model.hyper.positive_class_weight = config.hyper.positive_class_weight.value_or(
        static_cast<double>(n_neg) / static_cast<double>(n_pos));
    model.training_seed = config.hyper.seed;
    model.schema_fingerprint = schema.fingerprint();
    model.weights.assign(d, 0.0);
    model.bias = 0.0;
    for (const auto& def : schema.defs) model.feature_names.push_back(def.name);
    if (config.scaling.means.empty()) {
        model.scaling.means.assign(d, 0.0);
        model.scaling.stds.assign(d, 1.0);
        model.scaling.constant_flags.assign(d, false);
    } else {
        model.scaling = config.scaling;
    }

    const double cw = *model.hyper.positive_class_weight;
    const double lr = config.hyper.learning_rate;
    SeededRng rng(config.hyper.seed);
    std::vector<std::size_t> order(matrix.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < config.hyper.epochs; ++epoch) {
        rng.shuffle(order);
        LossGrad lg = loss_and_gradient(model.weights, model.bias, matrix, labels,
                                        config.loss, config.hyper.l2_lambda, cw, &order);
        if (!std::isfinite(lg.loss)) throw NonFiniteLoss(epoch);
        for (std::size_t c = 0; c < d; ++c) model.weights[c] -= lr * lg.grad_w[c];
        model.bias -= lr * lg.grad_b;
    }
    return model;
}

Score score(const LinearModel& model, const FeatureVector& x, const FeatureSchema& schema) {
    if (schema.fingerprint() != model.schema_fingerprint) {
        throw SchemaMismatch(model.schema_fingerprint, schema.fingerprint());
    }
    if (x.values.size() != model.weights.size()) {
        throw SchemaMismatch(std::to_string(model.weights.size()),
                             std::to_string(x.values.size()));
    }
    const bool scaled_model = !model.scaling.means.empty();
    if (scaled_model && model.scaling.means.size() != model.weights.size()) {
        throw CorruptModel("scaling arrays do not match the weight count");
    }
    double v = model.bias;
    for (std::size_t c = 0; c < x.values.size(); ++c) {
        double xv = x.values[c];
        if (scaled_model) xv = (xv - model.scaling.means[c]) / model.scaling.stds[c];
        v += model.weights[c] * xv;
    }
    Score s;
    s.value = v;
    if (model.loss_kind == LossKind::logistic) s.probability = sigmoid(v);
    return s;
}

std::vector<Score> score_all(const LinearModel& model, const std::vector<FeatureVector>& matrix,
                             const FeatureSchema& schema) {
    if (schema.fingerprint() != model.schema_fingerprint) {
        throw SchemaMismatch(model.schema_fingerprint, schema.fingerprint());
    }
    std::vector<Score> out(matrix.size());
    const std::int64_t n = static_cast<std::int64_t>(matrix.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = score(model, matrix[static_cast<std::size_t>(i)], schema);
    }
    return out;
}

std::vector<std::pair<std::string, double>> coefficients(const LinearModel& model) {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(model.weights.size());
    for (std::size_t c = 0; c < model.weights.size(); ++c) {
        out.emplace_back(model.feature_names[c], model.weights[c]);
    }
    return out;
}

std::string model_to_json(const LinearModel& model) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["loss_kind"] = std::string(loss_kind_name(model.loss_kind));
    j["feature_names"] = model.feature_names;
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["scaling"] = {{"means", model.scaling.means},
                    {"stds", model.scaling.stds},
                    {"constant_flags", model.scaling.constant_flags}};
    j["hyperparams"] = {{"learning_rate", model.hyper.learning_rate},
                        {"epochs", model.hyper.epochs},
                        {"l2_lambda", model.hyper.l2_lambda},
                        {"positive_class_weight", model.hyper.positive_class_weight.value_or(1.0)},
                        {"seed", model.hyper.seed}};
    j["schema_fingerprint"] = model.schema_fingerprint;
    j["training_seed"] = model.training_seed;
    return j.dump(2) + "\n";
}

LinearModel model_from_json(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw CorruptModel(std::string("model json: ") + e.what());
    }
    if (!j.contains("version")) throw CorruptModel("model json missing version");
    if (j["version"].get<int>() != 1) {
        throw VersionMismatch("unsupported model version " + j["version"].dump());
    }
    LinearModel m;
    try {
        m.loss_kind = loss_kind_from_name(j.at("loss_kind").get<std::string>());
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        m.weights = j.at("weights").get<std::vector<double>>();
        m.bias = j.at("bias").get<double>();
        const auto& sc = j.at("scaling");
        m.scaling.means = sc.at("means").get<std::vector<double>>();
        m.scaling.stds = sc.at("stds").get<std::vector<double>>();
        m.scaling.constant_flags = sc.at("constant_flags").get<std::vector<bool>>();
        const auto& hp = j.at("hyperparams");
        m.hyper.learning_rate = hp.at("learning_rate").get<double>();
        m.hyper.epochs = hp.at("epochs").get<int>();
        m.hyper.l2_lambda = hp.at("l2_lambda").get<double>();
        m.hyper.positive_class_weight = hp.at("positive_class_weight").get<double>();
        m.hyper.seed = hp.at("seed").get<std::uint64_t>();
        m.schema_fingerprint = j.at("schema_fingerprint").get<std::string>();
        m.training_seed = j.at("training_seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw CorruptModel(std::string("model json: ") + e.what());
    }
    if (m.weights.size() != m.feature_names.size() || m.weights.size() != m.scaling.means.size() ||
        m.weights.size() != m.scaling.stds.size() ||
        m.weights.size() != m.scaling.constant_flags.size()) {
        throw CorruptModel("model json: inconsistent vector lengths");
    }
    for (double s : m.scaling.stds) {
        if (!(s > 0.0)) throw CorruptModel("model json: non-positive scaling std");
    }
    return m;
}

void save_model(const LinearModel& model, std::ostream& output) {
    std::string text = model_to_json(model);
    output.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!output) throw Error("model write failed", 2);
}

LinearModel load_model(std::istream& input) {
    std::ostringstream ss;
    ss << input.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace triage
