#include "darkwatch/linear_models.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

namespace darkwatch {

std::string to_string(ModelKind kind) {
    return kind == ModelKind::logistic ? "logistic" : "svm";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "logistic") return ModelKind::logistic;
    if (s == "svm") return ModelKind::svm;
    throw UsageError("unknown model kind: " + s);
}

double sigmoid(double z) {
    // Branch on sign so exp never overflows.
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

// log(sigmoid(z)) without catastrophic cancellation.
double log_sigmoid(double z) {
    if (z >= 0.0) return -std::log1p(std::exp(-z));
    return z - std::log1p(std::exp(z));
}

void check_dims(const std::vector<double>& weights, const Matrix& features,
                const std::vector<int>& labels) {
    if (features.empty()) throw DimensionMismatch("empty feature matrix");
    if (features.size() != labels.size())
        throw DimensionMismatch("feature rows != label count");
    for (const auto& row : features)
        if (row.size() != weights.size())
            throw DimensionMismatch("feature width != weight length");
    for (int y : labels)
        if (y != 0 && y != 1) throw NonBinaryLabel();
}

double dot(const std::vector<double>& w, const std::vector<double>& x) {
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
    return s;
}

}  // namespace

LossGrad logistic_loss_grad(const std::vector<double>& weights, double bias,
                            const Matrix& features, const std::vector<int>& labels,
                            double l2) {
    check_dims(weights, features, labels);
    const std::size_t n = features.size();
    const std::size_t d = weights.size();

    LossGrad out;
    out.grad_w.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = dot(weights, features[i]) + bias;
        const double y = double(labels[i]);
        out.loss += -(y * log_sigmoid(z) + (1.0 - y) * log_sigmoid(-z));
        const double err = sigmoid(z) - y;
        for (std::size_t j = 0; j < d; ++j) out.grad_w[j] += err * features[i][j];
        out.grad_b += err;
    }
    out.loss /= double(n);
    out.grad_b /= double(n);
    double reg = 0;
    for (std::size_t j = 0; j < d; ++j) {
        out.grad_w[j] = out.grad_w[j] / double(n) + l2 * weights[j];
        reg += weights[j] * weights[j];
    }
    out.loss += 0.5 * l2 * reg;
    return out;
}

LossGrad svm_loss_grad(const std::vector<double>& weights, double bias,
                       const Matrix& features, const std::vector<int>& labels,
                       double lambda) {
    check_dims(weights, features, labels);
    const std::size_t n = features.size();
    const std::size_t d = weights.size();

    LossGrad out;
    out.grad_w.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = labels[i] == 1 ? 1.0 : -1.0;
        const double z = dot(weights, features[i]) + bias;
        const double margin = y * z;
        if (margin < 1.0) {  // strict: subgradient 0 at the kink
            out.loss += 1.0 - margin;
            for (std::size_t j = 0; j < d; ++j)
                out.grad_w[j] -= y * features[i][j];
            out.grad_b -= y;
        }
    }
    out.loss /= double(n);
    out.grad_b /= double(n);
    double reg = 0;
    for (std::size_t j = 0; j < d; ++j) {
        out.grad_w[j] = out.grad_w[j] / double(n) + lambda * weights[j];
        reg += weights[j] * weights[j];
    }
    out.loss += 0.5 * lambda * reg;
    return out;
}

LinearModel train(const EncodedDataset& data, ModelKind kind, const TrainConfig& config) {
    if (data.rows() == 0) throw EmptyTable();
    if (data.rows() < 2) throw TooFewRows("training needs at least 2 rows");
    if (config.learning_rate <= 0) throw UsageError("learning_rate must be positive");
    if (config.epochs < 1) throw UsageError("epochs must be >= 1");

    LinearModel model;
    model.kind = kind;
    model.config_echo = config;
    model.weights.assign(data.cols(), 0.0);
    model.bias = 0.0;
    model.column_names = data.column_names;
    model.scaling = data.scaling;

    bool has0 = false, has1 = false;
    for (int y : data.labels) (y == 1 ? has1 : has0) = true;
    model.single_class = !(has0 && has1);

    double prev_loss = std::numeric_limits<double>::infinity();
    for (long epoch = 0; epoch < config.epochs; ++epoch) {
        const LossGrad g =
            kind == ModelKind::logistic
                ? logistic_loss_grad(model.weights, model.bias, data.features,
                                     data.labels, config.l2_strength)
                : svm_loss_grad(model.weights, model.bias, data.features, data.labels,
                                config.svm_lambda);
        if (!std::isfinite(g.loss)) throw DivergenceDetected();
        model.history.push_back(g.loss);
        for (std::size_t j = 0; j < model.weights.size(); ++j)
            model.weights[j] -= config.learning_rate * g.grad_w[j];
        model.bias -= config.learning_rate * g.grad_b;
        if (std::abs(g.loss - prev_loss) < config.tolerance) break;
        prev_loss = g.loss;
    }
    return model;
}

Prediction predict(const LinearModel& model, const Matrix& features, double threshold) {
    Prediction out;
    for (const auto& row : features) {
        if (row.size() != model.weights.size())
            throw DimensionMismatch("feature width != model width");
        double z = model.bias;
        for (std::size_t j = 0; j < row.size(); ++j) z += model.weights[j] * row[j];
        if (model.kind == ModelKind::logistic) {
            const double p = sigmoid(z);
            out.scores.push_back(p);
            out.labels.push_back(p >= threshold ? 1 : 0);
        } else {
            out.scores.push_back(z);
            out.labels.push_back(z >= 0.0 ? 1 : 0);
        }
    }
    return out;
}

std::string model_to_json(const LinearModel& model) {
    nlohmann::json j;
    j["version"] = "darkwatch-model/1";
    j["kind"] = to_string(model.kind);
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["column_names"] = model.column_names;
    nlohmann::json sc = nlohmann::json::array();
    for (const auto& s : model.scaling)
        sc.push_back({{"offset", s.offset}, {"divisor", s.divisor}});
    j["scaling"] = sc;
    j["config_echo"] = {{"learning_rate", model.config_echo.learning_rate},
                        {"epochs", model.config_echo.epochs},
                        {"l2_strength", model.config_echo.l2_strength},
                        {"svm_lambda", model.config_echo.svm_lambda},
                        {"tolerance", model.config_echo.tolerance},
                        {"seed", model.config_echo.seed}};
    j["history"] = model.history;
    j["single_class"] = model.single_class;
    return j.dump(2);
}

LinearModel model_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("version", "") != std::string("darkwatch-model/1"))
        throw DataError("unsupported model file version");
    LinearModel m;
    m.kind = model_kind_from_string(j.at("kind").get<std::string>());
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.column_names = j.at("column_names").get<std::vector<std::string>>();
    for (const auto& s : j.at("scaling"))
        m.scaling.push_back({s.at("offset").get<double>(), s.at("divisor").get<double>()});
    const auto& c = j.at("config_echo");
    m.config_echo.learning_rate = c.at("learning_rate").get<double>();
    m.config_echo.epochs = c.at("epochs").get<long>();
    m.config_echo.l2_strength = c.at("l2_strength").get<double>();
    m.config_echo.svm_lambda = c.at("svm_lambda").get<double>();
    m.config_echo.tolerance = c.at("tolerance").get<double>();
    m.config_echo.seed = c.at("seed").get<std::uint64_t>();
    m.history = j.at("history").get<std::vector<double>>();
    m.single_class = j.value("single_class", false);
    return m;
}

}  // namespace darkwatch
