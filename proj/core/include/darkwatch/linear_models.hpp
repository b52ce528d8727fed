#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "darkwatch/dataset.hpp"

namespace darkwatch {

enum class ModelKind { logistic, svm };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct TrainConfig {
    double learning_rate = 0.1;
    long epochs = 2000;
    double l2_strength = 1e-4;   // logistic
    double svm_lambda = 1e-2;    // svm
    double tolerance = 1e-9;     // early stop on |loss_t - loss_{t-1}|
    std::uint64_t seed = 0;      // reserved for stochastic modes
};

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad_w;
    double grad_b = 0.0;
};

// Mean cross-entropy of sigmoid scores plus (l2/2)*||w||^2.
LossGrad logistic_loss_grad(const std::vector<double>& weights, double bias,
                            const Matrix& features, const std::vector<int>& labels,
                            double l2);

// (lambda/2)*||w||^2 + mean hinge; labels {0,1} mapped to {-1,+1};
// subgradient 0 at the hinge kink.
LossGrad svm_loss_grad(const std::vector<double>& weights, double bias,
                       const Matrix& features, const std::vector<int>& labels,
                       double lambda);

struct LinearModel {
    ModelKind kind = ModelKind::logistic;
    std::vector<double> weights;
    double bias = 0.0;
    TrainConfig config_echo;
    std::vector<double> history;
    bool single_class = false;
    // Carried alongside for model-file portability.
    std::vector<std::string> column_names;
    std::vector<ColumnScaling> scaling;
};

LinearModel train(const EncodedDataset& data, ModelKind kind, const TrainConfig& config);

struct Prediction {
    std::vector<int> labels;
    std::vector<double> scores;  // probabilities (logistic) or margins (svm)
};

Prediction predict(const LinearModel& model, const Matrix& features,
                   double threshold = 0.5);

double sigmoid(double z);

std::string model_to_json(const LinearModel& model);
LinearModel model_from_json(const std::string& text);

}  // namespace darkwatch
