#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "darkwatch/imaging.hpp"
#include "darkwatch/linear_models.hpp"

namespace darkwatch {

struct Tensor3 {
    int h = 0, w = 0, c = 1;
    std::vector<double> v;  // index ((y*w)+x)*c + ch

    Tensor3() = default;
    Tensor3(int h_, int w_, int c_) : h(h_), w(w_), c(c_), v(std::size_t(h_) * w_ * c_, 0.0) {}

    double& at(int y, int x, int ch) { return v[(std::size_t(y) * w + x) * c + ch]; }
    double at(int y, int x, int ch) const { return v[(std::size_t(y) * w + x) * c + ch]; }
};

Tensor3 to_tensor(const GrayImage& img, double scale = 1.0 / 255.0);

// Fixed stack: conv (valid, stride 1) -> relu -> 2x2 maxpool -> flatten ->
// dense -> softmax.
struct CnnSpec {
    int in_h = 0, in_w = 0, in_c = 1;
    int kernel = 3;
    int conv_channels = 2;
    int classes = 2;

    int conv_h() const { return in_h - kernel + 1; }
    int conv_w() const { return in_w - kernel + 1; }
    int pool_h() const { return conv_h() / 2; }
    int pool_w() const { return conv_w() / 2; }
    int flat() const { return pool_h() * pool_w() * conv_channels; }
};

struct CnnNetwork {
    CnnSpec spec;
    std::uint64_t seed = 0;
    std::vector<double> conv_w;   // [k][k][in_c][out], row-major in that order
    std::vector<double> conv_b;   // [out]
    std::vector<double> dense_w;  // [classes][flat]
    std::vector<double> dense_b;  // [classes]

    double& kernel_at(int ky, int kx, int ic, int oc);
    double kernel_at(int ky, int kx, int ic, int oc) const;
};

struct ShapeMismatch : DataError {
    explicit ShapeMismatch(const std::string& why) : DataError(why) {}
};
struct BadLabel : DataError {
    explicit BadLabel(int label, int classes)
        : DataError("label " + std::to_string(label) + " outside [0, " +
                    std::to_string(classes) + ")") {}
};
struct EmptyDataset : DataError {
    EmptyDataset() : DataError("dataset has no samples") {}
};
struct UntrainedModel : DataError {
    UntrainedModel() : DataError("model has no trained parameters") {}
};

CnnNetwork make_network(const CnnSpec& spec, std::uint64_t seed);

struct ForwardCache {
    std::vector<Tensor3> conv_pre;        // per sample, pre-relu conv output
    std::vector<Tensor3> pooled;          // per sample
    std::vector<std::vector<int>> argmax; // per sample, flat index into conv grid per pooled cell*channel
    Matrix logits;                        // [n][classes]
    Matrix probs;                         // [n][classes]
};

Matrix forward(const CnnNetwork& net, const std::vector<Tensor3>& batch,
               ForwardCache* cache = nullptr);

struct CnnGradients {
    std::vector<double> conv_w;
    std::vector<double> conv_b;
    std::vector<double> dense_w;
    std::vector<double> dense_b;
};

// Mean softmax cross-entropy over the batch plus full parameter gradients.
std::pair<double, CnnGradients> loss_gradients(const CnnNetwork& net,
                                               const std::vector<Tensor3>& batch,
                                               const std::vector<int>& labels);

struct CnnTrainConfig {
    double learning_rate = 0.05;
    long epochs = 200;
    long batch_size = 16;
    std::uint64_t seed = 0;
};

struct CnnTrainResult {
    CnnNetwork net;
    std::vector<double> history;  // mean loss per epoch
};

CnnTrainResult train_cnn(const std::vector<Tensor3>& images,
                         const std::vector<int>& labels, const CnnSpec& spec,
                         const CnnTrainConfig& config);

enum class DenoiseStep { none, median, gaussian };
enum class FeatureMode { raw_cnn, hog_linear };

struct ImagePipeline {
    DenoiseStep denoise = DenoiseStep::none;
    int median_radius = 1;
    double gaussian_sigma = 1.0;
    FeatureMode mode = FeatureMode::raw_cnn;
    HogParams hog_params;
};

struct Classification {
    int label = 0;
    double confidence = 0.0;
};

Classification classify_image(const ImagePipeline& pipeline, const CnnNetwork& net,
                              const GrayImage& image);
Classification classify_image(const ImagePipeline& pipeline, const LinearModel& model,
                              const GrayImage& image);

std::string cnn_to_json(const CnnNetwork& net);
CnnNetwork cnn_from_json(const std::string& text);

struct LabeledCorpus {
    std::vector<GrayImage> images;
    std::vector<int> labels;
    std::vector<std::string> filenames;
};

// Directory with labels.csv ("filename,label" header) plus PGM files.
LabeledCorpus load_labeled_corpus(const std::string& dir);

}  // namespace darkwatch
