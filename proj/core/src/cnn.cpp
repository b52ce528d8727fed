#include "darkwatch/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace darkwatch {

Tensor3 to_tensor(const GrayImage& img, double scale) {
    Tensor3 t(img.height, img.width, 1);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) t.v[i] = img.pixels[i] * scale;
    return t;
}

double& CnnNetwork::kernel_at(int ky, int kx, int ic, int oc) {
    const int k = spec.kernel;
    return conv_w[((std::size_t(ky) * k + kx) * spec.in_c + ic) * spec.conv_channels + oc];
}

double CnnNetwork::kernel_at(int ky, int kx, int ic, int oc) const {
    const int k = spec.kernel;
    return conv_w[((std::size_t(ky) * k + kx) * spec.in_c + ic) * spec.conv_channels + oc];
}

CnnNetwork make_network(const CnnSpec& spec, std::uint64_t seed) {
    if (spec.conv_h() < 1 || spec.conv_w() < 1 || spec.pool_h() < 1 || spec.pool_w() < 1)
        throw ShapeMismatch("input too small for kernel and pooling");
    CnnNetwork net;
    net.spec = spec;
    net.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    const double conv_scale = 1.0 / std::sqrt(double(spec.kernel) * spec.kernel * spec.in_c);
    net.conv_w.resize(std::size_t(spec.kernel) * spec.kernel * spec.in_c * spec.conv_channels);
    for (double& w : net.conv_w) w = uni(rng) * conv_scale;
    net.conv_b.assign(std::size_t(spec.conv_channels), 0.0);

    const double dense_scale = 1.0 / std::sqrt(double(spec.flat()));
    net.dense_w.resize(std::size_t(spec.classes) * spec.flat());
    for (double& w : net.dense_w) w = uni(rng) * dense_scale;
    net.dense_b.assign(std::size_t(spec.classes), 0.0);
    return net;
}

namespace {

std::vector<double> softmax(const std::vector<double>& logits) {
    const double zmax = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - zmax);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace

Matrix forward(const CnnNetwork& net, const std::vector<Tensor3>& batch,
               ForwardCache* cache) {
    const CnnSpec& s = net.spec;
    if (net.conv_w.empty() || net.dense_w.empty()) throw UntrainedModel();
    Matrix probs;
    probs.reserve(batch.size());
    for (const Tensor3& x : batch) {
        if (x.h != s.in_h || x.w != s.in_w || x.c != s.in_c)
            throw ShapeMismatch("sample shape does not match network input shape");

        Tensor3 conv(s.conv_h(), s.conv_w(), s.conv_channels);
        for (int oc = 0; oc < s.conv_channels; ++oc)
            for (int y = 0; y < s.conv_h(); ++y)
                for (int xx = 0; xx < s.conv_w(); ++xx) {
                    double acc = net.conv_b[std::size_t(oc)];
                    for (int ky = 0; ky < s.kernel; ++ky)
                        for (int kx = 0; kx < s.kernel; ++kx)
                            for (int ic = 0; ic < s.in_c; ++ic)
                                acc += net.kernel_at(ky, kx, ic, oc) *
                                       x.at(y + ky, xx + kx, ic);
                    conv.at(y, xx, oc) = acc;
                }

        Tensor3 pooled(s.pool_h(), s.pool_w(), s.conv_channels);
        std::vector<int> argmax(pooled.v.size(), 0);
        for (int oc = 0; oc < s.conv_channels; ++oc)
            for (int py = 0; py < s.pool_h(); ++py)
                for (int px = 0; px < s.pool_w(); ++px) {
                    double best = -std::numeric_limits<double>::infinity();
                    int best_idx = 0;
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            const int cy = 2 * py + dy, cx = 2 * px + dx;
                            const double r = std::max(0.0, conv.at(cy, cx, oc));
                            // strict > keeps the first row-major maximum
                            if (r > best) {
                                best = r;
                                best_idx = (cy * s.conv_w() + cx) * s.conv_channels + oc;
                            }
                        }
                    pooled.at(py, px, oc) = best;
                    argmax[(std::size_t(py) * s.pool_w() + px) * s.conv_channels + oc] =
                        best_idx;
                }

        std::vector<double> logits(std::size_t(s.classes), 0.0);
        for (int c = 0; c < s.classes; ++c) {
            double acc = net.dense_b[std::size_t(c)];
            for (int f = 0; f < s.flat(); ++f)
                acc += net.dense_w[std::size_t(c) * s.flat() + f] * pooled.v[std::size_t(f)];
            logits[std::size_t(c)] = acc;
        }
        std::vector<double> p = softmax(logits);

        if (cache) {
            cache->conv_pre.push_back(std::move(conv));
            cache->pooled.push_back(std::move(pooled));
            cache->argmax.push_back(std::move(argmax));
            cache->logits.push_back(logits);
            cache->probs.push_back(p);
        }
        probs.push_back(std::move(p));
    }
    return probs;
}

std::pair<double, CnnGradients> loss_gradients(const CnnNetwork& net,
                                               const std::vector<Tensor3>& batch,
                                               const std::vector<int>& labels) {
    const CnnSpec& s = net.spec;
    if (batch.size() != labels.size())
        throw ShapeMismatch("batch size does not match label count");
    for (int l : labels)
        if (l < 0 || l >= s.classes) throw BadLabel(l, s.classes);

    ForwardCache cache;
    forward(net, batch, &cache);

    CnnGradients g;
    g.conv_w.assign(net.conv_w.size(), 0.0);
    g.conv_b.assign(net.conv_b.size(), 0.0);
    g.dense_w.assign(net.dense_w.size(), 0.0);
    g.dense_b.assign(net.dense_b.size(), 0.0);

    const double inv_n = 1.0 / double(batch.size());
    double loss = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& p = cache.probs[i];
        loss += -std::log(std::max(p[std::size_t(labels[i])], 1e-300)) * inv_n;

        std::vector<double> dlogits(p);
        dlogits[std::size_t(labels[i])] -= 1.0;
        for (double& d : dlogits) d *= inv_n;

        // dense layer
        std::vector<double> dflat(std::size_t(s.flat()), 0.0);
        for (int c = 0; c < s.classes; ++c) {
            g.dense_b[std::size_t(c)] += dlogits[std::size_t(c)];
            for (int f = 0; f < s.flat(); ++f) {
                g.dense_w[std::size_t(c) * s.flat() + f] +=
                    dlogits[std::size_t(c)] * cache.pooled[i].v[std::size_t(f)];
                dflat[std::size_t(f)] +=
                    net.dense_w[std::size_t(c) * s.flat() + f] * dlogits[std::size_t(c)];
            }
        }

        // unpool to the recorded argmax, then back through relu
        Tensor3 dconv(s.conv_h(), s.conv_w(), s.conv_channels);
        for (std::size_t f = 0; f < dflat.size(); ++f)
            dconv.v[std::size_t(cache.argmax[i][f])] += dflat[f];
        for (std::size_t k = 0; k < dconv.v.size(); ++k)
            if (cache.conv_pre[i].v[k] <= 0.0) dconv.v[k] = 0.0;

        // conv parameters
        const Tensor3& x = batch[i];
        for (int oc = 0; oc < s.conv_channels; ++oc)
            for (int y = 0; y < s.conv_h(); ++y)
                for (int xx = 0; xx < s.conv_w(); ++xx) {
                    const double d = dconv.at(y, xx, oc);
                    if (d == 0.0) continue;
                    g.conv_b[std::size_t(oc)] += d;
                    for (int ky = 0; ky < s.kernel; ++ky)
                        for (int kx = 0; kx < s.kernel; ++kx)
                            for (int ic = 0; ic < s.in_c; ++ic)
                                g.conv_w[((std::size_t(ky) * s.kernel + kx) * s.in_c + ic) *
                                             s.conv_channels +
                                         oc] += d * x.at(y + ky, xx + kx, ic);
                }
    }
    return {loss, g};
}

CnnTrainResult train_cnn(const std::vector<Tensor3>& images,
                         const std::vector<int>& labels, const CnnSpec& spec,
                         const CnnTrainConfig& config) {
    if (images.empty()) throw EmptyDataset();
    if (images.size() != labels.size())
        throw ShapeMismatch("image count does not match label count");

    CnnTrainResult result;
    result.net = make_network(spec, config.seed);
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<std::size_t> order(images.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const std::size_t bs = std::size_t(std::max<long>(1, config.batch_size));
    for (long epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i)
            std::swap(order[i], order[rng() % (i + 1)]);

        double epoch_loss = 0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t end = std::min(order.size(), start + bs);
            std::vector<Tensor3> batch;
            std::vector<int> batch_labels;
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(images[order[i]]);
                batch_labels.push_back(labels[order[i]]);
            }
            auto [loss, g] = loss_gradients(result.net, batch, batch_labels);
            if (!std::isfinite(loss)) throw DivergenceDetected();
            epoch_loss += loss;
            ++batches;
            const double lr = config.learning_rate;
            for (std::size_t k = 0; k < g.conv_w.size(); ++k)
                result.net.conv_w[k] -= lr * g.conv_w[k];
            for (std::size_t k = 0; k < g.conv_b.size(); ++k)
                result.net.conv_b[k] -= lr * g.conv_b[k];
            for (std::size_t k = 0; k < g.dense_w.size(); ++k)
                result.net.dense_w[k] -= lr * g.dense_w[k];
            for (std::size_t k = 0; k < g.dense_b.size(); ++k)
                result.net.dense_b[k] -= lr * g.dense_b[k];
        }
        result.history.push_back(epoch_loss / double(batches));
    }
    return result;
}

namespace {

GrayImage apply_denoise(const ImagePipeline& pipeline, const GrayImage& image) {
    switch (pipeline.denoise) {
        case DenoiseStep::median:
            return median_denoise(image, pipeline.median_radius);
        case DenoiseStep::gaussian:
            return gaussian_blur(image, pipeline.gaussian_sigma);
        case DenoiseStep::none:
        default:
            return image;
    }
}

}  // namespace

Classification classify_image(const ImagePipeline& pipeline, const CnnNetwork& net,
                              const GrayImage& image) {
    const GrayImage clean = apply_denoise(pipeline, image);
    const Matrix probs = forward(net, {to_tensor(clean)});
    const auto& p = probs[0];
    const auto it = std::max_element(p.begin(), p.end());
    return {int(it - p.begin()), *it};
}

Classification classify_image(const ImagePipeline& pipeline, const LinearModel& model,
                              const GrayImage& image) {
    if (model.weights.empty()) throw UntrainedModel();
    const GrayImage clean = apply_denoise(pipeline, image);
    const HogDescriptor d = hog(clean, pipeline.hog_params);
    const Prediction pred = predict(model, {d.values});
    const double p = model.kind == ModelKind::logistic ? pred.scores[0]
                                                       : sigmoid(pred.scores[0]);
    const int label = pred.labels[0];
    return {label, label == 1 ? p : 1.0 - p};
}

std::string cnn_to_json(const CnnNetwork& net) {
    nlohmann::json j;
    j["version"] = "darkwatch-cnn/1";
    j["input_shape"] = {net.spec.in_h, net.spec.in_w, net.spec.in_c};
    j["spec"] = {{"kernel", net.spec.kernel},
                 {"conv_channels", net.spec.conv_channels},
                 {"classes", net.spec.classes}};
    j["seed"] = net.seed;
    j["layers"] = {{{"type", "conv"}, {"weights", net.conv_w}, {"bias", net.conv_b}},
                   {{"type", "relu"}},
                   {{"type", "maxpool"}},
                   {{"type", "flatten"}},
                   {{"type", "dense"}, {"weights", net.dense_w}, {"bias", net.dense_b}},
                   {{"type", "softmax"}}};
    return j.dump(2);
}

CnnNetwork cnn_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("version", "") != std::string("darkwatch-cnn/1"))
        throw DataError("unsupported network file version");
    CnnNetwork net;
    const auto& shape = j.at("input_shape");
    net.spec.in_h = shape.at(0).get<int>();
    net.spec.in_w = shape.at(1).get<int>();
    net.spec.in_c = shape.at(2).get<int>();
    net.spec.kernel = j.at("spec").at("kernel").get<int>();
    net.spec.conv_channels = j.at("spec").at("conv_channels").get<int>();
    net.spec.classes = j.at("spec").at("classes").get<int>();
    net.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& layer : j.at("layers")) {
        const std::string type = layer.at("type").get<std::string>();
        if (type == "conv") {
            net.conv_w = layer.at("weights").get<std::vector<double>>();
            net.conv_b = layer.at("bias").get<std::vector<double>>();
        } else if (type == "dense") {
            net.dense_w = layer.at("weights").get<std::vector<double>>();
            net.dense_b = layer.at("bias").get<std::vector<double>>();
        }
    }
    if (net.conv_w.empty() || net.dense_w.empty())
        throw DataError("network file missing parameter layers");
    return net;
}

LabeledCorpus load_labeled_corpus(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    std::ifstream labels_file(root / "labels.csv");
    if (!labels_file) throw DataError("cannot open " + (root / "labels.csv").string());

    LabeledCorpus corpus;
    std::string line;
    if (!std::getline(labels_file, line)) throw EmptyDataset();
    while (std::getline(labels_file, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw DataError("labels.csv line missing comma: " + line);
        std::string name = line.substr(0, comma);
        if (!name.empty() && name.back() == '\r') name.pop_back();
        const int label = std::stoi(line.substr(comma + 1));

        std::ifstream img_file(root / name, std::ios::binary);
        if (!img_file) throw DataError("cannot open corpus image " + name);
        corpus.images.push_back(decode_pnm(img_file));
        corpus.labels.push_back(label);
        corpus.filenames.push_back(std::move(name));
    }
    if (corpus.images.empty()) throw EmptyDataset();
    return corpus;
}

}  // namespace darkwatch
