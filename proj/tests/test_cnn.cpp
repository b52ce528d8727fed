#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "darkwatch/cnn.hpp"
#include "test_util.hpp"

using namespace darkwatch;

namespace {

CnnNetwork zero_network(const CnnSpec& spec) {
    CnnNetwork net = make_network(spec, 0);
    std::fill(net.conv_w.begin(), net.conv_w.end(), 0.0);
    std::fill(net.dense_w.begin(), net.dense_w.end(), 0.0);
    return net;
}

Tensor3 random_tensor(std::mt19937_64& rng, int h, int w) {
    Tensor3 t(h, w, 1);
    for (double& v : t.v) v = double(rng() % 256) / 255.0;
    return t;
}

}  // namespace

TEST_CASE("zero network emits the uniform distribution") {
    CnnSpec spec{8, 8, 1, 3, 2, 2};
    const auto net = zero_network(spec);
    std::mt19937_64 rng(401);
    const auto probs = forward(net, {random_tensor(rng, 8, 8)});
    CHECK(probs[0][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(probs[0][1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("1x1 identity kernel passes the input through the conv stage") {
    CnnSpec spec;
    spec.in_h = 6;
    spec.in_w = 6;
    spec.kernel = 1;
    spec.conv_channels = 1;
    spec.classes = 2;
    auto net = zero_network(spec);
    net.kernel_at(0, 0, 0, 0) = 1.0;

    std::mt19937_64 rng(403);
    const auto input = random_tensor(rng, 6, 6);
    ForwardCache cache;
    forward(net, {input}, &cache);
    CHECK(cache.conv_pre[0].v == input.v);
}

TEST_CASE("shape arithmetic: 6x6 input, 3x3 kernel") {
    CnnSpec spec{6, 6, 1, 3, 2, 2};
    CHECK(spec.conv_h() == 4);
    CHECK(spec.conv_w() == 4);
    CHECK(spec.pool_h() == 2);
    CHECK(spec.pool_w() == 2);
    const auto net = make_network(spec, 1);
    std::mt19937_64 rng(405);
    ForwardCache cache;
    forward(net, {random_tensor(rng, 6, 6)}, &cache);
    CHECK(cache.conv_pre[0].h == 4);
    CHECK(cache.pooled[0].h == 2);
    CHECK(cache.pooled[0].w == 2);
}

TEST_CASE("shape algebra across randomized geometries") {
    std::mt19937_64 rng(407);
    for (int round = 0; round < 20; ++round) {
        CnnSpec spec;
        spec.kernel = 1 + int(rng() % 4);
        spec.in_h = spec.kernel + 2 + int(rng() % 10);
        spec.in_w = spec.kernel + 2 + int(rng() % 10);
        spec.conv_channels = 1 + int(rng() % 3);
        spec.classes = 2 + int(rng() % 3);
        CHECK(spec.conv_h() == spec.in_h - spec.kernel + 1);
        CHECK(spec.pool_h() == spec.conv_h() / 2);
        if (spec.pool_h() < 1 || spec.pool_w() < 1) continue;
        const auto net = make_network(spec, rng());
        ForwardCache cache;
        forward(net, {random_tensor(rng, spec.in_h, spec.in_w)}, &cache);
        CHECK(int(cache.pooled[0].v.size()) == spec.flat());
    }
}

TEST_CASE("forward rejects mismatched shapes") {
    CnnSpec spec{8, 8, 1, 3, 2, 2};
    const auto net = make_network(spec, 0);
    std::mt19937_64 rng(409);
    CHECK_THROWS_AS(forward(net, {random_tensor(rng, 7, 8)}), ShapeMismatch);
}

TEST_CASE("softmax outputs sum to 1 for extreme logits") {
    CnnSpec spec{8, 8, 1, 3, 1, 3};
    auto net = zero_network(spec);
    net.dense_b = {500.0, -500.0, 0.0};
    std::mt19937_64 rng(411);
    const auto probs = forward(net, {random_tensor(rng, 8, 8)});
    double sum = 0;
    for (double p : probs[0]) {
        CHECK(p >= 0.0);
        sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("uniform network loss is ln 2") {
    CnnSpec spec{8, 8, 1, 3, 2, 2};
    const auto net = zero_network(spec);
    std::mt19937_64 rng(413);
    const std::vector<Tensor3> batch = {random_tensor(rng, 8, 8), random_tensor(rng, 8, 8)};
    const auto [loss, g] = loss_gradients(net, batch, {0, 1});
    CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("loss at a seeded initialization is near ln(classes)") {
    for (int classes : {2, 3, 4}) {
        CnnSpec spec{10, 10, 1, 3, 2, classes};
        const auto net = make_network(spec, 7);
        std::mt19937_64 rng(417);
        std::vector<Tensor3> batch;
        std::vector<int> labels;
        for (int i = 0; i < 4 * classes; ++i) {
            batch.push_back(random_tensor(rng, 10, 10));
            labels.push_back(i % classes);
        }
        const auto [loss, g] = loss_gradients(net, batch, labels);
        CHECK(std::abs(loss - std::log(double(classes))) < 0.05);
    }
}

TEST_CASE("analytic CNN gradients match central finite differences") {
    CnnSpec spec{8, 8, 1, 3, 2, 2};
    auto net = make_network(spec, 42);
    std::mt19937_64 rng(419);
    const std::vector<Tensor3> batch = {random_tensor(rng, 8, 8), random_tensor(rng, 8, 8),
                                        random_tensor(rng, 8, 8)};
    const std::vector<int> labels = {0, 1, 0};
    const auto [loss, g] = loss_gradients(net, batch, labels);

    const double h = 1e-4;
    auto fd_check = [&](std::vector<double>& params, const std::vector<double>& grads) {
        for (std::size_t k = 0; k < params.size(); ++k) {
            const double saved = params[k];
            params[k] = saved + h;
            const double up = loss_gradients(net, batch, labels).first;
            params[k] = saved - h;
            const double down = loss_gradients(net, batch, labels).first;
            params[k] = saved;
            const double fd = (up - down) / (2.0 * h);
            if (std::abs(fd) < 1e-10 && std::abs(grads[k]) < 1e-10) continue;
            CHECK(testutil::rel_err(grads[k], fd) < 1e-3);
        }
    };
    fd_check(net.conv_w, g.conv_w);
    fd_check(net.conv_b, g.conv_b);
    fd_check(net.dense_w, g.dense_w);
    fd_check(net.dense_b, g.dense_b);
}

TEST_CASE("duplicating a sample leaves mean gradients unchanged") {
    CnnSpec spec{8, 8, 1, 3, 2, 2};
    const auto net = make_network(spec, 5);
    std::mt19937_64 rng(421);
    const auto sample = random_tensor(rng, 8, 8);
    const auto [l1, g1] = loss_gradients(net, {sample}, {1});
    const auto [l2, g2] = loss_gradients(net, {sample, sample}, {1, 1});
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));
    for (std::size_t k = 0; k < g1.conv_w.size(); ++k)
        CHECK(g1.conv_w[k] == doctest::Approx(g2.conv_w[k]).epsilon(1e-12));
    for (std::size_t k = 0; k < g1.dense_w.size(); ++k)
        CHECK(g1.dense_w[k] == doctest::Approx(g2.dense_w[k]).epsilon(1e-12));
}

TEST_CASE("bad labels rejected") {
    CnnSpec spec{8, 8, 1, 3, 2, 2};
    const auto net = make_network(spec, 0);
    std::mt19937_64 rng(423);
    CHECK_THROWS_AS(loss_gradients(net, {random_tensor(rng, 8, 8)}, {2}), BadLabel);
}

TEST_CASE("training learns the bar-orientation corpus") {
    const auto corpus = testutil::make_bar_corpus(200, 8, 99);
    const auto tensors = testutil::to_tensors(corpus.images);

    CnnSpec spec{8, 8, 1, 3, 2, 2};
    CnnTrainConfig config;
    config.learning_rate = 0.05;
    config.epochs = 200;
    config.seed = 1;
    const auto result = train_cnn(tensors, corpus.labels, spec, config);

    const auto probs = forward(result.net, tensors);
    long correct = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const int pred =
            int(std::max_element(probs[i].begin(), probs[i].end()) - probs[i].begin());
        if (pred == corpus.labels[i]) ++correct;
    }
    CHECK(double(correct) / double(tensors.size()) >= 0.95);
}

TEST_CASE("training is deterministic") {
    const auto corpus = testutil::make_bar_corpus(20, 8, 7);
    const auto tensors = testutil::to_tensors(corpus.images);
    CnnSpec spec{8, 8, 1, 3, 2, 2};
    CnnTrainConfig config;
    config.epochs = 10;
    config.seed = 3;
    const auto a = train_cnn(tensors, corpus.labels, spec, config);
    const auto b = train_cnn(tensors, corpus.labels, spec, config);
    CHECK(a.net.conv_w == b.net.conv_w);
    CHECK(a.net.dense_w == b.net.dense_w);
    CHECK(a.history == b.history);
}

TEST_CASE("a single sample is memorized") {
    const auto corpus = testutil::make_bar_corpus(1, 8, 13);
    const auto tensors = testutil::to_tensors(corpus.images);
    CnnSpec spec{8, 8, 1, 3, 2, 2};
    CnnTrainConfig config;
    config.learning_rate = 0.2;
    config.epochs = 400;
    config.seed = 2;
    const auto result = train_cnn(tensors, corpus.labels, spec, config);
    CHECK(result.history.back() < 1e-3);
    for (std::size_t i = 1; i < result.history.size(); ++i) {
        if (result.history[i - 1] < 1e-3) break;
        CHECK(result.history[i] < result.history[i - 1]);
    }
}

TEST_CASE("empty dataset rejected") {
    CnnSpec spec{8, 8, 1, 3, 2, 2};
    CHECK_THROWS_AS(train_cnn({}, {}, spec, {}), EmptyDataset);
}

TEST_CASE("classify_image through the raw CNN pipeline") {
    const auto corpus = testutil::make_bar_corpus(200, 8, 99);
    CnnSpec spec{8, 8, 1, 3, 2, 2};
    CnnTrainConfig config;
    config.learning_rate = 0.05;
    config.epochs = 200;
    config.seed = 1;
    const auto result =
        train_cnn(testutil::to_tensors(corpus.images), corpus.labels, spec, config);

    const auto held_out = testutil::make_bar_corpus(10, 8, 555);
    ImagePipeline pipeline;
    pipeline.mode = FeatureMode::raw_cnn;
    int vertical_hits = 0, total_vertical = 0;
    for (std::size_t i = 0; i < held_out.images.size(); ++i) {
        if (held_out.labels[i] != 0) continue;
        ++total_vertical;
        const auto c = classify_image(pipeline, result.net, held_out.images[i]);
        if (c.label == 0 && c.confidence > 0.9) ++vertical_hits;
    }
    CHECK(total_vertical > 0);
    CHECK(vertical_hits == total_vertical);

    // purity: repeated classification is identical
    const auto c1 = classify_image(pipeline, result.net, held_out.images[0]);
    const auto c2 = classify_image(pipeline, result.net, held_out.images[0]);
    CHECK(c1.label == c2.label);
    CHECK(c1.confidence == c2.confidence);
}

TEST_CASE("constant image through hog+linear with a zero head scores 0.5") {
    LinearModel head;
    head.kind = ModelKind::logistic;
    const HogParams params;
    GrayImage img;
    img.width = 16;
    img.height = 16;
    img.pixels.assign(256, 50.0);
    head.weights.assign(hog(img, params).values.size(), 0.0);
    head.bias = 0.0;

    ImagePipeline pipeline;
    pipeline.mode = FeatureMode::hog_linear;
    const auto c = classify_image(pipeline, head, img);
    CHECK(c.confidence == 0.5);
    CHECK(c.label == 1);  // inclusive threshold rule
}

TEST_CASE("network JSON round trip") {
    CnnSpec spec{8, 8, 1, 3, 2, 2};
    const auto net = make_network(spec, 77);
    const auto loaded = cnn_from_json(cnn_to_json(net));
    CHECK(loaded.conv_w == net.conv_w);
    CHECK(loaded.conv_b == net.conv_b);
    CHECK(loaded.dense_w == net.dense_w);
    CHECK(loaded.dense_b == net.dense_b);
    CHECK(loaded.spec.in_h == net.spec.in_h);
    CHECK(loaded.spec.kernel == net.spec.kernel);
    CHECK(loaded.seed == net.seed);
}

TEST_CASE("labeled corpus loads from a directory") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "darkwatch_corpus_test";
    fs::create_directories(dir);
    const auto corpus = testutil::make_bar_corpus(4, 8, 21);
    std::ofstream labels(dir / "labels.csv");
    labels << "filename,label\n";
    for (std::size_t i = 0; i < corpus.images.size(); ++i) {
        const std::string name = "img" + std::to_string(i) + ".pgm";
        std::ofstream img(dir / name, std::ios::binary);
        img << encode_pgm(corpus.images[i]);
        labels << name << ',' << corpus.labels[i] << '\n';
    }
    labels.close();

    const auto loaded = load_labeled_corpus(dir.string());
    REQUIRE(loaded.images.size() == 4);
    CHECK(loaded.labels == corpus.labels);
    CHECK(loaded.images[0].pixels == corpus.images[0].pixels);
    fs::remove_all(dir);
}
