#include <benchmark/benchmark.h>

#include <random>

#include "darkwatch/dataset.hpp"
#include "darkwatch/imaging.hpp"
#include "darkwatch/linear_models.hpp"

namespace {

darkwatch::GrayImage random_image(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    darkwatch::GrayImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(std::size_t(w) * std::size_t(h));
    for (double& p : img.pixels) p = double(rng() % 256);
    return img;
}

darkwatch::EncodedDataset random_dataset(std::size_t rows, std::size_t cols,
                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    darkwatch::EncodedDataset d;
    for (std::size_t j = 0; j < cols; ++j) {
        d.column_names.push_back("c" + std::to_string(j));
        d.scaling.push_back({});
    }
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<double> row(cols);
        for (double& v : row) v = uni(rng);
        d.features.push_back(std::move(row));
        d.labels.push_back(int(rng() % 2));
    }
    return d;
}

void bm_median_denoise(benchmark::State& state) {
    const auto img = random_image(256, 256, 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(darkwatch::median_denoise(img, 1));
}
BENCHMARK(bm_median_denoise);

void bm_gaussian_blur(benchmark::State& state) {
    const auto img = random_image(256, 256, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(darkwatch::gaussian_blur(img, 1.5));
}
BENCHMARK(bm_gaussian_blur);

void bm_hog(benchmark::State& state) {
    const auto img = random_image(128, 128, 3);
    for (auto _ : state) benchmark::DoNotOptimize(darkwatch::hog(img));
}
BENCHMARK(bm_hog);

void bm_logistic_epoch(benchmark::State& state) {
    const auto d = random_dataset(1000, 12, 4);
    const std::vector<double> w(12, 0.1);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            darkwatch::logistic_loss_grad(w, 0.0, d.features, d.labels, 1e-4));
}
BENCHMARK(bm_logistic_epoch);

}  // namespace

BENCHMARK_MAIN();
