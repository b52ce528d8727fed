#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "darkwatch/imaging.hpp"
#include "test_util.hpp"

using namespace darkwatch;

namespace {

// Brute-force median: sort the whole clamped window.
GrayImage median_oracle(const GrayImage& img, int r) {
    GrayImage out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            std::vector<double> window;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    window.push_back(img.at_clamped(y + dy, x + dx));
            std::sort(window.begin(), window.end());
            out.at(y, x) = window[window.size() / 2];
        }
    return out;
}

// Full 2-D gaussian convolution with edge replication.
GrayImage gaussian_oracle(const GrayImage& img, double sigma) {
    const int r = int(std::ceil(3.0 * sigma));
    std::vector<double> k(std::size_t(2 * r + 1));
    double sum = 0;
    for (int d = -r; d <= r; ++d) {
        k[std::size_t(d + r)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += k[std::size_t(d + r)];
    }
    for (double& v : k) v /= sum;
    GrayImage out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    acc += k[std::size_t(dy + r)] * k[std::size_t(dx + r)] *
                           img.at_clamped(y + dy, x + dx);
            out.at(y, x) = std::clamp(acc, 0.0, 255.0);
        }
    return out;
}

GrayImage constant_image(int w, int h, double v) {
    GrayImage img;
    img.width = w;
    img.height = h;
    img.pixels.assign(std::size_t(w) * h, v);
    return img;
}

GrayImage rot180(const GrayImage& img) {
    GrayImage out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(y, x) = img.at(img.height - 1 - y, img.width - 1 - x);
    return out;
}

}  // namespace

TEST_CASE("decode P2") {
    const auto img = decode_pnm("P2\n2 2\n255\n0 255 255 0\n");
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.pixels == std::vector<double>{0, 255, 255, 0});
}

TEST_CASE("decode P3 white pixel is gray 255") {
    const auto img = decode_pnm("P3\n1 1\n255\n255 255 255\n");
    CHECK(img.pixels[0] == doctest::Approx(255.0).epsilon(1e-12));
}

TEST_CASE("P5 and P2 encodings of the same image decode identically") {
    std::mt19937_64 rng(301);
    const auto img = testutil::random_image(rng, 4, 4);
    const auto from_ascii = decode_pnm(encode_pgm(img, false));
    const auto from_binary = decode_pnm(encode_pgm(img, true));
    CHECK(from_ascii.pixels == from_binary.pixels);
    CHECK(from_ascii.pixels == img.pixels);
}

TEST_CASE("decode handles comments and whitespace") {
    const auto img = decode_pnm("P2 # magic\n# a comment line\n 2\t1 # size\n255\n7 9\n");
    CHECK(img.width == 2);
    CHECK(img.pixels == std::vector<double>{7, 9});
}

TEST_CASE("decode errors") {
    CHECK_THROWS_AS(decode_pnm("P7\n1 1\n255\n0\n"), BadMagic);
    CHECK_THROWS_AS(decode_pnm("P2\n2 2\n255\n0 1\n"), TruncatedData);
    CHECK_THROWS_AS(decode_pnm("P2\n1 1\n65535\n0\n"), MaxvalUnsupported);
    CHECK_THROWS_AS(decode_pnm(std::string("P5\n4 4\n255\n") + "ab"), TruncatedData);
}

TEST_CASE("encode/decode round trip is lossless for integer images") {
    std::mt19937_64 rng(307);
    for (int round = 0; round < 20; ++round) {
        const auto img = testutil::random_image(rng, 1 + int(rng() % 12), 1 + int(rng() % 12));
        CHECK(decode_pnm(encode_pgm(img, true)).pixels == img.pixels);
        CHECK(decode_pnm(encode_pgm(img, false)).pixels == img.pixels);
    }
}

TEST_CASE("median filter basics") {
    SUBCASE("constant image unchanged") {
        const auto img = constant_image(5, 5, 77);
        CHECK(median_denoise(img).pixels == img.pixels);
    }
    SUBCASE("salt pixel removed") {
        auto img = constant_image(3, 3, 0);
        img.at(1, 1) = 255;
        CHECK(median_denoise(img).at(1, 1) == 0.0);
    }
    SUBCASE("bad radius") {
        CHECK_THROWS_AS(median_denoise(constant_image(3, 3, 0), 0), BadRadius);
    }
}

TEST_CASE("median filter matches the naive oracle") {
    std::mt19937_64 rng(311);
    for (int round = 0; round < 20; ++round) {
        const auto img = testutil::random_image(rng, 8, 8);
        const int r = 1 + int(rng() % 2);
        CHECK(median_denoise(img, r).pixels == median_oracle(img, r).pixels);
    }
}

TEST_CASE("median filter is idempotent on constant and step images") {
    auto step = constant_image(8, 8, 0);
    for (int y = 0; y < 8; ++y)
        for (int x = 4; x < 8; ++x) step.at(y, x) = 200;
    const auto once = median_denoise(step);
    CHECK(median_denoise(once).pixels == once.pixels);

    const auto flat = constant_image(6, 6, 42);
    CHECK(median_denoise(median_denoise(flat)).pixels == flat.pixels);
}

TEST_CASE("gaussian blur basics") {
    SUBCASE("constant image preserved") {
        const auto img = constant_image(7, 7, 123);
        const auto out = gaussian_blur(img, 1.4);
        for (double p : out.pixels) CHECK(p == doctest::Approx(123.0).epsilon(1e-9));
    }
    SUBCASE("bad sigma") {
        CHECK_THROWS_AS(gaussian_blur(constant_image(3, 3, 0), 0.0), BadSigma);
        CHECK_THROWS_AS(gaussian_blur(constant_image(3, 3, 0), -1.0), BadSigma);
    }
}

TEST_CASE("separable gaussian matches the 2-D convolution oracle") {
    std::mt19937_64 rng(313);
    for (double sigma : {0.6, 1.0, 2.3}) {
        const auto img = testutil::random_image(rng, 16, 16);
        const auto fast = gaussian_blur(img, sigma);
        const auto slow = gaussian_oracle(img, sigma);
        for (std::size_t i = 0; i < fast.pixels.size(); ++i)
            CHECK(std::abs(fast.pixels[i] - slow.pixels[i]) < 1e-9);
    }
}

TEST_CASE("hog of a constant image is all zeros") {
    const auto d = hog(constant_image(16, 16, 99));
    for (double v : d.values) CHECK(v == 0.0);
    CHECK(d.blocks_x == 1);
    CHECK(d.blocks_y == 1);
    CHECK(int(d.values.size()) == d.block_len);
}

TEST_CASE("hog rejects images smaller than a block") {
    CHECK_THROWS_AS(hog(constant_image(15, 16, 0)), ImageTooSmall);
}

TEST_CASE("vertical edge concentrates votes in the horizontal-gradient bin") {
    auto img = constant_image(16, 16, 0);
    for (int y = 0; y < 16; ++y)
        for (int x = 8; x < 16; ++x) img.at(y, x) = 255;

    HogParams params;
    const auto d = hog(img, params);
    // horizontal gradient, zero vertical: orientation 0 degrees -> bin 0
    std::vector<double> bin_totals(std::size_t(params.bins), 0.0);
    for (std::size_t i = 0; i < d.values.size(); ++i)
        bin_totals[i % std::size_t(params.bins)] += d.values[i];
    for (int b = 1; b < params.bins; ++b)
        CHECK(bin_totals[std::size_t(b)] < 0.01 * bin_totals[0]);
    CHECK(bin_totals[0] > 0.0);
}

TEST_CASE("hog is invariant to constant brightness shifts") {
    std::mt19937_64 rng(317);
    auto img = testutil::random_image(rng, 24, 16);
    for (double& p : img.pixels) p = 20.0 + std::fmod(p, 200.0);  // keep +10 in range
    auto shifted = img;
    for (double& p : shifted.pixels) p += 10.0;
    const auto a = hog(img);
    const auto b = hog(shifted);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i)
        CHECK(std::abs(a.values[i] - b.values[i]) < 1e-9);
}

TEST_CASE("hog descriptor geometry across random shapes") {
    std::mt19937_64 rng(331);
    for (int round = 0; round < 20; ++round) {
        HogParams params;
        params.cell_size = 4 + int(rng() % 5);
        params.block_size = 1 + int(rng() % 2);
        params.bins = 2 + int(rng() % 10);
        const int w = params.cell_size * params.block_size + int(rng() % 20);
        const int h = params.cell_size * params.block_size + int(rng() % 20);
        const auto img = testutil::random_image(rng, w, h);
        const auto d = hog(img, params);

        const int cells_x = w / params.cell_size;
        const int cells_y = h / params.cell_size;
        CHECK(d.blocks_x == cells_x - params.block_size + 1);
        CHECK(d.blocks_y == cells_y - params.block_size + 1);
        CHECK(d.block_len == params.block_size * params.block_size * params.bins);
        CHECK(d.values.size() ==
              std::size_t(d.blocks_x) * std::size_t(d.blocks_y) * std::size_t(d.block_len));

        // block norms bounded by 1
        for (int blk = 0; blk < d.blocks_x * d.blocks_y; ++blk) {
            double norm2 = 0;
            for (int k = 0; k < d.block_len; ++k) {
                const double v = d.values[std::size_t(blk) * d.block_len + k];
                norm2 += v * v;
            }
            CHECK(std::sqrt(norm2) <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("180-degree rotation reverses the cell order of the histograms") {
    std::mt19937_64 rng(337);
    const auto img = testutil::random_image(rng, 16, 16);
    const auto a = hog(img);        // single 2x2-cell block
    const auto b = hog(rot180(img));
    const int bins = 9;
    // unsigned orientations are unchanged by rotation; cell (cy,cx) maps to
    // (1-cy,1-cx), i.e. cell index 3 - i within the block
    for (int cell = 0; cell < 4; ++cell)
        for (int k = 0; k < bins; ++k)
            CHECK(a.values[std::size_t(cell) * bins + k] ==
                  doctest::Approx(b.values[std::size_t(3 - cell) * bins + k])
                      .epsilon(1e-9));
}

TEST_CASE("hog export formats") {
    const auto d = hog(constant_image(16, 16, 1));
    CHECK(hog_to_json(d).find("\"blocks_x\": 1") != std::string::npos);
    const auto csv = hog_to_csv(d);
    CHECK(std::count(csv.begin(), csv.end(), ',') == long(d.values.size()) - 1);
}
