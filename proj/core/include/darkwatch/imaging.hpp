#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "darkwatch/errors.hpp"

namespace darkwatch {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;  // row-major, values in [0,255]

    double at(int y, int x) const { return pixels[std::size_t(y) * width + x]; }
    double& at(int y, int x) { return pixels[std::size_t(y) * width + x]; }

    // Edge-replicated read; valid for any (y,x).
    double at_clamped(int y, int x) const;
};

struct BadMagic : DataError {
    explicit BadMagic(const std::string& magic)
        : DataError("not a PNM file (magic '" + magic + "')") {}
};
struct TruncatedData : DataError {
    TruncatedData() : DataError("PNM data ends before the declared pixel count") {}
};
struct MaxvalUnsupported : DataError {
    explicit MaxvalUnsupported(long maxval)
        : DataError("PNM maxval " + std::to_string(maxval) + " unsupported (need <= 255)") {}
};
struct ImageTooSmall : DataError {
    ImageTooSmall() : DataError("image smaller than one HOG block") {}
};
struct BadRadius : UsageError {
    explicit BadRadius(int r)
        : UsageError("filter radius must be >= 1, got " + std::to_string(r)) {}
};
struct BadSigma : UsageError {
    explicit BadSigma(double s)
        : UsageError("sigma must be positive, got " + std::to_string(s)) {}
};

// PGM (P2/P5) or PPM (P3/P6), maxval <= 255. Color converts to gray by
// luma 0.299R + 0.587G + 0.114B.
GrayImage decode_pnm(std::istream& in);
GrayImage decode_pnm(const std::string& bytes);

// binary=false emits P2, binary=true P5. Pixels rounded to nearest integer.
std::string encode_pgm(const GrayImage& img, bool binary = true);

GrayImage median_denoise(const GrayImage& img, int radius = 1);

GrayImage gaussian_blur(const GrayImage& img, double sigma);

struct HogParams {
    int cell_size = 8;
    int block_size = 2;  // cells per block side
    int bins = 9;
    bool signed_orientation = false;
    double epsilon = 1e-6;
};

struct HogDescriptor {
    std::vector<double> values;
    int blocks_x = 0;
    int blocks_y = 0;
    int block_len = 0;  // block_size^2 * bins
};

HogDescriptor hog(const GrayImage& img, const HogParams& params = {});

std::string hog_to_json(const HogDescriptor& d);
std::string hog_to_csv(const HogDescriptor& d);

}  // namespace darkwatch
