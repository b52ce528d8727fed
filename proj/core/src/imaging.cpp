#include "darkwatch/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include <json.hpp>

namespace darkwatch {

double GrayImage::at_clamped(int y, int x) const {
    y = std::clamp(y, 0, height - 1);
    x = std::clamp(x, 0, width - 1);
    return at(y, x);
}

namespace {

// Reads the next PNM header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
        } else if (!std::isspace(c)) {
            tok += char(c);
            while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#')
                tok += char(in.get());
            return tok;
        }
    }
    return tok;
}

long header_int(std::istream& in) {
    const std::string tok = next_token(in);
    if (tok.empty()) throw TruncatedData();
    try {
        return std::stol(tok);
    } catch (const std::exception&) {
        throw TruncatedData();
    }
}

double luma(double r, double g, double b) {
    return 0.299 * r + 0.587 * g + 0.114 * b;
}

}  // namespace

GrayImage decode_pnm(std::istream& in) {
    const std::string magic = next_token(in);
    if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6")
        throw BadMagic(magic);
    const bool color = magic == "P3" || magic == "P6";
    const bool binary = magic == "P5" || magic == "P6";

    const long width = header_int(in);
    const long height = header_int(in);
    const long maxval = header_int(in);
    if (width <= 0 || height <= 0) throw TruncatedData();
    if (maxval <= 0 || maxval > 255) throw MaxvalUnsupported(maxval);

    GrayImage img;
    img.width = int(width);
    img.height = int(height);
    const std::size_t n = std::size_t(width) * std::size_t(height);
    img.pixels.resize(n);

    const int samples = color ? 3 : 1;
    if (binary) {
        in.get();  // single whitespace byte after maxval
        std::vector<char> raw(n * samples);
        in.read(raw.data(), std::streamsize(raw.size()));
        if (std::size_t(in.gcount()) != raw.size()) throw TruncatedData();
        for (std::size_t i = 0; i < n; ++i) {
            if (color) {
                img.pixels[i] = luma(double(static_cast<unsigned char>(raw[3 * i])),
                                     double(static_cast<unsigned char>(raw[3 * i + 1])),
                                     double(static_cast<unsigned char>(raw[3 * i + 2])));
            } else {
                img.pixels[i] = double(static_cast<unsigned char>(raw[i]));
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            double v[3];
            for (int s = 0; s < samples; ++s) {
                const long x = header_int(in);
                if (x < 0 || x > maxval) throw TruncatedData();
                v[s] = double(x);
            }
            img.pixels[i] = color ? luma(v[0], v[1], v[2]) : v[0];
        }
    }
    return img;
}

GrayImage decode_pnm(const std::string& bytes) {
    std::istringstream in(bytes, std::ios::binary);
    return decode_pnm(in);
}

std::string encode_pgm(const GrayImage& img, bool binary) {
    std::ostringstream out;
    out << (binary ? "P5" : "P2") << '\n'
        << img.width << ' ' << img.height << '\n'
        << "255\n";
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const int v = std::clamp(int(std::lround(img.pixels[i])), 0, 255);
        if (binary) {
            out.put(char(static_cast<unsigned char>(v)));
        } else {
            out << v << ((i + 1) % std::size_t(img.width) == 0 ? '\n' : ' ');
        }
    }
    return out.str();
}

GrayImage median_denoise(const GrayImage& img, int radius) {
    if (radius < 1) throw BadRadius(radius);
    GrayImage out = img;
    const int r = radius;
    std::vector<double> window;
    window.reserve(std::size_t(2 * r + 1) * std::size_t(2 * r + 1));
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            window.clear();
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    window.push_back(img.at_clamped(y + dy, x + dx));
            auto mid = window.begin() + long(window.size() / 2);
            std::nth_element(window.begin(), mid, window.end());
            out.at(y, x) = *mid;
        }
    }
    return out;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    if (!(sigma > 0)) throw BadSigma(sigma);
    const int r = int(std::ceil(3.0 * sigma));
    std::vector<double> kernel(std::size_t(2 * r + 1));
    double sum = 0;
    for (int d = -r; d <= r; ++d) {
        kernel[std::size_t(d + r)] = std::exp(-double(d) * double(d) / (2.0 * sigma * sigma));
        sum += kernel[std::size_t(d + r)];
    }
    for (double& k : kernel) k /= sum;

    GrayImage tmp = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0;
            for (int d = -r; d <= r; ++d)
                acc += kernel[std::size_t(d + r)] * img.at_clamped(y, x + d);
            tmp.at(y, x) = acc;
        }
    GrayImage out = tmp;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0;
            for (int d = -r; d <= r; ++d)
                acc += kernel[std::size_t(d + r)] * tmp.at_clamped(y + d, x);
            out.at(y, x) = std::clamp(acc, 0.0, 255.0);
        }
    return out;
}

HogDescriptor hog(const GrayImage& img, const HogParams& params) {
    const int cell = params.cell_size;
    const int bsz = params.block_size;
    if (img.width < cell * bsz || img.height < cell * bsz) throw ImageTooSmall();

    const int cells_x = img.width / cell;
    const int cells_y = img.height / cell;
    const int bins = params.bins;
    const double period = params.signed_orientation ? 360.0 : 180.0;
    const double bin_width = period / double(bins);

    // Per-cell orientation histograms; trailing partial cells discarded.
    std::vector<double> hist(std::size_t(cells_x) * cells_y * bins, 0.0);
    for (int y = 0; y < cells_y * cell; ++y) {
        for (int x = 0; x < cells_x * cell; ++x) {
            const double gx = img.at_clamped(y, x + 1) - img.at_clamped(y, x - 1);
            const double gy = img.at_clamped(y + 1, x) - img.at_clamped(y - 1, x);
            const double mag = std::sqrt(gx * gx + gy * gy);
            if (mag == 0.0) continue;
            double angle = std::atan2(gy, gx) * 180.0 / M_PI;  // (-180,180]
            if (angle < 0) angle += 360.0;
            if (!params.signed_orientation && angle >= 180.0) angle -= 180.0;
            if (angle >= period) angle -= period;

            // Linear vote between the two nearest bin centers (centers at
            // i*bin_width, wrapping).
            const double pos = angle / bin_width;
            const int b0 = int(std::floor(pos)) % bins;
            const int b1 = (b0 + 1) % bins;
            const double f = pos - std::floor(pos);
            const std::size_t base =
                (std::size_t(y / cell) * cells_x + std::size_t(x / cell)) * bins;
            hist[base + std::size_t(b0)] += mag * (1.0 - f);
            hist[base + std::size_t(b1)] += mag * f;
        }
    }

    HogDescriptor d;
    d.blocks_x = cells_x - bsz + 1;
    d.blocks_y = cells_y - bsz + 1;
    d.block_len = bsz * bsz * bins;
    d.values.reserve(std::size_t(d.blocks_x) * d.blocks_y * d.block_len);
    for (int by = 0; by < d.blocks_y; ++by) {
        for (int bx = 0; bx < d.blocks_x; ++bx) {
            std::vector<double> block;
            block.reserve(std::size_t(d.block_len));
            for (int cy = 0; cy < bsz; ++cy)
                for (int cx = 0; cx < bsz; ++cx) {
                    const std::size_t base =
                        (std::size_t(by + cy) * cells_x + std::size_t(bx + cx)) * bins;
                    for (int b = 0; b < bins; ++b) block.push_back(hist[base + b]);
                }
            double norm2 = 0;
            for (double v : block) norm2 += v * v;
            const double inv = 1.0 / std::sqrt(norm2 + params.epsilon * params.epsilon);
            for (double v : block) d.values.push_back(v * inv);
        }
    }
    return d;
}

std::string hog_to_json(const HogDescriptor& d) {
    nlohmann::json j;
    j["layout"] = {{"blocks_x", d.blocks_x},
                   {"blocks_y", d.blocks_y},
                   {"block_len", d.block_len}};
    j["values"] = d.values;
    return j.dump(2);
}

std::string hog_to_csv(const HogDescriptor& d) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        if (i) out << ',';
        out << d.values[i];
    }
    out << '\n';
    return out.str();
}

}  // namespace darkwatch
