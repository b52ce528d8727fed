#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "darkwatch/cnn.hpp"
#include "darkwatch/dataset.hpp"
#include "darkwatch/imaging.hpp"

namespace testutil {

// A fixed nine-row sample table used across the suites.
inline std::string nine_row_csv() {
    return "Type of Threat,Targeted Sector,Number of Attempts,Impact Level,Target\n"
           "Malware,Data Breach,85,26,0\n"
           "Data Breach,Data Breach,86,32,0\n"
           "Ransomware,Ransomware,99,55,0\n"
           "Data Breach,Ransomware,9,78,0\n"
           "Social Engineering,Phishing,21,92,0\n"
           "Social Engineering,Social Engineering,71,47,0\n"
           "Phishing,Ransomware,35,74,0\n"
           "Malware,Malware,53,92,1\n"
           "Ransomware,Ransomware,95,91,0\n";
}

inline darkwatch::ThreatTable nine_row_table() {
    return darkwatch::parse_threat_csv(nine_row_csv(), "nine_row");
}

inline darkwatch::ThreatTable random_table(std::mt19937_64& rng, int max_rows = 64) {
    static const char* kTypes[] = {"Malware", "Ransomware", "Phishing",
                                   "Data Breach", "Social Engineering"};
    static const char* kSectors[] = {"Finance", "Health", "Retail", "Energy",
                                     "Government"};
    darkwatch::ThreatTable t;
    const int n = 1 + int(rng() % std::uint64_t(max_rows));
    for (int i = 0; i < n; ++i) {
        darkwatch::ThreatRecord r;
        r.threat_type = kTypes[rng() % 5];
        r.targeted_sector = kSectors[rng() % 5];
        r.num_attempts = long(rng() % 200);
        r.impact_level = long(rng() % 101);
        r.target = int(rng() % 2);
        t.records.push_back(r);
    }
    return t;
}

inline double rel_err(double a, double b) {
    const double denom = std::max({std::abs(a), std::abs(b), 1e-12});
    return std::abs(a - b) / denom;
}

inline darkwatch::GrayImage random_image(std::mt19937_64& rng, int w, int h) {
    darkwatch::GrayImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(std::size_t(w) * h);
    for (double& p : img.pixels) p = double(rng() % 256);
    return img;
}

struct BarCorpus {
    std::vector<darkwatch::GrayImage> images;
    std::vector<int> labels;  // 0 = vertical bar, 1 = horizontal bar
};

// Seeded corpus of bar-orientation images with mild uniform noise.
inline BarCorpus make_bar_corpus(int count, int size, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    BarCorpus corpus;
    for (int i = 0; i < count; ++i) {
        const int label = i % 2;
        darkwatch::GrayImage img;
        img.width = size;
        img.height = size;
        img.pixels.assign(std::size_t(size) * size, 0.0);
        const int pos = 1 + int(rng() % std::uint64_t(size - 2));
        const int thickness = 1 + int(rng() % 2);
        for (int t = 0; t < thickness; ++t) {
            const int line = std::min(pos + t, size - 1);
            for (int k = 0; k < size; ++k) {
                if (label == 0)
                    img.at(k, line) = 255.0;
                else
                    img.at(line, k) = 255.0;
            }
        }
        for (double& p : img.pixels) {
            p += double(rng() % 41) - 20.0;
            p = std::clamp(p, 0.0, 255.0);
        }
        corpus.images.push_back(std::move(img));
        corpus.labels.push_back(label);
    }
    return corpus;
}

inline std::vector<darkwatch::Tensor3> to_tensors(const std::vector<darkwatch::GrayImage>& imgs) {
    std::vector<darkwatch::Tensor3> out;
    for (const auto& img : imgs) out.push_back(darkwatch::to_tensor(img));
    return out;
}

}  // namespace testutil
