#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "darkwatch/errors.hpp"

namespace darkwatch {

using Matrix = std::vector<std::vector<double>>;

// Column order of the threat CSV schema.
inline constexpr std::array<const char*, 5> kThreatColumns = {
    "Type of Threat", "Targeted Sector", "Number of Attempts", "Impact Level",
    "Target"};

struct ThreatRecord {
    std::string threat_type;
    std::string targeted_sector;
    long num_attempts = 0;
    long impact_level = 0;
    int target = 0;
};

struct ThreatTable {
    std::vector<ThreatRecord> records;
    std::string source_name;
    // Raw cell text per row (schema column order), kept for null auditing.
    // Empty when the table was built programmatically.
    std::vector<std::array<std::string, 5>> raw_cells;

    std::size_t size() const { return records.size(); }
};

struct NullReport {
    std::array<long, 5> counts{};  // per kThreatColumns

    bool clean() const {
        for (long c : counts)
            if (c != 0) return false;
        return true;
    }
};

// True for cells treated as missing: empty, whitespace-only, "NA", "null"
// (case-insensitive).
bool is_null_cell(const std::string& cell);

ThreatTable parse_threat_csv(std::istream& in, const std::string& source_name = "");
ThreatTable parse_threat_csv(const std::string& text, const std::string& source_name = "");

std::string to_csv(const ThreatTable& table);

NullReport validate_no_nulls(const ThreatTable& table);

struct CategoryEncoder {
    std::string field;                 // "threat_type" or "targeted_sector"
    std::vector<std::string> levels;   // first-appearance order
    std::size_t first_column = 0;      // absolute index of the first indicator
};

struct ColumnScaling {
    double offset = 0.0;
    double divisor = 1.0;  // strictly positive
};

struct EncodedDataset {
    std::vector<std::string> column_names;
    Matrix features;
    std::vector<int> labels;
    std::vector<CategoryEncoder> encoders;
    std::vector<ColumnScaling> scaling;  // one entry per feature column

    std::size_t rows() const { return features.size(); }
    std::size_t cols() const { return column_names.size(); }
};

EncodedDataset encode(const ThreatTable& table, bool scale_numeric = true);

// Re-encode a table against a previously fitted layout (column_names +
// scaling from a saved model). Categories unseen by the layout map to an
// all-zero indicator block.
Matrix encode_with_layout(const ThreatTable& table,
                          const std::vector<std::string>& column_names,
                          const std::vector<ColumnScaling>& scaling);

struct SplitPair {
    EncodedDataset train;
    EncodedDataset test;
    std::uint64_t seed = 0;
    double ratio = 0.0;
};

SplitPair split(const EncodedDataset& data, double ratio, std::uint64_t seed);

std::string encoded_to_json(const EncodedDataset& data);

}  // namespace darkwatch
