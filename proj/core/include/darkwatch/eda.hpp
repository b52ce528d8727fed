#pragma once

#include <array>
#include <string>
#include <vector>

#include "darkwatch/dataset.hpp"

namespace darkwatch {

struct GroupSummary {
    std::string group_key;
    long attempt_total = 0;
    double attempt_mean = 0.0;
    double impact_mean = 0.0;
    long count = 0;
};

struct HistogramSpec {
    std::vector<double> bin_edges;  // length bins+1, ascending
    std::vector<long> counts;       // length bins
};

struct BoxStats {
    std::string group_key;
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    double iqr = 0;
};

struct CorrelationMatrix {
    std::vector<std::string> variable_names;  // num_attempts, impact_level, target
    std::array<std::array<double, 3>, 3> cells{};
    std::array<bool, 3> zero_variance{};
};

struct BadBinCount : UsageError {
    explicit BadBinCount(long bins)
        : UsageError("histogram needs at least 1 bin, got " + std::to_string(bins)) {}
};

std::vector<GroupSummary> summarize_by_threat(const ThreatTable& table);

// Equal-width bins over [0,100]; interior edges belong to the right bin,
// 100 to the last bin. Out-of-range values are ignored.
HistogramSpec impact_histogram(const ThreatTable& table, long bins = 10);

// Proportions over the targeted-sector column, descending, ties by name.
std::vector<std::pair<std::string, double>> sector_shares(const ThreatTable& table);

std::vector<BoxStats> box_stats_by_threat(const ThreatTable& table);

// Quantile by linear interpolation at rank q*(n-1); values must be non-empty.
double quantile(std::vector<double> values, double q);

CorrelationMatrix correlation(const ThreatTable& table);

std::string eda_report_json(const ThreatTable& table, long bins = 10);

}  // namespace darkwatch
