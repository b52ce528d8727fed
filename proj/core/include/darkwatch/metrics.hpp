#pragma once

#include <string>
#include <vector>

#include "darkwatch/errors.hpp"

namespace darkwatch {

struct ConfusionMatrix {
    long tn = 0, fp = 0, fn = 0, tp = 0;

    long total() const { return tn + fp + fn + tp; }
};

struct MetricsReport {
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;
    std::vector<std::string> zero_division_notes;
};

struct ComparisonEntry {
    std::string name;
    MetricsReport report;
};

struct ComparisonReport {
    std::vector<ComparisonEntry> ranked;  // descending accuracy, ties keep input order
    std::string winner;
};

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);

MetricsReport scores(const ConfusionMatrix& cm);

ComparisonReport compare(const std::vector<std::pair<std::string, MetricsReport>>& reports);

std::string metrics_to_json(const ConfusionMatrix& cm, const MetricsReport& report);
std::string comparison_to_json(const ComparisonReport& cmp);

// Reads a metrics JSON produced by metrics_to_json.
std::pair<ConfusionMatrix, MetricsReport> metrics_from_json(const std::string& text);

}  // namespace darkwatch
