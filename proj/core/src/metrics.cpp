#include "darkwatch/metrics.hpp"

#include <algorithm>

#include <json.hpp>

namespace darkwatch {

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw DimensionMismatch("y_true and y_pred length mismatch");
    if (y_true.empty()) throw DataError("cannot build confusion matrix from zero rows");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if ((t != 0 && t != 1) || (p != 0 && p != 1)) throw NonBinaryLabel();
        if (t == 0)
            p == 0 ? ++cm.tn : ++cm.fp;
        else
            p == 0 ? ++cm.fn : ++cm.tp;
    }
    return cm;
}

MetricsReport scores(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DataError("empty confusion matrix");
    MetricsReport r;
    r.accuracy = double(cm.tp + cm.tn) / double(cm.total());
    if (cm.tp + cm.fp == 0) {
        r.precision = 0;
        r.zero_division_notes.push_back("precision: no predicted positives");
    } else {
        r.precision = double(cm.tp) / double(cm.tp + cm.fp);
    }
    if (cm.tp + cm.fn == 0) {
        r.recall = 0;
        r.zero_division_notes.push_back("recall: no actual positives");
    } else {
        r.recall = double(cm.tp) / double(cm.tp + cm.fn);
    }
    if (r.precision + r.recall == 0) {
        r.f1 = 0;
        r.zero_division_notes.push_back("f1: precision + recall is zero");
    } else {
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    }
    return r;
}

ComparisonReport compare(const std::vector<std::pair<std::string, MetricsReport>>& reports) {
    if (reports.size() < 2) throw UsageError("compare needs at least 2 reports");
    ComparisonReport out;
    for (const auto& [name, report] : reports) out.ranked.push_back({name, report});
    std::stable_sort(out.ranked.begin(), out.ranked.end(),
                     [](const ComparisonEntry& a, const ComparisonEntry& b) {
                         return a.report.accuracy > b.report.accuracy;
                     });
    out.winner = out.ranked.front().name;
    return out;
}

std::string metrics_to_json(const ConfusionMatrix& cm, const MetricsReport& report) {
    nlohmann::json j;
    j["confusion"] = {{"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}, {"tp", cm.tp}};
    j["accuracy"] = report.accuracy;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["f1"] = report.f1;
    j["flags"] = report.zero_division_notes;
    return j.dump(2);
}

std::pair<ConfusionMatrix, MetricsReport> metrics_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ConfusionMatrix cm;
    const auto& c = j.at("confusion");
    cm.tn = c.at("tn").get<long>();
    cm.fp = c.at("fp").get<long>();
    cm.fn = c.at("fn").get<long>();
    cm.tp = c.at("tp").get<long>();
    MetricsReport r;
    r.accuracy = j.at("accuracy").get<double>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.f1 = j.at("f1").get<double>();
    r.zero_division_notes = j.at("flags").get<std::vector<std::string>>();
    return {cm, r};
}

std::string comparison_to_json(const ComparisonReport& cmp) {
    nlohmann::json j;
    j["winner"] = cmp.winner;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : cmp.ranked)
        rows.push_back({{"name", e.name},
                        {"accuracy", e.report.accuracy},
                        {"precision", e.report.precision},
                        {"recall", e.report.recall},
                        {"f1", e.report.f1}});
    j["ranked"] = rows;
    return j.dump(2);
}

}  // namespace darkwatch
