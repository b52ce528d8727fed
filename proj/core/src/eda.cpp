#include "darkwatch/eda.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

namespace darkwatch {

std::vector<GroupSummary> summarize_by_threat(const ThreatTable& table) {
    if (table.records.empty()) throw EmptyTable();
    std::map<std::string, GroupSummary> groups;
    for (const auto& r : table.records) {
        auto& g = groups[r.threat_type];
        g.group_key = r.threat_type;
        g.attempt_total += r.num_attempts;
        g.impact_mean += double(r.impact_level);
        ++g.count;
    }
    std::vector<GroupSummary> out;
    for (auto& [key, g] : groups) {
        g.attempt_mean = double(g.attempt_total) / double(g.count);
        g.impact_mean /= double(g.count);
        out.push_back(g);
    }
    return out;  // std::map keeps keys sorted
}

HistogramSpec impact_histogram(const ThreatTable& table, long bins) {
    if (bins < 1) throw BadBinCount(bins);
    HistogramSpec h;
    const double width = 100.0 / double(bins);
    for (long i = 0; i <= bins; ++i) h.bin_edges.push_back(width * double(i));
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (const auto& r : table.records) {
        const double v = double(r.impact_level);
        if (v < 0.0 || v > 100.0) continue;
        long idx = static_cast<long>(std::floor(v / width));
        if (idx >= bins) idx = bins - 1;  // 100 falls in the last bin
        ++h.counts[static_cast<std::size_t>(idx)];
    }
    return h;
}

std::vector<std::pair<std::string, double>> sector_shares(const ThreatTable& table) {
    if (table.records.empty()) throw EmptyTable();
    std::map<std::string, long> counts;
    for (const auto& r : table.records) ++counts[r.targeted_sector];
    std::vector<std::pair<std::string, double>> out;
    const double n = double(table.records.size());
    for (const auto& [sector, c] : counts) out.emplace_back(sector, double(c) / n);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

double quantile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 1) return values[0];
    const double rank = q * double(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = rank - double(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<BoxStats> box_stats_by_threat(const ThreatTable& table) {
    if (table.records.empty()) throw EmptyTable();
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : table.records)
        groups[r.threat_type].push_back(double(r.num_attempts));
    std::vector<BoxStats> out;
    for (const auto& [key, vals] : groups) {
        BoxStats b;
        b.group_key = key;
        b.min = *std::min_element(vals.begin(), vals.end());
        b.max = *std::max_element(vals.begin(), vals.end());
        b.q1 = quantile(vals, 0.25);
        b.median = quantile(vals, 0.5);
        b.q3 = quantile(vals, 0.75);
        b.iqr = b.q3 - b.q1;
        out.push_back(b);
    }
    return out;
}

CorrelationMatrix correlation(const ThreatTable& table) {
    const std::size_t n = table.records.size();
    if (n < 2) throw TooFewRows("correlation needs at least 2 rows");

    std::array<std::vector<double>, 3> cols;
    for (const auto& r : table.records) {
        cols[0].push_back(double(r.num_attempts));
        cols[1].push_back(double(r.impact_level));
        cols[2].push_back(double(r.target));
    }

    CorrelationMatrix m;
    m.variable_names = {"num_attempts", "impact_level", "target"};

    std::array<double, 3> mean{}, sd{};
    for (int i = 0; i < 3; ++i) {
        for (double v : cols[i]) mean[i] += v;
        mean[i] /= double(n);
        double ss = 0;
        for (double v : cols[i]) ss += (v - mean[i]) * (v - mean[i]);
        sd[i] = std::sqrt(ss);
        m.zero_variance[i] = sd[i] == 0.0;
    }

    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (i == j) {
                m.cells[i][j] = 1.0;
                continue;
            }
            if (m.zero_variance[i] || m.zero_variance[j]) {
                m.cells[i][j] = 0.0;  // sentinel, flagged
                continue;
            }
            double cov = 0;
            for (std::size_t k = 0; k < n; ++k)
                cov += (cols[i][k] - mean[i]) * (cols[j][k] - mean[j]);
            m.cells[i][j] = cov / (sd[i] * sd[j]);
        }
    }
    return m;
}

std::string eda_report_json(const ThreatTable& table, long bins) {
    nlohmann::json j;

    nlohmann::json gs = nlohmann::json::array();
    for (const auto& g : summarize_by_threat(table))
        gs.push_back({{"group_key", g.group_key},
                      {"attempt_total", g.attempt_total},
                      {"attempt_mean", g.attempt_mean},
                      {"impact_mean", g.impact_mean},
                      {"count", g.count}});
    j["group_summaries"] = gs;

    const auto h = impact_histogram(table, bins);
    j["histogram"] = {{"bin_edges", h.bin_edges}, {"counts", h.counts}};

    nlohmann::json shares = nlohmann::json::array();
    for (const auto& [sector, p] : sector_shares(table))
        shares.push_back({{"sector", sector}, {"proportion", p}});
    j["sector_shares"] = shares;

    nlohmann::json box = nlohmann::json::array();
    for (const auto& b : box_stats_by_threat(table))
        box.push_back({{"group_key", b.group_key},
                       {"min", b.min},
                       {"q1", b.q1},
                       {"median", b.median},
                       {"q3", b.q3},
                       {"max", b.max},
                       {"iqr", b.iqr}});
    j["box_stats"] = box;

    const auto c = correlation(table);
    nlohmann::json cells = nlohmann::json::array();
    for (int i = 0; i < 3; ++i)
        cells.push_back({c.cells[i][0], c.cells[i][1], c.cells[i][2]});
    j["correlation"] = {{"variable_names", c.variable_names},
                        {"cells", cells},
                        {"zero_variance",
                         {c.zero_variance[0], c.zero_variance[1], c.zero_variance[2]}}};
    return j.dump(2);
}

}  // namespace darkwatch
