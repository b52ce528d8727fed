#pragma once

#include <string>
#include <vector>

#include "darkwatch/eda.hpp"
#include "darkwatch/metrics.hpp"

namespace darkwatch {

// Static, deterministic SVG renderers, one per report figure. No timestamps
// or other run-varying content.

std::string svg_bar_chart(const std::string& title,
                          const std::vector<std::pair<std::string, double>>& bars);

std::string svg_histogram(const std::string& title, const HistogramSpec& hist);

std::string svg_pie_chart(const std::string& title,
                          const std::vector<std::pair<std::string, double>>& shares);

std::string svg_box_plot(const std::string& title, const std::vector<BoxStats>& stats);

std::string svg_heatmap(const std::string& title, const CorrelationMatrix& corr);

// Two series per group (e.g. attempts and mean impact per threat type).
std::string svg_grouped_bars(const std::string& title,
                             const std::vector<std::string>& groups,
                             const std::string& series_a_name,
                             const std::vector<double>& series_a,
                             const std::string& series_b_name,
                             const std::vector<double>& series_b);

std::string svg_accuracy_comparison(const ComparisonReport& cmp);

}  // namespace darkwatch
