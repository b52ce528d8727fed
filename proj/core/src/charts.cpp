#include "darkwatch/charts.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace darkwatch {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 400;
constexpr int kMarginLeft = 60;
constexpr int kMarginBottom = 80;
constexpr int kMarginTop = 40;
constexpr int kMarginRight = 20;

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                          "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::ostringstream svg_open(const std::string& title) {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-size=\"16\">"
      << escape_xml(title) << "</text>\n";
    return s;
}

std::string vertical_bars(const std::vector<std::pair<std::string, double>>& bars,
                          const std::string& title) {
    auto s = svg_open(title);
    double vmax = 1e-12;
    for (const auto& [_, v] : bars) vmax = std::max(vmax, v);

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const double slot = plot_w / double(bars.size());
    const double bar_w = slot * 0.7;

    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double h = plot_h * bars[i].second / vmax;
        const double x = kMarginLeft + slot * double(i) + (slot - bar_w) / 2.0;
        const double y = kMarginTop + plot_h - h;
        s << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
          << fmt(bar_w) << "\" height=\"" << fmt(h) << "\" fill=\""
          << kPalette[i % 10] << "\"/>\n";
        s << "<text x=\"" << fmt(x + bar_w / 2) << "\" y=\"" << fmt(y - 4)
          << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(bars[i].second)
          << "</text>\n";
        s << "<text x=\"" << fmt(x + bar_w / 2) << "\" y=\""
          << fmt(kMarginTop + plot_h + 16) << "\" text-anchor=\"middle\" "
             "font-size=\"11\">"
          << escape_xml(bars[i].first) << "</text>\n";
    }
    s << "<line x1=\"" << kMarginLeft << "\" y1=\"" << fmt(kMarginTop + plot_h)
      << "\" x2=\"" << kWidth - kMarginRight << "\" y2=\"" << fmt(kMarginTop + plot_h)
      << "\" stroke=\"black\"/>\n</svg>\n";
    return s.str();
}

}  // namespace

std::string svg_bar_chart(const std::string& title,
                          const std::vector<std::pair<std::string, double>>& bars) {
    return vertical_bars(bars, title);
}

std::string svg_histogram(const std::string& title, const HistogramSpec& hist) {
    std::vector<std::pair<std::string, double>> bars;
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        bars.emplace_back(fmt(hist.bin_edges[i]) + "-" + fmt(hist.bin_edges[i + 1]),
                          double(hist.counts[i]));
    return vertical_bars(bars, title);
}

std::string svg_pie_chart(const std::string& title,
                          const std::vector<std::pair<std::string, double>>& shares) {
    auto s = svg_open(title);
    const double cx = kWidth / 2.0, cy = (kHeight + kMarginTop) / 2.0, r = 130.0;
    double angle = -M_PI / 2.0;
    for (std::size_t i = 0; i < shares.size(); ++i) {
        const double sweep = shares[i].second * 2.0 * M_PI;
        const double x0 = cx + r * std::cos(angle), y0 = cy + r * std::sin(angle);
        const double x1 = cx + r * std::cos(angle + sweep);
        const double y1 = cy + r * std::sin(angle + sweep);
        const int large = sweep > M_PI ? 1 : 0;
        s << "<path d=\"M" << fmt(cx) << ' ' << fmt(cy) << " L" << fmt(x0) << ' '
          << fmt(y0) << " A" << fmt(r) << ' ' << fmt(r) << " 0 " << large << " 1 "
          << fmt(x1) << ' ' << fmt(y1) << " Z\" fill=\"" << kPalette[i % 10]
          << "\" stroke=\"white\"/>\n";
        const double mid = angle + sweep / 2.0;
        s << "<text x=\"" << fmt(cx + (r + 30) * std::cos(mid)) << "\" y=\""
          << fmt(cy + (r + 30) * std::sin(mid))
          << "\" text-anchor=\"middle\" font-size=\"11\">" << escape_xml(shares[i].first)
          << " " << fmt(shares[i].second * 100.0) << "%</text>\n";
        angle += sweep;
    }
    s << "</svg>\n";
    return s.str();
}

std::string svg_box_plot(const std::string& title, const std::vector<BoxStats>& stats) {
    auto s = svg_open(title);
    double vmin = stats.empty() ? 0 : stats[0].min, vmax = vmin + 1e-12;
    for (const auto& b : stats) {
        vmin = std::min(vmin, b.min);
        vmax = std::max(vmax, b.max);
    }
    if (vmax <= vmin) vmax = vmin + 1.0;

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto ypos = [&](double v) {
        return kMarginTop + plot_h * (1.0 - (v - vmin) / (vmax - vmin));
    };
    const double slot = plot_w / double(stats.size());
    const double box_w = slot * 0.5;

    for (std::size_t i = 0; i < stats.size(); ++i) {
        const auto& b = stats[i];
        const double xc = kMarginLeft + slot * (double(i) + 0.5);
        s << "<line x1=\"" << fmt(xc) << "\" y1=\"" << fmt(ypos(b.min)) << "\" x2=\""
          << fmt(xc) << "\" y2=\"" << fmt(ypos(b.max)) << "\" stroke=\"black\"/>\n";
        s << "<rect x=\"" << fmt(xc - box_w / 2) << "\" y=\"" << fmt(ypos(b.q3))
          << "\" width=\"" << fmt(box_w) << "\" height=\""
          << fmt(ypos(b.q1) - ypos(b.q3)) << "\" fill=\"" << kPalette[i % 10]
          << "\" stroke=\"black\"/>\n";
        s << "<line x1=\"" << fmt(xc - box_w / 2) << "\" y1=\"" << fmt(ypos(b.median))
          << "\" x2=\"" << fmt(xc + box_w / 2) << "\" y2=\"" << fmt(ypos(b.median))
          << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        s << "<text x=\"" << fmt(xc) << "\" y=\"" << fmt(kMarginTop + plot_h + 16)
          << "\" text-anchor=\"middle\" font-size=\"11\">" << escape_xml(b.group_key)
          << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::string svg_heatmap(const std::string& title, const CorrelationMatrix& corr) {
    auto s = svg_open(title);
    const int n = int(corr.variable_names.size());
    const double cell = 90.0;
    const double x0 = 180.0, y0 = 70.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = corr.cells[std::size_t(i)][std::size_t(j)];
            // blue for -1 through white at 0 to red at +1
            const int red = int(std::lround(255.0 * std::min(1.0, 1.0 + std::min(v, 0.0))));
            const int blue = int(std::lround(255.0 * std::min(1.0, 1.0 - std::max(v, 0.0))));
            const int green = std::min(red, blue);
            s << "<rect x=\"" << fmt(x0 + cell * j) << "\" y=\"" << fmt(y0 + cell * i)
              << "\" width=\"" << fmt(cell) << "\" height=\"" << fmt(cell)
              << "\" fill=\"rgb(" << red << ',' << green << ',' << blue
              << ")\" stroke=\"black\"/>\n";
            s << "<text x=\"" << fmt(x0 + cell * j + cell / 2) << "\" y=\""
              << fmt(y0 + cell * i + cell / 2)
              << "\" text-anchor=\"middle\" font-size=\"13\">" << fmt(v) << "</text>\n";
        }
        s << "<text x=\"" << fmt(x0 - 8) << "\" y=\"" << fmt(y0 + cell * i + cell / 2)
          << "\" text-anchor=\"end\" font-size=\"11\">"
          << escape_xml(corr.variable_names[std::size_t(i)]) << "</text>\n";
        s << "<text x=\"" << fmt(x0 + cell * i + cell / 2) << "\" y=\""
          << fmt(y0 + cell * n + 16) << "\" text-anchor=\"middle\" font-size=\"11\">"
          << escape_xml(corr.variable_names[std::size_t(i)]) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::string svg_grouped_bars(const std::string& title,
                             const std::vector<std::string>& groups,
                             const std::string& series_a_name,
                             const std::vector<double>& series_a,
                             const std::string& series_b_name,
                             const std::vector<double>& series_b) {
    auto s = svg_open(title);
    double vmax = 1e-12;
    for (double v : series_a) vmax = std::max(vmax, v);
    for (double v : series_b) vmax = std::max(vmax, v);

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const double slot = plot_w / double(groups.size());
    const double bar_w = slot * 0.35;

    for (std::size_t i = 0; i < groups.size(); ++i) {
        const double xa = kMarginLeft + slot * double(i) + slot * 0.12;
        const double ha = plot_h * series_a[i] / vmax;
        const double hb = plot_h * series_b[i] / vmax;
        s << "<rect x=\"" << fmt(xa) << "\" y=\"" << fmt(kMarginTop + plot_h - ha)
          << "\" width=\"" << fmt(bar_w) << "\" height=\"" << fmt(ha)
          << "\" fill=\"" << kPalette[0] << "\"/>\n";
        s << "<rect x=\"" << fmt(xa + bar_w + 2) << "\" y=\""
          << fmt(kMarginTop + plot_h - hb) << "\" width=\"" << fmt(bar_w)
          << "\" height=\"" << fmt(hb) << "\" fill=\"" << kPalette[1] << "\"/>\n";
        s << "<text x=\"" << fmt(xa + bar_w) << "\" y=\"" << fmt(kMarginTop + plot_h + 16)
          << "\" text-anchor=\"middle\" font-size=\"11\">" << escape_xml(groups[i])
          << "</text>\n";
    }
    s << "<rect x=\"" << kMarginLeft << "\" y=\"" << kHeight - 28
      << "\" width=\"12\" height=\"12\" fill=\"" << kPalette[0] << "\"/>"
      << "<text x=\"" << kMarginLeft + 16 << "\" y=\"" << kHeight - 18
      << "\" font-size=\"11\">" << escape_xml(series_a_name) << "</text>\n";
    s << "<rect x=\"" << kMarginLeft + 160 << "\" y=\"" << kHeight - 28
      << "\" width=\"12\" height=\"12\" fill=\"" << kPalette[1] << "\"/>"
      << "<text x=\"" << kMarginLeft + 176 << "\" y=\"" << kHeight - 18
      << "\" font-size=\"11\">" << escape_xml(series_b_name) << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

std::string svg_accuracy_comparison(const ComparisonReport& cmp) {
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& e : cmp.ranked) bars.emplace_back(e.name, e.report.accuracy);
    return vertical_bars(bars, "Accuracy Comparison");
}

}  // namespace darkwatch
