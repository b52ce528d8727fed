#include "darkwatch/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <charconv>
#include <istream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace darkwatch {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

// RFC-4180 field splitting with double-quote escaping.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c == '\r') {
            // swallow CR of CRLF
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

long parse_long(const std::string& cell, std::size_t line_no, const char* col) {
    const std::string t = trim(cell);
    long value = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw MalformedRow(line_no, std::string("non-integer value '") + t +
                                        "' in column " + col);
    return value;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

bool is_null_cell(const std::string& cell) {
    const std::string t = lower(trim(cell));
    return t.empty() || t == "na" || t == "null";
}

ThreatTable parse_threat_csv(std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line)) throw EmptyInput();

    const auto header = split_csv_line(line);
    std::array<int, 5> col_index;
    col_index.fill(-1);
    for (std::size_t h = 0; h < header.size(); ++h) {
        const std::string name = lower(trim(header[h]));
        for (std::size_t c = 0; c < kThreatColumns.size(); ++c) {
            if (name == lower(kThreatColumns[c])) col_index[c] = static_cast<int>(h);
        }
    }
    for (std::size_t c = 0; c < kThreatColumns.size(); ++c)
        if (col_index[c] < 0) throw MissingColumn(kThreatColumns[c]);

    ThreatTable table;
    table.source_name = source_name;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw MalformedRow(line_no, "expected " + std::to_string(header.size()) +
                                            " fields, got " +
                                            std::to_string(fields.size()));
        std::array<std::string, 5> cells;
        for (std::size_t c = 0; c < 5; ++c)
            cells[c] = trim(fields[static_cast<std::size_t>(col_index[c])]);

        ThreatRecord rec;
        rec.threat_type = cells[0];
        rec.targeted_sector = cells[1];
        // Null-sentinel numeric cells parse to 0 so the table stays loadable;
        // validate_no_nulls reports them from the raw cells.
        rec.num_attempts = is_null_cell(cells[2]) ? 0 : parse_long(cells[2], line_no, "Number of Attempts");
        rec.impact_level = is_null_cell(cells[3]) ? 0 : parse_long(cells[3], line_no, "Impact Level");
        const long target = is_null_cell(cells[4]) ? 0 : parse_long(cells[4], line_no, "Target");
        if (target != 0 && target != 1)
            throw MalformedRow(line_no, "target must be 0 or 1");
        rec.target = static_cast<int>(target);

        table.records.push_back(std::move(rec));
        table.raw_cells.push_back(std::move(cells));
    }
    if (table.records.empty()) throw EmptyInput();
    return table;
}

ThreatTable parse_threat_csv(const std::string& text, const std::string& source_name) {
    std::istringstream in(text);
    return parse_threat_csv(in, source_name);
}

std::string to_csv(const ThreatTable& table) {
    std::ostringstream out;
    for (std::size_t c = 0; c < kThreatColumns.size(); ++c) {
        if (c) out << ',';
        out << kThreatColumns[c];
    }
    out << '\n';
    for (const auto& r : table.records) {
        out << csv_escape(r.threat_type) << ',' << csv_escape(r.targeted_sector)
            << ',' << r.num_attempts << ',' << r.impact_level << ',' << r.target
            << '\n';
    }
    return out.str();
}

NullReport validate_no_nulls(const ThreatTable& table) {
    NullReport report;
    auto scan = [&report](const std::array<std::string, 5>& cells) {
        for (std::size_t c = 0; c < 5; ++c)
            if (is_null_cell(cells[c])) ++report.counts[c];
    };
    if (!table.raw_cells.empty()) {
        for (const auto& cells : table.raw_cells) scan(cells);
    } else {
        for (const auto& r : table.records)
            scan({r.threat_type, r.targeted_sector, std::to_string(r.num_attempts),
                  std::to_string(r.impact_level), std::to_string(r.target)});
    }
    return report;
}

EncodedDataset encode(const ThreatTable& table, bool scale_numeric) {
    if (table.records.empty()) throw EmptyTable();

    auto collect_levels = [&table](auto field) {
        std::vector<std::string> levels;
        for (const auto& r : table.records) {
            const std::string& v = field(r);
            if (std::find(levels.begin(), levels.end(), v) == levels.end())
                levels.push_back(v);
        }
        return levels;
    };

    EncodedDataset out;
    CategoryEncoder type_enc{"threat_type",
                             collect_levels([](const ThreatRecord& r) -> const std::string& {
                                 return r.threat_type;
                             }),
                             0};
    CategoryEncoder sector_enc{"targeted_sector",
                               collect_levels([](const ThreatRecord& r) -> const std::string& {
                                   return r.targeted_sector;
                               }),
                               type_enc.levels.size()};

    for (const auto& l : type_enc.levels) out.column_names.push_back("threat_type=" + l);
    for (const auto& l : sector_enc.levels)
        out.column_names.push_back("targeted_sector=" + l);
    out.column_names.push_back("num_attempts");
    out.column_names.push_back("impact_level");
    out.encoders = {type_enc, sector_enc};

    const std::size_t cols = out.column_names.size();
    out.scaling.assign(cols, ColumnScaling{});
    if (scale_numeric) {
        for (std::size_t k = 0; k < 2; ++k) {
            double lo = 0, hi = 0;
            bool first = true;
            for (const auto& r : table.records) {
                const double v = k == 0 ? double(r.num_attempts) : double(r.impact_level);
                lo = first ? v : std::min(lo, v);
                hi = first ? v : std::max(hi, v);
                first = false;
            }
            ColumnScaling s;
            s.offset = lo;
            s.divisor = hi > lo ? hi - lo : 1.0;
            out.scaling[cols - 2 + k] = s;
        }
    }

    for (const auto& r : table.records) {
        std::vector<double> row(cols, 0.0);
        auto type_it = std::find(type_enc.levels.begin(), type_enc.levels.end(), r.threat_type);
        auto sect_it = std::find(sector_enc.levels.begin(), sector_enc.levels.end(),
                                 r.targeted_sector);
        row[static_cast<std::size_t>(type_it - type_enc.levels.begin())] = 1.0;
        row[sector_enc.first_column +
            static_cast<std::size_t>(sect_it - sector_enc.levels.begin())] = 1.0;
        row[cols - 2] = (double(r.num_attempts) - out.scaling[cols - 2].offset) /
                        out.scaling[cols - 2].divisor;
        row[cols - 1] = (double(r.impact_level) - out.scaling[cols - 1].offset) /
                        out.scaling[cols - 1].divisor;
        out.features.push_back(std::move(row));
        out.labels.push_back(r.target);
    }
    return out;
}

Matrix encode_with_layout(const ThreatTable& table,
                          const std::vector<std::string>& column_names,
                          const std::vector<ColumnScaling>& scaling) {
    if (scaling.size() != column_names.size())
        throw DimensionMismatch("scaling length does not match column count");
    Matrix out;
    out.reserve(table.records.size());
    for (const auto& r : table.records) {
        std::vector<double> row(column_names.size(), 0.0);
        for (std::size_t c = 0; c < column_names.size(); ++c) {
            const std::string& name = column_names[c];
            double raw = 0.0;
            if (name == "num_attempts")
                raw = double(r.num_attempts);
            else if (name == "impact_level")
                raw = double(r.impact_level);
            else if (name == "threat_type=" + r.threat_type ||
                     name == "targeted_sector=" + r.targeted_sector)
                raw = 1.0;
            else
                continue;
            row[c] = (raw - scaling[c].offset) / scaling[c].divisor;
        }
        out.push_back(std::move(row));
    }
    return out;
}

SplitPair split(const EncodedDataset& data, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw BadRatio(ratio);
    const std::size_t n = data.rows();
    if (n < 2) throw TooFewRows("split needs at least 2 rows");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    // Explicit Fisher-Yates so the permutation is identical across stdlibs.
    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(order[i], order[j]);
    }

    const std::size_t n_train =
        static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));

    SplitPair pair;
    pair.seed = seed;
    pair.ratio = ratio;
    for (EncodedDataset* half : {&pair.train, &pair.test}) {
        half->column_names = data.column_names;
        half->encoders = data.encoders;
        half->scaling = data.scaling;
    }
    for (std::size_t i = 0; i < n; ++i) {
        EncodedDataset& half = i < n_train ? pair.train : pair.test;
        half.features.push_back(data.features[order[i]]);
        half.labels.push_back(data.labels[order[i]]);
    }
    return pair;
}

std::string encoded_to_json(const EncodedDataset& data) {
    nlohmann::json j;
    j["column_names"] = data.column_names;
    j["features"] = data.features;
    j["labels"] = data.labels;
    nlohmann::json enc = nlohmann::json::object();
    for (const auto& e : data.encoders) {
        nlohmann::json m = nlohmann::json::object();
        for (std::size_t i = 0; i < e.levels.size(); ++i)
            m[e.levels[i]] = e.first_column + i;
        enc[e.field] = m;
    }
    j["encoders"] = enc;
    nlohmann::json sc = nlohmann::json::array();
    for (const auto& s : data.scaling)
        sc.push_back({{"offset", s.offset}, {"divisor", s.divisor}});
    j["scaling"] = sc;
    return j.dump(2);
}

}  // namespace darkwatch
