#include "wcrt/dataset.hpp"

#include "wcrt/error.hpp"
#include "wcrt/format.hpp"
#include "wcrt/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace wcrt {

namespace {

/// RFC-4180-style parse: quoted fields may hold commas, doubled quotes and
/// line breaks. Returns one vector of fields per record.
std::vector<std::vector<std::string>> parse_csv_records(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool record_has_content = false;

    std::size_t i = 0;
    // Skip a UTF-8 byte-order mark.
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
        record_has_content = true;
    };
    auto end_record = [&] {
        if (record_has_content || !record.empty()) {
            end_field();
            records.push_back(std::move(record));
            record.clear();
            record_has_content = false;
        }
    };

    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty())
                throw DataError("CSV parse error: quote inside unquoted field near record " +
                                std::to_string(records.size() + 1));
            in_quotes = true;
            field_was_quoted = true;
            record_has_content = true;
            break;
        case ',': end_field(); break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_record();
            break;
        case '\n': end_record(); break;
        default:
            field += c;
            record_has_content = true;
            break;
        }
    }
    if (in_quotes)
        throw DataError("CSV parse error: unterminated quoted field at end of input");
    end_record();
    (void)field_was_quoted;
    return records;
}

std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

int star_count(double p) {
    if (p < 0.001) return 3;
    if (p < 0.01) return 2;
    if (p < 0.05) return 1;
    return 0;
}

} // namespace

RawSurvey parse_survey_csv(const std::string& text, const SurveyOptions& options) {
    if (options.scale_points < 2)
        throw std::domain_error("parse_survey_csv: scale_points must be at least 2");

    const auto records = parse_csv_records(text);
    if (records.empty()) throw DataError("survey CSV is empty");

    const auto& header = records.front();
    if (header.empty()) throw DataError("survey CSV header row is empty");

    std::size_t timestamp_idx = header.size(); // sentinel: absent
    if (!options.timestamp_column.empty()) {
        const auto it = std::find(header.begin(), header.end(), options.timestamp_column);
        if (it == header.end())
            throw DataError("survey CSV lacks the ordering column '" + options.timestamp_column +
                            "'");
        timestamp_idx = static_cast<std::size_t>(it - header.begin());
    }

    RawSurvey out;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != timestamp_idx) out.columns.push_back(trimmed(header[c]));

    struct PendingRow {
        std::string timestamp;
        std::vector<double> values;
    };
    std::vector<PendingRow> pending;

    for (std::size_t ri = 1; ri < records.size(); ++ri) {
        const auto& rec = records[ri];
        if (rec.size() != header.size())
            throw DataError("survey CSV row " + std::to_string(ri + 1) + " has " +
                            std::to_string(rec.size()) + " fields, expected " +
                            std::to_string(header.size()));

        PendingRow row;
        row.values.reserve(out.columns.size());
        bool incomplete = false;
        for (std::size_t c = 0; c < rec.size(); ++c) {
            const std::string cell = trimmed(rec[c]);
            if (cell.empty()) {
                incomplete = true;
                continue;
            }
            if (c == timestamp_idx) {
                row.timestamp = cell;
                continue;
            }
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != cell.size())
                throw DataError("survey CSV row " + std::to_string(ri + 1) + ", column '" +
                                header[c] + "': cannot read '" + cell + "' as a number");
            if (v < 1.0 || v > static_cast<double>(options.scale_points))
                throw DataError("survey CSV row " + std::to_string(ri + 1) + ", column '" +
                                header[c] + "': value " + format_double(v) +
                                " outside the 1.." + std::to_string(options.scale_points) +
                                " response range");
            row.values.push_back(v);
        }
        if (incomplete) {
            ++out.dropped_incomplete;
            continue;
        }
        pending.push_back(std::move(row));
    }

    if (timestamp_idx != header.size())
        std::stable_sort(pending.begin(), pending.end(),
                         [](const PendingRow& a, const PendingRow& b) {
                             return a.timestamp < b.timestamp;
                         });

    out.rows.reserve(pending.size());
    for (auto& row : pending) out.rows.push_back(std::move(row.values));
    return out;
}

RawSurvey load_survey_csv(const std::string& path, const SurveyOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open survey CSV '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_survey_csv(buf.str(), options);
}

ScaleConfig parse_scale_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("scale config is not valid JSON: ") + e.what());
    }

    ScaleConfig cfg;
    try {
        if (j.contains("scale_points")) cfg.scale_points = j.at("scale_points").get<int>();
        if (cfg.scale_points < 2)
            throw DataError("scale config: scale_points must be at least 2");
        if (!j.contains("scales") || !j.at("scales").is_array() || j.at("scales").empty())
            throw DataError("scale config: needs a non-empty 'scales' array");
        for (const auto& js : j.at("scales")) {
            ScaleSpec s;
            s.name = js.at("name").get<std::string>();
            s.items = js.at("items").get<std::vector<std::string>>();
            if (s.items.empty())
                throw DataError("scale config: scale '" + s.name + "' lists no items");
            s.reversed.assign(s.items.size(), false);
            if (js.contains("reversed")) {
                for (const auto& rname : js.at("reversed").get<std::vector<std::string>>()) {
                    const auto it = std::find(s.items.begin(), s.items.end(), rname);
                    if (it == s.items.end())
                        throw DataError("scale config: reversed item '" + rname +
                                        "' is not an item of scale '" + s.name + "'");
                    s.reversed[static_cast<std::size_t>(it - s.items.begin())] = true;
                }
            }
            cfg.scales.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("scale config has the wrong shape: ") + e.what());
    }
    return cfg;
}

ScaleConfig load_scale_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open scale config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scale_config(buf.str());
}

double reverse_code(double value, int scale_points) {
    if (scale_points < 2)
        throw std::domain_error("reverse_code: scale_points must be at least 2");
    return static_cast<double>(scale_points) + 1.0 - value;
}

ScaleScores build_scales(const RawSurvey& survey, const ScaleConfig& config) {
    ScaleScores out;
    const std::size_t n = survey.rows.size();

    for (const auto& spec : config.scales) {
        std::vector<std::size_t> idx;
        idx.reserve(spec.items.size());
        for (const auto& item : spec.items) {
            const auto it = std::find(survey.columns.begin(), survey.columns.end(), item);
            if (it == survey.columns.end())
                throw DataError("scale '" + spec.name + "': item column '" + item +
                                "' is missing from the survey");
            idx.push_back(static_cast<std::size_t>(it - survey.columns.begin()));
        }

        std::vector<std::vector<double>> item_columns(spec.items.size(),
                                                      std::vector<double>(n));
        std::vector<double> scores(n, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t k = 0; k < idx.size(); ++k) {
                double v = survey.rows[r][idx[k]];
                if (spec.reversed[k]) v = reverse_code(v, config.scale_points);
                item_columns[k][r] = v;
                scores[r] += v;
            }
        }

        double alpha = std::numeric_limits<double>::quiet_NaN();
        if (spec.items.size() >= 2) alpha = cronbach_alpha(item_columns);

        out.names.push_back(spec.name);
        out.columns.push_back(std::move(scores));
        out.alphas.push_back(alpha);
    }
    return out;
}

CorrelationMatrix correlation_matrix(const ScaleScores& scores) {
    const std::size_t k = scores.names.size();
    if (k < 2) throw std::domain_error("correlation_matrix: need at least 2 scales");
    const std::size_t n = scores.columns.front().size();
    if (n < 4) throw DataError("correlation_matrix: need at least 4 respondents, got " +
                               std::to_string(n));

    CorrelationMatrix m;
    m.names = scores.names;
    m.n = static_cast<std::int64_t>(n);
    m.cells.assign(k, std::vector<CorrelationCell>(k));
    for (std::size_t i = 0; i < k; ++i) {
        m.cells[i][i] = CorrelationCell{1.0, std::numeric_limits<double>::infinity(), 0.0, 0};
        for (std::size_t j = i + 1; j < k; ++j) {
            CorrelationCell cell;
            cell.r = pearson_r(scores.columns[i], scores.columns[j]);
            cell.z = corr_z_statistic(cell.r, m.n);
            cell.p = std::erfc(std::abs(cell.z) / std::sqrt(2.0));
            cell.stars = star_count(cell.p);
            m.cells[i][j] = cell;
            m.cells[j][i] = cell;
        }
    }
    return m;
}

std::string render_correlation_text(const CorrelationMatrix& m) {
    std::string out = "Pearson correlations (n=" + std::to_string(m.n) +
                      "; two-tailed markers: * p<.05, ** p<.01, *** p<.001)\n";
    char buf[64];
    std::size_t width = 8;
    for (const auto& name : m.names) width = std::max(width, name.size() + 1);

    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(width), "");
    out += buf;
    for (const auto& name : m.names) {
        std::snprintf(buf, sizeof buf, " %*s", static_cast<int>(width), name.c_str());
        out += buf;
    }
    out += '\n';

    for (std::size_t i = 0; i < m.names.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(width), m.names[i].c_str());
        out += buf;
        for (std::size_t j = 0; j < m.names.size(); ++j) {
            if (j > i) {
                std::snprintf(buf, sizeof buf, " %*s", static_cast<int>(width), "");
                out += buf;
                continue;
            }
            if (i == j) {
                std::snprintf(buf, sizeof buf, " %*s", static_cast<int>(width), "1");
                out += buf;
                continue;
            }
            const auto& cell = m.cells[i][j];
            std::string v = format_fixed(cell.r, 3);
            v.append(static_cast<std::size_t>(cell.stars), '*');
            std::snprintf(buf, sizeof buf, " %*s", static_cast<int>(width), v.c_str());
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace wcrt
