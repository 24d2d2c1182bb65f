#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace wcrt {

struct SurveyOptions {
    int scale_points = 7;
    std::string timestamp_column; // empty = keep file order
};

/// Numeric survey responses. Rows with any blank cell are dropped and
/// counted; when a timestamp column is named, rows are stable-sorted by it
/// (ISO-8601 strings order chronologically) and the column is removed.
struct RawSurvey {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::size_t dropped_incomplete = 0;
};

RawSurvey parse_survey_csv(const std::string& text, const SurveyOptions& options = {});
RawSurvey load_survey_csv(const std::string& path, const SurveyOptions& options = {});

struct ScaleSpec {
    std::string name;
    std::vector<std::string> items;
    std::vector<bool> reversed; // parallel to items
};

struct ScaleConfig {
    int scale_points = 7;
    std::vector<ScaleSpec> scales;
};

/// JSON form: {"scale_points": 7, "scales": [{"name": "EXP",
/// "items": ["exp1", "exp2"], "reversed": ["exp2"]}]}. The reversed list
/// names items whose coding runs against the scale.
ScaleConfig parse_scale_config(const std::string& json_text);
ScaleConfig load_scale_config(const std::string& path);

/// Mirrors a k-point response: 1 <-> k, 2 <-> k-1, ...
double reverse_code(double value, int scale_points);

/// Summated scores per scale plus each scale's internal consistency
/// (NaN for single-item scales, where it is undefined).
struct ScaleScores {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<double> alphas;
};

ScaleScores build_scales(const RawSurvey& survey, const ScaleConfig& config);

struct CorrelationCell {
    double r = 0.0;
    double z = 0.0;
    double p = 0.0; // two-tailed
    int stars = 0;  // significance markers at .05 / .01 / .001
};

struct CorrelationMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<CorrelationCell>> cells;
    std::int64_t n = 0;
};

CorrelationMatrix correlation_matrix(const ScaleScores& scores);

std::string render_correlation_text(const CorrelationMatrix& m);

} // namespace wcrt
