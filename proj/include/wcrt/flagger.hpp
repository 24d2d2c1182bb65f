#pragma once

#include "wcrt/solver.hpp"
#include "wcrt/wave.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wcrt {

/// Input for one variable pair: the observed correlation and its wave-trend
/// estimates of what an extra group of nonrespondents would show.
struct PairInput {
    std::string pair;
    double r = 0.0;
    WaveEstimates estimates;
};

/// How a flag is to be read: a reversal flag marks a significant correlation
/// the hypothetical group could push back across the critical boundary; an
/// extension flag marks a non-significant one it could push into
/// significance.
enum class FlagKind { reversal, extension };

struct MethodFlags {
    bool m1 = false;
    bool m2 = false;
    bool m3 = false;
    bool any() const { return m1 || m2 || m3; }
};

struct AlphaAssessment {
    double alpha = 0.0;
    bool significant = false;
    FlagKind kind = FlagKind::reversal;
    double threshold = 0.0;   // boundary correlation for the extra group
    bool saturated = false;   // boundary pinned at +/-1
    MethodFlags flags;
};

struct FlagRow {
    std::string pair;
    double r = 0.0;
    WaveEstimates estimates;
    std::vector<AlphaAssessment> at_alpha;
};

struct FlagReport {
    std::int64_t n1 = 0;
    std::int64_t n2 = 0;
    std::vector<double> alphas;
    std::vector<FlagRow> rows;
};

/// Two-tailed assessment of every pair against a hypothetical extra group of
/// size n2: computes each pair's boundary correlation and flags the wave
/// estimates that cross it.
FlagReport build_flag_report(std::span<const PairInput> pairs, std::int64_t n1,
                             std::int64_t n2, std::span<const double> alphas);

struct FlagCounts {
    double alpha = 0.0;
    std::size_t flagged_pairs = 0;
    std::vector<std::string> pairs;
};

std::vector<FlagCounts> summarize_flags(const FlagReport& report);

/// CSV with one row per pair: thresholds per alpha plus a semicolon-joined
/// list of flag tokens such as m3@0.05.
std::string render_flag_csv(const FlagReport& report);

/// Fixed-width table for terminal output.
std::string render_flag_text(const FlagReport& report);

} // namespace wcrt
