#include "wcrt/flagger.hpp"

#include "wcrt/format.hpp"
#include "wcrt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace wcrt {

namespace {

/// Column label for an alpha level: 0.05 -> a05, 0.01 -> a01, 0.001 -> a001.
std::string alpha_label(double alpha) {
    std::string s = format_double(alpha);
    if (s.rfind("0.", 0) == 0) s = s.substr(2);
    else s.erase(std::remove(s.begin(), s.end(), '.'), s.end());
    return "a" + s;
}

bool crosses(double estimate, double threshold, bool positive_side, FlagKind kind) {
    if (kind == FlagKind::reversal)
        return positive_side ? estimate <= threshold : estimate >= threshold;
    return positive_side ? estimate > threshold : estimate < threshold;
}

} // namespace

FlagReport build_flag_report(std::span<const PairInput> pairs, std::int64_t n1,
                             std::int64_t n2, std::span<const double> alphas) {
    if (alphas.empty())
        throw std::domain_error("build_flag_report: need at least one alpha level");

    FlagReport report;
    report.n1 = n1;
    report.n2 = n2;
    report.alphas.assign(alphas.begin(), alphas.end());

    for (const auto& in : pairs) {
        FlagRow row;
        row.pair = in.pair;
        row.r = in.r;
        row.estimates = in.estimates;

        const double z = corr_z_statistic(in.r, n1);
        const bool positive_side = !(in.r < 0.0);

        for (const double alpha : report.alphas) {
            TestSpec spec;
            spec.family = TestFamily::correlation;
            spec.tail = Tail::two;
            spec.alpha = alpha;

            AlphaAssessment a;
            a.alpha = alpha;
            a.significant = std::abs(z) > critical_value(spec, 0.0);
            a.kind = a.significant ? FlagKind::reversal : FlagKind::extension;

            const CorrThreshold th = inverse_corr_threshold(in.r, n1, n2, spec);
            a.threshold = th.r2;
            a.saturated = th.saturated;

            a.flags.m1 = crosses(in.estimates.m1, a.threshold, positive_side, a.kind);
            a.flags.m2 = crosses(in.estimates.m2, a.threshold, positive_side, a.kind);
            a.flags.m3 = crosses(in.estimates.m3, a.threshold, positive_side, a.kind);
            row.at_alpha.push_back(a);
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::vector<FlagCounts> summarize_flags(const FlagReport& report) {
    std::vector<FlagCounts> out;
    for (std::size_t ai = 0; ai < report.alphas.size(); ++ai) {
        FlagCounts c;
        c.alpha = report.alphas[ai];
        for (const auto& row : report.rows) {
            if (row.at_alpha[ai].flags.any()) {
                ++c.flagged_pairs;
                c.pairs.push_back(row.pair);
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::string render_flag_csv(const FlagReport& report) {
    std::string out = "pair,r,r3_m1,r3_m2,r3_m3";
    for (const double alpha : report.alphas)
        out += ",threshold_" + alpha_label(alpha);
    out += ",flags\n";

    for (const auto& row : report.rows) {
        out += row.pair;
        out += ',' + format_double(row.r);
        out += ',' + format_double(row.estimates.m1);
        out += ',' + format_double(row.estimates.m2);
        out += ',' + format_double(row.estimates.m3);
        for (const auto& a : row.at_alpha)
            out += ',' + format_double(a.threshold);
        std::string tokens;
        for (const auto& a : row.at_alpha) {
            const std::string at = "@" + format_double(a.alpha);
            if (a.flags.m1) tokens += (tokens.empty() ? "" : ";") + std::string("m1") + at;
            if (a.flags.m2) tokens += (tokens.empty() ? "" : ";") + std::string("m2") + at;
            if (a.flags.m3) tokens += (tokens.empty() ? "" : ";") + std::string("m3") + at;
        }
        out += ',' + tokens + '\n';
    }
    return out;
}

std::string render_flag_text(const FlagReport& report) {
    char line[256];
    std::string out;
    std::snprintf(line, sizeof line, "Hypothetical extra group: n2=%lld (respondents n1=%lld)\n",
                  static_cast<long long>(report.n2), static_cast<long long>(report.n1));
    out += line;
    std::snprintf(line, sizeof line, "%-14s %8s %8s %8s %8s", "pair", "r", "m1", "m2", "m3");
    out += line;
    for (const double alpha : report.alphas) {
        std::snprintf(line, sizeof line, " %10s", ("thr " + alpha_label(alpha)).c_str());
        out += line;
    }
    out += "  flags\n";

    for (const auto& row : report.rows) {
        std::snprintf(line, sizeof line, "%-14s %8.3f %8.3f %8.3f %8.3f", row.pair.c_str(), row.r,
                      row.estimates.m1, row.estimates.m2, row.estimates.m3);
        out += line;
        for (const auto& a : row.at_alpha) {
            std::snprintf(line, sizeof line, " %10.3f", a.threshold);
            out += line;
        }
        std::string tokens;
        for (const auto& a : row.at_alpha) {
            const std::string at = "@" + format_double(a.alpha);
            if (a.flags.m1) tokens += (tokens.empty() ? "" : ";") + std::string("m1") + at;
            if (a.flags.m2) tokens += (tokens.empty() ? "" : ";") + std::string("m2") + at;
            if (a.flags.m3) tokens += (tokens.empty() ? "" : ";") + std::string("m3") + at;
        }
        out += "  " + (tokens.empty() ? std::string("-") : tokens) + "\n";
    }

    const auto counts = summarize_flags(report);
    for (const auto& c : counts) {
        std::snprintf(line, sizeof line, "flagged at alpha=%s: %zu", format_double(c.alpha).c_str(),
                      c.flagged_pairs);
        out += line;
        if (!c.pairs.empty()) {
            out += " (";
            for (std::size_t i = 0; i < c.pairs.size(); ++i)
                out += (i ? ", " : "") + c.pairs[i];
            out += ")";
        }
        out += '\n';
    }
    return out;
}

} // namespace wcrt
