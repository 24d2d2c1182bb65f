#pragma once

#include "wcrt/solver.hpp"
#include "wcrt/stats.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wcrt {

/// Evenly spaced grid of hypothetical effect sizes, endpoints included.
std::vector<double> effect_grid(double lo, double hi, std::size_t count);

struct NCurvePoint {
    double effect = 0.0;
    WcrtResult result;
};

/// One reversal curve: the group size needed to flip the test, swept over a
/// grid of hypothetical effect sizes.
struct NCurve {
    EffectKind kind = EffectKind::pearson_r;
    std::string label;
    std::vector<NCurvePoint> points;
};

NCurve sweep_corr(double r1, std::int64_t n1, const TestSpec& spec,
                  std::span<const double> r2_grid, const SolverConfig& config = {});

NCurve sweep_ttest(const SampleSummary& response, const TestSpec& spec,
                   std::span<const double> d2_grid,
                   std::optional<double> s2 = std::nullopt,
                   const SolverConfig& config = {});

/// CSV with header effect_size,n2,status,stat_at_n2,critical_value; rows
/// whose solve did not end finite leave the numeric cells empty.
std::string render_ncurve_csv(const NCurve& curve);

/// Self-contained SVG 1.1 document: effect size on the x axis, required group
/// size on a log10 y axis, one marker per finite point with the annotated
/// ones labeled. Throws if the curve holds no finite point.
std::string render_ncurve_svg(const NCurve& curve,
                              std::span<const double> annotate_effects = {});

} // namespace wcrt
