#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wcrt {

/// Partition of a respondent sequence into an early and a late wave.
struct WaveSplit {
    std::size_t wave1 = 0;
    std::size_t wave2 = 0;
};

/// Splits n ordered respondents so the first wave holds ceil(n * fraction).
/// fraction must lie strictly between 0 and 1.
WaveSplit split_waves(std::size_t n, double fraction);

/// Trend-extrapolation estimates for the value a hypothetical group of
/// nonrespondents would have shown, from an early-wave and a late-wave value.
/// m1 uses the late wave as-is; m2 continues the wave-to-wave trend to the
/// midpoint of the hypothetical group; m3 continues it across a further group
/// of size n3.
double wave_m1(double wave2_value);
double wave_m2(double wave1_value, double wave2_value, double n1, double n2);
double wave_m3(double wave1_value, double wave2_value, double n1, double n2, double n3);

/// Correlation-scale estimates are clipped to [-1, 1]; the flags record when
/// the raw extrapolation left that range.
struct WaveEstimates {
    double m1 = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    bool m1_truncated = false;
    bool m2_truncated = false;
    bool m3_truncated = false;
};

WaveEstimates wave_estimates_corr(double r_wave1, double r_wave2,
                                  double n1, double n2, double n3);

/// Wave correlations for one variable pair: the early-wave and late-wave
/// Pearson correlations plus estimates for each hypothetical group size.
/// The trend weights use the fractional wave sizes (n * fraction and its
/// complement) rather than the integer split, so a half split of 415 weighs
/// both waves at 207.5.
struct WaveCorrelation {
    WaveSplit split;
    double r_wave1 = 0.0;
    double r_wave2 = 0.0;
    std::vector<double> n3;
    std::vector<WaveEstimates> estimates;
};

WaveCorrelation wave_correlations(std::span<const double> x, std::span<const double> y,
                                  double fraction, std::span<const double> n3_values);

} // namespace wcrt
