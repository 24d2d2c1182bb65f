#include "wcrt/wave.hpp"

#include "wcrt/error.hpp"
#include "wcrt/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wcrt {

namespace {

void require_wave_sizes(double n1, double n2) {
    if (!(n1 > 0.0) || !(n2 > 0.0))
        throw std::domain_error("wave sizes must be positive");
}

double clip_unit(double v, bool& truncated) {
    if (v > 1.0) { truncated = true; return 1.0; }
    if (v < -1.0) { truncated = true; return -1.0; }
    truncated = false;
    return v;
}

} // namespace

WaveSplit split_waves(std::size_t n, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::domain_error("split_waves: fraction must lie strictly in (0, 1)");
    if (n < 2)
        throw std::domain_error("split_waves: need at least 2 observations");
    auto wave1 = static_cast<std::size_t>(
        std::ceil(static_cast<double>(n) * fraction));
    if (wave1 >= n) wave1 = n - 1;
    if (wave1 == 0) wave1 = 1;
    return WaveSplit{wave1, n - wave1};
}

double wave_m1(double wave2_value) { return wave2_value; }

double wave_m2(double wave1_value, double wave2_value, double n1, double n2) {
    require_wave_sizes(n1, n2);
    return wave2_value + (wave2_value - wave1_value) * n2 / (n1 + n2);
}

double wave_m3(double wave1_value, double wave2_value, double n1, double n2, double n3) {
    require_wave_sizes(n1, n2);
    if (!(n3 >= 0.0))
        throw std::domain_error("wave_m3: n3 must be non-negative");
    return wave2_value + (wave2_value - wave1_value) * (n2 + n3) / (n1 + n2);
}

WaveEstimates wave_estimates_corr(double r_wave1, double r_wave2,
                                  double n1, double n2, double n3) {
    WaveEstimates e;
    e.m1 = clip_unit(wave_m1(r_wave2), e.m1_truncated);
    e.m2 = clip_unit(wave_m2(r_wave1, r_wave2, n1, n2), e.m2_truncated);
    e.m3 = clip_unit(wave_m3(r_wave1, r_wave2, n1, n2, n3), e.m3_truncated);
    return e;
}

WaveCorrelation wave_correlations(std::span<const double> x, std::span<const double> y,
                                  double fraction, std::span<const double> n3_values) {
    if (x.size() != y.size())
        throw DataError("wave_correlations: variable lengths differ (" +
                        std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
    const std::size_t n = x.size();
    if (n < 4)
        throw DataError("wave_correlations: need at least 4 paired observations, got " +
                        std::to_string(n));

    WaveCorrelation out;
    out.split = split_waves(n, fraction);
    const std::size_t w1 = out.split.wave1;

    auto wave_r = [&](std::size_t begin, std::size_t count, const char* label) {
        try {
            return pearson_r(x.subspan(begin, count), y.subspan(begin, count));
        } catch (const std::exception& e) {
            throw DataError(std::string("wave_correlations: ") + label + ": " + e.what());
        }
    };
    out.r_wave1 = wave_r(0, w1, "wave 1");
    out.r_wave2 = wave_r(w1, n - w1, "wave 2");

    const double f1 = static_cast<double>(n) * fraction;
    const double f2 = static_cast<double>(n) - f1;
    out.n3.assign(n3_values.begin(), n3_values.end());
    out.estimates.reserve(out.n3.size());
    for (const double n3 : out.n3)
        out.estimates.push_back(wave_estimates_corr(out.r_wave1, out.r_wave2, f1, f2, n3));
    return out;
}

} // namespace wcrt
