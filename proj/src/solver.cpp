#include "wcrt/solver.hpp"
#include "wcrt/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace wcrt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Direction { upper, lower };

void require_config(const SolverConfig& config) {
    if (!(config.delta > 0.0))
        throw std::domain_error("SolverConfig: delta must be positive");
    if (config.max_iterations < 1)
        throw std::domain_error("SolverConfig: max_iterations must be at least 1");
    if (config.n2_cap < 1)
        throw std::domain_error("SolverConfig: n2_cap must be at least 1");
    if (!(config.theta >= 0.0 && config.theta <= 1.0))
        throw std::domain_error("SolverConfig: theta must lie in [0, 1]");
}

double tail_quantile_prob(const TestSpec& spec) {
    if (!(spec.alpha > 0.0 && spec.alpha <= 0.5))
        throw std::domain_error("TestSpec: alpha must lie in (0, 0.5], got " +
                                std::to_string(spec.alpha));
    return spec.tail == Tail::two ? 1.0 - 0.5 * spec.alpha : 1.0 - spec.alpha;
}

Direction test_direction(const TestSpec& spec, double observed_statistic) {
    switch (spec.tail) {
    case Tail::upper: return Direction::upper;
    case Tail::lower: return Direction::lower;
    case Tail::two:
        if (observed_statistic == 0.0)
            throw std::domain_error(
                "classify_scenario: two-tailed statistic of exactly 0 has no direction");
        return observed_statistic > 0.0 ? Direction::upper : Direction::lower;
    }
    throw std::domain_error("classify_scenario: invalid tail");
}

bool makes_nonsignificant(Scenario s) {
    return s == Scenario::upper_significant || s == Scenario::lower_significant;
}

/// Evaluation budget shared by every stage of a solve; running out flips the
/// result to non_converged instead of looping forever.
struct Budget {
    long long remaining;
    bool exhausted = false;
    bool take() {
        if (remaining > 0) { --remaining; return true; }
        exhausted = true;
        return false;
    }
};

/// Canonical (upper-direction) reversal problem: the flip condition as a
/// function of the hypothetical group size, plus the statistic/critical pair
/// used for reporting.
struct FlipProblem {
    virtual ~FlipProblem() = default;
    virtual double stat(double n2) const = 0;
    virtual double crit(double n2) const = 0;
    virtual std::int64_t min_n2() const { return 1; }
    bool make_nonsig = false;

    bool flip(double n2) const {
        const double t = stat(n2), c = crit(n2);
        return make_nonsig ? t <= c : t > c;
    }
    /// Positive margin means "significant side". Flip region: margin <= 0
    /// when making non-significant, margin > 0 when making significant.
    double margin(double n2) const { return stat(n2) - crit(n2); }
};

struct TtestProblem final : FlipProblem {
    double n1 = 0, mean1 = 0, sd1 = 0, mu0 = 0, mean2 = 0, sd2 = 0, q = 0;

    double stat(double n2) const override {
        const CombinedSummary c = pooled_moments(n1, mean1, sd1, n2, mean2, sd2);
        return (c.mean - mu0) / (c.sd / std::sqrt(c.n));
    }
    double crit(double n2) const override { return student_t_quantile(q, n1 + n2 - 1.0); }
};

struct CorrProblem final : FlipProblem {
    double zr1 = 0, zr2 = 0, C = 0;
    std::int64_t n1 = 0;

    double zrc(double n2) const {
        return ((n1 - 3.0) * zr1 + (n2 - 3.0) * zr2) / (n1 + n2 - 6.0);
    }
    double stat(double n2) const override { return zrc(n2) * std::sqrt(n1 + n2 - 6.0); }
    double crit(double) const override { return C; }
    std::int64_t min_n2() const override { return std::max<std::int64_t>(1, 7 - n1); }
};

/// Largest-precision boundary walk: bisect (lo, hi] for the first k with
/// flip(k) when flip(lo) is false and flip(hi) is true.
std::int64_t bisect_boundary(const FlipProblem& p, std::int64_t lo, std::int64_t hi, Budget& budget) {
    while (hi - lo > 1) {
        if (!budget.take()) return -1;
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (p.flip(static_cast<double>(mid))) hi = mid;
        else lo = mid;
    }
    return hi;
}

WcrtResult finish(const FlipProblem& p, std::int64_t n2, Scenario scenario, double dir_sign) {
    WcrtResult r;
    r.status = WcrtStatus::finite;
    r.n2 = n2;
    r.scenario = scenario;
    r.stat_at_n2 = dir_sign * p.stat(static_cast<double>(n2));
    r.stat_at_n2_minus_1 = n2 - 1 >= p.min_n2()
                               ? dir_sign * p.stat(static_cast<double>(n2 - 1))
                               : kNaN;
    r.critical_value = dir_sign * p.crit(static_cast<double>(n2));
    return r;
}

WcrtResult unreachable(Scenario scenario, bool at_cap) {
    WcrtResult r;
    r.status = WcrtStatus::infinite;
    r.scenario = scenario;
    r.n2 = 0;
    r.stat_at_n2 = r.stat_at_n2_minus_1 = r.critical_value = kNaN;
    r.at_cap = at_cap;
    return r;
}

WcrtResult gave_up(Scenario scenario) {
    WcrtResult r;
    r.status = WcrtStatus::non_converged;
    r.scenario = scenario;
    r.n2 = 0;
    r.stat_at_n2 = r.stat_at_n2_minus_1 = r.critical_value = kNaN;
    return r;
}

/// Ternary search for the extremum of the margin on [lo, hi] (log-spaced).
/// minimize=true hunts the dip used when pushing a test non-significant.
double extremum_n2(const FlipProblem& p, double lo, double hi, bool minimize, Budget& budget) {
    double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < 160 && b - a > 1e-10; ++i) {
        if (!budget.take() || !budget.take()) return kNaN;
        const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        double f1 = p.margin(std::exp(m1)), f2 = p.margin(std::exp(m2));
        if (!minimize) { f1 = -f1; f2 = -f2; }
        if (f1 < f2) b = m2;
        else a = m1;
    }
    return std::exp(0.5 * (a + b));
}

/// Continuous first-crossing: flip(lo) false, flip(hi) true; returns the real
/// n2 where the margin changes side.
double continuous_crossing(const FlipProblem& p, double lo, double hi, Budget& budget) {
    for (int i = 0; i < 120 && hi - lo > 1e-9 * std::max(1.0, hi); ++i) {
        if (!budget.take()) return kNaN;
        const double mid = 0.5 * (lo + hi);
        if (p.flip(mid)) hi = mid;
        else lo = mid;
    }
    return hi;
}

/// Hunt the first integer boundary near a continuous crossing estimate.
std::int64_t integer_boundary_near(const FlipProblem& p, double crossing, std::int64_t cap,
                                   Budget& budget) {
    const std::int64_t kmin = p.min_n2();
    std::int64_t k = std::max(kmin, static_cast<std::int64_t>(std::floor(crossing)) - 2);
    for (; k <= cap; ++k) {
        if (!budget.take()) return -1;
        if (p.flip(static_cast<double>(k))) {
            if (k == kmin) return k;
            if (!budget.take()) return -1;
            if (!p.flip(static_cast<double>(k - 1))) return k;
            // flipped earlier than the estimate suggested: walk down
            std::int64_t lo = kmin - 1; // sentinel: below the domain, counts as non-flipped
            return bisect_boundary(p, lo, k, budget);
        }
        if (k > static_cast<std::int64_t>(std::ceil(crossing)) + 8) break;
    }
    return -2; // no integer inside the flip window
}

// --------------------------------------------------------------------------
// one-sample t solver
// --------------------------------------------------------------------------

/// Averaged fixed point: alternate between the group size and the size the
/// boundary equation asks for, stopping when they agree.
double ttest_fixed_point(const TtestProblem& p, double start, double delta, int max_iter,
                         double cap, Budget& budget) {
    double n_opt = std::max(start, 1.0);
    for (int i = 0; i < max_iter; ++i) {
        if (!budget.take()) return kNaN;
        const CombinedSummary c = pooled_moments(p.n1, p.mean1, p.sd1, n_opt, p.mean2, p.sd2);
        const double tstar = student_t_quantile(p.q, p.n1 + n_opt - 1.0);
        const double offset = c.mean - p.mu0;
        if (offset * offset < 1e-300) return kNaN;
        double n_calc = c.sd * c.sd * tstar * tstar / (offset * offset) - p.n1;
        if (!std::isfinite(n_calc)) return kNaN;
        n_calc = std::clamp(n_calc, -4.0 * p.n1, 8.0 * cap);
        if (std::abs(n_opt - n_calc) < delta) return std::max(0.5 * (n_opt + n_calc), 0.0);
        n_opt = std::clamp(0.5 * (n_opt + n_calc), 1e-6, 8.0 * cap);
    }
    return kNaN;
}

WcrtResult solve_ttest_canonical(const TtestProblem& p, Scenario scenario, double dir_sign,
                                 const SolverConfig& config) {
    const std::int64_t cap = config.n2_cap;
    Budget budget{std::max<long long>(config.max_iterations, 1) + 4096};

    // Exact invariance: pooling more of the same sample never changes d, so
    // the statistic grows with n and a significant result stays significant.
    if (p.make_nonsig && p.mean2 == p.mean1 && p.sd2 == p.sd1)
        return unreachable(scenario, false);

    // A crossing beyond the cap is certain when the limit statistic lies on
    // the flip side: pooling toward a non-positive offset drives t below any
    // positive critical value; a positive offset grows t without bound.
    const bool crossing_certain = p.make_nonsig ? (p.mean2 - p.mu0) <= 0.0
                                                : (p.mean2 - p.mu0) > 0.0;

    // Dense scan of the small region, where outlier-variance effects can
    // produce isolated flips that no continuous analysis predicts. The
    // pooled-variance cross term saturates once n2 dwarfs n1, so flip
    // windows live at sizes comparable to the response sample.
    const std::int64_t dense_hi =
        std::min<std::int64_t>(cap, std::max<std::int64_t>(264, 3 * static_cast<std::int64_t>(p.n1)));
    for (std::int64_t k = 1; k <= dense_hi; ++k) {
        if (!budget.take()) return gave_up(scenario);
        if (p.flip(static_cast<double>(k))) return finish(p, k, scenario, dir_sign);
    }
    if (dense_hi == cap) return unreachable(scenario, crossing_certain);

    // Fixed point on the continuous boundary equation.
    Budget fp_budget{config.max_iterations};
    const double root = ttest_fixed_point(p, p.n1, config.delta, config.max_iterations,
                                          static_cast<double>(cap), fp_budget);

    // Ascending probes: fixed-point neighborhood merged into a geometric grid.
    std::vector<std::int64_t> probes;
    if (std::isfinite(root) && root > 0) {
        const auto base = static_cast<std::int64_t>(std::floor(root));
        for (std::int64_t k : {base - 1, base, base + 1, base + 2})
            if (k > dense_hi && k <= cap) probes.push_back(k);
    }
    for (double g = static_cast<double>(dense_hi) * 1.15; g < static_cast<double>(cap) * 1.15;
         g *= 1.15) {
        const std::int64_t k = std::min<std::int64_t>(cap, static_cast<std::int64_t>(g));
        if (k > dense_hi) probes.push_back(k);
        if (k == cap) break;
    }
    probes.push_back(cap);
    std::sort(probes.begin(), probes.end());
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());

    std::int64_t prev_false = dense_hi;
    for (const std::int64_t k : probes) {
        if (!budget.take()) return gave_up(scenario);
        if (p.flip(static_cast<double>(k))) {
            const std::int64_t b = bisect_boundary(p, prev_false, k, budget);
            if (b < 0) return gave_up(scenario);
            return finish(p, b, scenario, dir_sign);
        }
        prev_false = k;
    }

    // Nothing flipped on the grid: look for a bounded flip window between the
    // probes by locating the margin extremum.
    const double lo = static_cast<double>(dense_hi);
    const double hi = static_cast<double>(cap);
    const double n_ext = extremum_n2(p, lo, hi, p.make_nonsig, budget);
    if (std::isfinite(n_ext) && !budget.exhausted) {
        if (!budget.take()) return gave_up(scenario);
        if (p.flip(n_ext)) {
            const double crossing = continuous_crossing(p, lo, n_ext, budget);
            if (std::isfinite(crossing)) {
                const std::int64_t b = integer_boundary_near(p, crossing, cap, budget);
                if (b >= 0) return finish(p, b, scenario, dir_sign);
                if (b == -1) return gave_up(scenario);
                return unreachable(scenario, false); // window holds no integer
            }
        }
    }
    if (budget.exhausted) return gave_up(scenario);

    // No reversal at any size up to the cap.
    return unreachable(scenario, crossing_certain);
}

// --------------------------------------------------------------------------
// correlation solver
// --------------------------------------------------------------------------

WcrtResult solve_corr_canonical(const CorrProblem& p, Scenario scenario, double dir_sign,
                                const SolverConfig& config) {
    const std::int64_t cap = config.n2_cap;
    Budget budget{std::max<long long>(config.max_iterations, 1) + 4096};

    const std::int64_t kmin = p.min_n2();

    // The (n2 - 3) weight is negative below n2 = 3, which can flip a test in
    // ways the smooth analysis cannot see; scan that zone plus a margin.
    const std::int64_t small_hi = std::min<std::int64_t>(cap, std::max<std::int64_t>(kmin + 8, 12));
    for (std::int64_t k = kmin; k <= small_hi; ++k) {
        if (!budget.take()) return gave_up(scenario);
        if (p.flip(static_cast<double>(k))) return finish(p, k, scenario, dir_sign);
    }
    if (small_hi == cap) {
        const double K0 = (p.n1 - 3.0) * (p.zr1 - p.zr2);
        const bool certain = p.make_nonsig ? (K0 > 0.0 && p.zr2 <= 0.0) : p.zr2 > 0.0;
        return unreachable(scenario, certain);
    }

    // Beyond n2 = 4 every weight is positive, so in N = n1 + n2 - 6 the
    // combined statistic is z(N) = zr2 sqrt(N) + K / sqrt(N) with
    // K = (n1 - 3)(zr1 - zr2): monotone whenever zr2 and K drive the same
    // way, otherwise unimodal with its extremum at N = K / zr2. Searching in
    // group size directly avoids the zrc inverse, whose asymptote at zr2 is
    // too ill-conditioned to bracket in floating point.
    const double start = static_cast<double>(small_hi);
    const double K = (p.n1 - 3.0) * (p.zr1 - p.zr2);

    // When the flip region past the scan is a ray [b, inf): probe the cap,
    // tighten geometrically, and bisect down to the first flipped size.
    const auto ray_boundary = [&]() -> WcrtResult {
        if (!budget.take()) return gave_up(scenario);
        if (!p.flip(static_cast<double>(cap)))
            return unreachable(scenario, true); // the boundary exists, past the cap
        std::int64_t lo = small_hi, hi = cap;
        for (double g = 2.0 * start; g < static_cast<double>(cap); g *= 2.0) {
            const auto k = static_cast<std::int64_t>(g);
            if (!budget.take()) return gave_up(scenario);
            if (p.flip(static_cast<double>(k))) { hi = k; break; }
            lo = k;
        }
        const std::int64_t b = bisect_boundary(p, lo, hi, budget);
        if (b < 0) return gave_up(scenario);
        return finish(p, b, scenario, dir_sign);
    };

    if (p.make_nonsig) {
        // Need z <= C somewhere past the scanned zone; a target at or above
        // the observed transform only pushes the statistic further up.
        if (K <= 0.0) return unreachable(scenario, false);
        // Non-positive target correlation: monotone descent, single crossing.
        if (p.zr2 <= 0.0) return ray_boundary();
        // Positive target correlation: the statistic dips at N = K / zr2 and
        // then grows again, so the flip region (if any) is a bounded window.
        const double dip = K / p.zr2 - static_cast<double>(p.n1) + 6.0;
        if (dip <= start) return unreachable(scenario, false); // dip inside the scanned zone
        const double z_min = 2.0 * std::sqrt(p.zr2 * K);
        if (z_min > p.C) return unreachable(scenario, false); // never reaches the line
        const double hi_probe = std::min(dip, static_cast<double>(cap));
        if (!budget.take()) return gave_up(scenario);
        if (!p.flip(hi_probe))
            return unreachable(scenario, hi_probe < dip); // window (if any) past the cap
        const double crossing = continuous_crossing(p, start, hi_probe, budget);
        if (!std::isfinite(crossing)) return gave_up(scenario);
        const std::int64_t b = integer_boundary_near(p, crossing, cap, budget);
        if (b >= 0) return finish(p, b, scenario, dir_sign);
        if (b == -1) return gave_up(scenario);
        return unreachable(scenario, false); // window holds no integer
    }

    // Making it significant: z must exceed C, which needs a positive-side
    // pull; with zr2 <= 0 the statistic peaks inside the scanned zone. For
    // zr2 > 0 the trajectory ends on an ascent through every level, so the
    // flip region is a ray; this covers zr2 == zr1, where z = zr2 sqrt(N)
    // exactly, without a separate branch.
    if (p.zr2 <= 0.0) return unreachable(scenario, false);
    return ray_boundary();
}

} // namespace

// --------------------------------------------------------------------------
// public API
// --------------------------------------------------------------------------

double critical_value(const TestSpec& spec, double df) {
    const double q = tail_quantile_prob(spec);
    return spec.family == TestFamily::mean_single_sample ? student_t_quantile(q, df)
                                                         : normal_quantile(q);
}

Scenario classify_scenario(const TestSpec& spec, double observed_statistic,
                           double critical_magnitude) {
    if (!(critical_magnitude >= 0.0))
        throw std::domain_error("classify_scenario: critical magnitude must be non-negative");
    const Direction dir = test_direction(spec, observed_statistic);
    if (dir == Direction::upper)
        return observed_statistic > critical_magnitude ? Scenario::upper_significant
                                                       : Scenario::upper_nonsignificant;
    return observed_statistic < -critical_magnitude ? Scenario::lower_significant
                                                    : Scenario::lower_nonsignificant;
}

WcrtResult solve_ttest_n2(const SampleSummary& response, const TestSpec& spec,
                          const EffectSize& d2, std::optional<double> s2,
                          const SolverConfig& config) {
    if (spec.family != TestFamily::mean_single_sample)
        throw std::domain_error("solve_ttest_n2: spec family must be mean_single_sample");
    if (d2.kind != EffectKind::cohen_d)
        throw std::domain_error("solve_ttest_n2: d2 must be a cohen_d effect size");
    require_config(config);

    const double s2v = s2.value_or(response.sd);
    const double band = config.theta * response.sd + 1e-12 * response.sd;
    if (std::abs(s2v - response.sd) > band)
        throw std::domain_error("solve_ttest_n2: s2 outside the allowed band around s1 (theta=" +
                                std::to_string(config.theta) + ")");

    const double t1 = t_statistic(response, spec.mu0);
    const double crit1 = critical_value(spec, static_cast<double>(response.n - 1));
    const Scenario scenario = classify_scenario(spec, t1, crit1);
    const Direction dir = test_direction(spec, t1);
    const double dir_sign = dir == Direction::upper ? 1.0 : -1.0;

    TtestProblem p;
    p.n1 = static_cast<double>(response.n);
    p.mu0 = 0.0;
    p.mean1 = dir_sign * (response.mean - spec.mu0); // mirrored into the upper direction
    p.sd1 = response.sd;
    p.mean2 = dir_sign * d2.value * s2v;
    p.sd2 = s2v;
    p.q = tail_quantile_prob(spec);
    p.make_nonsig = makes_nonsignificant(scenario);

    return solve_ttest_canonical(p, scenario, dir_sign, config);
}

WcrtResult solve_corr_n2(double r1, std::int64_t n1, double r2,
                         const TestSpec& spec, const SolverConfig& config) {
    if (spec.family != TestFamily::correlation)
        throw std::domain_error("solve_corr_n2: spec family must be correlation");
    require_config(config);
    if (n1 < 4)
        throw std::domain_error("solve_corr_n2: need n1 >= 4");

    const double z1 = corr_z_statistic(r1, n1);
    const double C = critical_value(spec, 0.0 /* unused for correlations */);
    const Scenario scenario = classify_scenario(spec, z1, C);
    const Direction dir = test_direction(spec, z1);
    const double dir_sign = dir == Direction::upper ? 1.0 : -1.0;

    CorrProblem p;
    p.n1 = n1;
    p.zr1 = dir_sign * fisher_z(r1).value;
    p.zr2 = dir_sign * fisher_z(r2).value;
    p.C = C;
    p.make_nonsig = makes_nonsignificant(scenario);

    return solve_corr_canonical(p, scenario, dir_sign, config);
}

CorrThreshold inverse_corr_threshold(double r1, std::int64_t n1, std::int64_t n2,
                                     const TestSpec& spec) {
    if (spec.family != TestFamily::correlation)
        throw std::domain_error("inverse_corr_threshold: spec family must be correlation");
    if (n1 < 4 || n2 < 4)
        throw std::domain_error("inverse_corr_threshold: need n1 >= 4 and n2 >= 4");
    const double C = normal_quantile(tail_quantile_prob(spec));
    const double zr1 = fisher_z(r1).value;
    const double N = static_cast<double>(n1 + n2 - 6);
    // Boundary taken on the side of the observed correlation.
    const double sign = r1 < 0.0 ? -1.0 : 1.0;
    const double zrc_star = sign * C / std::sqrt(N);
    const double zr2 = (zrc_star * N - (n1 - 3.0) * zr1) / (n2 - 3.0);
    const double r2 = std::tanh(zr2);
    return CorrThreshold{r2, std::abs(r2) >= 1.0 - 1e-12};
}

bool verify_flip_boundary(const WcrtResult& result, const SampleSummary& response,
                          const TestSpec& spec, const EffectSize& d2,
                          std::optional<double> s2) {
    if (result.status != WcrtStatus::finite) return false;
    const double s2v = s2.value_or(response.sd);
    const double t1 = t_statistic(response, spec.mu0);
    const double crit1 = critical_value(spec, static_cast<double>(response.n - 1));
    const Scenario scenario = classify_scenario(spec, t1, crit1);
    const double dir_sign = test_direction(spec, t1) == Direction::upper ? 1.0 : -1.0;

    TtestProblem p;
    p.n1 = static_cast<double>(response.n);
    p.mu0 = 0.0;
    p.mean1 = dir_sign * (response.mean - spec.mu0);
    p.sd1 = response.sd;
    p.mean2 = dir_sign * d2.value * s2v;
    p.sd2 = s2v;
    p.q = tail_quantile_prob(spec);
    p.make_nonsig = makes_nonsignificant(scenario);

    if (result.n2 < p.min_n2()) return false;
    const bool at = p.flip(static_cast<double>(result.n2));
    const bool before = result.n2 - 1 >= p.min_n2() && p.flip(static_cast<double>(result.n2 - 1));
    return at && !before;
}

bool verify_flip_boundary(const WcrtResult& result, double r1, std::int64_t n1,
                          double r2, const TestSpec& spec) {
    if (result.status != WcrtStatus::finite) return false;
    const double z1 = corr_z_statistic(r1, n1);
    const double C = critical_value(spec, 0.0);
    const Scenario scenario = classify_scenario(spec, z1, C);
    const double dir_sign = test_direction(spec, z1) == Direction::upper ? 1.0 : -1.0;

    CorrProblem p;
    p.n1 = n1;
    p.zr1 = dir_sign * fisher_z(r1).value;
    p.zr2 = dir_sign * fisher_z(r2).value;
    p.C = C;
    p.make_nonsig = makes_nonsignificant(scenario);

    if (result.n2 < p.min_n2()) return false;
    const bool at = p.flip(static_cast<double>(result.n2));
    const bool before = result.n2 - 1 >= p.min_n2() && p.flip(static_cast<double>(result.n2 - 1));
    return at && !before;
}

} // namespace wcrt
