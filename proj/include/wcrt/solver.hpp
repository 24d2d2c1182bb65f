#pragma once

#include "wcrt/stats.hpp"

#include <cstdint>
#include <optional>

namespace wcrt {

enum class TestFamily { mean_single_sample, correlation };
enum class Tail { upper, lower, two };

/// Which hypothesis test a reversal is computed against.
struct TestSpec {
    TestFamily family = TestFamily::correlation;
    Tail tail = Tail::two;
    double alpha = 0.05; ///< in (0, 0.5]
    double mu0 = 0.0;    ///< null mean, used by the mean family only
};

/// The four reversal situations: direction of the observed test crossed with
/// whether the observed result was significant.
///   1: upper & significant      -> make non-significant (stat <= critical)
///   2: upper & non-significant  -> make significant     (stat >  critical)
///   3: lower & significant      -> make non-significant (stat >= critical)
///   4: lower & non-significant  -> make significant     (stat <  critical)
enum class Scenario : int {
    upper_significant = 1,
    upper_nonsignificant = 2,
    lower_significant = 3,
    lower_nonsignificant = 4,
};

struct SolverConfig {
    double delta = 1e-6;              ///< convergence tolerance of the continuous stage
    int max_iterations = 10000;       ///< budget for fixed point / bisection / fallback probes
    std::int64_t n2_cap = 1000000000; ///< group sizes above this count as unreachable
    double theta = 0.0;               ///< allowed relative deviation of s2 from s1, in [0, 1]
};

enum class WcrtStatus { finite, infinite, non_converged };

/// Result of a reversal search: the smallest hypothetical group size n2 that
/// flips the test conclusion, or the reason there is none.
struct WcrtResult {
    WcrtStatus status = WcrtStatus::non_converged;
    std::int64_t n2 = 0;              ///< valid when status == finite
    double stat_at_n2 = 0.0;          ///< combined statistic at n2
    double stat_at_n2_minus_1 = 0.0;  ///< combined statistic one step before the flip
    double critical_value = 0.0;      ///< boundary the statistic is compared against (at n2)
    Scenario scenario = Scenario::upper_significant;
    bool at_cap = false;              ///< true when a reversal exists but only beyond n2_cap
};

/// Reversal correlation for the third-wave extrapolation: the r2 at which a
/// pooled second group of size n2 would put the combined test exactly on the
/// significance boundary.
struct CorrThreshold {
    double r2 = 0.0;
    bool saturated = false; ///< |r2| reached 1: no achievable reversal effect
};

/// Critical value magnitude for the spec's test at the given degrees of
/// freedom (t quantile for the mean family, normal quantile otherwise;
/// two-tailed specs use alpha/2).
double critical_value(const TestSpec& spec, double df);

/// Classify which reversal scenario applies given the observed statistic and
/// its critical value magnitude. Equality with the critical value counts as
/// non-significant. For two-tailed specs the sign of the statistic picks the
/// direction; an exactly-zero statistic has no direction.
/// @throws std::domain_error on zero statistic with a two-tailed spec.
Scenario classify_scenario(const TestSpec& spec, double observed_statistic,
                           double critical_magnitude);

/// Smallest integer n2 such that pooling n2 hypothetical observations with
/// standardized effect d2 (spread s2, defaulting to the observed s1) flips
/// the one-sample t conclusion. Averaged fixed point on the boundary
/// equation with an exhaustive-bracket fallback; the returned n2 always
/// satisfies flip(n2) && !flip(n2-1).
/// @throws std::domain_error if the spec family is not mean_single_sample,
/// d2 is not a cohen_d effect, or s2 violates the theta band around s1.
WcrtResult solve_ttest_n2(const SampleSummary& response, const TestSpec& spec,
                          const EffectSize& d2, std::optional<double> s2 = std::nullopt,
                          const SolverConfig& config = {});

/// Smallest integer n2 such that pooling a second correlation r2 of size n2
/// (precision-weighted in Fisher-z space) flips the correlation-test
/// conclusion. Dense scan of the negative-weight zone, then a monotone or
/// unimodal search over the group size.
/// @throws std::domain_error if the spec family is not correlation,
/// |r1| >= 1, |r2| >= 1, or n1 < 4.
WcrtResult solve_corr_n2(double r1, std::int64_t n1, double r2,
                         const TestSpec& spec, const SolverConfig& config = {});

/// Closed-form inverse of the correlation reversal: the r2 putting the
/// combined statistic exactly at the significance boundary for a fixed n2.
/// The boundary is taken on the side of the observed r1 (mirrored for
/// negative r1).
/// @throws std::domain_error if the spec family is not correlation,
/// |r1| >= 1, n1 < 4, n2 < 4, or n1 + n2 <= 6.
CorrThreshold inverse_corr_threshold(double r1, std::int64_t n1, std::int64_t n2,
                                     const TestSpec& spec);

/// Recompute the flip condition from scratch at n2 and n2-1 and confirm the
/// returned n2 is the boundary (flip holds at n2, fails at n2-1). Results
/// that are not finite verify trivially false.
bool verify_flip_boundary(const WcrtResult& result, const SampleSummary& response,
                          const TestSpec& spec, const EffectSize& d2,
                          std::optional<double> s2 = std::nullopt);
bool verify_flip_boundary(const WcrtResult& result, double r1, std::int64_t n1,
                          double r2, const TestSpec& spec);

} // namespace wcrt
