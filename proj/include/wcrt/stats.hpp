#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wcrt {

/// Summary statistics of one observed sample.
struct SampleSummary {
    std::int64_t n = 0; ///< number of observations, >= 2
    double mean = 0.0;
    double sd = 0.0; ///< sample standard deviation (n-1 denominator), > 0
};

/// Tags the scale an effect size lives on.
enum class EffectKind { cohen_d, pearson_r };

struct EffectSize {
    EffectKind kind = EffectKind::cohen_d;
    double value = 0.0;
};

/// Fisher-transformed correlation, kept as a distinct type so raw r and
/// transformed z never get mixed up in solver arithmetic.
struct FisherZ {
    double value = 0.0;
};

/// Pooled summary of two samples merged into one (real-valued n so the
/// solvers can iterate on fractional group sizes).
struct CombinedSummary {
    double n = 0.0;
    double mean = 0.0;
    double sd = 0.0;
};

/// Precision-weighted combination of two Fisher-z correlations.
struct CombinedFisherZ {
    double zr = 0.0; ///< combined transformed correlation
    double se = 0.0; ///< standard error, 1/sqrt(n1+n2-6)
};

// --- distribution functions ------------------------------------------------

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile. @throws std::domain_error unless p in (0,1).
/// Safeguarded Newton on the erfc-based CDF; |normal_cdf(result) - p| <= 1e-9.
double normal_quantile(double p);

/// Student-t CDF with df > 0 degrees of freedom (real-valued df allowed).
double student_t_cdf(double t, double df);

/// Student-t quantile via the inverse regularized incomplete beta function
/// (safeguarded Newton/bisection). Absolute accuracy ~1e-8 or better across
/// df in [1, 1e9]; converges to normal_quantile as df grows.
/// @throws std::domain_error unless p in (0,1) and df > 0.
double student_t_quantile(double p, double df);

namespace detail {

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Inverse of incomplete_beta in x for fixed (a, b): I_x(a,b) = p.
double inverse_incomplete_beta(double a, double b, double p);

} // namespace detail

// --- single-sample t machinery ----------------------------------------------

/// Standardized mean difference (mean - mu0) / sd.
double cohen_d(const SampleSummary& s, double mu0);

/// One-sample t statistic (mean - mu0) / (sd / sqrt(n)).
double t_statistic(const SampleSummary& s, double mu0);

/// Mean of a hypothetical sample with standardized effect d2 and spread s2:
/// d2.value * s2 + mu0. @throws std::domain_error if d2 is not a cohen_d
/// effect or s2 <= 0.
double nonresponse_mean(const EffectSize& d2, double s2, double mu0);

/// Moments of the concatenation of two samples given only their summaries.
/// Real-valued group sizes are accepted so iterative solvers can use it.
/// The result is exact: concatenating any two datasets with these summaries
/// and recomputing mean/sd (n-1 denominator) reproduces it.
CombinedSummary pooled_moments(double n1, double mean1, double sd1,
                               double n2, double mean2, double sd2);

/// Typed wrapper over pooled_moments for two observed samples.
CombinedSummary combine(const SampleSummary& a, const SampleSummary& b);

// --- correlation machinery ----------------------------------------------------

/// Fisher z transform atanh(r). @throws std::domain_error if |r| >= 1.
FisherZ fisher_z(double r);

/// Clamping variant: |r| >= 1 is pulled to +/-(1 - 1e-12) instead of throwing.
FisherZ fisher_z_clamped(double r);

/// Inverse transform tanh(z).
double inverse_fisher_z(FisherZ z);

/// Normal test statistic for H0: rho = 0, i.e. atanh(r) * sqrt(n - 3).
/// @throws std::domain_error if |r| >= 1 or n < 4.
double corr_z_statistic(double r, std::int64_t n);

/// Precision-weighted pooling of two Fisher-z values:
/// zr = ((n1-3) zr1 + (n2-3) zr2) / (n1+n2-6), se = 1/sqrt(n1+n2-6).
/// @throws std::domain_error if n1 + n2 <= 6.
CombinedFisherZ combined_fisher_z(FisherZ zr1, std::int64_t n1,
                                  FisherZ zr2, std::int64_t n2);

/// Pearson product-moment correlation of two equal-length series (>= 3
/// points). Result clamped into [-1, 1] against rounding overshoot.
/// @throws std::invalid_argument on length mismatch or size < 3,
/// std::domain_error if either series has zero variance.
double pearson_r(std::span<const double> x, std::span<const double> y);

// --- reliability ----------------------------------------------------------------

/// Cronbach's alpha for a set of item score columns (each column = one item,
/// aligned across respondents): (k/(k-1)) * (1 - sum(itemVar)/totalVar).
/// @throws std::invalid_argument unless k >= 2 items and m >= 3 respondents;
/// @throws std::domain_error if the total-score variance is zero.
double cronbach_alpha(const std::vector<std::vector<double>>& item_columns);

} // namespace wcrt
