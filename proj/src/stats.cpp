#include "wcrt/stats.hpp"
#include "wcrt/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace wcrt {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

void require_summary(const SampleSummary& s, const char* who) {
    if (s.n < 2)
        throw std::domain_error(std::string(who) + ": need n >= 2, got n=" + std::to_string(s.n));
    if (!(s.sd > 0.0) || !std::isfinite(s.sd))
        throw std::domain_error(std::string(who) + ": sd must be positive and finite");
    if (!std::isfinite(s.mean))
        throw std::domain_error(std::string(who) + ": mean must be finite");
}

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

} // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("normal_quantile: p must lie in (0,1), got " + std::to_string(p));
    // Crude seed from the tail asymptotic, then safeguarded Newton on the
    // machine-precision CDF. Bracket invariant: cdf(lo) < p < cdf(hi).
    double q = std::min(p, 1.0 - p);
    double x = std::sqrt(-2.0 * std::log(q));
    if (p < 0.5) x = -x;
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 100; ++i) {
        const double err = normal_cdf(x) - p;
        if (err > 0.0) hi = std::min(hi, x);
        else lo = std::max(lo, x);
        const double dens = normal_pdf(x);
        double step = dens > 0.0 ? err / dens : 0.0;
        // Halley correction: the CDF's curvature is -x * pdf.
        step /= std::max(0.5, 1.0 - 0.5 * step * x);
        double next = x - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(next))) { x = next; break; }
        x = next;
    }
    return x;
}

namespace detail {

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 2000;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw NumericalError("incomplete_beta: continued fraction did not converge (a=" +
                         std::to_string(a) + ", b=" + std::to_string(b) +
                         ", x=" + std::to_string(x) + ")");
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("incomplete_beta: a and b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double inverse_incomplete_beta(double a, double b, double p) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("inverse_incomplete_beta: a and b must be positive");
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    const double ln_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    double lo = 0.0, hi = 1.0;
    double x = a / (a + b); // mean of the distribution as seed
    for (int i = 0; i < 300; ++i) {
        const double err = incomplete_beta(a, b, x) - p;
        if (err > 0.0) hi = x;
        else lo = x;
        if (std::abs(err) <= 1e-16 * std::max(1.0, p)) break;
        const double ln_dens = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - ln_beta;
        double next;
        if (ln_dens > -700.0) {
            next = x - err / std::exp(ln_dens);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        } else {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - x) <= 1e-17 * (1.0 + std::abs(next))) { x = next; break; }
        x = next;
        if (hi - lo <= 1e-17 * std::max(1.0, hi)) break;
    }
    return x;
}

} // namespace detail

double student_t_cdf(double t, double df) {
    if (!(df > 0.0))
        throw std::domain_error("student_t_cdf: df must be positive");
    if (!std::isfinite(t)) return t > 0.0 ? 1.0 : 0.0;
    const double x = df / (df + t * t);
    const double half_tail = 0.5 * detail::incomplete_beta(0.5 * df, 0.5, x);
    return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

double student_t_quantile(double p, double df) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("student_t_quantile: p must lie in (0,1), got " + std::to_string(p));
    if (!(df > 0.0))
        throw std::domain_error("student_t_quantile: df must be positive");
    if (p == 0.5) return 0.0;
    const double sign = p > 0.5 ? 1.0 : -1.0;
    const double pu = p > 0.5 ? p : 1.0 - p;
    if (df >= 1e6) {
        // Fisher's expansion around the normal quantile; the df^-2 term keeps
        // the truncation error below 1e-12 in this range.
        const double z = normal_quantile(pu);
        const double z3 = z * z * z, z5 = z3 * z * z;
        const double t = z + (z3 + z) / (4.0 * df) + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * df * df);
        return sign * t;
    }
    const double u = 2.0 * (1.0 - pu); // upper-tail mass doubled
    const double x = detail::inverse_incomplete_beta(0.5 * df, 0.5, u);
    if (x <= 0.0) return sign * std::numeric_limits<double>::infinity();
    return sign * std::sqrt(df * (1.0 - x) / x);
}

double cohen_d(const SampleSummary& s, double mu0) {
    require_summary(s, "cohen_d");
    return (s.mean - mu0) / s.sd;
}

double t_statistic(const SampleSummary& s, double mu0) {
    require_summary(s, "t_statistic");
    return (s.mean - mu0) / (s.sd / std::sqrt(static_cast<double>(s.n)));
}

double nonresponse_mean(const EffectSize& d2, double s2, double mu0) {
    if (d2.kind != EffectKind::cohen_d)
        throw std::domain_error("nonresponse_mean: effect size must be a cohen_d value");
    if (!(s2 > 0.0) || !std::isfinite(s2))
        throw std::domain_error("nonresponse_mean: s2 must be positive and finite");
    return d2.value * s2 + mu0;
}

CombinedSummary pooled_moments(double n1, double mean1, double sd1,
                               double n2, double mean2, double sd2) {
    if (!(n1 > 0.0) || !(n2 > 0.0))
        throw std::domain_error("pooled_moments: group sizes must be positive");
    if (!(sd1 >= 0.0) || !(sd2 >= 0.0))
        throw std::domain_error("pooled_moments: standard deviations must be non-negative");
    const double n = n1 + n2;
    if (!(n > 1.0))
        throw std::domain_error("pooled_moments: combined size must exceed 1");
    const double mean = (n1 * mean1 + n2 * mean2) / n;
    const double diff = mean1 - mean2;
    // Sum of squares about the combined mean splits into within-group and
    // between-group parts; dividing by n-1 keeps this exactly equal to the
    // sample variance of the concatenated data.
    const double ss = (n1 - 1.0) * sd1 * sd1 + (n2 - 1.0) * sd2 * sd2 +
                      (n1 * n2 / n) * diff * diff;
    return CombinedSummary{n, mean, std::sqrt(ss / (n - 1.0))};
}

CombinedSummary combine(const SampleSummary& a, const SampleSummary& b) {
    require_summary(a, "combine");
    if (b.n < 1)
        throw std::domain_error("combine: second group needs n >= 1");
    if (!(b.sd >= 0.0) || !std::isfinite(b.mean))
        throw std::domain_error("combine: second group summary is malformed");
    return pooled_moments(static_cast<double>(a.n), a.mean, a.sd,
                          static_cast<double>(b.n), b.mean, b.sd);
}

FisherZ fisher_z(double r) {
    if (!(std::abs(r) < 1.0))
        throw std::domain_error("fisher_z: |r| must be < 1, got " + std::to_string(r));
    return FisherZ{std::atanh(r)};
}

FisherZ fisher_z_clamped(double r) {
    constexpr double kLimit = 1.0 - 1e-12;
    return FisherZ{std::atanh(std::clamp(r, -kLimit, kLimit))};
}

double inverse_fisher_z(FisherZ z) { return std::tanh(z.value); }

double corr_z_statistic(double r, std::int64_t n) {
    if (n < 4)
        throw std::domain_error("corr_z_statistic: need n >= 4, got n=" + std::to_string(n));
    return fisher_z(r).value * std::sqrt(static_cast<double>(n - 3));
}

CombinedFisherZ combined_fisher_z(FisherZ zr1, std::int64_t n1,
                                  FisherZ zr2, std::int64_t n2) {
    const double denom = static_cast<double>(n1 + n2 - 6);
    if (!(denom > 0.0))
        throw std::domain_error("combined_fisher_z: need n1 + n2 > 6");
    const double zr = ((n1 - 3) * zr1.value + (n2 - 3) * zr2.value) / denom;
    return CombinedFisherZ{zr, 1.0 / std::sqrt(denom)};
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("pearson_r: series lengths differ (" +
                                    std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
    if (x.size() < 3)
        throw std::invalid_argument("pearson_r: need at least 3 points, got " + std::to_string(x.size()));
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
        throw std::domain_error("pearson_r: a series has zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double cronbach_alpha(const std::vector<std::vector<double>>& item_columns) {
    const std::size_t k = item_columns.size();
    if (k < 2)
        throw std::invalid_argument("cronbach_alpha: need at least 2 items, got " + std::to_string(k));
    const std::size_t m = item_columns.front().size();
    if (m < 3)
        throw std::invalid_argument("cronbach_alpha: need at least 3 respondents, got " + std::to_string(m));
    for (const auto& col : item_columns)
        if (col.size() != m)
            throw std::invalid_argument("cronbach_alpha: item columns have unequal lengths");

    auto sample_var = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double d : v) mean += d;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double d : v) ss += (d - mean) * (d - mean);
        return ss / static_cast<double>(v.size() - 1);
    };

    double item_var_sum = 0.0;
    for (const auto& col : item_columns) item_var_sum += sample_var(col);

    std::vector<double> totals(m, 0.0);
    for (const auto& col : item_columns)
        for (std::size_t i = 0; i < m; ++i) totals[i] += col[i];
    const double total_var = sample_var(totals);
    if (!(total_var > 0.0))
        throw std::domain_error("cronbach_alpha: total-score variance is zero (degenerate scale)");

    const double kd = static_cast<double>(k);
    return (kd / (kd - 1.0)) * (1.0 - item_var_sum / total_var);
}

} // namespace wcrt
