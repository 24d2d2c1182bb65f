#include "wcrt/error.hpp"
#include "wcrt/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace wcrt;

namespace {
constexpr double kTight = 1e-12;

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }
} // namespace

TEST_CASE("normal quantile matches reference values") {
    struct Row { double p, q; };
    // Reference values computed with an independent high-precision library.
    const Row rows[] = {
        {0.95, 1.6448536269514722},
        {0.975, 1.959963984540054},
        {0.99, 2.3263478740408408},
        {0.995, 2.5758293035489004},
        {0.999, 3.0902323061678132},
        {0.9995, 3.2905267314919255},
        {0.2, -0.84162123357291418},
    };
    for (const auto& r : rows) {
        CAPTURE(r.p);
        CHECK(close(normal_quantile(r.p), r.q, 1e-9));
    }
    CHECK(std::abs(normal_quantile(0.5)) < 1e-12);
}

TEST_CASE("normal quantile and cdf are inverse") {
    for (double p = 0.0005; p < 1.0; p += 0.0125) {
        const double q = normal_quantile(p);
        CHECK(close(normal_cdf(q), p, 1e-9));
    }
    CHECK(normal_quantile(0.975) == doctest::Approx(-normal_quantile(0.025)).epsilon(1e-12));
}

TEST_CASE("normal quantile rejects out-of-range probabilities") {
    CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(-0.1), std::domain_error);
}

TEST_CASE("student t quantile matches reference values") {
    struct Row { double p, df, q; };
    const Row rows[] = {
        {0.975, 10, 2.2281388519649385},
        {0.95, 10, 1.8124611228107335},
        {0.975, 1, 12.706204736432095},
        {0.95, 1, 6.3137515148009324},
        {0.975, 2, 4.3026527296961419},
        {0.95, 5, 2.0150483733330233},
        {0.95, 90, 1.6619610839969403},
        {0.95, 91, 1.6617711550302645},
        {0.95, 49, 1.6765508926168537},
        {0.95, 1000, 1.6463788172854639},
        {0.975, 30, 2.0422724563012373},
        {0.995, 24, 2.7969395047728041},
        {0.975, 414, 1.9657106120621859},
    };
    for (const auto& r : rows) {
        CAPTURE(r.p);
        CAPTURE(r.df);
        CHECK(close(student_t_quantile(r.p, r.df), r.q, 1e-9));
    }
}

TEST_CASE("student t quantile properties") {
    CHECK(student_t_quantile(0.5, 7) == 0.0);
    CHECK(student_t_quantile(0.2, 12) ==
          doctest::Approx(-student_t_quantile(0.8, 12)).epsilon(1e-13));
    // More degrees of freedom pull the tail quantile toward the normal one.
    CHECK(student_t_quantile(0.975, 5) > student_t_quantile(0.975, 50));
    CHECK(student_t_quantile(0.975, 1e7) ==
          doctest::Approx(normal_quantile(0.975)).epsilon(1e-7));
    CHECK_THROWS_AS(student_t_quantile(0.975, 0.0), std::domain_error);
    CHECK_THROWS_AS(student_t_quantile(1.0, 5.0), std::domain_error);
}

TEST_CASE("student t cdf and quantile are inverse") {
    const double dfs[] = {1, 2, 5, 10, 30, 100, 1000, 1e6};
    for (const double df : dfs) {
        for (double p = 0.01; p < 1.0; p += 0.045) {
            CAPTURE(df);
            CAPTURE(p);
            CHECK(close(student_t_cdf(student_t_quantile(p, df), df), p, 1e-8));
        }
    }
}

TEST_CASE("fisher transform reference values and roundtrip") {
    struct Row { double r, zr; };
    const Row rows[] = {
        {0.5, 0.54930614433405489},
        {-0.9, -1.4722194895832201},
        {0.94, 1.7380493449176366},
        {0.24, 0.24477411265935289},
        {0.27, 0.27686382265510007},
        {0.62, 0.7250050877529991},
        {0.63, 0.74141614408126899},
        {0.84, 1.2211735176846021},
        {0.73, 0.92872736424672497},
        {0.25, 0.25541281188299536},
        {0.26, 0.26610840687365411},
    };
    for (const auto& row : rows) {
        CAPTURE(row.r);
        CHECK(close(fisher_z(row.r).value, row.zr, kTight));
        CHECK(close(inverse_fisher_z(fisher_z(row.r)), row.r, kTight));
    }
    CHECK_THROWS_AS(fisher_z(1.0), std::domain_error);
    CHECK_THROWS_AS(fisher_z(-1.0), std::domain_error);
    CHECK(std::abs(fisher_z_clamped(1.0).value) == std::abs(fisher_z_clamped(-1.0).value));
    CHECK(std::isfinite(fisher_z_clamped(1.0).value));
}

TEST_CASE("correlation z statistic") {
    CHECK(close(corr_z_statistic(0.24, 415), 4.9683718546428786, 1e-10));
    CHECK(close(corr_z_statistic(0.94, 415), 35.278548672697312, 1e-9));
    CHECK_THROWS_AS(corr_z_statistic(0.5, 3), std::domain_error);
}

TEST_CASE("combined fisher z weights the two groups") {
    const auto c = combined_fisher_z(fisher_z(0.5), 30, fisher_z(-0.5), 10);
    const double expect =
        (27.0 * std::atanh(0.5) + 7.0 * std::atanh(-0.5)) / 34.0;
    CHECK(close(c.zr, expect, kTight));
    CHECK(close(c.se, 1.0 / std::sqrt(34.0), kTight));
    CHECK_THROWS_AS(combined_fisher_z(fisher_z(0.1), 3, fisher_z(0.1), 3), std::domain_error);
}

TEST_CASE("pooled moments equal stats of the concatenated sample") {
    // {1,2,3} + {4,5,6} concatenates to {1..6}: mean 3.5, sd sqrt(3.5).
    const auto c = pooled_moments(3, 2.0, 1.0, 3, 5.0, 1.0);
    CHECK(c.n == 6.0);
    CHECK(close(c.mean, 3.5, kTight));
    CHECK(close(c.sd, 1.8708286933869707, kTight));
}

TEST_CASE("pooled moments match direct concatenation on random samples") {
    std::mt19937 rng(20240815);
    std::uniform_int_distribution<int> n_dist(2, 60);
    std::uniform_real_distribution<double> v_dist(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n1 = n_dist(rng), n2 = n_dist(rng);
        std::vector<double> a(n1), b(n2), all;
        for (auto& v : a) v = v_dist(rng);
        for (auto& v : b) v = v_dist(rng);
        all = a;
        all.insert(all.end(), b.begin(), b.end());

        auto stats_of = [](const std::vector<double>& xs) {
            double mean = 0.0;
            for (double x : xs) mean += x;
            mean /= static_cast<double>(xs.size());
            double ss = 0.0;
            for (double x : xs) ss += (x - mean) * (x - mean);
            return std::pair<double, double>(mean,
                                             std::sqrt(ss / (static_cast<double>(xs.size()) - 1)));
        };
        const auto [m1, s1] = stats_of(a);
        const auto [m2, s2] = stats_of(b);
        const auto [mc, sc] = stats_of(all);
        const auto pooled = pooled_moments(n1, m1, s1, n2, m2, s2);
        CAPTURE(trial);
        CHECK(close(pooled.mean, mc, 1e-10));
        CHECK(close(pooled.sd, sc, 1e-10));
    }
}

TEST_CASE("combine validates its inputs") {
    SampleSummary good{10, 1.0, 2.0};
    CHECK_THROWS_AS(combine(SampleSummary{1, 0.0, 1.0}, good), std::domain_error);
    CHECK_THROWS_AS(combine(SampleSummary{10, 0.0, 0.0}, good), std::domain_error);
    CHECK_THROWS_AS(combine(good, SampleSummary{0, 0.0, 1.0}), std::domain_error);
    const auto c = combine(good, SampleSummary{1, 3.0, 0.0}); // a single extra observation
    CHECK(c.n == 11.0);
}

TEST_CASE("effect size helpers") {
    SampleSummary s{50, 0.5, 1.0};
    CHECK(close(cohen_d(s, 0.0), 0.5, kTight));
    CHECK(close(cohen_d(s, 0.2), 0.3, kTight));
    CHECK(close(t_statistic(s, 0.0), 0.5 * std::sqrt(50.0), kTight));
    CHECK(close(nonresponse_mean(EffectSize{EffectKind::cohen_d, -0.2}, 1.0, 0.0), -0.2, kTight));
    CHECK(close(nonresponse_mean(EffectSize{EffectKind::cohen_d, -0.2}, 2.0, 1.0), 0.6, kTight));
}

TEST_CASE("pearson correlation") {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{2, 4, 5, 4};
    CHECK(close(pearson_r(x, y), 0.7181848464596079, kTight));
    CHECK(close(pearson_r(x, x), 1.0, kTight));

    const std::vector<double> yneg{-2, -4, -5, -4};
    CHECK(close(pearson_r(x, yneg), -0.7181848464596079, kTight));

    const std::vector<double> flat{3, 3, 3, 3};
    CHECK_THROWS_AS(pearson_r(x, flat), std::domain_error);
    const std::vector<double> shorter{1, 2, 3};
    CHECK_THROWS_AS(pearson_r(x, shorter), std::invalid_argument);
}

TEST_CASE("cronbach alpha") {
    const std::vector<std::vector<double>> items{
        {1, 2, 3, 4, 5},
        {2, 2, 3, 4, 5},
        {1, 3, 3, 3, 5},
    };
    CHECK(close(cronbach_alpha(items), 0.9593023255813954, kTight));

    // Perfectly parallel items give alpha of exactly 1.
    const std::vector<std::vector<double>> parallel{{1, 2, 3, 4}, {1, 2, 3, 4}};
    CHECK(close(cronbach_alpha(parallel), 1.0, kTight));

    CHECK_THROWS_AS(cronbach_alpha({{1, 2, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(cronbach_alpha({{1, 2}, {3, 4}}), std::invalid_argument);
}
