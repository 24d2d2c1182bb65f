#include "wcrt/error.hpp"
#include "wcrt/solver.hpp"
#include "wcrt/stats.hpp"

#include <doctest.h>

#include "oracle.hpp"

#include <cmath>
#include <random>

using namespace wcrt;

namespace {

TestSpec corr_spec(double alpha = 0.05, Tail tail = Tail::two) {
    TestSpec s;
    s.family = TestFamily::correlation;
    s.tail = tail;
    s.alpha = alpha;
    return s;
}

TestSpec ttest_spec(double alpha, Tail tail, double mu0 = 0.0) {
    TestSpec s;
    s.family = TestFamily::mean_single_sample;
    s.tail = tail;
    s.alpha = alpha;
    s.mu0 = mu0;
    return s;
}

} // namespace

TEST_CASE("scenario classification covers all four cases") {
    CHECK(classify_scenario(corr_spec(), 3.0, 1.96) == Scenario::upper_significant);
    CHECK(classify_scenario(corr_spec(), 1.0, 1.96) == Scenario::upper_nonsignificant);
    CHECK(classify_scenario(corr_spec(), -3.0, 1.96) == Scenario::lower_significant);
    CHECK(classify_scenario(corr_spec(), -1.0, 1.96) == Scenario::lower_nonsignificant);
    // Exactly critical counts as not significant.
    CHECK(classify_scenario(corr_spec(), 1.96, 1.96) == Scenario::upper_nonsignificant);
    // One-tailed specs fix the direction regardless of the statistic's sign.
    CHECK(classify_scenario(corr_spec(0.05, Tail::upper), -0.5, 1.64) ==
          Scenario::upper_nonsignificant);
    CHECK(classify_scenario(corr_spec(0.05, Tail::lower), -2.0, 1.64) ==
          Scenario::lower_significant);
    // A two-tailed statistic of exactly zero has no direction.
    CHECK_THROWS_AS(classify_scenario(corr_spec(), 0.0, 1.96), std::domain_error);
}

TEST_CASE("critical value honors family and tail") {
    CHECK(critical_value(corr_spec(0.05), 0) == doctest::Approx(1.959963984540054).epsilon(1e-10));
    CHECK(critical_value(corr_spec(0.01), 0) == doctest::Approx(2.5758293035489004).epsilon(1e-10));
    CHECK(critical_value(corr_spec(0.05, Tail::upper), 0) ==
          doctest::Approx(1.6448536269514722).epsilon(1e-10));
    CHECK(critical_value(ttest_spec(0.05, Tail::two), 10) ==
          doctest::Approx(2.2281388519649385).epsilon(1e-10));
}

TEST_CASE("correlation reversal sizes for a strong observed correlation") {
    const auto spec = corr_spec(0.05);
    struct Row { double r2; std::int64_t n2; };
    const Row rows[] = {{-0.1, 5623}, {-0.5, 1166}, {-0.9, 451}};
    for (const auto& row : rows) {
        CAPTURE(row.r2);
        const auto res = solve_corr_n2(0.94, 415, row.r2, spec);
        CHECK(res.status == WcrtStatus::finite);
        CHECK(res.n2 == row.n2);
        CHECK(res.scenario == Scenario::upper_significant);
        // Minimality: the statistic straddles the critical value at the boundary.
        CHECK(res.stat_at_n2 <= res.critical_value);
        CHECK(res.stat_at_n2_minus_1 > res.critical_value);
        CHECK(verify_flip_boundary(res, 0.94, 415, row.r2, spec));
    }
}

TEST_CASE("correlation reversal sizes for a weak observed correlation") {
    const auto spec = corr_spec(0.05);
    struct Row { double r2; std::int64_t n2; };
    const Row rows[] = {{-0.1, 440}, {-0.5, 106}, {-0.9, 44}};
    for (const auto& row : rows) {
        CAPTURE(row.r2);
        const auto res = solve_corr_n2(0.24, 415, row.r2, spec);
        CHECK(res.status == WcrtStatus::finite);
        CHECK(res.n2 == row.n2);
        CHECK(verify_flip_boundary(res, 0.24, 415, row.r2, spec));
    }
}

TEST_CASE("small significant correlation flips quickly") {
    const auto res = solve_corr_n2(0.5, 30, -0.5, corr_spec(0.05));
    CHECK(res.status == WcrtStatus::finite);
    CHECK(res.n2 == 10);
}

TEST_CASE("matching target correlation cannot reverse significance") {
    const auto res = solve_corr_n2(0.5, 30, 0.5, corr_spec(0.05));
    CHECK(res.status == WcrtStatus::infinite);
    CHECK_FALSE(res.at_cap);
}

TEST_CASE("matching target correlation extends a non-significant result") {
    // z grows like atanh(r) * sqrt(n), so enough identical data turns
    // significant; the crossing is known in closed form.
    const auto res = solve_corr_n2(0.1, 30, 0.1, corr_spec(0.05));
    CHECK(res.status == WcrtStatus::finite);
    CHECK(res.n2 == 358);
    CHECK(res.scenario == Scenario::upper_nonsignificant);
    CHECK(verify_flip_boundary(res, 0.1, 30, 0.1, corr_spec(0.05)));
}

TEST_CASE("tiny groups get negative weight and can flip a strong correlation") {
    // Below 4 extra observations the (n2 - 3) weight is negative, so a target
    // far above the observed transform drags the combined statistic down.
    const double r1 = std::tanh(0.8);
    const double r2 = std::tanh(3.0);
    const auto res = solve_corr_n2(r1, 10, r2, corr_spec(0.05));
    CHECK(res.status == WcrtStatus::finite);
    CHECK(res.n2 == 1);
    CHECK(res.scenario == Scenario::upper_significant);
}

TEST_CASE("opposite-side targets cannot create significance") {
    // Non-significant baseline, target pulling away from the tested side.
    const auto res = solve_corr_n2(0.1, 20, -0.3, corr_spec(0.05));
    REQUIRE(res.scenario == Scenario::upper_nonsignificant);
    CHECK(res.status == WcrtStatus::infinite);
}

TEST_CASE("mean reversal for a dampening nonresponse effect") {
    const SampleSummary s{50, 0.5, 1.0};
    const auto spec = ttest_spec(0.05, Tail::upper);
    const auto res = solve_ttest_n2(s, spec, {EffectKind::cohen_d, -0.2});
    CHECK(res.status == WcrtStatus::finite);
    CHECK(res.n2 == 42);
    CHECK(res.stat_at_n2 <= res.critical_value);
    CHECK(res.stat_at_n2_minus_1 > res.critical_value);
    CHECK(verify_flip_boundary(res, s, spec, {EffectKind::cohen_d, -0.2}));
}

TEST_CASE("mean reversal by pure dilution") {
    const SampleSummary s{50, 0.5, 1.0};
    const auto res = solve_ttest_n2(s, ttest_spec(0.05, Tail::upper), {EffectKind::cohen_d, 0.0});
    CHECK(res.status == WcrtStatus::finite);
    CHECK(res.n2 == 171);
}

TEST_CASE("mean reversal crossings past the dense region") {
    const SampleSummary s{50, 0.5, 1.0};
    const auto spec = ttest_spec(0.05, Tail::upper);
    struct Row { double d2; std::int64_t n2; };
    const Row rows[] = {{0.02, 290}, {0.029, 643}, {0.0291, 686}};
    for (const auto& row : rows) {
        CAPTURE(row.d2);
        const auto res = solve_ttest_n2(s, spec, {EffectKind::cohen_d, row.d2});
        CHECK(res.status == WcrtStatus::finite);
        CHECK(res.n2 == row.n2);
        CHECK(verify_flip_boundary(res, s, spec, {EffectKind::cohen_d, row.d2}));
    }
}

TEST_CASE("mean reversal window closes for slightly larger targets") {
    const SampleSummary s{50, 0.5, 1.0};
    const auto spec = ttest_spec(0.05, Tail::upper);
    for (const double d2 : {0.0294, 0.03, 0.1, 0.5}) {
        CAPTURE(d2);
        const auto res = solve_ttest_n2(s, spec, {EffectKind::cohen_d, d2});
        CHECK(res.status == WcrtStatus::infinite);
    }
}

TEST_CASE("matching effect cannot reverse a significant mean test") {
    const SampleSummary s{50, 0.5, 1.0};
    const auto spec = ttest_spec(0.05, Tail::upper);
    const double d1 = cohen_d(s, spec.mu0);
    const auto res = solve_ttest_n2(s, spec, {EffectKind::cohen_d, d1});
    CHECK(res.status == WcrtStatus::infinite);
}

TEST_CASE("an extreme same-direction group flips through variance inflation") {
    // The pooled-variance cross term can grow faster than the mean offset,
    // so one far-out observation group kills significance immediately.
    const SampleSummary s{10, 1.0811735608487096, 1.0};
    const auto spec = ttest_spec(0.01, Tail::two);
    const auto res = solve_ttest_n2(s, spec, {EffectKind::cohen_d, 5.0});
    CHECK(res.status == WcrtStatus::finite);
    CHECK(res.n2 == 1);
}

TEST_CASE("lower-tail problems mirror upper-tail ones") {
    const SampleSummary up{50, 0.5, 1.0};
    const SampleSummary down{50, -0.5, 1.0};
    const auto res_up = solve_ttest_n2(up, ttest_spec(0.05, Tail::upper),
                                       {EffectKind::cohen_d, -0.2});
    const auto res_down = solve_ttest_n2(down, ttest_spec(0.05, Tail::lower),
                                         {EffectKind::cohen_d, 0.2});
    REQUIRE(res_up.status == WcrtStatus::finite);
    REQUIRE(res_down.status == WcrtStatus::finite);
    CHECK(res_up.n2 == res_down.n2);
    CHECK(res_down.stat_at_n2 == doctest::Approx(-res_up.stat_at_n2).epsilon(1e-14));
    CHECK(res_down.critical_value == doctest::Approx(-res_up.critical_value).epsilon(1e-14));
    CHECK(res_down.scenario == Scenario::lower_significant);

    const auto corr_up = solve_corr_n2(0.5, 30, -0.2, corr_spec(0.05));
    const auto corr_down = solve_corr_n2(-0.5, 30, 0.2, corr_spec(0.05));
    REQUIRE(corr_up.status == WcrtStatus::finite);
    CHECK(corr_up.n2 == corr_down.n2);
    CHECK(corr_down.scenario == Scenario::lower_significant);
}

TEST_CASE("group standard deviation must stay inside the allowed band") {
    const SampleSummary s{50, 0.5, 1.0};
    const auto spec = ttest_spec(0.05, Tail::upper);
    CHECK_THROWS_AS(solve_ttest_n2(s, spec, {EffectKind::cohen_d, 0.0}, 1.5),
                    std::domain_error);
    SolverConfig cfg;
    cfg.theta = 0.5;
    CHECK_NOTHROW(solve_ttest_n2(s, spec, {EffectKind::cohen_d, 0.0}, 1.5, cfg));
    CHECK_THROWS_AS(solve_ttest_n2(s, spec, {EffectKind::cohen_d, 0.0}, 1.6, cfg),
                    std::domain_error);
}

TEST_CASE("solver rejects invalid setups") {
    const SampleSummary s{50, 0.5, 1.0};
    CHECK_THROWS_AS(solve_ttest_n2(s, corr_spec(), {EffectKind::cohen_d, 0.0}),
                    std::domain_error);
    CHECK_THROWS_AS(solve_ttest_n2(s, ttest_spec(0.05, Tail::upper),
                                   {EffectKind::pearson_r, 0.0}),
                    std::domain_error);
    CHECK_THROWS_AS(solve_corr_n2(0.5, 3, -0.5, corr_spec()), std::domain_error);
    CHECK_THROWS_AS(solve_corr_n2(1.0, 30, -0.5, corr_spec()), std::domain_error);
    CHECK_THROWS_AS(solve_corr_n2(0.5, 30, -0.5, ttest_spec(0.05, Tail::two)),
                    std::domain_error);
    SolverConfig bad;
    bad.n2_cap = 0;
    CHECK_THROWS_AS(solve_corr_n2(0.5, 30, -0.5, corr_spec(), bad), std::domain_error);
}

TEST_CASE("an exhausted iteration budget reports non-convergence") {
    SolverConfig cfg;
    cfg.max_iterations = 1;
    // The mean-family dense scan alone outlasts a one-iteration budget when
    // the response sample is large and the crossing is far out.
    const SampleSummary s{2000, 0.5, 1.0};
    const auto res = solve_ttest_n2(s, ttest_spec(0.05, Tail::upper),
                                    {EffectKind::cohen_d, 0.01}, std::nullopt, cfg);
    CHECK(res.status == WcrtStatus::non_converged);

    // The correlation search needs only a few dozen evaluations, so the same
    // budget still pins the exact boundary.
    const auto corr = solve_corr_n2(0.94, 415, -0.1, corr_spec(0.05), cfg);
    CHECK(corr.status == WcrtStatus::finite);
    CHECK(corr.n2 == 5623);
}

TEST_CASE("cap truncates the search and reports it") {
    SolverConfig cfg;
    cfg.n2_cap = 1000;
    const auto res = solve_corr_n2(0.94, 415, -0.1, corr_spec(0.05), cfg);
    CHECK(res.status == WcrtStatus::infinite);
    CHECK(res.at_cap);

    cfg.n2_cap = 5623;
    const auto at_edge = solve_corr_n2(0.94, 415, -0.1, corr_spec(0.05), cfg);
    CHECK(at_edge.status == WcrtStatus::finite);
    CHECK(at_edge.n2 == 5623);
}

TEST_CASE("boundary correlation for a hypothetical group") {
    // The value that pushes the combined statistic exactly to the critical
    // line; one step beyond it must flip and one step short must not.
    const auto spec = corr_spec(0.05);
    const auto th = inverse_corr_threshold(0.94, 415, 1245, spec);
    CHECK_FALSE(th.saturated);
    const double zr1 = std::atanh(0.94);
    const double N = 415 + 1245 - 6;
    auto combined_z = [&](double r2) {
        return ((415 - 3) * zr1 + (1245 - 3) * std::atanh(r2)) / N * std::sqrt(N);
    };
    const double C = normal_quantile(0.975);
    CHECK(combined_z(th.r2) == doctest::Approx(C).epsilon(1e-9));
    CHECK(combined_z(th.r2 + 1e-6) > C);
    CHECK(combined_z(th.r2 - 1e-6) < C);

    // Negative observed correlations mirror to the other boundary.
    const auto th_neg = inverse_corr_threshold(-0.94, 415, 1245, spec);
    CHECK(th_neg.r2 == doctest::Approx(-th.r2).epsilon(1e-12));

    // Tiny groups cannot move a strong result to the boundary inside [-1, 1].
    const auto sat = inverse_corr_threshold(0.94, 415, 4, spec);
    CHECK(sat.saturated);

    CHECK_THROWS_AS(inverse_corr_threshold(0.94, 415, 3, spec), std::domain_error);
    CHECK_THROWS_AS(inverse_corr_threshold(0.94, 3, 1245, spec), std::domain_error);
}

TEST_CASE("flip boundary verification rejects wrong answers") {
    const auto spec = corr_spec(0.05);
    auto res = solve_corr_n2(0.94, 415, -0.5, spec);
    REQUIRE(res.status == WcrtStatus::finite);
    CHECK(verify_flip_boundary(res, 0.94, 415, -0.5, spec));
    auto off = res;
    off.n2 += 1;
    CHECK_FALSE(verify_flip_boundary(off, 0.94, 415, -0.5, spec));
    off.n2 = res.n2 - 1;
    CHECK_FALSE(verify_flip_boundary(off, 0.94, 415, -0.5, spec));
    off = res;
    off.status = WcrtStatus::infinite;
    CHECK_FALSE(verify_flip_boundary(off, 0.94, 415, -0.5, spec));
}

TEST_CASE("solver agrees with the exhaustive scan on random problems") {
    std::mt19937 rng(97531);
    SolverConfig cfg;
    cfg.n2_cap = 20000;
    cfg.theta = 1.0;
    int finite_seen = 0, infinite_seen = 0;
    for (int trial = 0; trial < 150; ++trial) {
        const auto c = oracle::random_corr_case(rng);
        CAPTURE(trial);
        CAPTURE(c.r1);
        CAPTURE(c.n1);
        CAPTURE(c.r2);
        CAPTURE(c.spec.alpha);
        CAPTURE(static_cast<int>(c.spec.tail));
        const auto got = solve_corr_n2(c.r1, c.n1, c.r2, c.spec, cfg);
        const auto want = oracle::scan_corr(c.r1, c.n1, c.r2, c.spec, cfg.n2_cap);
        REQUIRE(got.status != WcrtStatus::non_converged);
        CHECK((got.status == WcrtStatus::finite) == want.finite);
        if (want.finite) {
            CHECK(got.n2 == want.n2);
            CHECK(verify_flip_boundary(got, c.r1, c.n1, c.r2, c.spec));
            ++finite_seen;
        } else {
            ++infinite_seen;
        }
    }
    CHECK(finite_seen > 0);
    CHECK(infinite_seen > 0);

    for (int trial = 0; trial < 150; ++trial) {
        const auto c = oracle::random_ttest_case(rng);
        CAPTURE(trial);
        CAPTURE(c.sample.n);
        CAPTURE(c.sample.mean);
        CAPTURE(c.sample.sd);
        CAPTURE(c.d2);
        CAPTURE(c.s2);
        const auto got = solve_ttest_n2(c.sample, c.spec, {EffectKind::cohen_d, c.d2}, c.s2, cfg);
        const auto want = oracle::scan_ttest(c.sample, c.spec, c.d2, c.s2, cfg.n2_cap);
        REQUIRE(got.status != WcrtStatus::non_converged);
        CHECK((got.status == WcrtStatus::finite) == want.finite);
        if (want.finite) {
            CHECK(got.n2 == want.n2);
            CHECK(verify_flip_boundary(got, c.sample, c.spec, {EffectKind::cohen_d, c.d2}, c.s2));
        }
    }
}
