#include "wcrt/flagger.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

using namespace wcrt;

namespace {

TestSpec two_tailed(double alpha) {
    TestSpec s;
    s.family = TestFamily::correlation;
    s.tail = Tail::two;
    s.alpha = alpha;
    return s;
}

PairInput pair_with(const std::string& name, double r, double m1, double m2, double m3) {
    PairInput p;
    p.pair = name;
    p.r = r;
    p.estimates.m1 = m1;
    p.estimates.m2 = m2;
    p.estimates.m3 = m3;
    return p;
}

} // namespace

TEST_CASE("flag crossing logic covers significance and sign in both directions") {
    const std::int64_t n1 = 415, n2 = 1245;
    const std::vector<double> alphas{0.05, 0.01};

    const double thr_pos_05 = inverse_corr_threshold(0.94, n1, n2, two_tailed(0.05)).r2;
    const double thr_pos_01 = inverse_corr_threshold(0.94, n1, n2, two_tailed(0.01)).r2;
    const double thr_ext_05 = inverse_corr_threshold(0.05, n1, n2, two_tailed(0.05)).r2;

    std::vector<PairInput> pairs;
    // Significant positive correlation: estimates at or below the boundary
    // could reverse it. m2 sits between the two boundaries, flagged at the
    // looser level only.
    pairs.push_back(pair_with("POS-SIG", 0.94, 0.9, thr_pos_05 - 0.01, -1.0));
    // Mirrored significant negative correlation: estimates at or above the
    // mirrored boundary flag.
    pairs.push_back(pair_with("NEG-SIG", -0.94, -0.9, -(thr_pos_05 - 0.01), 1.0));
    // Non-significant positive correlation: only estimates past the boundary
    // toward significance flag (extension).
    pairs.push_back(pair_with("POS-NONSIG", 0.05, 0.5, thr_ext_05 - 0.01, -0.3));
    // Mirrored non-significant negative correlation.
    pairs.push_back(pair_with("NEG-NONSIG", -0.05, -0.5, -(thr_ext_05 - 0.01), 0.3));

    const auto report = build_flag_report(pairs, n1, n2, alphas);
    REQUIRE(report.rows.size() == 4);
    REQUIRE(report.alphas == alphas);
    CHECK(report.n1 == n1);
    CHECK(report.n2 == n2);

    const auto& pos_sig = report.rows[0];
    REQUIRE(pos_sig.at_alpha.size() == 2);
    CHECK(pos_sig.at_alpha[0].significant);
    CHECK(pos_sig.at_alpha[0].kind == FlagKind::reversal);
    // Boundary for the strong pair at the looser level, pinned numerically.
    CHECK(pos_sig.at_alpha[0].threshold == doctest::Approx(-0.475).epsilon(0.011));
    CHECK_FALSE(pos_sig.at_alpha[0].flags.m1); // 0.9 stays on the significant side
    CHECK(pos_sig.at_alpha[0].flags.m2);       // just below the boundary
    CHECK(pos_sig.at_alpha[0].flags.m3);       // -1 is far below it
    // Stricter levels are easier to reverse: the boundary moves up toward
    // the observed correlation.
    CHECK(pos_sig.at_alpha[1].threshold > pos_sig.at_alpha[0].threshold);
    CHECK(pos_sig.at_alpha[1].flags.m2 == (thr_pos_05 - 0.01 <= thr_pos_01));
    CHECK(pos_sig.at_alpha[1].flags.m3);

    const auto& neg_sig = report.rows[1];
    CHECK(neg_sig.at_alpha[0].significant);
    CHECK(neg_sig.at_alpha[0].threshold == doctest::Approx(-thr_pos_05).epsilon(1e-12));
    CHECK_FALSE(neg_sig.at_alpha[0].flags.m1);
    CHECK(neg_sig.at_alpha[0].flags.m2);
    CHECK(neg_sig.at_alpha[0].flags.m3);

    const auto& pos_ext = report.rows[2];
    CHECK_FALSE(pos_ext.at_alpha[0].significant);
    CHECK(pos_ext.at_alpha[0].kind == FlagKind::extension);
    CHECK(pos_ext.at_alpha[0].flags.m1);       // 0.5 pushes past the boundary
    CHECK_FALSE(pos_ext.at_alpha[0].flags.m2); // just short of it
    CHECK_FALSE(pos_ext.at_alpha[0].flags.m3); // wrong direction entirely

    const auto& neg_ext = report.rows[3];
    CHECK_FALSE(neg_ext.at_alpha[0].significant);
    CHECK(neg_ext.at_alpha[0].flags.m1);
    CHECK_FALSE(neg_ext.at_alpha[0].flags.m2);
    CHECK_FALSE(neg_ext.at_alpha[0].flags.m3);

    CHECK_THROWS_AS(build_flag_report(pairs, n1, n2, std::vector<double>{}),
                    std::domain_error);
}

TEST_CASE("a borderline correlation changes flag kind across alpha levels") {
    // z for r=0.1 at n=415 lies between the 0.05 and 0.01 critical values,
    // so the same pair is read as reversible at one level and extendable at
    // the other.
    const std::int64_t n1 = 415, n2 = 1245;
    const std::vector<double> alphas{0.05, 0.01};
    const std::vector<PairInput> pairs{pair_with("EDGE", 0.1, 0.12, 0.02, 0.04)};

    const auto report = build_flag_report(pairs, n1, n2, alphas);
    const auto& row = report.rows[0];
    CHECK(row.at_alpha[0].significant);
    CHECK(row.at_alpha[0].kind == FlagKind::reversal);
    CHECK_FALSE(row.at_alpha[1].significant);
    CHECK(row.at_alpha[1].kind == FlagKind::extension);

    // m2 = 0.02 falls below the 0.05 boundary (~0.031): reversal flag.
    CHECK(row.at_alpha[0].flags.m2);
    CHECK_FALSE(row.at_alpha[0].flags.m1);
    CHECK_FALSE(row.at_alpha[0].flags.m3);
    // m1 = 0.12 exceeds the 0.01 boundary (~0.051): extension flag.
    CHECK(row.at_alpha[1].flags.m1);
    CHECK_FALSE(row.at_alpha[1].flags.m2);
    CHECK_FALSE(row.at_alpha[1].flags.m3);
}

TEST_CASE("tiny hypothetical groups saturate the boundary") {
    const std::vector<double> alphas{0.05};
    const std::vector<PairInput> pairs{pair_with("STRONG", 0.94, 0.9, 0.9, 0.9)};
    const auto report = build_flag_report(pairs, 415, 4, alphas);
    CHECK(report.rows[0].at_alpha[0].saturated);
    CHECK(report.rows[0].at_alpha[0].threshold == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("flag summary counts any-method hits per alpha") {
    const std::int64_t n1 = 415, n2 = 1245;
    const std::vector<double> alphas{0.05, 0.01};
    std::vector<PairInput> pairs;
    pairs.push_back(pair_with("A", 0.94, 0.9, 0.9, -1.0)); // m3 flags at both levels
    pairs.push_back(pair_with("B", 0.94, 0.9, 0.9, 0.9));  // never flags
    pairs.push_back(pair_with("EDGE", 0.1, 0.12, 0.3, 0.3)); // flags at 0.01 only

    const auto counts = summarize_flags(build_flag_report(pairs, n1, n2, alphas));
    REQUIRE(counts.size() == 2);
    CHECK(counts[0].alpha == 0.05);
    CHECK(counts[0].flagged_pairs == 1);
    CHECK(counts[0].pairs == std::vector<std::string>{"A"});
    CHECK(counts[1].alpha == 0.01);
    CHECK(counts[1].flagged_pairs == 2);
    CHECK(counts[1].pairs == std::vector<std::string>{"A", "EDGE"});
}

TEST_CASE("flag CSV lays out thresholds per alpha and compact flag tokens") {
    const std::int64_t n1 = 415, n2 = 1245;
    const std::vector<double> alphas{0.05, 0.01};
    std::vector<PairInput> pairs;
    pairs.push_back(pair_with("A", 0.94, 0.9, -0.6, -1.0));
    pairs.push_back(pair_with("B", 0.94, 0.9, 0.9, 0.9));

    const auto csv = render_flag_csv(build_flag_report(pairs, n1, n2, alphas));
    CHECK(csv.rfind("pair,r,r3_m1,r3_m2,r3_m3,threshold_a05,threshold_a01,flags\n", 0) == 0);
    CHECK(csv.find("A,0.94,0.9,-0.6,-1,") != std::string::npos);
    // -0.6 and -1 sit below both boundaries: all four tokens, looser first.
    CHECK(csv.find("m2@0.05;m3@0.05;m2@0.01;m3@0.01\n") != std::string::npos);
    // The unflagged row ends with an empty flags cell.
    CHECK(csv.find("B,0.94,0.9,0.9,0.9,") != std::string::npos);
    std::size_t last_newline = csv.rfind('\n');
    std::size_t last_comma = csv.rfind(',');
    CHECK(last_comma + 1 == last_newline); // empty final cell on the B row
}

TEST_CASE("flag text report names the group sizes and flagged pairs") {
    const std::int64_t n1 = 415, n2 = 1245;
    const std::vector<double> alphas{0.05, 0.01};
    std::vector<PairInput> pairs;
    pairs.push_back(pair_with("A", 0.94, 0.9, -0.6, -1.0));
    pairs.push_back(pair_with("B", 0.94, 0.9, 0.9, 0.9));

    const auto text = render_flag_text(build_flag_report(pairs, n1, n2, alphas));
    CHECK(text.find("Hypothetical extra group: n2=1245 (respondents n1=415)") !=
          std::string::npos);
    CHECK(text.find("thr a05") != std::string::npos);
    CHECK(text.find("thr a01") != std::string::npos);
    CHECK(text.find("m2@0.05;m3@0.05;m2@0.01;m3@0.01") != std::string::npos);
    CHECK(text.find("flagged at alpha=0.05: 1 (A)") != std::string::npos);
    CHECK(text.find("flagged at alpha=0.01: 1 (A)") != std::string::npos);
    // The clean row shows a dash in the flags column.
    CHECK(text.find("  -\n") != std::string::npos);
}
