#include <gtest/gtest.h>

#include <embrmt/formulas.hpp>

using namespace embrmt;

TEST(Formulas, GaussianEndpoint) {
    for (int m = 0; m <= 12; ++m)
        for (int n = 1; n <= 4; ++n) EXPECT_EQ(nth_moment_limit(n, m, 0), ExactRatio(gaussian_moment(n)));
}

TEST(Formulas, CanonicalEndpoint) {
    for (int m = 1; m <= 12; ++m)
        for (int k = m / 2 + 1; k <= m; ++k)
            for (int n = 1; n <= 4; ++n) EXPECT_EQ(nth_moment_limit(n, m, k), ExactRatio(semicircle_moment(n)));
}

TEST(Formulas, ValuesAtFourOne) {
    EXPECT_EQ(fourth_moment_limit(4, 1), ExactRatio(11, 4));
    EXPECT_EQ(sixth_moment_limit(4, 1), ExactRatio(185, 16));
    EXPECT_EQ(eighth_moment_limit(4, 1), ExactRatio(1001, 16));
    EXPECT_EQ(fourth_moment_limit(12, 4), ExactRatio(212, 99));
}

TEST(Formulas, MultiplicitiesSumToPairings) {
    std::int64_t s4 = 0, s6 = 0, s8 = 0;
    for (const auto& t : fourth_moment_terms(5, 1)) s4 += t.multiplicity;
    for (const auto& t : sixth_moment_terms(5, 1)) s6 += t.multiplicity;
    for (const auto& t : eighth_moment_terms(5, 1)) s8 += t.multiplicity;
    EXPECT_EQ(s4, 3);
    EXPECT_EQ(s6, 15);
    EXPECT_EQ(s8, 105);
}

TEST(Formulas, DiluteLimitIsMonotoneInM) {
    for (int n = 2; n <= 4; ++n) {
        ExactRatio last = 0;
        for (int m = 2; m <= 200; ++m) {
            auto v = nth_moment_limit(n, m, 1);
            EXPECT_GT(v, last);
            last = v;
        }
        EXPECT_LT(last, ExactRatio(gaussian_moment(n)));
    }
}

TEST(Formulas, KinkAtHalfFilling) {
    for (int m = 2; m <= 12; m += 2) {
        EXPECT_EQ(fourth_moment_limit(m, m / 2), ExactRatio(2) + ExactRatio(1, binomial(m, m / 2)));
        EXPECT_EQ(fourth_moment_limit(m, m / 2 + 1), ExactRatio(2));
    }
}

TEST(Formulas, HahnVariantsDisagree) {
    auto lemma = eighth_moment_terms(4, 1, HahnVariant::lemma)[4];
    auto printed = eighth_moment_terms(4, 1, HahnVariant::printed)[4];
    EXPECT_EQ(lemma.name, "hahn");
    EXPECT_EQ(lemma.value, ExactRatio(21, 64));
    EXPECT_EQ(printed.value, ExactRatio(17, 64));
    EXPECT_EQ(hahn_sum(6, 2), 19);
}

TEST(Formulas, Regimes) {
    EXPECT_EQ(regime_of(4, 0), Regime::gaussian_endpoint);
    EXPECT_EQ(regime_of(4, 2), Regime::critical);
    EXPECT_EQ(regime_of(4, 3), Regime::canonical);
    EXPECT_THROW(nth_moment_limit(5, 4, 1), std::invalid_argument);
    EXPECT_THROW(fourth_moment_limit(3, 4), std::invalid_argument);
}

TEST(Formulas, TermsSwitchOffAtThresholds) {
    for (int m = 1; m <= 24; ++m)
        for (int k = 1; k <= m; ++k) {
            auto six = sixth_moment_terms(m, k);
            auto eight = eighth_moment_terms(m, k);
            EXPECT_EQ(six[1].value == 0, 2 * k > m);
            EXPECT_EQ(six[3].value == 0, 3 * k > m);
            EXPECT_EQ(eight[10].value == 0, 4 * k > m);
            EXPECT_EQ(eight[10].name, "box");
        }
}

TEST(Formulas, HahnTermMatchesBothSidesOfTheIdentity) {
    for (int m = 0; m <= 20; ++m)
        for (int k = 0; 2 * k <= m; ++k) {
            ExactRatio M3 = ExactRatio(binomial(m, k) * binomial(m, k) * binomial(m, k));
            ExactRatio c1 = ExactRatio(binomial(m - k, k));
            auto term = eighth_moment_terms(m, k)[4].value;
            EXPECT_EQ(term, c1 * ExactRatio(hahn_lhs(m, k)) / M3);
            EXPECT_EQ(term, c1 * ExactRatio(hahn_rhs(m, k)) / M3);
        }
}
