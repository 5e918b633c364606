#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include <embrmt/spectral.hpp>
#include <embrmt/wick.hpp>

using namespace embrmt;

namespace {

// E tr H^{n2} from the covariance tensor E[H_ab H_cd], summed over explicit index
// assignments. Independent of the walk code.
double dense_trace(int l, int m, int k, int n2, int beta, Statistics st) {
    Basis b(l, m, st);
    const int N = static_cast<int>(b.size());
    auto tuples = all_tuples(l, k, st);
    const int K = static_cast<int>(tuples.size());
    std::vector<std::vector<double>> M(static_cast<std::size_t>(K * K), std::vector<double>(static_cast<std::size_t>(N * N), 0.0));
    for (int j = 0; j < K; ++j)
        for (int i = 0; i < K; ++i)
            for (int a = 0; a < N; ++a)
                for (int c = 0; c < N; ++c) {
                    auto amp = monomial_element(b[static_cast<std::size_t>(a)], tuples[static_cast<std::size_t>(j)],
                                                tuples[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(c)]);
                    M[static_cast<std::size_t>(j * K + i)][static_cast<std::size_t>(a * N + c)] = amp.killed() ? 0.0 : amp.value();
                }
    std::vector<double> C(static_cast<std::size_t>(N) * N * N * N, 0.0);
    auto at = [&](int a, int bb, int c, int d) -> double& {
        return C[((static_cast<std::size_t>(a) * N + bb) * N + c) * N + d];
    };
    for (int j = 0; j < K; ++j)
        for (int i = 0; i < K; ++i) {
            const auto& X = M[static_cast<std::size_t>(j * K + i)];
            const auto& Y = M[static_cast<std::size_t>(i * K + j)];
            const auto& Z = M[static_cast<std::size_t>(j * K + i)];
            for (int a = 0; a < N; ++a)
                for (int bb = 0; bb < N; ++bb) {
                    double x = X[static_cast<std::size_t>(a * N + bb)];
                    if (x == 0.0) continue;
                    for (int c = 0; c < N; ++c)
                        for (int d = 0; d < N; ++d) {
                            at(a, bb, c, d) += x * Y[static_cast<std::size_t>(c * N + d)];
                            if (beta == 1) at(a, bb, c, d) += x * Z[static_cast<std::size_t>(c * N + d)];
                        }
                }
        }
    double total = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(n2), 0);
    auto pairings = enumerate_pairings(n2);
    while (true) {
        for (const auto& p : pairings) {
            double v = 1.0;
            for (auto [x, y] : p) {
                int ax = idx[static_cast<std::size_t>(x - 1)], ax1 = idx[static_cast<std::size_t>(x % n2)];
                int ay = idx[static_cast<std::size_t>(y - 1)], ay1 = idx[static_cast<std::size_t>(y % n2)];
                v *= at(ax, ax1, ay, ay1);
                if (v == 0.0) break;
            }
            total += v;
        }
        int pos = 0;
        while (pos < n2 && ++idx[static_cast<std::size_t>(pos)] == N) idx[static_cast<std::size_t>(pos++)] = 0;
        if (pos == n2) break;
    }
    return total;
}

}  // namespace

TEST(Pairings, CountsAndValidity) {
    EXPECT_EQ(enumerate_pairings(4).size(), 3u);
    EXPECT_EQ(enumerate_pairings(6).size(), 15u);
    EXPECT_EQ(enumerate_pairings(8).size(), 105u);
    EXPECT_EQ(enumerate_pairings(12).size(), 10395u);
    for (const auto& p : enumerate_pairings(8)) {
        std::set<int> seen;
        for (auto [a, b] : p) {
            EXPECT_LT(a, b);
            seen.insert(a);
            seen.insert(b);
        }
        EXPECT_EQ(seen.size(), 8u);
    }
    EXPECT_THROW(enumerate_pairings(5), std::invalid_argument);
    EXPECT_THROW(enumerate_pairings(14), std::invalid_argument);
}

TEST(Pairings, NoncrossingCountIsCatalan) {
    for (int n = 0; n <= 10; ++n) EXPECT_EQ(noncrossing_pairing_count(n), catalan(n));
    std::int64_t small = 0;
    for (const auto& p : enumerate_pairings(10)) small += is_noncrossing(p);
    EXPECT_EQ(BigCount(small), noncrossing_pairing_count(5));
}

TEST(ExactTrace, SecondTraceExamples) {
    EXPECT_EQ(exact_even_trace(4, 2, 1, 2), 36);
    for (int l = 1; l <= 9; ++l)
        for (int m = 0; m <= l; ++m)
            for (int k = 0; k <= m; ++k)
                EXPECT_EQ(exact_even_trace(l, m, k, 2), binomial(l, m) * lambda0(m, k, l)) << l << m << k;
}

TEST(ExactTrace, CanonicalPointPolynomials) {
    EXPECT_EQ(exact_even_trace(2, 1, 1, 4), 18);
    for (int l = 1; l <= 8; ++l)
        for (int m = 1; m <= l; ++m) {
            BigCount N = binomial(l, m);
            if (N > 20) continue;
            for (int n2 : {2, 4, 6})
                EXPECT_EQ(exact_even_trace(l, m, m, n2), evaluate_polynomial(km_trace_polynomial(n2), N));
        }
}

TEST(ExactTrace, MatchesDenseCovarianceOracle) {
    struct Case {
        int l, m, k, n2, beta;
        Statistics st;
    };
    const Case cases[] = {{4, 2, 1, 4, 2, Statistics::fermionic}, {5, 2, 1, 4, 2, Statistics::fermionic},
                          {4, 2, 1, 6, 2, Statistics::fermionic}, {5, 3, 2, 4, 2, Statistics::fermionic},
                          {4, 2, 1, 4, 1, Statistics::fermionic}, {4, 2, 2, 6, 1, Statistics::fermionic},
                          {3, 2, 1, 4, 2, Statistics::bosonic},   {3, 2, 1, 6, 2, Statistics::bosonic},
                          {3, 2, 1, 4, 1, Statistics::bosonic},   {2, 3, 2, 4, 2, Statistics::bosonic}};
    for (const auto& c : cases) {
        double want = dense_trace(c.l, c.m, c.k, c.n2, c.beta, c.st);
        BigCount got = exact_even_trace(c.l, c.m, c.k, c.n2, c.beta, c.st);
        EXPECT_NEAR(to_double(ExactRatio(got)), want, 1e-9 * std::abs(want))
            << c.l << " " << c.m << " " << c.k << " " << c.n2 << " beta " << c.beta << " " << to_string(c.st);
    }
}

TEST(ExactTrace, OrbitRepresentativesAreExact) {
    for (auto st : {Statistics::fermionic, Statistics::bosonic})
        for (int beta : {1, 2})
            for (int n2 : {2, 4, 6})
                for (auto [l, m, k] : std::vector<std::array<int, 3>>{{4, 2, 1}, {5, 2, 1}, {4, 3, 2}, {3, 3, 1}})
                    EXPECT_EQ(exact_even_trace(l, m, k, n2, beta, st, nullptr, true), exact_even_trace(l, m, k, n2, beta, st))
                        << to_string(st) << beta << n2 << l << m << k;
}

TEST(ExactTrace, FrozenFourthMoments) {
    // computed once by the full walk and frozen
    EXPECT_EQ(exact_moment(8, 4, 1, 4), ExactRatio(66, 25));
}

TEST(ExactTrace, StandardDiagramSplit) {
    // fourth trace minus the two tail products is the single crossed pairing
    for (auto [l, m, k] : std::vector<std::array<int, 3>>{{6, 2, 1}, {7, 3, 1}, {8, 3, 2}}) {
        BigCount N = binomial(l, m), L0 = lambda0(m, k, l);
        PairingPartition crossed{{1, 3}, {2, 4}};
        EXPECT_EQ(exact_even_trace(l, m, k, 4) - 2 * N * L0 * L0, pairing_trace(crossed, l, m, k));
    }
}

TEST(ExactTrace, FourthMomentGapShrinks) {
    ExactRatio limit = ExactRatio(11, 4), last = 1;
    for (int l : {8, 16, 24, 32}) {
        ExactRatio gap = limit - exact_moment(l, 4, 1, 4, 2, Statistics::fermionic, nullptr, true);
        EXPECT_GT(gap, 0);
        EXPECT_LT(gap, last);
        last = gap;
    }
}

TEST(ExactTrace, BudgetIsEnforced) {
    OpBudget budget(1000);
    EXPECT_THROW(exact_even_trace(8, 4, 1, 4, 2, Statistics::fermionic, &budget), BudgetExceeded);
    OpBudget roomy;
    exact_even_trace(4, 2, 1, 4, 2, Statistics::fermionic, &roomy);
    EXPECT_GT(roomy.used(), 0u);
}

TEST(ExactTrace, RejectsBadArguments) {
    EXPECT_THROW(exact_even_trace(4, 2, 3, 2), std::invalid_argument);
    EXPECT_THROW(exact_even_trace(2, 3, 1, 2), std::invalid_argument);
    EXPECT_THROW(exact_even_trace(4, 2, 1, 3), std::invalid_argument);
    EXPECT_THROW(exact_even_trace(4, 2, 1, 2, 4), std::invalid_argument);
}

TEST(Cycles, FourSlotDecompositions) {
    EXPECT_EQ(pairing_to_cycles({{1, 2}, {3, 4}}), (CycleDecomposition{{1, 3}, {2}, {4}}));
    EXPECT_EQ(pairing_to_cycles({{1, 4}, {2, 3}}), (CycleDecomposition{{1}, {2, 4}, {3}}));
    EXPECT_EQ(pairing_to_cycles({{1, 3}, {2, 4}}), (CycleDecomposition{{1, 2, 3, 4}}));
}

TEST(Cycles, OrbitSizesCoverSlots) {
    for (int n2 : {2, 4, 6, 8, 10})
        for (const auto& p : enumerate_pairings(n2)) {
            int total = 0;
            for (const auto& o : pairing_to_cycles(p)) total += static_cast<int>(o.size());
            EXPECT_EQ(total, n2);
        }
}

TEST(Cycles, TracePolynomials) {
    EXPECT_EQ(km_trace_polynomial(4), (std::map<int, BigCount>{{1, 1}, {3, 2}}));
    EXPECT_EQ(km_trace_polynomial(6), (std::map<int, BigCount>{{2, 10}, {4, 5}}));
    auto p8 = km_trace_polynomial(8);
    EXPECT_EQ(p8.rbegin()->first, 5);
    EXPECT_EQ(p8.rbegin()->second, 14);
    BigCount total = 0;
    for (auto& [e, c] : p8) total += c;
    EXPECT_EQ(total, 105);
}

TEST(Cycles, LeadingOrbitCountMeansNoncrossing) {
    for (int n2 : {4, 6, 8, 10})
        for (const auto& p : enumerate_pairings(n2))
            EXPECT_EQ(pairing_to_cycles(p).size() == static_cast<std::size_t>(n2 / 2 + 1), is_noncrossing(p));
}

TEST(Dyck, TranslationsOfFourSlotCycles) {
    EXPECT_EQ(cycle_to_dyck({{1, 3}, {2}, {4}}), "XXYYXY");
    EXPECT_EQ(cycle_to_dyck({{2, 4}, {1}, {3}}), "XYXXYY");
    EXPECT_THROW(cycle_to_dyck({{1, 2, 3, 4}}), std::domain_error);
}

TEST(Dyck, NoncrossingPairingsGiveDistinctWords) {
    for (int n = 1; n <= 5; ++n) {
        std::set<DyckWord> words;
        for (const auto& p : enumerate_pairings(2 * n)) {
            if (!is_noncrossing(p)) continue;
            auto w = cycle_to_dyck(pairing_to_cycles(p));
            EXPECT_TRUE(is_dyck(w));
            EXPECT_EQ(w.size(), static_cast<std::size_t>(2 * n + 2));
            words.insert(w);
        }
        EXPECT_EQ(BigCount(words.size()), catalan(n));
    }
}

TEST(Dyck, EnumerationIsCatalan) {
    EXPECT_EQ(dyck_words(1), (std::vector<DyckWord>{"XY"}));
    EXPECT_EQ(dyck_words(3), (std::vector<DyckWord>{"XXXYYY", "XXYXYY", "XXYYXY", "XYXXYY", "XYXYXY"}));
    for (int n = 0; n <= 12; ++n) EXPECT_EQ(BigCount(dyck_words(n).size()), catalan(n));
    EXPECT_EQ(dyck_words(10).size(), 16796u);
    for (const auto& w : dyck_words(6)) EXPECT_TRUE(is_dyck(w));
}
