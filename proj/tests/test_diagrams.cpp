#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include <embrmt/diagrams.hpp>
#include <embrmt/formulas.hpp>

using namespace embrmt;

namespace {

LoopSystem system_of(const std::string& text) { return make_system(make_diagram(parse_pattern(text))); }

const std::string& pattern_named(int n2, const std::string& name) {
    for (const auto& [n, s] : reference_patterns(n2))
        if (n == name) return s;
    throw std::out_of_range(name);
}

std::map<std::string, std::vector<MomentTerm>> terms_at(std::int64_t m, std::int64_t k) {
    return {{"4", fourth_moment_terms(m, k)}, {"6", sixth_moment_terms(m, k)}, {"8", eighth_moment_terms(m, k)}};
}

}  // namespace

TEST(Patterns, PairingsReduceToTails) {
    auto nested = pairing_to_pattern({{1, 2}, {3, 4}});
    EXPECT_EQ(nested.tails(), 2);
    EXPECT_TRUE(nested.core().empty());
    auto crossed = pairing_to_pattern({{1, 3}, {2, 4}});
    EXPECT_EQ(crossed.tails(), 0);
    EXPECT_EQ(crossed.core().size(), 2u);
    auto six = pairing_to_pattern({{1, 2}, {3, 5}, {4, 6}});
    EXPECT_EQ(six.tails(), 1);
}

TEST(Patterns, ParseRejectsOddLabels) {
    EXPECT_THROW(parse_pattern("A_{abcd}"), std::invalid_argument);
    EXPECT_NO_THROW(parse_pattern("A_{ssrr}A_{ssmm}"));
    EXPECT_EQ(parse_pattern("A_{ssrr}A_{ssmm}").tails(), 2);
}

TEST(Loops, ReferenceCounts) {
    const std::map<std::string, std::size_t> eight = {{"cuboid", 18}, {"hahn", 20},  {"collapsed", 20},
                                                      {"standard-squared", 20}, {"penpen", 21}, {"pen", 21},
                                                      {"box", 24}};
    EXPECT_EQ(system_of(pattern_named(4, "standard")).loops.size(), 6u);
    EXPECT_EQ(system_of(pattern_named(6, "prism")).loops.size(), 11u);
    EXPECT_EQ(system_of(pattern_named(6, "octahedron")).loops.size(), 12u);
    EXPECT_EQ(system_of(pattern_named(6, "standard+tail")).loops.size(), 6u);
    for (const auto& [name, count] : eight) EXPECT_EQ(system_of(pattern_named(8, name)).loops.size(), count) << name;
}

TEST(Loops, EveryBondIsCovered) {
    for (int n2 : {4, 6, 8})
        for (const auto& [name, text] : reference_patterns(n2)) {
            auto s = system_of(text);
            for (std::size_t b = 0; b < s.through.size(); ++b) EXPECT_FALSE(s.through[b].empty()) << name;
        }
}

TEST(Leading, StandardDiagram) {
    auto s = system_of(pattern_named(4, "standard"));
    auto t = maximize_argument(s, 10, 4);
    EXPECT_EQ(t.max_argument, 10 + 2 * 4);
    ASSERT_EQ(t.optimal.size(), 1u);
    auto v = t.optimal.front();
    std::sort(v.begin(), v.end());
    EXPECT_EQ(v, (std::vector<std::int64_t>{0, 2, 4, 4, 4, 4}));
    EXPECT_EQ(leading_term_value(maximize_argument(s, 4, 1), 10), 75600);
    EXPECT_EQ(t.free_parameters, 0);
}

TEST(Leading, PrismHasOneFreeParameter) {
    auto s = system_of(pattern_named(6, "prism"));
    for (auto [m, k] : std::vector<std::pair<int, int>>{{6, 2}, {9, 3}, {12, 4}}) {
        auto t = maximize_argument(s, m, k);
        EXPECT_EQ(t.max_argument, m + 3 * k);
        EXPECT_EQ(t.free_parameters, 1);
        const int l = 40;
        BigCount want = multinomial(l, std::vector<std::int64_t>{k, k, k, k, m - k}) * binomial(m - k, k) * binomial(m - k, k);
        EXPECT_EQ(leading_term_value(t, l), want) << m << "," << k;
    }
}

TEST(Leading, CuboidFamilyDimension) {
    // loop-level family: three loop sizes vary independently
    EXPECT_EQ(maximize_argument(system_of(pattern_named(8, "cuboid")), 12, 3).free_parameters, 3);
}

TEST(Leading, BoxIsASingleSolution) {
    auto s = system_of(pattern_named(8, "box"));
    for (auto [m, k] : std::vector<std::pair<int, int>>{{8, 1}, {10, 2}, {13, 3}}) {
        auto t = maximize_argument(s, m, k);
        EXPECT_EQ(t.max_argument, m + 4 * k);
        std::vector<std::int64_t> parts(8, k);
        parts.push_back(m - 4 * k);
        EXPECT_EQ(leading_term_value(t, 30), multinomial(30, parts));
    }
}

TEST(Leading, OptimalSolutionsConserveBonds) {
    for (int n2 : {4, 6, 8})
        for (const auto& [name, text] : reference_patterns(n2)) {
            auto s = system_of(text);
            for (auto [m, k] : std::vector<std::pair<int, int>>{{5, 1}, {9, 3}, {11, 5}}) {
                for (const auto& v : maximize_argument(s, m, k).optimal)
                    for (std::size_t b = 0; b < s.through.size(); ++b) {
                        std::int64_t sum = 0;
                        for (int L : s.through[b]) sum += v[static_cast<std::size_t>(L)];
                        EXPECT_EQ(sum, s.bond_size(static_cast<int>(b), m, k)) << name;
                    }
            }
        }
}

TEST(Leading, CertifiedArguments) {
    auto prism = certify_argument(system_of(pattern_named(6, "prism")), 10);
    ASSERT_TRUE(prism);
    EXPECT_EQ(argument_string(prism->first, prism->second), "m+3k");
    auto chain = certify_argument(make_system(make_diagram(parse_pattern("A_{ssrr}A_{ssmm}"))), 10);
    ASSERT_TRUE(chain);
    EXPECT_EQ(argument_string(chain->first, chain->second), "0");
    EXPECT_EQ(argument_string(2, -1), "2m-k");
}

TEST(Leading, CoefficientsMatchClosedFormTerms) {
    for (std::int64_t m = 0; m <= 10; ++m)
        for (std::int64_t k = 0; k <= m; ++k)
            for (const auto& [order, terms] : terms_at(m, k)) {
                int n2 = std::stoi(order);
                for (const auto& t : terms)
                    EXPECT_EQ(limit_coefficient(system_of(pattern_named(n2, t.name)), m, k), t.value)
                        << t.name << " m=" << m << " k=" << k;
            }
}

TEST(Leading, ExactCountApproachesLeadingTerm) {
    auto s = system_of(pattern_named(4, "standard"));
    auto t = maximize_argument(s, 4, 1);
    double last = 1e9;
    for (int l : {16, 64, 256}) {
        double r = to_double(ExactRatio(exact_diagram_count(s, l, 4, 1), leading_term_value(t, l)));
        EXPECT_GE(r, 1.0);
        EXPECT_LT(r - 1.0, last);
        last = r - 1.0;
    }
    EXPECT_LT(last, 0.05);
}

TEST(Leading, SignedTraceApproachesLeadingTerm) {
    PairingPartition crossed{{1, 3}, {2, 4}};
    auto t = maximize_argument(system_of(pattern_named(4, "standard")), 4, 1);
    double last = 1e9;
    for (int l : {8, 16, 32}) {
        double r = to_double(ExactRatio(pairing_trace(crossed, l, 4, 1, 2, Statistics::fermionic, nullptr, true),
                                        leading_term_value(t, l)));
        EXPECT_LT(std::abs(r - 1.0), last) << l;
        last = std::abs(r - 1.0);
    }
    EXPECT_LT(last, 0.2);
}

TEST(Classes, MultiplicitiesByOrder) {
    auto mult = [](int n2) {
        std::vector<std::int64_t> v;
        for (const auto& c : canonical_classes(n2)) v.push_back(c.multiplicity());
        return v;
    };
    EXPECT_EQ(mult(4), (std::vector<std::int64_t>{2, 1}));
    EXPECT_EQ(mult(6), (std::vector<std::int64_t>{5, 6, 3, 1}));
    EXPECT_EQ(mult(8), (std::vector<std::int64_t>{14, 28, 24, 4, 2, 8, 4, 8, 4, 8, 1}));
    for (int n2 : {2, 4, 6, 8, 10}) {
        std::int64_t total = 0;
        for (auto x : mult(n2)) total += x;
        EXPECT_EQ(BigCount(total), double_factorial_odd(n2 / 2)) << n2;
    }
}

TEST(Classes, ReferenceNamesInOrder) {
    for (int n2 : {4, 6, 8}) {
        auto classes = canonical_classes(n2);
        const auto& ref = reference_patterns(n2);
        ASSERT_EQ(classes.size(), ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_EQ(classes[i].name, ref[i].first);
    }
}

TEST(Classes, DihedralOrbitSizes) {
    auto sizes = [](int n2) {
        std::vector<std::size_t> v;
        for (const auto& o : dihedral_orbits(n2)) v.push_back(o.size());
        return v;
    };
    EXPECT_EQ(sizes(4), (std::vector<std::size_t>{2, 1}));
    EXPECT_EQ(sizes(6), (std::vector<std::size_t>{2, 3, 6, 3, 1}));
    EXPECT_EQ(sizes(8).size(), 17u);
}

TEST(Classes, AssembledMomentsMatchClosedForms) {
    for (int n = 1; n <= 4; ++n)
        for (std::int64_t m = 0; m <= 12; ++m)
            for (std::int64_t k = 0; k <= m; ++k)
                EXPECT_EQ(assemble_moment(n, m, k), nth_moment_limit(n, m, k)) << n << " " << m << " " << k;
}

TEST(Classes, EndpointsOfTenthMoment) {
    EXPECT_EQ(assemble_moment(5, 6, 0), ExactRatio(945));
    EXPECT_EQ(assemble_moment(5, 6, 6), ExactRatio(42));
    EXPECT_EQ(assemble_moment(5, 5, 3), ExactRatio(42));
}

TEST(Classes, HahnPatternFollowsTheLemmaSum) {
    auto s = system_of(pattern_named(8, "hahn"));
    bool differs = false;
    for (std::int64_t m = 2; m <= 10; ++m)
        for (std::int64_t k = 1; 2 * k <= m; ++k) {
            auto lemma = eighth_moment_terms(m, k, HahnVariant::lemma)[4].value;
            auto printed = eighth_moment_terms(m, k, HahnVariant::printed)[4].value;
            EXPECT_EQ(limit_coefficient(s, m, k), lemma);
            differs = differs || lemma != printed;
        }
    EXPECT_TRUE(differs);
}

TEST(Classes, CanonicalKeyIgnoresNodeNumbering) {
    std::mt19937 rng(7);
    for (int n2 : {6, 8, 10})
        for (const auto& p : enumerate_pairings(n2)) {
            auto d = make_diagram(pairing_to_pattern(p));
            std::vector<int> perm(d.nodes());
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            std::vector<AFactor> moved;
            for (auto f : d.factors) {
                for (auto& x : f) x = perm[static_cast<std::size_t>(x)] + 1;
                moved.push_back(f);
            }
            std::shuffle(moved.begin(), moved.end(), rng);
            EXPECT_EQ(canonical_key(make_diagram(moved, d.tails)), canonical_key(d));
        }
}

TEST(Classes, CanonicalPointIsCatalan) {
    for (int n = 1; n <= 5; ++n)
        for (std::int64_t m = 1; m <= 8; ++m) EXPECT_EQ(assemble_moment(n, m, m), ExactRatio(catalan(n)));
}

TEST(Leading, PrismTraceApproachesLeadingTerm) {
    const DiagramClass* prism = nullptr;
    auto classes = canonical_classes(6);
    for (const auto& c : classes)
        if (c.name == "prism") prism = &c;
    ASSERT_NE(prism, nullptr);
    const auto& p = prism->members.front();
    auto t = maximize_argument(prism->system, 3, 1);
    double last = 1e9;
    for (int l : {8, 16, 32}) {
        double r = to_double(ExactRatio(pairing_trace(p, l, 3, 1, 2, Statistics::fermionic, nullptr, true),
                                        leading_term_value(t, l)));
        EXPECT_LT(std::abs(r - 1.0), last) << l;
        last = std::abs(r - 1.0);
    }
    EXPECT_LT(last, 0.3);
}

TEST(Leading, GrowthFollowsTheArgument) {
    // doubling l multiplies the leading term by about 2^arg
    for (const auto& [name, text] : reference_patterns(6)) {
        auto t = maximize_argument(system_of(text), 4, 1);
        double r = to_double(ExactRatio(leading_term_value(t, 4096), leading_term_value(t, 2048)));
        EXPECT_NEAR(r / std::pow(2.0, static_cast<double>(t.max_argument)), 1.0, 0.02) << name;
    }
}
