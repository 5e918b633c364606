#pragma once

// Closed-form l -> infinity limits of the normalized eGUE moments.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "combinatorics.hpp"

namespace embrmt {

enum class Regime { gaussian_endpoint, critical, canonical };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::gaussian_endpoint: return "gaussian endpoint";
        case Regime::critical: return "critical";
        case Regime::canonical: return "canonical";
    }
    return "";
}

inline Regime regime_of(std::int64_t m, std::int64_t k) {
    if (k == 0) return Regime::gaussian_endpoint;
    return 2 * k > m ? Regime::canonical : Regime::critical;
}

/// How the Hahn-type eighth-moment summand is normalized.
enum class HahnVariant {
    lemma,   ///< prefactor C(m-k,k) / C(m,k)^3 in front of the finite sum
    printed  ///< prefactor C(m-k-a,k) / C(m,k)^3 moved inside the sum over a
};

/// One diagram class of a limit moment: multiplicity times a per-diagram value.
struct MomentTerm {
    std::string name;
    std::int64_t multiplicity;
    ExactRatio value;
};

struct MomentFormulaResult {
    int order;
    ExactRatio value;
    Regime regime;
};

namespace detail {

inline void check_mk(std::int64_t m, std::int64_t k) {
    if (m < 0 || k < 0 || k > m) throw std::invalid_argument("need 0 <= k <= m");
}

inline ExactRatio ratio(const BigCount& a, const BigCount& b) { return ExactRatio(a, b); }

}  // namespace detail

inline BigCount hahn_sum(std::int64_t m, std::int64_t k) {
    BigCount s = 0;
    for (std::int64_t a = 0; a <= k; ++a)
        s += binomial(m - k - a, k) * binomial(m - 2 * k, a) * binomial(k, a);
    return s;
}

inline std::vector<MomentTerm> fourth_moment_terms(std::int64_t m, std::int64_t k) {
    detail::check_mk(m, k);
    BigCount M = binomial(m, k), c1 = binomial(m - k, k);
    return {{"chain", 2, 1}, {"standard", 1, detail::ratio(c1, M)}};
}

inline std::vector<MomentTerm> sixth_moment_terms(std::int64_t m, std::int64_t k) {
    detail::check_mk(m, k);
    BigCount M = binomial(m, k), c1 = binomial(m - k, k), c2 = binomial(m - 2 * k, k);
    return {{"chain", 5, 1},
            {"standard+tail", 6, detail::ratio(c1, M)},
            {"prism", 3, detail::ratio(c1 * c1, M * M)},
            {"octahedron", 1, detail::ratio(c1 * c2, M * M)}};
}

inline std::vector<MomentTerm> eighth_moment_terms(std::int64_t m, std::int64_t k,
                                                   HahnVariant hv = HahnVariant::lemma) {
    detail::check_mk(m, k);
    BigCount M = binomial(m, k), c1 = binomial(m - k, k), c2 = binomial(m - 2 * k, k),
             c3 = binomial(m - 3 * k, k);
    BigCount M2 = M * M, M3 = M2 * M;
    ExactRatio hahn;
    if (hv == HahnVariant::lemma) {
        hahn = detail::ratio(c1 * hahn_sum(m, k), M3);
    } else {
        BigCount s = 0;
        for (std::int64_t a = 0; a <= k; ++a) {
            BigCount b = binomial(m - k - a, k);
            s += b * b * binomial(m - 2 * k, a) * binomial(k, a);
        }
        hahn = detail::ratio(s, M3);
    }
    return {{"chain", 14, 1},
            {"standard+2tails", 28, detail::ratio(c1, M)},
            {"prism+tail", 24, detail::ratio(c1 * c1, M2)},
            {"cuboid", 4, detail::ratio(c1 * c1 * c1, M3)},
            {"hahn", 2, hahn},
            {"collapsed", 8, detail::ratio(c1 * c1 * c1, M3)},
            {"standard-squared", 4, detail::ratio(c1 * c1, M2)},
            {"octahedron+tail", 8, detail::ratio(c1 * c2, M2)},
            {"penpen", 4, detail::ratio(c1 * c2 * c2, M3)},
            {"pen", 8, detail::ratio(c1 * c1 * c2, M3)},
            {"box", 1, detail::ratio(c1 * c2 * c3, M3)}};
}

inline ExactRatio sum_terms(const std::vector<MomentTerm>& terms) {
    ExactRatio s = 0;
    for (const auto& t : terms) s += ExactRatio(t.multiplicity) * t.value;
    return s;
}

/// kappa = 2 + C(m-k,k)/C(m,k)
inline ExactRatio fourth_moment_limit(std::int64_t m, std::int64_t k) { return sum_terms(fourth_moment_terms(m, k)); }

inline ExactRatio sixth_moment_limit(std::int64_t m, std::int64_t k) { return sum_terms(sixth_moment_terms(m, k)); }

inline ExactRatio eighth_moment_limit(std::int64_t m, std::int64_t k, HahnVariant hv = HahnVariant::lemma) {
    return sum_terms(eighth_moment_terms(m, k, hv));
}

/// Limit of the normalized 2n-th moment for n in {1, 2, 3, 4}.
inline ExactRatio nth_moment_limit(int n, std::int64_t m, std::int64_t k, HahnVariant hv = HahnVariant::lemma) {
    detail::check_mk(m, k);
    switch (n) {
        case 1: return 1;
        case 2: return fourth_moment_limit(m, k);
        case 3: return sixth_moment_limit(m, k);
        case 4: return eighth_moment_limit(m, k, hv);
        default: throw std::invalid_argument("closed forms exist for n <= 4 only");
    }
}

inline MomentFormulaResult moment_formula(int n, std::int64_t m, std::int64_t k) {
    return {2 * n, nth_moment_limit(n, m, k), regime_of(m, k)};
}

inline BigCount gaussian_moment(std::int64_t n) { return double_factorial_odd(n); }

inline BigCount semicircle_moment(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("semicircle_moment: n must be positive");
    return catalan(n);
}

}  // namespace embrmt
