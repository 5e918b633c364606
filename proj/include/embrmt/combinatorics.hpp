#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace embrmt {

using BigCount = boost::multiprecision::cpp_int;
using ExactRatio = boost::multiprecision::cpp_rational;

inline BigCount ratio_numerator(const ExactRatio& r) {
    return boost::multiprecision::numerator(r);
}

inline BigCount ratio_denominator(const ExactRatio& r) {
    return boost::multiprecision::denominator(r);
}

inline double to_double(const ExactRatio& r) {
    return r.convert_to<double>();
}

inline std::string to_string(const BigCount& v) { return v.str(); }

inline std::string to_string(const ExactRatio& r) {
    if (ratio_denominator(r) == 1) return ratio_numerator(r).str();
    return ratio_numerator(r).str() + "/" + ratio_denominator(r).str();
}

/// C(n, k); zero outside 0 <= k <= n.
inline BigCount binomial(std::int64_t n, std::int64_t k) {
    if (n < 0 || k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    BigCount r = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

inline BigCount factorial(std::int64_t n) {
    if (n < 0) throw std::invalid_argument("factorial of a negative number");
    BigCount r = 1;
    for (std::int64_t i = 2; i <= n; ++i) r *= i;
    return r;
}

/// n! / (prod parts_i! * (n - sum parts)!), the remainder acting as an implicit last part.
inline BigCount multinomial(std::int64_t n, const std::vector<std::int64_t>& parts) {
    if (n < 0) throw std::invalid_argument("multinomial: negative total");
    std::int64_t rest = n;
    BigCount r = 1;
    for (auto p : parts) {
        if (p < 0) throw std::invalid_argument("multinomial: negative part");
        if (p > rest) throw std::invalid_argument("multinomial: parts exceed total");
        r *= binomial(rest, p);
        rest -= p;
    }
    return r;
}

/// (2n-1)!!, the number of perfect matchings of 2n items.
inline BigCount double_factorial_odd(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("double_factorial_odd: n must be positive");
    BigCount r = 1;
    for (std::int64_t i = 3; i <= 2 * n - 1; i += 2) r *= i;
    return r;
}

inline BigCount catalan(std::int64_t n) {
    if (n < 0) throw std::invalid_argument("catalan: negative index");
    return binomial(2 * n, n) / (n + 1);
}

/// One factor C(l - offset, lower)^exponent of a product symbolic in l.
struct BinomialFactor {
    std::int64_t offset = 0;
    std::int64_t lower = 0;
    std::int64_t exponent = 1;
};

struct BinomialProduct {
    std::vector<BinomialFactor> factors;

    BinomialProduct& times(std::int64_t offset, std::int64_t lower, std::int64_t exponent = 1) {
        if (lower < 0) throw std::invalid_argument("BinomialProduct: negative lower index");
        if (exponent < 1) throw std::invalid_argument("BinomialProduct: exponent must be positive");
        factors.push_back({offset, lower, exponent});
        return *this;
    }

    BigCount evaluate(std::int64_t l) const {
        BigCount r = 1;
        for (const auto& f : factors) {
            BigCount c = binomial(l - f.offset, f.lower);
            for (std::int64_t e = 0; e < f.exponent; ++e) r *= c;
        }
        return r;
    }
};

/// Power of l carried by the product as l grows: sum of exponent * lower.
inline std::int64_t argument_of(const BinomialProduct& p) {
    std::int64_t a = 0;
    for (const auto& f : p.factors) a += f.exponent * f.lower;
    return a;
}

inline void require_hahn_domain(std::int64_t m, std::int64_t k) {
    if (k < 0 || m < 0 || 2 * k > m) throw std::domain_error("Hahn sums need 0 <= 2k <= m");
}

/// sum_a C(m-k-a, k) C(k, a) C(m-2k, a)
inline BigCount hahn_lhs(std::int64_t m, std::int64_t k) {
    require_hahn_domain(m, k);
    BigCount s = 0;
    for (std::int64_t a = 0; a <= k; ++a)
        s += binomial(m - k - a, k) * binomial(k, a) * binomial(m - 2 * k, a);
    return s;
}

/// C(m-k, k) sum_p C(k, p)^2 C(m-2k, k-p) / C(m-k, p), summed exactly and required to be integral.
inline BigCount hahn_rhs(std::int64_t m, std::int64_t k) {
    require_hahn_domain(m, k);
    ExactRatio s = 0;
    for (std::int64_t p = 0; p <= k; ++p) {
        BigCount c = binomial(k, p);
        s += ExactRatio(c * c * binomial(m - 2 * k, k - p), binomial(m - k, p));
    }
    s *= ExactRatio(binomial(m - k, k));
    if (ratio_denominator(s) != 1) throw std::logic_error("hahn_rhs: non-integral result");
    return ratio_numerator(s);
}

}  // namespace embrmt
