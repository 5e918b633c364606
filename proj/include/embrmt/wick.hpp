#pragma once

// Exact ensemble-averaged traces by Wick pairing, and the k = m cycle / Dyck calculus.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "combinatorics.hpp"
#include "fock.hpp"

namespace embrmt {

class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded() : std::runtime_error("operation budget exceeded") {}
};

/// Deterministic work cap: every elementary walk step costs one unit.
class OpBudget {
public:
    static constexpr std::uint64_t unlimited = ~std::uint64_t{0};

    explicit OpBudget(std::uint64_t limit = unlimited) : limit_(limit) {}

    void charge(std::uint64_t n = 1) {
        used_ += n;
        if (used_ > limit_) throw BudgetExceeded();
    }
    std::uint64_t used() const { return used_; }
    std::uint64_t limit() const { return limit_; }

private:
    std::uint64_t limit_;
    std::uint64_t used_ = 0;
};

// ---------------------------------------------------------------------------
// Pairings
// ---------------------------------------------------------------------------

/// Perfect matching of trace slots 1..2n, stored as pairs (a, b) with a < b, sorted by a.
using PairingPartition = std::vector<std::pair<int, int>>;

inline constexpr int max_pairing_slots = 12;

inline std::vector<int> partner_table(const PairingPartition& p) {
    std::vector<int> s(2 * p.size() + 1, 0);
    for (auto [a, b] : p) {
        s[static_cast<std::size_t>(a)] = b;
        s[static_cast<std::size_t>(b)] = a;
    }
    return s;
}

namespace detail {

inline void pairings_rec(std::vector<int>& free, PairingPartition& cur, std::vector<PairingPartition>& out) {
    if (free.empty()) {
        out.push_back(cur);
        return;
    }
    int a = free.front();
    for (std::size_t t = 1; t < free.size(); ++t) {
        int b = free[t];
        std::vector<int> rest;
        for (std::size_t u = 1; u < free.size(); ++u)
            if (u != t) rest.push_back(free[u]);
        cur.emplace_back(a, b);
        pairings_rec(rest, cur, out);
        cur.pop_back();
    }
}

}  // namespace detail

inline std::vector<PairingPartition> enumerate_pairings(int n2) {
    if (n2 < 0 || n2 % 2) throw std::invalid_argument("pairings need an even slot count");
    if (n2 > max_pairing_slots) throw std::invalid_argument("slot count above the pairing guard");
    std::vector<int> free(static_cast<std::size_t>(n2));
    std::iota(free.begin(), free.end(), 1);
    std::vector<PairingPartition> out;
    PairingPartition cur;
    detail::pairings_rec(free, cur, out);
    return out;
}

inline bool chords_cross(std::pair<int, int> u, std::pair<int, int> v) {
    auto [a, b] = u;
    auto [c, d] = v;
    return (a < c && c < b && b < d) || (c < a && a < d && d < b);
}

inline bool is_noncrossing(const PairingPartition& p) {
    for (std::size_t x = 0; x < p.size(); ++x)
        for (std::size_t y = x + 1; y < p.size(); ++y)
            if (chords_cross(p[x], p[y])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Walk policies
// ---------------------------------------------------------------------------

namespace detail {

/// Fermionic states and tuples as bit masks (bit x-1 for level x).
struct FermionWalk {
    int l, m, k;
    using State = std::uint64_t;
    using Tuple = std::uint64_t;
    using Weight = int;

    static std::uint64_t below(int bit) { return (std::uint64_t{1} << bit) - 1; }

    /// a+_J a_I on s; returns 0 weight when killed.
    static int apply(State s, Tuple J, Tuple I, State& out) {
        if ((s & I) != I) return 0;
        int sign = 0;
        State t = s;
        for (Tuple r = I; r; r &= r - 1) {
            int b = std::countr_zero(r);
            sign += std::popcount(t & below(b));
            t &= ~(std::uint64_t{1} << b);
        }
        if (t & J) return 0;
        for (Tuple r = J; r;) {
            int b = 63 - std::countl_zero(r);
            sign += std::popcount(t & below(b));
            t |= std::uint64_t{1} << b;
            r &= ~(std::uint64_t{1} << b);
        }
        out = t;
        return (sign & 1) ? -1 : 1;
    }

    template <class F>
    static void for_each_subset(std::uint64_t pool, int k, F&& f) {
        int bits[64];
        int n = 0;
        for (std::uint64_t r = pool; r; r &= r - 1) bits[n++] = std::countr_zero(r);
        if (k > n) return;
        int idx[64];
        for (int i = 0; i < k; ++i) idx[i] = i;
        while (true) {
            std::uint64_t s = 0;
            for (int i = 0; i < k; ++i) s |= std::uint64_t{1} << bits[idx[i]];
            f(s);
            int i = k - 1;
            while (i >= 0 && idx[i] == n - k + i) --i;
            if (i < 0) return;
            ++idx[i];
            for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }

    template <class F>
    void for_each_free(State s, F&& f) const {
        const std::uint64_t full = l == 64 ? ~std::uint64_t{0} : below(l);
        for_each_subset(s, k, [&](Tuple I) {
            for_each_subset((full & ~s) | I, k, [&](Tuple J) {
                State t;
                int w = apply(s, J, I, t);
                if (w) f(J, I, t, w);
            });
        });
    }

    static Weight one() { return 1; }
    static Weight mul(Weight a, Weight b) { return a * b; }
    static BigCount value(Weight w) { return w; }
};

/// Bosonic states as occupation arrays; weights are squared amplitudes.
struct BosonWalk {
    int l, m, k;
    struct State {
        std::uint8_t n[max_levels];
        bool operator==(const State& o) const { return std::equal(n, n + 64, o.n); }
    };
    struct Tuple {
        std::uint8_t lv[16];
        int size = 0;
        bool operator==(const Tuple& o) const { return size == o.size && std::equal(lv, lv + size, o.lv); }
    };
    using Weight = unsigned __int128;

    int apply_sq(const State& s, const Tuple& J, const Tuple& I, State& out, Weight& w) const {
        out = s;
        w = 1;
        for (int x = 0; x < I.size; ++x) {
            auto& c = out.n[I.lv[x]];
            if (!c) return 0;
            w *= c;
            --c;
        }
        for (int x = J.size - 1; x >= 0; --x) {
            auto& c = out.n[J.lv[x]];
            ++c;
            w *= c;
        }
        return 1;
    }

    template <class F>
    void multisets(const std::vector<int>& pool, bool distinct, F&& f) const {
        Tuple cur;
        cur.size = k;
        rec(pool, distinct, 0, 0, cur, f);
    }

    template <class F>
    void rec(const std::vector<int>& pool, bool distinct, std::size_t start, int depth, Tuple& cur, F& f) const {
        if (depth == k) {
            f(cur);
            return;
        }
        for (std::size_t p = start; p < pool.size(); ++p) {
            if (distinct && p > start && pool[p] == pool[p - 1]) continue;
            cur.lv[depth] = static_cast<std::uint8_t>(pool[p]);
            rec(pool, distinct, p + 1, depth + 1, cur, f);
        }
    }

    template <class F>
    void for_each_free(const State& s, F&& f) const {
        std::vector<int> occ, any;
        for (int x = 0; x < l; ++x) {
            for (int c = 0; c < s.n[x]; ++c) occ.push_back(x);
            for (int c = 0; c < k; ++c) any.push_back(x);
        }
        multisets(occ, true, [&](const Tuple& I) {
            multisets(any, true, [&](const Tuple& J) {
                State t;
                Weight w;
                if (apply_sq(s, J, I, t, w)) f(J, I, t, w);
            });
        });
    }

    int apply(const State& s, const Tuple& J, const Tuple& I, State& out, Weight& w) const {
        return apply_sq(s, J, I, out, w);
    }

    static Weight one() { return 1; }
    static Weight mul(Weight a, Weight b) {
        Weight r;
        if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("bosonic walk weight overflow");
        return r;
    }
    /// The product of amplitudes along a closed walk is the square root of an integer square.
    static BigCount value(Weight w) {
        BigCount v = 0;
        for (int sh = 120; sh >= 0; sh -= 8) v = (v << 8) + static_cast<unsigned>((w >> sh) & 0xff);
        BigCount r = boost::multiprecision::sqrt(v);
        if (r * r != v) throw std::logic_error("closed bosonic walk with non-square weight");
        return r;
    }
};

template <class Walk>
struct WalkRunner {
    const Walk& W;
    const std::vector<int>& partner;  // 1-based slots
    int n2;
    int beta;
    OpBudget& budget;
    typename Walk::State start;
    std::vector<typename Walk::Tuple> J, I;
    std::int64_t fermion_total = 0;
    BigCount total = 0;

    void add(typename Walk::Weight w) {
        if constexpr (std::is_same_v<Walk, FermionWalk>) {
            fermion_total += w;
        } else {
            total += Walk::value(w);
        }
    }

    // Slots are consumed right to left: H_{n2} acts first on |start>.
    void step(int x, const typename Walk::State& s, typename Walk::Weight w) {
        if (x == 0) {
            if (s == start) add(w);
            return;
        }
        int y = partner[static_cast<std::size_t>(x)];
        auto ux = static_cast<std::size_t>(x);
        auto uy = static_cast<std::size_t>(y);
        if (y < x) {
            W.for_each_free(s, [&](const auto& j, const auto& i, const auto& t, auto a) {
                budget.charge();
                J[ux] = j;
                I[ux] = i;
                step(x - 1, t, Walk::mul(w, a));
            });
            return;
        }
        typename Walk::State t;
        budget.charge();
        if constexpr (std::is_same_v<Walk, FermionWalk>) {
            int a = Walk::apply(s, I[uy], J[uy], t);
            if (a) step(x - 1, t, Walk::mul(w, a));
            if (beta == 1) {
                a = Walk::apply(s, J[uy], I[uy], t);
                if (a) step(x - 1, t, Walk::mul(w, a));
            }
        } else {
            typename Walk::Weight a;
            if (W.apply(s, I[uy], J[uy], t, a)) step(x - 1, t, Walk::mul(w, a));
            if (beta == 1 && W.apply(s, J[uy], I[uy], t, a)) step(x - 1, t, Walk::mul(w, a));
        }
    }
};

inline void check_trace_args(int l, int m, int k, int n2, int beta, Statistics stats) {
    if (k < 0 || k > m) throw std::invalid_argument("k exceeds m");
    if (stats == Statistics::fermionic && m > l) throw std::invalid_argument("m exceeds l");
    if (beta != 1 && beta != 2) throw std::invalid_argument("oracle supports beta 1 and 2");
    if (n2 < 0 || n2 % 2 || n2 > max_pairing_slots) throw std::invalid_argument("unsupported trace order");
    if (stats == Statistics::bosonic && k > 16) throw std::invalid_argument("bosonic walk supports k <= 16");
}

template <class Walk, class States>
BigCount run_walks(const Walk& W, const PairingPartition& p, int beta, const States& starts, OpBudget& budget) {
    auto partner = partner_table(p);
    int n2 = static_cast<int>(2 * p.size());
    WalkRunner<Walk> R{W, partner, n2, beta, budget, {}, {}, {}};
    R.J.resize(static_cast<std::size_t>(n2) + 1);
    R.I.resize(static_cast<std::size_t>(n2) + 1);
    BigCount sum = 0;
    for (const auto& s : starts) {
        R.start = s;
        R.fermion_total = 0;
        R.total = 0;
        R.step(n2, s, Walk::one());
        sum += R.fermion_total;
        sum += R.total;
    }
    return sum;
}

}  // namespace detail

/// Exact sum over basis states of the walks allowed by one pairing:
/// sum_mu <mu| H_1 ... H_{n2} |mu> with H_a H_b averaged by the kernel for each pair (a, b).
/// With `single_state` the sum runs over one state per orbit of level permutations,
/// weighted by the orbit size. This is exact because the averaged operator commutes
/// with level permutations, so its diagonal is constant on each orbit.
inline BigCount pairing_trace(const PairingPartition& p, int l, int m, int k, int beta = 2,
                              Statistics stats = Statistics::fermionic, OpBudget* budget = nullptr,
                              bool single_state = false) {
    int n2 = static_cast<int>(2 * p.size());
    detail::check_trace_args(l, m, k, n2, beta, stats);
    OpBudget local;
    OpBudget& b = budget ? *budget : local;
    Basis basis(l, m, stats, std::size_t{1} << 40);
    if (n2 == 0) return BigCount(basis.size());

    std::vector<std::size_t> reps;
    std::vector<std::size_t> weight;
    if (single_state) {
        std::map<std::vector<int>, std::size_t> orbit;
        for (std::size_t s = 0; s < basis.size(); ++s) {
            std::vector<int> pattern;
            for (int x = 1; x <= l; ++x) pattern.push_back(basis[s].occupation(x));
            std::sort(pattern.begin(), pattern.end());
            auto [it, fresh] = orbit.emplace(pattern, reps.size());
            if (fresh) {
                reps.push_back(s);
                weight.push_back(0);
            }
            ++weight[it->second];
        }
    } else {
        for (std::size_t s = 0; s < basis.size(); ++s) reps.push_back(s);
        weight.assign(basis.size(), 1);
    }

    BigCount total = 0;
    if (stats == Statistics::fermionic) {
        detail::FermionWalk W{l, m, k};
        if (!single_state) {
            std::vector<std::uint64_t> starts;
            for (auto s : reps) starts.push_back(basis[s].key());
            return detail::run_walks(W, p, beta, starts, b);
        }
        for (std::size_t r = 0; r < reps.size(); ++r)
            total += BigCount(weight[r]) * detail::run_walks(W, p, beta, std::vector<std::uint64_t>{basis[reps[r]].key()}, b);
        return total;
    }
    detail::BosonWalk W{l, m, k};
    for (std::size_t r = 0; r < reps.size(); ++r) {
        detail::BosonWalk::State st{};
        for (int x = 1; x <= l; ++x) st.n[x - 1] = static_cast<std::uint8_t>(basis[reps[r]].occupation(x));
        total += BigCount(weight[r]) * detail::run_walks(W, p, beta, std::vector<detail::BosonWalk::State>{st}, b);
    }
    return total;
}

/// tr of the ensemble average of H^{n2} at unit coupling scale, exact.
inline BigCount exact_even_trace(int l, int m, int k, int n2, int beta = 2, Statistics stats = Statistics::fermionic,
                                 OpBudget* budget = nullptr, bool single_state = false) {
    detail::check_trace_args(l, m, k, n2, beta, stats);
    BigCount total = 0;
    for (const auto& p : enumerate_pairings(n2)) total += pairing_trace(p, l, m, k, beta, stats, budget, single_state);
    return total;
}

/// Finite-l normalized moment tr(H^{2n}) N^{n-1} / tr(H^2)^n from the exact traces.
inline ExactRatio exact_moment(int l, int m, int k, int n2, int beta = 2, Statistics stats = Statistics::fermionic,
                               OpBudget* budget = nullptr, bool single_state = false) {
    BigCount N = basis_size(l, m, stats);
    BigCount t2 = exact_even_trace(l, m, k, 2, beta, stats, budget, single_state);
    BigCount tn = exact_even_trace(l, m, k, n2, beta, stats, budget, single_state);
    int n = n2 / 2;
    BigCount num = tn, den = t2;
    for (int i = 1; i < n; ++i) {
        num *= N;
        den *= t2;
    }
    return ExactRatio(num, den);
}

// ---------------------------------------------------------------------------
// k = m calculus: cycles, polygons, Dyck words
// ---------------------------------------------------------------------------

/// Orbits of the index identifications, each sorted, ordered by smallest element.
using CycleDecomposition = std::vector<std::vector<int>>;

inline CycleDecomposition pairing_to_cycles(const PairingPartition& p) {
    int n2 = static_cast<int>(2 * p.size());
    std::vector<int> parent(static_cast<std::size_t>(n2) + 1);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        return x;
    };
    auto unite = [&](int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); };
    auto next = [&](int a) { return a % n2 + 1; };
    auto partner = partner_table(p);
    for (int a = 1; a <= n2; ++a) {
        int s = partner[static_cast<std::size_t>(a)];
        unite(a, next(s));
        unite(next(a), s);
    }
    std::map<int, std::vector<int>> orbits;
    for (int a = 1; a <= n2; ++a) orbits[find(a)].push_back(a);
    CycleDecomposition out;
    for (auto& [r, o] : orbits) out.push_back(o);
    std::sort(out.begin(), out.end());
    return out;
}

/// tr(H^{n2}) at k = m as a polynomial in N: orbit count -> number of pairings.
inline std::map<int, BigCount> km_trace_polynomial(int n2) {
    std::map<int, BigCount> poly;
    for (const auto& p : enumerate_pairings(n2)) poly[static_cast<int>(pairing_to_cycles(p).size())] += 1;
    return poly;
}

inline BigCount evaluate_polynomial(const std::map<int, BigCount>& poly, const BigCount& N) {
    BigCount s = 0;
    for (const auto& [e, c] : poly) s += c * boost::multiprecision::pow(N, static_cast<unsigned>(e));
    return s;
}

inline bool orbits_cross(const std::vector<int>& u, const std::vector<int>& v) {
    for (std::size_t a = 0; a < u.size(); ++a)
        for (std::size_t b = a + 1; b < u.size(); ++b)
            for (std::size_t c = 0; c < v.size(); ++c)
                for (std::size_t d = c + 1; d < v.size(); ++d)
                    if (chords_cross({u[a], u[b]}, {v[c], v[d]})) return true;
    return false;
}

using DyckWord = std::string;

/// Bracket each orbit on the line 1..2n: '(' before its first element, ')' after its last,
/// then read '(' as X and ')' as Y. Crossing decompositions are rejected.
inline DyckWord cycle_to_dyck(const CycleDecomposition& c) {
    int n2 = 0;
    for (const auto& o : c) n2 += static_cast<int>(o.size());
    for (std::size_t a = 0; a < c.size(); ++a)
        for (std::size_t b = a + 1; b < c.size(); ++b)
            if (orbits_cross(c[a], c[b])) throw std::domain_error("crossing partition has no Dyck word");
    if (static_cast<int>(c.size()) != n2 / 2 + 1) throw std::domain_error("partition is not of leading order");
    std::vector<int> first(static_cast<std::size_t>(n2) + 1, 0), last(static_cast<std::size_t>(n2) + 1, 0);
    for (const auto& o : c) {
        ++first[static_cast<std::size_t>(o.front())];
        ++last[static_cast<std::size_t>(o.back())];
    }
    DyckWord w;
    for (int a = 1; a <= n2; ++a) {
        w.append(static_cast<std::size_t>(first[static_cast<std::size_t>(a)]), 'X');
        w.append(static_cast<std::size_t>(last[static_cast<std::size_t>(a)]), 'Y');
    }
    return w;
}

inline bool is_dyck(const DyckWord& w) {
    int h = 0;
    for (char ch : w) {
        h += ch == 'X' ? 1 : -1;
        if (h < 0) return false;
    }
    return h == 0;
}

namespace detail {

inline void dyck_rec(int open, int close, int n, std::string& cur, std::vector<DyckWord>& out) {
    if (close == n) {
        out.push_back(cur);
        return;
    }
    if (open < n) {
        cur.push_back('X');
        dyck_rec(open + 1, close, n, cur, out);
        cur.pop_back();
    }
    if (close < open) {
        cur.push_back('Y');
        dyck_rec(open, close + 1, n, cur, out);
        cur.pop_back();
    }
}

}  // namespace detail

/// All Dyck words with n X's and n Y's, lexicographic (X < Y).
inline std::vector<DyckWord> dyck_words(int n) {
    if (n < 0 || n > 14) throw std::invalid_argument("dyck_words supports 0 <= n <= 14");
    std::vector<DyckWord> out;
    std::string cur;
    detail::dyck_rec(0, 0, n, cur, out);
    return out;
}

/// Pairings of 1..2n with no two chords crossing, counted by pairing the smallest free
/// point with every partner that crosses no chord placed so far.
inline BigCount noncrossing_pairing_count(int n) {
    if (n < 0 || n > 16) throw std::invalid_argument("noncrossing_pairing_count supports 0 <= n <= 16");
    const int n2 = 2 * n;
    std::vector<int> partner(static_cast<std::size_t>(n2) + 1, 0);
    std::vector<std::pair<int, int>> chords;
    BigCount count = 0;
    std::function<void()> rec = [&] {
        int a = 1;
        while (a <= n2 && partner[static_cast<std::size_t>(a)]) ++a;
        if (a > n2) {
            count += 1;
            return;
        }
        for (int b = a + 1; b <= n2; ++b) {
            if (partner[static_cast<std::size_t>(b)]) continue;
            bool ok = true;
            for (auto c : chords)
                if (chords_cross({a, b}, c)) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            partner[static_cast<std::size_t>(a)] = b;
            partner[static_cast<std::size_t>(b)] = a;
            chords.emplace_back(a, b);
            rec();
            chords.pop_back();
            partner[static_cast<std::size_t>(a)] = partner[static_cast<std::size_t>(b)] = 0;
        }
    };
    rec();
    return count;
}

}  // namespace embrmt
