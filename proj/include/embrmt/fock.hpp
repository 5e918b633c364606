#pragma once

// Many-body bases and second-quantized operator strings.
//
// Levels are labelled 1..l. A fermionic state {j1 < ... < jm} is the vector
// a+_{j1} ... a+_{jm} |0>, so moving an operator for level x into place costs a
// sign (-1)^(number of occupied levels below x). Bosonic operators carry the
// usual sqrt(n) and sqrt(n + 1) factors instead.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "combinatorics.hpp"

namespace embrmt {

enum class Statistics { fermionic, bosonic };

inline const char* to_string(Statistics s) {
    return s == Statistics::fermionic ? "fermionic" : "bosonic";
}

inline constexpr int max_levels = 64;

/// Strictly increasing (fermionic) or nondecreasing (bosonic) list of levels.
using IndexTuple = std::vector<int>;

class OccupationState {
public:
    OccupationState() = default;

    OccupationState(Statistics s, int levels) : stats_(s), n_(static_cast<std::size_t>(levels), 0) {
        if (levels < 1 || levels > max_levels) throw std::invalid_argument("level count out of range");
    }

    static OccupationState from_levels(Statistics s, int levels, const std::vector<int>& occupied) {
        OccupationState st(s, levels);
        for (int x : occupied) {
            if (x < 1 || x > levels) throw std::invalid_argument("level index out of range");
            auto& c = st.n_[static_cast<std::size_t>(x - 1)];
            if (s == Statistics::fermionic && c) throw std::invalid_argument("doubly occupied fermionic level");
            ++c;
        }
        return st;
    }

    Statistics statistics() const { return stats_; }
    int levels() const { return static_cast<int>(n_.size()); }
    int occupation(int level) const { return n_[static_cast<std::size_t>(level - 1)]; }
    void set_occupation(int level, int count) { n_[static_cast<std::size_t>(level - 1)] = static_cast<std::uint8_t>(count); }

    int particles() const {
        int m = 0;
        for (auto c : n_) m += c;
        return m;
    }

    /// Occupied levels in increasing order, repeated by multiplicity.
    std::vector<int> occupied() const {
        std::vector<int> out;
        for (std::size_t x = 0; x < n_.size(); ++x)
            for (int c = 0; c < n_[x]; ++c) out.push_back(static_cast<int>(x) + 1);
        return out;
    }

    int occupied_below(int level) const {
        int s = 0;
        for (int x = 1; x < level; ++x) s += n_[static_cast<std::size_t>(x - 1)];
        return s;
    }

    /// Unique 64-bit code: the occupation bit set for fermions, a stars-and-bars word for bosons.
    std::uint64_t key() const {
        if (stats_ == Statistics::fermionic) {
            std::uint64_t k = 0;
            for (std::size_t x = 0; x < n_.size(); ++x)
                if (n_[x]) k |= std::uint64_t{1} << x;
            return k;
        }
        std::uint64_t k = 0;
        int pos = 0;
        for (auto c : n_) {
            for (int i = 0; i < c; ++i) k |= std::uint64_t{1} << pos++;
            ++pos;
        }
        return k;
    }

    std::string str() const {
        std::string s = "{";
        bool first = true;
        for (int x : occupied()) {
            if (!first) s += ",";
            s += std::to_string(x);
            first = false;
        }
        return s + "}";
    }

    friend bool operator==(const OccupationState&, const OccupationState&) = default;

private:
    Statistics stats_ = Statistics::fermionic;
    std::vector<std::uint8_t> n_;
};

/// sign * sqrt(radicand); sign 0 marks a killed state.
struct Amplitude {
    int sign = 1;
    std::uint64_t radicand = 1;

    bool killed() const { return sign == 0; }
    double value() const { return sign * std::sqrt(static_cast<double>(radicand)); }

    Amplitude& operator*=(const Amplitude& o) {
        sign *= o.sign;
        if (sign == 0) {
            radicand = 0;
            return *this;
        }
        if (__builtin_mul_overflow(radicand, o.radicand, &radicand))
            throw std::overflow_error("amplitude radicand overflow");
        return *this;
    }

    static Amplitude kill() { return {0, 0}; }
};

struct StringResult {
    Amplitude amplitude;
    OccupationState state;

    bool killed() const { return amplitude.killed(); }
};

/// a_{t_k} ... a_{t_1} applied to state (a_{t_1} acts first).
inline StringResult apply_annihilation_string(const OccupationState& state, const IndexTuple& t) {
    StringResult r{Amplitude{}, state};
    for (int x : t) {
        if (x < 1 || x > state.levels()) throw std::invalid_argument("level index out of range");
        int n = r.state.occupation(x);
        if (n == 0) return {Amplitude::kill(), state};
        if (state.statistics() == Statistics::fermionic) {
            if (r.state.occupied_below(x) % 2) r.amplitude.sign = -r.amplitude.sign;
        } else {
            r.amplitude *= Amplitude{1, static_cast<std::uint64_t>(n)};
        }
        r.state.set_occupation(x, n - 1);
    }
    return r;
}

/// a+_{t_1} ... a+_{t_k} applied to state (a+_{t_k} acts first).
inline StringResult apply_creation_string(const OccupationState& state, const IndexTuple& t) {
    StringResult r{Amplitude{}, state};
    for (auto it = t.rbegin(); it != t.rend(); ++it) {
        int x = *it;
        if (x < 1 || x > state.levels()) throw std::invalid_argument("level index out of range");
        int n = r.state.occupation(x);
        if (state.statistics() == Statistics::fermionic) {
            if (n) return {Amplitude::kill(), state};
            if (r.state.occupied_below(x) % 2) r.amplitude.sign = -r.amplitude.sign;
        } else {
            r.amplitude *= Amplitude{1, static_cast<std::uint64_t>(n + 1)};
        }
        r.state.set_occupation(x, n + 1);
    }
    return r;
}

/// <mu| a+_{j_1}...a+_{j_k} a_{i_k}...a_{i_1} |nu>
inline Amplitude monomial_element(const OccupationState& mu, const IndexTuple& j, const IndexTuple& i,
                                  const OccupationState& nu) {
    if (j.size() != i.size()) throw std::invalid_argument("monomial tuples differ in length");
    auto a = apply_annihilation_string(nu, i);
    if (a.killed()) return Amplitude::kill();
    auto c = apply_creation_string(a.state, j);
    if (c.killed() || !(c.state == mu)) return Amplitude::kill();
    Amplitude amp = a.amplitude;
    amp *= c.amplitude;
    return amp;
}

namespace detail {

inline void combinations(const std::vector<int>& pool, std::size_t k, std::size_t start, IndexTuple& cur,
                         std::vector<IndexTuple>& out, bool distinct_values) {
    if (cur.size() == k) {
        out.push_back(cur);
        return;
    }
    for (std::size_t p = start; p < pool.size(); ++p) {
        if (distinct_values && p > start && pool[p] == pool[p - 1]) continue;
        cur.push_back(pool[p]);
        combinations(pool, k, p + 1, cur, out, distinct_values);
        cur.pop_back();
    }
}

}  // namespace detail

/// Distinct k-element sub-tuples of the occupied levels, lexicographic.
inline std::vector<IndexTuple> k_subsets(const OccupationState& state, int k) {
    auto occ = state.occupied();
    if (k < 0 || k > static_cast<int>(occ.size())) throw std::invalid_argument("k exceeds particle count");
    std::vector<IndexTuple> out;
    IndexTuple cur;
    detail::combinations(occ, static_cast<std::size_t>(k), 0, cur, out, true);
    return out;
}

/// All k-tuples over levels 1..l: combinations for fermions, multisets for bosons.
inline std::vector<IndexTuple> all_tuples(int l, int k, Statistics s) {
    std::vector<int> pool;
    for (int x = 1; x <= l; ++x)
        for (int c = 0; c < (s == Statistics::fermionic ? 1 : k); ++c) pool.push_back(x);
    std::vector<IndexTuple> out;
    IndexTuple cur;
    detail::combinations(pool, static_cast<std::size_t>(k), 0, cur, out, true);
    return out;
}

inline BigCount basis_size(int l, int m, Statistics s) {
    return s == Statistics::fermionic ? binomial(l, m) : binomial(l + m - 1, m);
}

inline constexpr std::size_t default_basis_cap = 200000;

class Basis {
public:
    Basis(int l, int m, Statistics s, std::size_t cap = default_basis_cap) : l_(l), m_(m), stats_(s) {
        if (l < 1 || l > max_levels) throw std::invalid_argument("level count out of range");
        if (m < 0) throw std::invalid_argument("negative particle count");
        if (s == Statistics::fermionic && m > l) throw std::invalid_argument("m exceeds l");
        if (s == Statistics::bosonic && l + m > max_levels) throw std::invalid_argument("bosonic basis too wide");
        if (basis_size(l, m, s) > cap) throw std::length_error("basis dimension above cap");
        std::vector<int> pool;
        for (int x = 1; x <= l; ++x)
            for (int c = 0; c < (s == Statistics::fermionic ? 1 : m); ++c) pool.push_back(x);
        std::vector<IndexTuple> sets;
        IndexTuple cur;
        detail::combinations(pool, static_cast<std::size_t>(m), 0, cur, sets, true);
        states_.reserve(sets.size());
        for (const auto& t : sets) {
            index_.emplace(OccupationState::from_levels(s, l, t).key(), states_.size());
            states_.push_back(OccupationState::from_levels(s, l, t));
        }
    }

    int levels() const { return l_; }
    int particles() const { return m_; }
    Statistics statistics() const { return stats_; }
    std::size_t size() const { return states_.size(); }
    const OccupationState& operator[](std::size_t i) const { return states_[i]; }
    const std::vector<OccupationState>& states() const { return states_; }

    /// Position of a state with the given key, or size() if absent.
    std::size_t find(std::uint64_t key) const {
        auto it = index_.find(key);
        return it == index_.end() ? states_.size() : it->second;
    }

    std::size_t index_of(const OccupationState& s) const { return find(s.key()); }

private:
    int l_, m_;
    Statistics stats_;
    std::vector<OccupationState> states_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

inline Basis enumerate_basis(int l, int m, Statistics s, std::size_t cap = default_basis_cap) {
    return Basis(l, m, s, cap);
}

}  // namespace embrmt
