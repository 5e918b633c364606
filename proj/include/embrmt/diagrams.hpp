#pragma once

// Particle diagrams for products of A-factors.
//
// A_{mu nu rho sigma} = avg <mu|H|sigma><rho|H|nu>. Each factor ties its four states
// with an (m-k)-bond mu-sigma, a k-bond sigma-rho, an (m-k)-bond rho-nu and a
// k-bond nu-mu. Every single-particle label present in some state runs along a
// loop of bonds, switching factor at every node it passes, so a diagram's
// contribution is a sum of multinomials in the loop sizes, constrained by the
// bond sizes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "combinatorics.hpp"
#include "formulas.hpp"
#include "wick.hpp"

namespace embrmt {

/// Node labels (mu, nu, rho, sigma) of one A-factor.
using AFactor = std::array<int, 4>;

struct ContractionPattern {
    int n2 = 0;
    PairingPartition pairing;
    std::vector<AFactor> factors;   ///< raw labels: label x is the left index of the x-th H
    std::vector<bool> tail;         ///< factor reduces to C(m,k) C(l-m+k,k) after identification
    std::vector<int> root;          ///< label -> representative after tail identifications

    int tails() const { return static_cast<int>(std::count(tail.begin(), tail.end(), true)); }

    /// Non-tail factors with identified labels.
    std::vector<AFactor> core() const {
        std::vector<AFactor> out;
        for (std::size_t f = 0; f < factors.size(); ++f)
            if (!tail[f]) {
                AFactor a;
                for (int s = 0; s < 4; ++s) a[static_cast<std::size_t>(s)] = root[static_cast<std::size_t>(factors[f][static_cast<std::size_t>(s)])];
                out.push_back(a);
            }
        return out;
    }

    static char letter(int label) { return "?abcdefghijklmnopqrstuvwxyz"[label]; }

    std::string str(bool identified = false) const {
        std::string s;
        for (const auto& f : factors) {
            s += "A_{";
            for (int x : f) s += letter(identified ? root[static_cast<std::size_t>(x)] : x);
            s += "}";
        }
        return s;
    }
};

namespace detail {

inline int uf_find(std::vector<int>& r, int x) {
    while (r[static_cast<std::size_t>(x)] != x) x = r[static_cast<std::size_t>(x)] = r[static_cast<std::size_t>(r[static_cast<std::size_t>(x)])];
    return x;
}

/// Strip factors of the form A_{x y z z} or A_{z z x y}: the repeated label occurs only
/// there, its sum is C(m,k) C(l-m+k,k), and the remaining two labels are identified.
inline void reduce_tails(const std::vector<AFactor>& factors, int labels, std::vector<bool>& tail, std::vector<int>& root) {
    root.resize(static_cast<std::size_t>(labels) + 1);
    std::iota(root.begin(), root.end(), 0);
    tail.assign(factors.size(), false);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t f = 0; f < factors.size(); ++f) {
            if (tail[f]) continue;
            int mu = uf_find(root, factors[f][0]), nu = uf_find(root, factors[f][1]);
            int rho = uf_find(root, factors[f][2]), sg = uf_find(root, factors[f][3]);
            if (rho == sg) {
                root[static_cast<std::size_t>(mu)] = nu;
            } else if (mu == nu) {
                root[static_cast<std::size_t>(sg)] = rho;
            } else {
                continue;
            }
            tail[f] = true;
            changed = true;
        }
    }
    for (int x = 0; x <= labels; ++x) root[static_cast<std::size_t>(x)] = uf_find(root, x);
}

}  // namespace detail

/// A-factorization of one pairing: slots (x, y) give A_{x, y+1, y, x+1} (indices mod n2).
inline ContractionPattern pairing_to_pattern(const PairingPartition& p) {
    ContractionPattern c;
    c.n2 = static_cast<int>(2 * p.size());
    c.pairing = p;
    auto next = [&](int x) { return x % c.n2 + 1; };
    for (auto [x, y] : p) c.factors.push_back({x, next(y), y, next(x)});
    detail::reduce_tails(c.factors, c.n2, c.tail, c.root);
    return c;
}

/// Parse a product written as A_{abcd}A_{efgh}... with single-letter labels.
inline ContractionPattern parse_pattern(const std::string& text) {
    ContractionPattern c;
    std::map<char, int> ids;
    std::size_t pos = 0;
    while ((pos = text.find("A_{", pos)) != std::string::npos) {
        auto close = text.find('}', pos);
        if (close == std::string::npos || close - pos - 3 != 4) throw std::invalid_argument("malformed A-factor in " + text);
        AFactor f;
        for (int s = 0; s < 4; ++s) {
            char ch = text[pos + 3 + static_cast<std::size_t>(s)];
            auto it = ids.find(ch);
            if (it == ids.end()) it = ids.emplace(ch, static_cast<int>(ids.size()) + 1).first;
            f[static_cast<std::size_t>(s)] = it->second;
        }
        c.factors.push_back(f);
        pos = close;
    }
    std::map<int, int> uses;
    for (const auto& f : c.factors)
        for (int x : f) ++uses[x];
    for (auto [x, u] : uses)
        if (u % 2) throw std::invalid_argument("every label must occur an even number of times: " + text);
    c.n2 = static_cast<int>(2 * c.factors.size());
    detail::reduce_tails(c.factors, static_cast<int>(ids.size()), c.tail, c.root);
    return c;
}

// ---------------------------------------------------------------------------
// Diagrams and loops
// ---------------------------------------------------------------------------

enum class BondSize { k, m_minus_k };

struct Bond {
    int u, v;       ///< node ids
    BondSize size;
    int factor;
};

struct ParticleDiagram {
    std::vector<int> labels;            ///< node id -> label
    std::vector<AFactor> factors;       ///< in node ids
    std::vector<Bond> bonds;            ///< self-bonds of tail factors are omitted
    std::vector<int> factor_count;      ///< node id -> number of factors containing it
    int tails = 0;

    std::size_t nodes() const { return labels.size(); }
};

inline ParticleDiagram make_diagram(const std::vector<AFactor>& factors, int tails = 0) {
    ParticleDiagram d;
    d.tails = tails;
    std::map<int, int> id;
    for (const auto& f : factors)
        for (int x : f)
            if (!id.count(x)) {
                id.emplace(x, static_cast<int>(d.labels.size()));
                d.labels.push_back(x);
            }
    d.factor_count.assign(d.labels.size(), 0);
    for (std::size_t fi = 0; fi < factors.size(); ++fi) {
        AFactor g;
        for (int s = 0; s < 4; ++s) g[static_cast<std::size_t>(s)] = id.at(factors[fi][static_cast<std::size_t>(s)]);
        d.factors.push_back(g);
        auto [mu, nu, rho, sg] = g;
        int f = static_cast<int>(fi);
        const Bond bs[4] = {{mu, sg, BondSize::m_minus_k, f}, {sg, rho, BondSize::k, f},
                            {rho, nu, BondSize::m_minus_k, f}, {nu, mu, BondSize::k, f}};
        for (const auto& b : bs)
            if (b.u != b.v) d.bonds.push_back(b);
        std::set<int> in(g.begin(), g.end());
        for (int x : in) ++d.factor_count[static_cast<std::size_t>(x)];
    }
    return d;
}

/// Diagram of the non-tail part of a pattern.
inline ParticleDiagram make_diagram(const ContractionPattern& c) { return make_diagram(c.core(), c.tails()); }

/// Cyclic sequence of bond ids.
using Loop = std::vector<int>;

/// Simple closed walks that never reuse a bond or a node and that change factor at
/// every node shared by two factors. Each loop is listed once, starting at its
/// smallest bond id.
inline std::vector<Loop> enumerate_loops(const ParticleDiagram& d) {
    const int B = static_cast<int>(d.bonds.size());
    std::vector<std::vector<int>> at(d.nodes());
    for (int b = 0; b < B; ++b) {
        at[static_cast<std::size_t>(d.bonds[static_cast<std::size_t>(b)].u)].push_back(b);
        at[static_cast<std::size_t>(d.bonds[static_cast<std::size_t>(b)].v)].push_back(b);
    }
    auto other = [&](int b, int x) {
        const auto& e = d.bonds[static_cast<std::size_t>(b)];
        return e.u == x ? e.v : e.u;
    };
    auto may_turn = [&](int node, int b1, int b2) {
        if (d.factor_count[static_cast<std::size_t>(node)] < 2) return true;
        return d.bonds[static_cast<std::size_t>(b1)].factor != d.bonds[static_cast<std::size_t>(b2)].factor;
    };
    std::set<std::vector<int>> seen;
    std::vector<Loop> out;
    std::vector<char> node_used(d.nodes(), 0);
    Loop path;
    std::function<void(int, int, int)> walk = [&](int start, int node, int first) {
        int last = path.back();
        for (int b : at[static_cast<std::size_t>(node)]) {
            if (b <= first || std::find(path.begin(), path.end(), b) != path.end()) continue;
            if (!may_turn(node, last, b)) continue;
            int nxt = other(b, node);
            if (nxt == start) {
                if (!may_turn(start, b, first)) continue;
                path.push_back(b);
                std::vector<int> key(path);
                std::sort(key.begin(), key.end());
                if (seen.insert(key).second) out.push_back(path);
                path.pop_back();
                continue;
            }
            if (node_used[static_cast<std::size_t>(nxt)]) continue;
            node_used[static_cast<std::size_t>(nxt)] = 1;
            path.push_back(b);
            walk(start, nxt, first);
            path.pop_back();
            node_used[static_cast<std::size_t>(nxt)] = 0;
        }
    };
    for (int b = 0; b < B; ++b) {
        const auto& e = d.bonds[static_cast<std::size_t>(b)];
        node_used[static_cast<std::size_t>(e.u)] = 1;
        node_used[static_cast<std::size_t>(e.v)] = 1;
        path = {b};
        walk(e.u, e.v, b);
        node_used[static_cast<std::size_t>(e.u)] = 0;
        node_used[static_cast<std::size_t>(e.v)] = 0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Conservation system and argument maximization
// ---------------------------------------------------------------------------

struct LoopSystem {
    ParticleDiagram diagram;
    std::vector<Loop> loops;
    std::vector<std::vector<int>> through;  ///< bond id -> loops using it

    std::int64_t bond_size(int b, std::int64_t m, std::int64_t k) const {
        return diagram.bonds[static_cast<std::size_t>(b)].size == BondSize::k ? k : m - k;
    }
};

inline LoopSystem make_system(const ParticleDiagram& d) {
    LoopSystem s{d, enumerate_loops(d), {}};
    s.through.assign(d.bonds.size(), {});
    for (std::size_t L = 0; L < s.loops.size(); ++L)
        for (int b : s.loops[L]) s.through[static_cast<std::size_t>(b)].push_back(static_cast<int>(L));
    return s;
}

class InfeasibleSystem : public std::runtime_error {
public:
    InfeasibleSystem() : std::runtime_error("loop system has no nonnegative solution") {}
};

namespace detail {

/// Depth-first search over loop sizes with forced-value propagation on the bond residuals.
class LoopSearch {
public:
    LoopSearch(const LoopSystem& s, std::int64_t m, std::int64_t k)
        : s_(s), value_(s.loops.size(), -1), residual_(s.diagram.bonds.size()), open_(s.diagram.bonds.size()) {
        for (std::size_t b = 0; b < residual_.size(); ++b) {
            residual_[b] = s.bond_size(static_cast<int>(b), m, k);
            open_[b] = static_cast<int>(s.through[b].size());
        }
    }

    /// Visit every feasible solution; with `bound_below` set, skip branches that cannot reach it.
    template <class F>
    void run(F&& visit, const std::int64_t* bound_below = nullptr) {
        bound_ = bound_below;
        for (std::size_t b = 0; b < residual_.size(); ++b)
            if (residual_[b] < 0) return;
        search(visit, 0);
    }

private:
    std::int64_t upper(std::size_t L) const {
        std::int64_t u = INT64_MAX;
        for (int b : s_.loops[L]) u = std::min(u, residual_[static_cast<std::size_t>(b)]);
        return u;
    }

    void assign(std::size_t L, std::int64_t v) {
        value_[L] = v;
        for (int b : s_.loops[L]) {
            residual_[static_cast<std::size_t>(b)] -= v;
            --open_[static_cast<std::size_t>(b)];
        }
    }

    void unassign(std::size_t L) {
        for (int b : s_.loops[L]) {
            residual_[static_cast<std::size_t>(b)] += value_[L];
            ++open_[static_cast<std::size_t>(b)];
        }
        value_[L] = -1;
    }

    template <class F>
    void search(F& visit, std::int64_t sum) {
        std::vector<std::size_t> forced;
        bool ok = true;
        for (bool again = true; again && ok;) {
            again = false;
            for (std::size_t b = 0; b < residual_.size() && ok; ++b) {
                if (open_[b] == 0) {
                    if (residual_[b] != 0) ok = false;
                } else if (open_[b] == 1) {
                    std::size_t L = 0;
                    for (int x : s_.through[b])
                        if (value_[static_cast<std::size_t>(x)] < 0) L = static_cast<std::size_t>(x);
                    std::int64_t v = residual_[b];
                    if (v < 0 || v > upper(L)) {
                        ok = false;
                        break;
                    }
                    assign(L, v);
                    sum += v;
                    forced.push_back(L);
                    again = true;
                }
            }
        }
        if (ok) {
            std::size_t pick = value_.size();
            std::int64_t best_u = INT64_MAX, room = 0;
            for (std::size_t L = 0; L < value_.size(); ++L) {
                if (value_[L] >= 0) continue;
                std::int64_t u = upper(L);
                room += u;
                if (u < best_u) {
                    best_u = u;
                    pick = L;
                }
            }
            if (bound_ && sum + room < *bound_) {
                // cannot reach the current optimum
            } else if (pick == value_.size()) {
                visit(value_, sum);
            } else {
                for (std::int64_t v = best_u; v >= 0; --v) {
                    assign(pick, v);
                    search(visit, sum + v);
                    unassign(pick);
                }
            }
        }
        for (auto it = forced.rbegin(); it != forced.rend(); ++it) unassign(*it);
    }

    const LoopSystem& s_;
    std::vector<std::int64_t> value_;
    std::vector<std::int64_t> residual_;
    std::vector<int> open_;
    const std::int64_t* bound_ = nullptr;
};

}  // namespace detail

/// Calls visit(loop sizes, argument) for every nonnegative integer solution.
template <class F>
void for_each_solution(const LoopSystem& s, std::int64_t m, std::int64_t k, F&& visit) {
    detail::LoopSearch(s, m, k).run(visit);
}

struct LeadingTerm {
    std::int64_t m = 0, k = 0;
    std::int64_t max_argument = 0;
    std::vector<std::vector<std::int64_t>> optimal;   ///< every optimal solution, in search order
    std::vector<std::int64_t> low, high;              ///< per-loop range over the optimal family
    int free_parameters = 0;                          ///< affine dimension of the optimal family
};

namespace detail {

inline int affine_dimension(const std::vector<std::vector<std::int64_t>>& pts) {
    if (pts.size() < 2) return 0;
    // Entries are small integers, so elimination in double with a loose pivot threshold is exact.
    const std::size_t dim = pts[0].size();
    std::vector<std::vector<double>> basis;
    std::vector<std::size_t> pivots;
    for (std::size_t p = 1; p < pts.size() && basis.size() < dim; ++p) {
        std::vector<double> row(dim);
        for (std::size_t i = 0; i < dim; ++i) row[i] = static_cast<double>(pts[p][i] - pts[0][i]);
        for (std::size_t r = 0; r < basis.size(); ++r) {
            double f = row[pivots[r]];
            if (f == 0.0) continue;
            for (std::size_t i = 0; i < dim; ++i) row[i] -= f * basis[r][i];
        }
        std::size_t piv = dim;
        for (std::size_t i = 0; i < dim; ++i)
            if (std::abs(row[i]) > 1e-7 && (piv == dim || std::abs(row[i]) > std::abs(row[piv]))) piv = i;
        if (piv == dim) continue;
        double d = row[piv];
        for (auto& x : row) x /= d;
        for (auto& b : basis) {
            double f = b[piv];
            if (f != 0.0)
                for (std::size_t i = 0; i < dim; ++i) b[i] -= f * row[i];
        }
        basis.push_back(std::move(row));
        pivots.push_back(piv);
    }
    return static_cast<int>(basis.size());
}

}  // namespace detail

/// Largest total loop size and every solution attaining it.
inline LeadingTerm maximize_argument(const LoopSystem& s, std::int64_t m, std::int64_t k) {
    if (k < 0 || k > m) throw std::invalid_argument("need 0 <= k <= m");
    LeadingTerm t;
    t.m = m;
    t.k = k;
    std::int64_t best = -1;
    detail::LoopSearch search(s, m, k);
    search.run(
        [&](const std::vector<std::int64_t>& v, std::int64_t sum) {
            if (sum > best) {
                best = sum;
                t.optimal.clear();
            }
            if (sum == best) t.optimal.push_back(v);
        },
        &best);
    if (best < 0) throw InfeasibleSystem();
    t.max_argument = best;
    std::size_t L = s.loops.size();
    t.low.assign(L, INT64_MAX);
    t.high.assign(L, 0);
    for (const auto& v : t.optimal)
        for (std::size_t i = 0; i < L; ++i) {
            t.low[i] = std::min(t.low[i], v[i]);
            t.high[i] = std::max(t.high[i], v[i]);
        }
    t.free_parameters = detail::affine_dimension(t.optimal);
    return t;
}

/// Sum over the optimal family of multinomial(l; loop sizes).
inline BigCount leading_term_value(const LeadingTerm& t, std::int64_t l) {
    BigCount s = 0;
    for (const auto& v : t.optimal) s += multinomial(l, v);
    return s;
}

/// Exact label-assignment count of the diagram at finite l: all solutions, not only optimal ones.
inline BigCount exact_diagram_count(const LoopSystem& s, std::int64_t l, std::int64_t m, std::int64_t k) {
    BigCount total = 0;
    for_each_solution(s, m, k, [&](const std::vector<std::int64_t>& v, std::int64_t sum) {
        if (sum <= l) total += multinomial(l, v);
    });
    return total;
}

/// Coefficients (a, b) with max argument = a m + b k on every grid point 0 <= 2k <= m <= max_m.
inline std::optional<std::pair<std::int64_t, std::int64_t>> certify_argument(const LoopSystem& s, std::int64_t max_m = 14) {
    std::int64_t a = maximize_argument(s, 1, 0).max_argument;
    std::int64_t b = maximize_argument(s, 2, 1).max_argument - 2 * a;
    for (std::int64_t m = 0; m <= max_m; ++m)
        for (std::int64_t k = 0; 2 * k <= m; ++k)
            if (maximize_argument(s, m, k).max_argument != a * m + b * k) return std::nullopt;
    return std::make_pair(a, b);
}

inline std::string argument_string(std::int64_t a, std::int64_t b) {
    std::string s = a == 0 ? "" : (a == 1 ? "m" : std::to_string(a) + "m");
    if (b == 0) return s.empty() ? "0" : s;
    std::string kb = b == 1 ? "k" : (b == -1 ? "-k" : std::to_string(b) + "k");
    if (s.empty()) return kb;
    return s + (b > 0 ? "+" : "") + kb;
}

/// lim_{l -> inf} of the diagram's label count over C(l,m) (C(m,k) C(l-m+k,k))^c,
/// c = number of factors; zero when the optimal argument falls short of m + c k.
inline ExactRatio limit_coefficient(const LoopSystem& s, std::int64_t m, std::int64_t k) {
    auto c = static_cast<std::int64_t>(s.diagram.factors.size());
    if (c == 0) return 1;
    auto t = maximize_argument(s, m, k);
    if (t.max_argument < m + c * k) return 0;
    if (t.max_argument > m + c * k) throw std::logic_error("diagram outgrows the normalization");
    BigCount num = 0;
    for (const auto& v : t.optimal) {
        BigCount den = 1;
        for (auto x : v) den *= factorial(x);
        num += factorial(m) * boost::multiprecision::pow(factorial(k), static_cast<unsigned>(c)) / den;
    }
    return ExactRatio(num, boost::multiprecision::pow(binomial(m, k), static_cast<unsigned>(c)));
}

// ---------------------------------------------------------------------------
// Classes of pairings
// ---------------------------------------------------------------------------

namespace detail {

using DiagramCode = std::vector<std::array<int, 12>>;

inline DiagramCode code_under(const ParticleDiagram& d, const std::vector<int>& lab) {
    DiagramCode code;
    for (const auto& f : d.factors) {
        auto [mu, nu, rho, sg] = f;
        std::array<std::array<int, 3>, 4> e = {{{lab[static_cast<std::size_t>(mu)], lab[static_cast<std::size_t>(sg)], 1},
                                                {lab[static_cast<std::size_t>(sg)], lab[static_cast<std::size_t>(rho)], 0},
                                                {lab[static_cast<std::size_t>(rho)], lab[static_cast<std::size_t>(nu)], 1},
                                                {lab[static_cast<std::size_t>(nu)], lab[static_cast<std::size_t>(mu)], 0}}};
        for (auto& x : e)
            if (x[0] > x[1]) std::swap(x[0], x[1]);
        std::sort(e.begin(), e.end());
        std::array<int, 12> row;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 3; ++j) row[static_cast<std::size_t>(3 * i + j)] = e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        code.push_back(row);
    }
    std::sort(code.begin(), code.end());
    return code;
}

/// Colour refinement on (solid neighbour, dashed neighbour, opposite node) per factor.
/// Colours come out as ranks 0, 1, ... of the final signatures.
inline std::vector<int> refine_colours(const ParticleDiagram& d, std::vector<int> col) {
    std::size_t V = d.nodes();
    for (std::size_t round = 0; round <= V; ++round) {
        std::vector<std::vector<std::array<int, 3>>> sig(V);
        for (const auto& f : d.factors) {
            auto [mu, nu, rho, sg] = f;
            auto c = [&](int x) { return col[static_cast<std::size_t>(x)]; };
            sig[static_cast<std::size_t>(mu)].push_back({c(sg), c(nu), c(rho)});
            sig[static_cast<std::size_t>(sg)].push_back({c(mu), c(rho), c(nu)});
            sig[static_cast<std::size_t>(rho)].push_back({c(nu), c(sg), c(mu)});
            sig[static_cast<std::size_t>(nu)].push_back({c(rho), c(mu), c(sg)});
        }
        std::vector<std::pair<int, std::vector<std::array<int, 3>>>> full(V);
        for (std::size_t x = 0; x < V; ++x) {
            std::sort(sig[x].begin(), sig[x].end());
            full[x] = {col[x], sig[x]};
        }
        auto sorted = full;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        std::vector<int> next(V);
        for (std::size_t x = 0; x < V; ++x)
            next[x] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), full[x]) - sorted.begin());
        bool same = next == col;
        col = next;
        if (same) break;
    }
    return col;
}

}  // namespace detail

/// Isomorphism-invariant code of a diagram (tail count plus minimal bond code over
/// colour-respecting relabelings).
struct CanonicalKey {
    int tails;
    detail::DiagramCode code;
    auto operator<=>(const CanonicalKey&) const = default;
};

inline CanonicalKey canonical_key(const ParticleDiagram& d) {
    const std::size_t V = d.nodes();
    std::optional<detail::DiagramCode> best;
    // Individualize each node of the first non-singleton cell in turn, refine, recurse.
    std::function<void(std::vector<int>)> rec = [&](std::vector<int> col) {
        col = detail::refine_colours(d, std::move(col));
        std::vector<std::size_t> size(V, 0);
        for (int c : col) ++size[static_cast<std::size_t>(c)];
        auto cell = std::find_if(size.begin(), size.end(), [](std::size_t n) { return n > 1; });
        if (cell == size.end()) {
            auto code = detail::code_under(d, col);
            if (!best || code < *best) best = code;
            return;
        }
        int target = static_cast<int>(cell - size.begin());
        for (std::size_t v = 0; v < V; ++v) {
            if (col[v] != target) continue;
            auto next = col;
            next[v] = -1;
            rec(std::move(next));
        }
    };
    if (V) rec(std::vector<int>(V, 0));
    return {d.tails, best.value_or(detail::DiagramCode{})};
}

struct DiagramClass {
    std::string name;                       ///< empty when not one of the reference diagrams
    ContractionPattern representative;
    std::vector<PairingPartition> members;
    LoopSystem system;

    std::int64_t multiplicity() const { return static_cast<std::int64_t>(members.size()); }
    int tails() const { return representative.tails(); }
};

/// Reference products for naming classes, in the order the moment expansions list them.
inline const std::vector<std::pair<std::string, std::string>>& reference_patterns(int n2) {
    static const std::vector<std::pair<std::string, std::string>> four = {
        {"chain", "A_{ssrr}A_{ssmm}"}, {"standard", "A_{mnrs}A_{smnr}"}};
    static const std::vector<std::pair<std::string, std::string>> six = {
        {"chain", "A_{ptqq}A_{tvuu}A_{vpww}"},
        {"standard+tail", "A_{ptqq}A_{twvu}A_{upwv}"},
        {"prism", "A_{putq}A_{qwvt}A_{upwv}"},
        {"octahedron", "A_{pvuq}A_{qwvt}A_{tpwu}"}};
    static const std::vector<std::pair<std::string, std::string>> eight = {
        {"chain", "A_{ppuu}A_{uuww}A_{wwvv}A_{vvqq}"},
        {"standard+2tails", "A_{ttqq}A_{qqpp}A_{puvw}A_{pwvu}"},
        {"prism+tail", "A_{eeww}A_{wvup}A_{upqt}A_{vtqw}"},
        {"cuboid", "A_{cewu}A_{uwvt}A_{tvqp}A_{pceq}"},
        {"hahn", "A_{petq}A_{qtuv}A_{euwc}A_{cwvp}"},
        {"collapsed", "A_{tpce}A_{evqc}A_{puwq}A_{uwvt}"},
        {"standard-squared", "A_{adcb}A_{bedc}A_{ehgf}A_{fahg}"},
        {"octahedron+tail", "A_{qwvt}A_{uwpt}A_{pvuq}A_{ccpp}"},
        {"penpen", "A_{uwvt}A_{cqvt}A_{pueq}A_{pwec}"},
        {"pen", "A_{uwce}A_{epqc}A_{tqvu}A_{twvp}"},
        {"box", "A_{uvqt}A_{twvc}A_{cewp}A_{pueq}"}};
    static const std::vector<std::pair<std::string, std::string>> none;
    switch (n2) {
        case 4: return four;
        case 6: return six;
        case 8: return eight;
        default: return none;
    }
}

/// All (n2-1)!! pairings grouped by isomorphism of their reduced diagrams (tail count
/// plus the diagram of the remaining factors). Rotations and reversals of the trace
/// give isomorphic diagrams, so each class is a union of such orbits.
inline std::vector<DiagramClass> canonical_classes(int n2) {
    if (n2 < 2 || n2 % 2 || n2 > 10) throw std::invalid_argument("diagram classes support n2 in {2,...,10}");
    std::map<CanonicalKey, std::size_t> where;
    std::vector<DiagramClass> classes;
    std::vector<CanonicalKey> keys;
    for (const auto& p : enumerate_pairings(n2)) {
        auto pat = pairing_to_pattern(p);
        auto d = make_diagram(pat);
        auto key = canonical_key(d);
        auto it = where.find(key);
        if (it == where.end()) {
            where.emplace(key, classes.size());
            keys.push_back(key);
            classes.push_back({"", pat, {p}, make_system(d)});
        } else {
            classes[it->second].members.push_back(p);
        }
    }
    std::vector<std::size_t> rank(classes.size(), SIZE_MAX);
    const auto& refs = reference_patterns(n2);
    for (std::size_t r = 0; r < refs.size(); ++r) {
        auto key = canonical_key(make_diagram(parse_pattern(refs[r].second)));
        auto it = where.find(key);
        if (it != where.end() && classes[it->second].name.empty()) {
            classes[it->second].name = refs[r].first;
            rank[it->second] = r;
        }
    }
    std::vector<std::size_t> order(classes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rank[a] != rank[b]) return rank[a] < rank[b];
        if (keys[a].tails != keys[b].tails) return keys[a].tails > keys[b].tails;
        return keys[a].code < keys[b].code;
    });
    std::vector<DiagramClass> out;
    for (auto i : order) out.push_back(std::move(classes[i]));
    return out;
}

/// Orbits of the pairings under cyclic rotation and reversal of the trace, listed
/// class by class in the order of canonical_classes, then by smallest member.
inline std::vector<std::vector<PairingPartition>> dihedral_orbits(int n2) {
    auto normal = [](PairingPartition p) {
        for (auto& [a, b] : p)
            if (a > b) std::swap(a, b);
        std::sort(p.begin(), p.end());
        return p;
    };
    std::map<PairingPartition, std::size_t> where;
    std::vector<std::vector<PairingPartition>> orbits;
    for (const auto& p : enumerate_pairings(n2)) {
        PairingPartition rep = normal(p);
        for (int r = 0; r < n2; ++r)
            for (int flip = 0; flip < 2; ++flip) {
                PairingPartition q;
                for (auto [a, b] : p) {
                    auto t = [&](int x) {
                        int y = flip ? n2 + 1 - x : x;
                        return (y - 1 + r) % n2 + 1;
                    };
                    q.emplace_back(t(a), t(b));
                }
                rep = std::min(rep, normal(q));
            }
        auto it = where.find(rep);
        if (it == where.end()) {
            where.emplace(rep, orbits.size());
            orbits.push_back({normal(p)});
        } else {
            orbits[it->second].push_back(normal(p));
        }
    }
    std::map<PairingPartition, std::size_t> class_of;
    auto classes = canonical_classes(n2);
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (const auto& p : classes[c].members) class_of[normal(p)] = c;
    for (auto& o : orbits) std::sort(o.begin(), o.end());
    std::stable_sort(orbits.begin(), orbits.end(), [&](const auto& a, const auto& b) {
        auto ca = class_of.at(a.front()), cb = class_of.at(b.front());
        return ca != cb ? ca < cb : a.front() < b.front();
    });
    return orbits;
}

/// Limit of the normalized 2n-th moment from the diagram classes.
inline ExactRatio assemble_moment(int n, std::int64_t m, std::int64_t k) {
    if (n < 1 || n > 5) throw std::invalid_argument("assemble_moment supports n in {1,...,5}");
    if (k < 0 || k > m) throw std::invalid_argument("need 0 <= k <= m");
    static std::map<int, std::vector<DiagramClass>> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, canonical_classes(2 * n)).first;
    ExactRatio total = 0;
    for (const auto& c : it->second) total += ExactRatio(c.multiplicity()) * limit_coefficient(c.system, m, k);
    return total;
}

}  // namespace embrmt
