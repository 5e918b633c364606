#pragma once

// Random k-body couplings and Hamiltonian assembly.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fock.hpp"

namespace embrmt {

// ---------------------------------------------------------------------------
// Counter-based random stream
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stateless stream: every draw is a pure function of (key, counter).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : key_(splitmix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

    /// Independent child stream, e.g. one per Monte Carlo sample.
    CounterRng split(std::uint64_t stream) const {
        CounterRng r(0);
        r.key_ = splitmix64(key_ ^ splitmix64(stream + 0x3c6ef372fe94f82bULL));
        return r;
    }

    std::uint64_t bits(std::uint64_t counter) const {
        return splitmix64(key_ ^ splitmix64(counter * 0xd1b54a32d192ed03ULL));
    }

    /// Uniform on the open interval (0, 1).
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Two independent standard normals (Box-Muller) from counters 2c and 2c+1.
    std::pair<double, double> normal_pair(std::uint64_t counter) const {
        double r = std::sqrt(-2.0 * std::log(uniform(2 * counter)));
        double t = 2.0 * std::numbers::pi * uniform(2 * counter + 1);
        return {r * std::cos(t), r * std::sin(t)};
    }

private:
    std::uint64_t key_;
};

// ---------------------------------------------------------------------------
// Parameters and symmetry data
// ---------------------------------------------------------------------------

/// Fixed-point-free involution of the levels 1..l.
class PairMap {
public:
    explicit PairMap(std::vector<int> image) : sigma_(std::move(image)) {
        int l = static_cast<int>(sigma_.size());
        for (int x = 1; x <= l; ++x) {
            int y = (*this)(x);
            if (y < 1 || y > l) throw std::invalid_argument("pair map image out of range");
            if (y == x) throw std::invalid_argument("pair map has a fixed point");
            if ((*this)(y) != x) throw std::invalid_argument("pair map is not an involution");
        }
    }

    /// 1<->2, 3<->4, ...
    static PairMap adjacent(int l) {
        if (l % 2) throw std::invalid_argument("pair map needs an even level count");
        std::vector<int> s(static_cast<std::size_t>(l));
        for (int x = 1; x <= l; ++x) s[static_cast<std::size_t>(x - 1)] = (x % 2) ? x + 1 : x - 1;
        return PairMap(std::move(s));
    }

    int levels() const { return static_cast<int>(sigma_.size()); }
    int operator()(int x) const { return sigma_[static_cast<std::size_t>(x - 1)]; }

    IndexTuple apply(const IndexTuple& t) const {
        IndexTuple r;
        r.reserve(t.size());
        for (int x : t) r.push_back((*this)(x));
        std::sort(r.begin(), r.end());
        return r;
    }

    OccupationState apply(const OccupationState& s) const {
        OccupationState r(s.statistics(), s.levels());
        for (int x = 1; x <= s.levels(); ++x) r.set_occupation((*this)(x), s.occupation(x));
        return r;
    }

private:
    std::vector<int> sigma_;
};

struct EnsembleParams {
    int beta = 2;
    int k = 1;
    int m = 1;
    int l = 2;
    Statistics statistics = Statistics::fermionic;
    double v0 = 1.0;
    std::optional<PairMap> sigma;

    void validate() const {
        if (beta != 1 && beta != 2 && beta != 4) throw std::invalid_argument("beta must be 1, 2 or 4");
        if (k < 0) throw std::invalid_argument("k must be nonnegative");
        if (k > m) throw std::invalid_argument("k exceeds m");
        if (l < 1) throw std::invalid_argument("l must be positive");
        if (statistics == Statistics::fermionic && m > l) throw std::invalid_argument("m exceeds l");
        if (beta == 4 && !sigma) throw std::invalid_argument("beta=4 requires a pair map");
        if (sigma && sigma->levels() != l) throw std::invalid_argument("pair map level count differs from l");
        if (!(v0 >= 0.0)) throw std::invalid_argument("v0 must be nonnegative");
    }
};

/// Sign of a tuple pair under the symplectic pairing: +1 when every cell it feeds is
/// of the conjugate-pair type, -1 when every cell is of the negated-conjugate type,
/// 0 when both occur (a symplectic zero) or when it feeds no cell.
///
/// States are grouped into partners (mu, sigma(mu)); the one with the smaller key
/// is taken as the leading member. A cell (mu, nu) is of conjugate-pair type when
/// mu and nu are both leading or both trailing, of negated type otherwise. States
/// fixed by sigma belong to both types.
class SymplecticSigns {
public:
    SymplecticSigns(const PairMap& sigma, int m, int k) : sigma_(sigma), k_(k) {
        int l = sigma.levels();
        Basis basis(l, m, Statistics::fermionic);
        std::vector<int> role(basis.size());
        for (std::size_t s = 0; s < basis.size(); ++s) {
            auto a = basis[s].key(), b = sigma.apply(basis[s]).key();
            role[s] = a == b ? 0 : (a < b ? 1 : 2);
        }
        tuples_ = all_tuples(l, k, Statistics::fermionic);
        for (std::size_t t = 0; t < tuples_.size(); ++t) rank_.emplace(key_of(tuples_[t]), t);
        std::size_t K = tuples_.size();
        std::vector<std::uint8_t> seen(K * K, 0);  // bit 0: conjugate type, bit 1: negated type
        for (std::size_t nu = 0; nu < basis.size(); ++nu) {
            for (const auto& i : k_subsets(basis[nu], k)) {
                auto a = apply_annihilation_string(basis[nu], i);
                for (const auto& j : tuples_) {
                    auto c = apply_creation_string(a.state, j);
                    if (c.killed()) continue;
                    std::size_t mu = basis.index_of(c.state);
                    int rm = role[mu], rn = role[nu];
                    std::uint8_t bitsv = (rm == 0 || rn == 0) ? 3 : (rm == rn ? 1 : 2);
                    seen[rank_.at(key_of(j)) * K + rank_.at(key_of(i))] |= bitsv;
                }
            }
        }
        sign_.resize(K * K);
        for (std::size_t e = 0; e < K * K; ++e) sign_[e] = seen[e] == 1 ? 1 : (seen[e] == 2 ? -1 : 0);
    }

    const PairMap& sigma() const { return sigma_; }
    int k() const { return k_; }

    int sgn(const IndexTuple& j, const IndexTuple& i) const {
        std::size_t K = tuples_.size();
        return sign_[rank_.at(key_of(j)) * K + rank_.at(key_of(i))];
    }

private:
    static std::uint64_t key_of(const IndexTuple& t) {
        std::uint64_t k = 0;
        for (int x : t) k |= std::uint64_t{1} << (x - 1);
        return k;
    }

    PairMap sigma_;
    int k_;
    std::vector<IndexTuple> tuples_;
    std::unordered_map<std::uint64_t, std::size_t> rank_;
    std::vector<int> sign_;
};

/// Ensemble average of v_{j i} v_{j' i'} at unit scale.
inline int second_moment_kernel(int beta, const IndexTuple& j, const IndexTuple& i, const IndexTuple& jp,
                                const IndexTuple& ip, const SymplecticSigns* signs = nullptr) {
    if (j.size() != i.size() || jp.size() != ip.size() || j.size() != jp.size())
        throw std::invalid_argument("kernel tuples must share one order k");
    if (beta == 4 && !signs) throw std::invalid_argument("beta=4 requires a pair map");
    if (beta != 1 && beta != 2 && beta != 4) throw std::invalid_argument("beta must be 1, 2 or 4");
    int v = (j == ip && i == jp) ? 1 : 0;
    if (beta == 1 && j == jp && i == ip) v += 1;
    if (beta == 4 && signs && j == signs->sigma().apply(jp) && i == signs->sigma().apply(ip)) v += signs->sgn(j, i);
    return v;
}

// ---------------------------------------------------------------------------
// Couplings
// ---------------------------------------------------------------------------

class CouplingKernel {
public:
    explicit CouplingKernel(EnsembleParams p) : params_(std::move(p)) {
        params_.validate();
        tuples_ = all_tuples(params_.l, params_.k, params_.statistics);
        for (std::size_t t = 0; t < tuples_.size(); ++t)
            rank_.emplace(OccupationState::from_levels(params_.statistics, params_.l, tuples_[t]).key(), t);
        values_.assign(tuples_.size() * tuples_.size(), {0.0, 0.0});
    }

    const EnsembleParams& params() const { return params_; }
    const std::vector<IndexTuple>& tuples() const { return tuples_; }
    std::size_t tuple_count() const { return tuples_.size(); }

    std::size_t rank(const IndexTuple& t) const {
        return rank_.at(OccupationState::from_levels(params_.statistics, params_.l, t).key());
    }
    std::size_t rank_of_key(std::uint64_t key) const { return rank_.at(key); }

    std::complex<double> operator()(std::size_t rj, std::size_t ri) const { return values_[rj * tuples_.size() + ri]; }
    std::complex<double>& at(std::size_t rj, std::size_t ri) { return values_[rj * tuples_.size() + ri]; }
    std::complex<double> value(const IndexTuple& j, const IndexTuple& i) const { return (*this)(rank(j), rank(i)); }

    /// Independent random entries: one per diagonal pair plus one per unordered off-diagonal pair.
    std::size_t free_parameter_count() const {
        std::size_t K = tuples_.size();
        return K + K * (K - 1) / 2;
    }

    /// Deterministic JSON form: parameters, then (j, i, re, im) rows in (rank j, rank i) order.
    nlohmann::json dump() const {
        nlohmann::json rows = nlohmann::json::array();
        std::size_t K = tuples_.size();
        for (std::size_t a = 0; a < K; ++a)
            for (std::size_t b = 0; b < K; ++b) {
                auto v = values_[a * K + b];
                rows.push_back({{"j", tuples_[a]}, {"i", tuples_[b]}, {"re", v.real()}, {"im", v.imag()}});
            }
        return {{"schema_version", 1},
                {"params",
                 {{"beta", params_.beta},
                  {"k", params_.k},
                  {"m", params_.m},
                  {"l", params_.l},
                  {"statistics", to_string(params_.statistics)},
                  {"v0", params_.v0}}},
                {"entries", rows}};
    }

private:
    EnsembleParams params_;
    std::vector<IndexTuple> tuples_;
    std::unordered_map<std::uint64_t, std::size_t> rank_;
    std::vector<std::complex<double>> values_;
};

/// Gaussian couplings honoring the beta symmetry. Entry (a, b), a <= b, draws from counter a*K + b.
/// beta=2: v(i,j) = conj v(j,i), off-diagonal real and imaginary parts of variance 1/2, real diagonal of variance 1.
/// beta=1: real symmetric, off-diagonal variance 1, diagonal variance 2.
inline CouplingKernel sample_couplings(const EnsembleParams& params, const CounterRng& rng) {
    if (params.beta == 4) throw std::invalid_argument("beta=4 sampling is not supported");
    CouplingKernel kernel(params);
    std::size_t K = kernel.tuple_count();
    const double s = params.v0;
    for (std::size_t a = 0; a < K; ++a) {
        for (std::size_t b = a; b < K; ++b) {
            auto [x, y] = rng.normal_pair(a * K + b);
            if (params.beta == 2) {
                if (a == b) {
                    kernel.at(a, a) = {s * x, 0.0};
                } else {
                    std::complex<double> v{s * x * std::numbers::sqrt2 / 2, s * y * std::numbers::sqrt2 / 2};
                    kernel.at(a, b) = v;
                    kernel.at(b, a) = std::conj(v);
                }
            } else {
                double v = a == b ? s * std::numbers::sqrt2 * x : s * x;
                kernel.at(a, b) = {v, 0.0};
                kernel.at(b, a) = {v, 0.0};
            }
        }
    }
    return kernel;
}

inline CouplingKernel sample_couplings(const EnsembleParams& params, std::uint64_t seed) {
    return sample_couplings(params, CounterRng(seed));
}

// ---------------------------------------------------------------------------
// Hamiltonian
// ---------------------------------------------------------------------------

using HermitianMatrix = Eigen::MatrixXcd;

inline constexpr std::size_t default_dimension_cap = 6000;

/// H_{mu nu} = sum_{j,i} v(j,i) <mu| a+_j a_i |nu>.
inline HermitianMatrix build_hamiltonian(const CouplingKernel& kernel, const Basis& basis,
                                         std::size_t cap = default_dimension_cap) {
    const auto& p = kernel.params();
    if (basis.levels() != p.l || basis.statistics() != p.statistics || basis.particles() != p.m)
        throw std::invalid_argument("kernel and basis disagree on (l, m, statistics)");
    if (basis.size() > cap) throw std::length_error("Hamiltonian dimension above cap");
    const auto N = static_cast<Eigen::Index>(basis.size());
    HermitianMatrix H = HermitianMatrix::Zero(N, N);
    for (std::size_t nu = 0; nu < basis.size(); ++nu) {
        for (const auto& i : k_subsets(basis[nu], p.k)) {
            auto a = apply_annihilation_string(basis[nu], i);
            std::size_t ri = kernel.rank(i);
            for (std::size_t rj = 0; rj < kernel.tuple_count(); ++rj) {
                auto c = apply_creation_string(a.state, kernel.tuples()[rj]);
                if (c.killed()) continue;
                Amplitude amp = a.amplitude;
                amp *= c.amplitude;
                std::size_t mu = basis.index_of(c.state);
                H(static_cast<Eigen::Index>(mu), static_cast<Eigen::Index>(nu)) += amp.value() * kernel(rj, ri);
            }
        }
    }
    return H;
}

}  // namespace embrmt
