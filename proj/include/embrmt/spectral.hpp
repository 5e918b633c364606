#pragma once

// Monte Carlo level-density moments and pooled spectra.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "combinatorics.hpp"
#include "ensemble.hpp"
#include "fock.hpp"

namespace embrmt {

class EigensolverFailure : public std::runtime_error {
public:
    EigensolverFailure() : std::runtime_error("Hermitian eigensolver did not converge") {}
};

inline Eigen::VectorXd eigenvalues(const HermitianMatrix& H) {
    if (H.rows() == 0) return {};
    Eigen::SelfAdjointEigenSolver<HermitianMatrix> es(H, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw EigensolverFailure();
    return es.eigenvalues();
}

/// (1/N) sum_i lambda_i^p for each requested power p.
inline std::vector<double> realization_traces(const HermitianMatrix& H, const std::vector<int>& orders) {
    for (int p : orders)
        if (p < 0) throw std::invalid_argument("trace orders must be nonnegative");
    auto ev = eigenvalues(H);
    std::vector<double> out(orders.size(), 0.0);
    if (ev.size() == 0) return out;
    for (std::size_t o = 0; o < orders.size(); ++o) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) s += std::pow(ev[i], orders[o]);
        out[o] = s / static_cast<double>(ev.size());
    }
    return out;
}

/// Lambda0 = C(m,k) C(l-m+k,k), the single-state second moment.
inline BigCount lambda0(std::int64_t m, std::int64_t k, std::int64_t l) {
    if (k < 0 || k > m || m > l) throw std::invalid_argument("need 0 <= k <= m <= l");
    return binomial(m, k) * binomial(l - m + k, k);
}

struct MomentEstimate {
    int order = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    double numerator_mean = 0.0;    ///< mean of tr(H^order)/N
    double denominator_mean = 0.0;  ///< mean of tr(H^2)/N raised to order/2
};

struct MomentReport {
    EnsembleParams params;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::size_t dimension = 0;
    std::vector<MomentEstimate> moments;

    const MomentEstimate& at(int order) const {
        for (const auto& e : moments)
            if (e.order == order) return e;
        throw std::out_of_range("order not in report");
    }
};

namespace detail {

/// Runs f(sample index) for every sample on a fixed pool; results land by index.
template <class F>
void for_each_sample(std::size_t samples, F&& f) {
    std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), samples));
    if (workers == 1) {
        for (std::size_t s = 0; s < samples; ++s) f(s);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex mu;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t s = w; s < samples; s += workers) f(s);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!err) err = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

inline std::vector<Eigen::VectorXd> sample_spectra(const EnsembleParams& params, std::size_t samples, std::uint64_t seed,
                                                   const Basis& basis, std::size_t cap) {
    CounterRng root(seed);
    std::vector<Eigen::VectorXd> spectra(samples);
    for_each_sample(samples, [&](std::size_t s) {
        auto kernel = sample_couplings(params, root.split(s));
        spectra[s] = eigenvalues(build_hamiltonian(kernel, basis, cap));
    });
    return spectra;
}

}  // namespace detail

/// beta_{2n} = <tr H^{2n}/N> / <tr H^2/N>^n over independent realizations, each
/// drawn from stream `s` of the seed. Errors follow from the delta method applied
/// to the per-sample pairs (tr H^{2n}/N, tr H^2/N).
inline MomentReport estimate_moments(const EnsembleParams& params, const std::vector<int>& orders, std::size_t samples,
                                     std::uint64_t seed, std::size_t dimension_cap = default_dimension_cap) {
    params.validate();
    if (samples < 2) throw std::invalid_argument("need at least 2 samples for an error estimate");
    for (int p : orders)
        if (p < 2 || p % 2) throw std::invalid_argument("moment orders must be even and >= 2");
    Basis basis(params.l, params.m, params.statistics, dimension_cap);

    std::vector<int> powers = orders;
    powers.push_back(2);
    CounterRng root(seed);
    std::vector<std::vector<double>> traces(samples);
    detail::for_each_sample(samples, [&](std::size_t s) {
        auto kernel = sample_couplings(params, root.split(s));
        traces[s] = realization_traces(build_hamiltonian(kernel, basis, dimension_cap), powers);
    });

    MomentReport r;
    r.params = params;
    r.samples = samples;
    r.seed = seed;
    r.dimension = basis.size();
    const double S = static_cast<double>(samples);
    const std::size_t d = powers.size() - 1;
    double b = 0.0;
    for (const auto& t : traces) b += t[d];
    b /= S;
    for (std::size_t o = 0; o < orders.size(); ++o) {
        const double n = orders[o] / 2.0;
        double a = 0.0;
        for (const auto& t : traces) a += t[o];
        a /= S;
        double vaa = 0.0, vbb = 0.0, vab = 0.0;
        for (const auto& t : traces) {
            vaa += (t[o] - a) * (t[o] - a);
            vbb += (t[d] - b) * (t[d] - b);
            vab += (t[o] - a) * (t[d] - b);
        }
        vaa /= S - 1;
        vbb /= S - 1;
        vab /= S - 1;
        MomentEstimate e;
        e.order = orders[o];
        e.numerator_mean = a;
        e.denominator_mean = std::pow(b, n);
        if (!(b > 0.0)) throw std::domain_error("second moment vanishes; moments undefined");
        e.estimate = a / e.denominator_mean;
        // gradient of a / b^n
        const double ga = 1.0 / e.denominator_mean, gb = -n * e.estimate / b;
        double var = (ga * ga * vaa + gb * gb * vbb + 2 * ga * gb * vab) / S;
        e.std_error = std::sqrt(std::max(0.0, var));
        r.moments.push_back(e);
    }
    return r;
}

struct DensityHistogram {
    std::vector<double> edges;     ///< bins + 1 increasing edges
    std::vector<std::uint64_t> counts;
    std::vector<double> heights;   ///< normalized so that sum heights * width = 1
    std::vector<double> overlay;   ///< semicircle of radius `radius`, averaged over each bin
    double radius = 0.0;
    std::size_t eigenvalues = 0;   ///< pooled eigenvalues inside the range

    std::size_t bins() const { return counts.size(); }
    double width() const { return edges.empty() ? 0.0 : edges[1] - edges[0]; }

    /// sum |height - overlay| * width
    double l1_distance() const {
        double s = 0.0;
        for (std::size_t b = 0; b < bins(); ++b) s += std::abs(heights[b] - overlay[b]);
        return s * width();
    }
};

/// Semicircle mass on [x0, x1] for radius R.
inline double semicircle_mass(double x0, double x1, double R) {
    if (R <= 0.0) return (x0 <= 0.0 && 0.0 < x1) ? 1.0 : 0.0;
    auto F = [R](double x) {
        double t = std::clamp(x / R, -1.0, 1.0);
        return 0.5 + (t * std::sqrt(1.0 - t * t) + std::asin(t)) / std::numbers::pi;
    };
    return F(x1) - F(x0);
}

/// Pooled eigenvalue histogram over [-1.2R, 1.2R] with R = 2 v0 sqrt(Lambda0), plus the
/// bin-averaged semicircle of the same radius. A degenerate R = 0 falls back to [-1, 1].
inline DensityHistogram empirical_density(const EnsembleParams& params, std::size_t samples, std::size_t bins,
                                          std::uint64_t seed, std::size_t dimension_cap = default_dimension_cap) {
    params.validate();
    if (samples < 1) throw std::invalid_argument("need at least one sample");
    if (bins < 1) throw std::invalid_argument("need at least one bin");
    Basis basis(params.l, params.m, params.statistics, dimension_cap);
    auto spectra = detail::sample_spectra(params, samples, seed, basis, dimension_cap);

    DensityHistogram h;
    h.radius = 2.0 * params.v0 * std::sqrt(to_double(ExactRatio(lambda0(params.m, params.k, params.l))));
    const double half = h.radius > 0.0 ? 1.2 * h.radius : 1.0;
    const double w = 2.0 * half / static_cast<double>(bins);
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = -half + w * static_cast<double>(b);
    h.edges[bins] = half;
    h.counts.assign(bins, 0);
    for (const auto& ev : spectra)
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            double x = ev[i];
            if (x < -half || x > half) continue;
            auto b = static_cast<std::size_t>((x + half) / w);
            ++h.counts[std::min(b, bins - 1)];
            ++h.eigenvalues;
        }
    h.heights.assign(bins, 0.0);
    if (h.eigenvalues)
        for (std::size_t b = 0; b < bins; ++b)
            h.heights[b] = static_cast<double>(h.counts[b]) / (static_cast<double>(h.eigenvalues) * w);
    h.overlay.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) h.overlay[b] = semicircle_mass(h.edges[b], h.edges[b + 1], h.radius) / w;
    return h;
}

}  // namespace embrmt
