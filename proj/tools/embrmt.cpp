// embrmt: moment tables, Monte Carlo runs, exact verification, diagram reports,
// density exports and Dyck enumeration for embedded random matrix ensembles.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <embrmt/combinatorics.hpp>
#include <embrmt/diagrams.hpp>
#include <embrmt/ensemble.hpp>
#include <embrmt/fock.hpp>
#include <embrmt/formulas.hpp>
#include <embrmt/spectral.hpp>
#include <embrmt/wick.hpp>

using json = nlohmann::json;
using namespace embrmt;

namespace {

constexpr int schema_version = 1;
constexpr std::uint64_t default_seed = 20240917;

json big(const BigCount& v) {
    if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max())
        return static_cast<std::int64_t>(v);
    return v.str();
}

json rational(const ExactRatio& r) {
    return {{"num", big(ratio_numerator(r))}, {"den", big(ratio_denominator(r))}, {"approx", to_double(r)}};
}

std::string fixed(double x, int digits = 10) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

struct Ensemble {
    int beta = 2;
    int l = 8, m = 4, k = 1;
    std::string statistics = "fermionic";
    double v0 = 1.0;

    void add(CLI::App* app) {
        app->add_option("--beta", beta, "symmetry class (1 or 2)")->check(CLI::IsMember({1, 2, 4}));
        app->add_option("--l", l, "single-particle levels");
        app->add_option("--m", m, "particles");
        app->add_option("--k", k, "interaction rank");
        app->add_option("--statistics", statistics)->check(CLI::IsMember({"fermionic", "bosonic"}));
        app->add_option("--v0", v0, "coupling scale");
    }

    EnsembleParams params() const {
        EnsembleParams p;
        p.beta = beta;
        p.l = l;
        p.m = m;
        p.k = k;
        p.v0 = v0;
        p.statistics = statistics == "bosonic" ? Statistics::bosonic : Statistics::fermionic;
        if (beta == 4 && l % 2 == 0) p.sigma = PairMap::adjacent(l);
        p.validate();
        return p;
    }
};

std::vector<int> parse_orders(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        std::size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument("bad order list: " + s);
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty order list");
    return out;
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot open output file " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

// ---------------------------------------------------------------------------
// moments
// ---------------------------------------------------------------------------

json moments_table(std::int64_t m, std::int64_t k, const std::vector<int>& orders, HahnVariant hv) {
    static const char* names[] = {"", "beta2", "kappa", "h", "tau"};
    json rows = json::array();
    for (int o : orders) {
        if (o % 2 || o < 2 || o > 8) throw std::invalid_argument("closed forms exist for orders 2, 4, 6, 8");
        int n = o / 2;
        json terms = json::array();
        std::vector<MomentTerm> ts;
        if (n == 2) ts = fourth_moment_terms(m, k);
        if (n == 3) ts = sixth_moment_terms(m, k);
        if (n == 4) ts = eighth_moment_terms(m, k, hv);
        for (const auto& t : ts)
            terms.push_back({{"name", t.name}, {"multiplicity", t.multiplicity}, {"value", rational(t.value)}});
        rows.push_back({{"order", o},
                        {"symbol", names[n]},
                        {"value", rational(nth_moment_limit(n, m, k, hv))},
                        {"gaussian", big(gaussian_moment(n))},
                        {"semicircle", big(semicircle_moment(n))},
                        {"terms", terms}});
    }
    return {{"schema_version", schema_version},
            {"command", "moments"},
            {"m", m},
            {"k", k},
            {"regime", to_string(regime_of(m, k))},
            {"hahn_variant", hv == HahnVariant::lemma ? "lemma" : "printed"},
            {"moments", rows}};
}

void print_moments_text(const json& j, std::ostream& os) {
    os << "m=" << j["m"] << " k=" << j["k"] << " regime: " << j["regime"].get<std::string>() << "\n";
    os << "order  symbol  exact                     decimal       gaussian  semicircle\n";
    for (const auto& r : j["moments"]) {
        std::string exact = r["value"]["num"].dump() + "/" + r["value"]["den"].dump();
        char line[256];
        std::snprintf(line, sizeof line, "%-6d %-7s %-25s %-13s %-9s %s\n", r["order"].get<int>(),
                      r["symbol"].get<std::string>().c_str(), exact.c_str(),
                      fixed(r["value"]["approx"].get<double>()).c_str(), r["gaussian"].dump().c_str(),
                      r["semicircle"].dump().c_str());
        os << line;
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

json moment_report_json(const MomentReport& r) {
    json rows = json::array();
    for (const auto& e : r.moments)
        rows.push_back({{"order", e.order},
                        {"estimate", e.estimate},
                        {"std_error", e.std_error},
                        {"samples", r.samples},
                        {"numerator_mean", e.numerator_mean},
                        {"denominator_mean", e.denominator_mean}});
    const auto& p = r.params;
    return {{"schema_version", schema_version},
            {"command", "simulate"},
            {"params",
             {{"beta", p.beta}, {"l", p.l}, {"m", p.m}, {"k", p.k}, {"statistics", to_string(p.statistics)}, {"v0", p.v0}}},
            {"samples", r.samples},
            {"seed", r.seed},
            {"dimension", r.dimension},
            {"moments", rows}};
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct Suite {
    json checks = json::array();
    bool ok = true;

    template <class F>
    void run(const std::string& name, F&& f) {
        std::string detail;
        bool pass = false;
        try {
            pass = f(detail);
        } catch (const std::exception& e) {
            detail = std::string("error: ") + e.what();
        }
        ok = ok && pass;
        checks.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
    }
};

json verify_suite(std::uint64_t max_dim, OpBudget& budget) {
    Suite s;
    s.run("second trace equals N C(m,k) C(l-m+k,k)", [&](std::string& d) {
        int cases = 0;
        for (int l = 1; l <= 20; ++l)
            for (int m = 0; m <= l; ++m) {
                if (binomial(l, m) > max_dim) continue;
                for (int k = 0; k <= m; ++k) {
                    BigCount want = binomial(l, m) * lambda0(m, k, l);
                    if (exact_even_trace(l, m, k, 2, 2, Statistics::fermionic, &budget) != want) {
                        d = "mismatch at l=" + std::to_string(l) + " m=" + std::to_string(m) + " k=" + std::to_string(k);
                        return false;
                    }
                    ++cases;
                }
            }
        d = std::to_string(cases) + " (l,m,k) triples";
        return true;
    });
    s.run("k=m traces follow 2N^3+N and 5N^4+10N^2", [&](std::string& d) {
        int cases = 0;
        for (int l = 1; l <= 20; ++l)
            for (int m = 1; m <= l; ++m) {
                BigCount N = binomial(l, m);
                if (N > max_dim || N > 20) continue;
                if (exact_even_trace(l, m, m, 4, 2, Statistics::fermionic, &budget) != 2 * N * N * N + N) return false;
                if (exact_even_trace(l, m, m, 6, 2, Statistics::fermionic, &budget) != 5 * N * N * N * N + 10 * N * N)
                    return false;
                ++cases;
            }
        auto poly = km_trace_polynomial(8);
        d = std::to_string(cases) + " (l,m) pairs; leading coefficient at order 8 is " + poly.rbegin()->second.str();
        return poly.rbegin()->first == 5 && poly.rbegin()->second == 14;
    });
    s.run("limits hit Gaussian values at k=0 and Catalan values for 2k>m", [&](std::string& d) {
        for (std::int64_t m = 0; m <= 40; ++m) {
            for (int n = 2; n <= 4; ++n)
                if (nth_moment_limit(n, m, 0) != ExactRatio(gaussian_moment(n))) return false;
            for (std::int64_t k = m / 2 + 1; k <= m; ++k)
                for (int n = 2; n <= 4; ++n)
                    if (nth_moment_limit(n, m, k) != ExactRatio(semicircle_moment(n))) return false;
        }
        d = "m <= 40";
        return true;
    });
    s.run("Hahn identity", [&](std::string& d) {
        for (std::int64_t m = 0; m <= 30; ++m)
            for (std::int64_t k = 0; 2 * k <= m; ++k)
                if (hahn_lhs(m, k) != hahn_rhs(m, k)) return false;
        d = "0 <= 2k <= m <= 30";
        return true;
    });
    s.run("diagram classes reassemble the closed forms", [&](std::string& d) {
        int cases = 0;
        for (std::int64_t m = 0; m <= 14; ++m)
            for (std::int64_t k = 0; k <= m; ++k)
                for (int n = 2; n <= 4; ++n) {
                    if (assemble_moment(n, m, k) != nth_moment_limit(n, m, k)) {
                        d = "mismatch at n=" + std::to_string(n) + " m=" + std::to_string(m) + " k=" + std::to_string(k);
                        return false;
                    }
                    ++cases;
                }
        d = std::to_string(cases) + " (n,m,k) cases";
        return true;
    });
    s.run("exact finite-l fourth moment approaches the limit", [&](std::string& d) {
        ExactRatio limit = fourth_moment_limit(4, 1), last_gap = -1;
        for (int l : {8, 16, 24, 32}) {
            ExactRatio gap = limit - exact_moment(l, 4, 1, 4, 2, Statistics::fermionic, &budget, true);
            if (gap <= 0 || (last_gap >= 0 && gap >= last_gap)) return false;
            last_gap = gap;
        }
        d = "(m,k)=(4,1), l in {8,16,24,32}, final gap " + fixed(to_double(last_gap), 6);
        return true;
    });
    s.run("Dyck words are counted by Catalan numbers", [&](std::string& d) {
        for (int n = 0; n <= 12; ++n)
            if (BigCount(dyck_words(n).size()) != catalan(n)) return false;
        d = "n <= 12";
        return true;
    });

    json variants = json::array();
    for (auto [m, k] : std::vector<std::pair<int, int>>{{4, 1}, {6, 2}, {8, 2}, {9, 3}, {12, 4}}) {
        ExactRatio engine = assemble_moment(4, m, k);
        ExactRatio lemma = eighth_moment_limit(m, k, HahnVariant::lemma);
        ExactRatio printed = eighth_moment_limit(m, k, HahnVariant::printed);
        variants.push_back({{"m", m},
                            {"k", k},
                            {"diagrams", rational(engine)},
                            {"lemma", rational(lemma)},
                            {"printed", rational(printed)},
                            {"lemma_matches", lemma == engine},
                            {"printed_matches", printed == engine}});
    }
    return {{"schema_version", schema_version},
            {"command", "verify"},
            {"max_dim", max_dim},
            {"checks", s.checks},
            {"hahn_variants", variants},
            {"oracle_ops", budget.used()},
            {"pass", s.ok}};
}

// ---------------------------------------------------------------------------
// diagrams
// ---------------------------------------------------------------------------

std::string bond_name(const ParticleDiagram& d, const Bond& b) {
    return std::string(1, ContractionPattern::letter(d.labels[static_cast<std::size_t>(b.u)])) + "-" +
           ContractionPattern::letter(d.labels[static_cast<std::size_t>(b.v)]) +
           (b.size == BondSize::k ? " (k)" : " (m-k)");
}

json diagram_report(int order, std::int64_t m, std::int64_t k, std::int64_t l, std::size_t max_solutions) {
    auto classes = canonical_classes(order);
    json out = json::array();
    for (const auto& c : classes) {
        const auto& sys = c.system;
        const auto& d = sys.diagram;
        json pairing = json::array();
        for (auto [a, b] : c.representative.pairing) pairing.push_back({a, b});
        json bonds = json::array();
        for (const auto& b : d.bonds) bonds.push_back({{"bond", bond_name(d, b)}, {"factor", b.factor}});
        json loops = json::array();
        for (std::size_t L = 0; L < sys.loops.size(); ++L) {
            json seq = json::array();
            for (int b : sys.loops[L]) seq.push_back(b);
            loops.push_back({{"loop", "L" + std::to_string(L)}, {"bonds", seq}});
        }
        json equations = json::array();
        for (std::size_t b = 0; b < d.bonds.size(); ++b) {
            std::string lhs;
            for (int L : sys.through[b]) lhs += (lhs.empty() ? "" : " + ") + std::string("L") + std::to_string(L);
            equations.push_back(lhs + " = " + (d.bonds[b].size == BondSize::k ? "k" : "m-k"));
        }
        json entry = {{"name", c.name},
                      {"multiplicity", c.multiplicity()},
                      {"tails", c.tails()},
                      {"pairing", pairing},
                      {"product", c.representative.str()},
                      {"reduced_product", c.representative.str(true)},
                      {"nodes", d.nodes()},
                      {"bonds", bonds},
                      {"loops", loops},
                      {"equations", equations},
                      {"limit_coefficient", rational(limit_coefficient(sys, m, k))}};
        if (!d.factors.empty()) {
            auto cert = certify_argument(sys);
            entry["argument"] = cert ? json(argument_string(cert->first, cert->second)) : json(nullptr);
            auto t = maximize_argument(sys, m, k);
            json family = json::array();
            for (std::size_t i = 0; i < t.optimal.size() && i < max_solutions; ++i) family.push_back(t.optimal[i]);
            json ranges = json::array();
            for (std::size_t L = 0; L < t.low.size(); ++L) ranges.push_back({t.low[L], t.high[L]});
            entry["max_argument"] = t.max_argument;
            entry["free_parameters"] = t.free_parameters;
            entry["optimal_count"] = t.optimal.size();
            entry["optimal"] = family;
            entry["loop_ranges"] = ranges;
            if (l >= t.max_argument) entry["leading_term_value"] = big(leading_term_value(t, l));
        } else {
            entry["argument"] = "0";
        }
        out.push_back(entry);
    }
    return {{"schema_version", schema_version},
            {"command", "diagrams"},
            {"order", order},
            {"m", m},
            {"k", k},
            {"l", l},
            {"classes", out},
            {"moment_limit", rational(assemble_moment(order / 2, m, k))}};
}

void print_diagrams_text(const json& j, std::ostream& os) {
    os << "order " << j["order"] << " at m=" << j["m"] << " k=" << j["k"] << " l=" << j["l"] << "\n";
    for (const auto& c : j["classes"]) {
        os << "\n" << (c["name"].get<std::string>().empty() ? "(unnamed)" : c["name"].get<std::string>()) << "  x"
           << c["multiplicity"] << "  tails " << c["tails"] << "\n";
        os << "  product  " << c["product"].get<std::string>() << "\n";
        os << "  reduced  " << c["reduced_product"].get<std::string>() << "\n";
        if (c["nodes"].get<std::size_t>() == 0) continue;
        os << "  " << c["loops"].size() << " loops, " << c["bonds"].size() << " bonds\n";
        for (const auto& e : c["equations"]) os << "    " << e.get<std::string>() << "\n";
        os << "  argument " << (c["argument"].is_null() ? "uncertified" : c["argument"].get<std::string>()) << " (max "
           << c["max_argument"] << " here), " << c["optimal_count"] << " optimal solutions, " << c["free_parameters"]
           << " free parameters\n";
        if (c.contains("leading_term_value")) os << "  leading term " << c["leading_term_value"].dump() << "\n";
    }
    os << "\nlimit moment " << j["moment_limit"]["num"].dump() << "/" << j["moment_limit"]["den"].dump() << "\n";
}

// ---------------------------------------------------------------------------
// dyck
// ---------------------------------------------------------------------------

json dyck_report(int n, std::size_t limit) {
    auto words = dyck_words(n);
    json list = json::array();
    for (std::size_t i = 0; i < words.size() && i < limit; ++i) list.push_back(words[i]);
    json out = {{"schema_version", schema_version},
                {"command", "dyck"},
                {"n", n},
                {"catalan", big(catalan(n))},
                {"count", words.size()},
                {"words", list},
                {"truncated", words.size() > limit}};
    if (2 * n <= max_pairing_slots) out["noncrossing_pairings"] = big(noncrossing_pairing_count(n));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Embedded random matrix ensembles: moments, simulations and particle diagrams"};
    app.require_subcommand(1);
    app.fallthrough();
    std::uint64_t budget_ops = 0;
    std::string output;
    std::string format = "json";
    app.add_option("--budget", budget_ops, "cap on exact-oracle operations (0 = unlimited)");
    app.add_option("-o,--output", output, "write to a file instead of stdout");
    app.add_option("--format", format, "json or text (csv for density)")->check(CLI::IsMember({"json", "text", "csv"}));

    auto* moments = app.add_subcommand("moments", "closed-form limit moments");
    std::int64_t mm = 0, mk = 0;
    std::string orders = "4,6,8", hahn = "lemma";
    moments->add_option("--m", mm)->required();
    moments->add_option("--k", mk)->required();
    moments->add_option("--orders", orders);
    moments->add_option("--hahn", hahn)->check(CLI::IsMember({"lemma", "printed"}));

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo moment estimates");
    Ensemble sim;
    sim.add(simulate);
    std::size_t samples = 200;
    std::uint64_t seed = default_seed;
    std::string sim_orders = "4,6,8";
    bool with_exact = false;
    simulate->add_option("--samples", samples);
    simulate->add_option("--seed", seed);
    simulate->add_option("--orders", sim_orders);
    simulate->add_flag("--exact", with_exact, "also report the exact finite-l value from the Wick oracle");

    auto* verify = app.add_subcommand("verify", "oracle versus formula identity suite");
    std::uint64_t max_dim = 70;
    verify->add_option("--max-dim", max_dim, "largest C(l,m) used by the trace checks");

    auto* diagrams = app.add_subcommand("diagrams", "particle diagram report");
    int order = 4;
    std::int64_t dm = 8, dk = 2, dl = 24;
    std::size_t max_solutions = 32;
    diagrams->add_option("--order", order)->required()->check(CLI::IsMember({4, 6, 8}));
    diagrams->add_option("--m", dm);
    diagrams->add_option("--k", dk);
    diagrams->add_option("--l", dl);
    diagrams->add_option("--max-solutions", max_solutions, "optimal solutions listed per class");

    auto* density = app.add_subcommand("density", "pooled eigenvalue histogram with semicircle overlay (CSV)");
    Ensemble den;
    den.l = 12;
    den.m = 4;
    den.k = 3;
    den.add(density);
    std::size_t den_samples = 50, bins = 40;
    std::uint64_t den_seed = default_seed;
    density->add_option("--samples", den_samples);
    density->add_option("--bins", bins);
    density->add_option("--seed", den_seed);

    auto* dyck = app.add_subcommand("dyck", "Dyck words, Catalan and non-crossing counts");
    int dn = 3;
    std::size_t word_limit = 1000;
    dyck->add_option("--n", dn)->required()->check(CLI::Range(0, 14));
    dyck->add_option("--limit", word_limit, "words listed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        OpBudget budget(budget_ops ? budget_ops : OpBudget::unlimited);
        Output out(output);
        auto& os = out.stream();
        if (*moments) {
            auto j = moments_table(mm, mk, parse_orders(orders), hahn == "lemma" ? HahnVariant::lemma : HahnVariant::printed);
            if (format == "text") print_moments_text(j, os);
            else os << j.dump(2) << "\n";
        } else if (*simulate) {
            auto p = sim.params();
            auto report = estimate_moments(p, parse_orders(sim_orders), samples, seed);
            auto j = moment_report_json(report);
            if (with_exact) {
                if (p.beta == 4) throw std::invalid_argument("exact values need beta 1 or 2");
                for (auto& row : j["moments"])
                    row["exact"] = rational(exact_moment(p.l, p.m, p.k, row["order"].get<int>(), p.beta, p.statistics, &budget, true));
            }
            os << j.dump(2) << "\n";
        } else if (*verify) {
            auto j = verify_suite(max_dim, budget);
            os << j.dump(2) << "\n";
            return j["pass"].get<bool>() ? 0 : 1;
        } else if (*diagrams) {
            auto j = diagram_report(order, dm, dk, dl, max_solutions);
            if (format == "text") print_diagrams_text(j, os);
            else os << j.dump(2) << "\n";
        } else if (*density) {
            auto h = empirical_density(den.params(), den_samples, bins, den_seed);
            os << "# schema_version: " << schema_version << "\n";
            os << "# radius: " << fixed(h.radius, 12) << ", eigenvalues: " << h.eigenvalues
               << ", l1_distance: " << fixed(h.l1_distance(), 8) << "\n";
            os << "bin_lo,bin_hi,height,overlay_height\n";
            for (std::size_t b = 0; b < h.bins(); ++b)
                os << fixed(h.edges[b], 12) << "," << fixed(h.edges[b + 1], 12) << "," << fixed(h.heights[b], 12) << ","
                   << fixed(h.overlay[b], 12) << "\n";
        } else if (*dyck) {
            os << dyck_report(dn, word_limit).dump(2) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
