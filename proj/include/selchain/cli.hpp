#pragma once

// Command-line front end. run() parses, dispatches and maps failures to exit
// codes: 0 success, 1 computation error, 2 usage error. Diagnostics go to err,
// data to out.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "selchain/arith/classgroup.hpp"
#include "selchain/arith/selmer.hpp"
#include "selchain/chains.hpp"
#include "selchain/error.hpp"
#include "selchain/ffstats.hpp"
#include "selchain/grids/bye_ramsey.hpp"
#include "selchain/grids/grid.hpp"
#include "selchain/harness/gates.hpp"
#include "selchain/harness/sweeps.hpp"

namespace selchain::cli {

enum class Format { csv, json, pretty };

using Json = nlohmann::ordered_json;

struct usage_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string num(double v, int digits = 12)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline std::string num(long double v, int digits = 12) { return num(static_cast<double>(v), digits); }

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

inline Rational parse_rational(const std::string& s)
{
    try {
        mpq_class q(s);
        q.canonicalize();
        return Rational(q);
    } catch (const std::invalid_argument&) {
        throw usage_error("not a rational number: " + s);
    }
}

inline std::uint64_t parse_u64(const std::string& s)
{
    std::size_t pos = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || s.empty() || s[0] == '-') throw usage_error("not a nonnegative integer: " + s);
    return v;
}

// "limit" or "j:p,j:p,..."
inline chains::Start parse_start(const std::string& s)
{
    if (s == "limit") return chains::LimitStart{};
    chains::ExactStart law;
    for (const auto& item : split(s, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw usage_error("start entries look like j:p, got " + item);
        law[static_cast<unsigned>(parse_u64(item.substr(0, colon)))] = parse_rational(item.substr(colon + 1));
    }
    if (law.empty()) throw usage_error("empty start law");
    return law;
}

inline Json dist_json(const std::map<unsigned, double>& d)
{
    auto j = Json::object();
    for (const auto& [k, v] : d) j[std::to_string(k)] = v;
    return j;
}

inline std::string dist_pretty(const std::map<unsigned, double>& d)
{
    std::string s = "{";
    bool first = true;
    for (const auto& [k, v] : d) {
        s += (first ? "" : ", ") + std::to_string(k) + ": " + num(v, 10);
        first = false;
    }
    return s + "}";
}

} // namespace detail

/// Shared options filled by the parser.
struct Globals {
    std::string format = "pretty";
    std::string cache;
    bool no_timing = false;

    Format fmt() const { return format == "csv" ? Format::csv : format == "json" ? Format::json : Format::pretty; }
    harness::fs::path cache_dir() const { return cache.empty() ? harness::default_cache_dir() : harness::fs::path(cache); }
};

struct MatstatsArgs {
    bool alt = false;
    int u = 0;
    std::uint64_t ell = 2;
    unsigned n = 0;
    bool limit = false;
};

inline int matstats(const Globals& g, const MatstatsArgs& a, std::ostream& out)
{
    struct Row {
        unsigned j;
        Rational p;
        std::string count, total;
        double value;
    };
    std::vector<Row> rows;
    if (a.limit) {
        if (!a.alt && a.u < 0) throw usage_error("limit needs u >= 0");
        for (unsigned j = 0;; ++j) {
            const double v = a.alt ? ffstats::p_alt_limit(j).value : ffstats::p_mat_limit(a.u, a.ell, j).value;
            if (v < 1e-14) break;
            rows.push_back({j, Rational(0), "", "", v});
        }
    } else {
        ffstats::EnsembleSpec spec;
        spec.ell = a.ell;
        spec.n = a.n;
        if (a.alt) {
            if (a.ell != 2) throw usage_error("--alt uses ell = 2");
            spec.kind = ffstats::Alternating{};
        } else {
            spec.kind = ffstats::General{a.u};
        }
        const auto dist = ffstats::kernel_distribution(spec);
        // counts by kernel dimension over the full ensemble size
        std::vector<BigInt> counts;
        BigInt total;
        if (a.alt) {
            counts = ffstats::alternating_rank_counts(2, a.n);
            total = big_pow(2, static_cast<unsigned long>(a.n) * (a.n ? a.n - 1 : 0) / 2);
        } else if (static_cast<long>(a.n) >= a.u) {
            const auto m = static_cast<unsigned>(static_cast<long>(a.n) - a.u);
            counts = ffstats::rank_counts(a.ell, m, a.n);
            total = big_pow(a.ell, static_cast<unsigned long>(m) * a.n);
        }
        for (const auto& [j, p] : dist.masses) {
            const unsigned r = a.n - j;
            rows.push_back({j, p, r < counts.size() ? counts[r].get_str() : "0", total.get_str(), p.to_double()});
        }
    }
    switch (g.fmt()) {
    case Format::csv:
        out << (a.limit ? "j,probability\n" : "j,probability,count,total\n");
        for (const auto& r : rows) {
            if (a.limit)
                out << r.j << ',' << detail::num(r.value, 17) << '\n';
            else
                out << r.j << ',' << r.p << ',' << r.count << ',' << r.total << '\n';
        }
        break;
    case Format::json: {
        Json j;
        j["ensemble"] = a.alt ? "alternating" : "general";
        if (!a.alt) j["u"] = a.u;
        j["ell"] = a.ell;
        if (a.limit)
            j["n"] = "infinity";
        else
            j["n"] = a.n;
        j["masses"] = Json::array();
        for (const auto& r : rows) {
            Json e;
            e["j"] = r.j;
            if (!a.limit) {
                e["probability"] = r.p.to_string();
                e["count"] = r.count;
                e["total"] = r.total;
            }
            e["value"] = r.value;
            j["masses"].push_back(e);
        }
        out << j.dump(2) << '\n';
        break;
    }
    case Format::pretty:
        out << (a.alt ? "alternating" : "general u=" + std::to_string(a.u)) << " ell=" << a.ell
            << " n=" << (a.limit ? std::string("inf") : std::to_string(a.n)) << '\n';
        for (const auto& r : rows) {
            out << "  P(" << r.j << ") = ";
            if (a.limit) {
                out << detail::num(r.value) << '\n';
            } else {
                const std::string raw = r.count + "/" + r.total;
                out << raw << (raw == r.p.to_string() ? "" : " = " + r.p.to_string()) << '\n';
            }
        }
        break;
    }
    return 0;
}

struct ChainArgs {
    bool alt = false;
    int u = 0;
    std::uint64_t ell = 2;
    unsigned max_rank = 40;
    bool absorption = false;
    std::string start = "limit";
    std::string prefix;
    unsigned sample = 0;
    std::uint64_t seed = 1;
    std::optional<unsigned> from, to;
};

inline int chain(const Globals& g, const ChainArgs& a, std::ostream& out)
{
    const auto spec = a.alt ? chains::alternating_chain(a.max_rank) : chains::general_chain(a.u, a.ell, a.max_rank);
    spec.validate();
    const int modes = int(a.absorption) + int(!a.prefix.empty()) + int(a.sample > 0) + int(a.from.has_value());
    if (modes != 1) throw usage_error("choose exactly one of --absorption, --prefix, --sample, --from/--to");
    const auto fmt = g.fmt();

    if (a.from) {
        if (!a.to) throw usage_error("--from needs --to");
        const auto p = chains::transition(spec, *a.from, *a.to);
        if (fmt == Format::json)
            out << Json{{"from", *a.from}, {"to", *a.to}, {"probability", p.to_string()}, {"value", p.to_double()}}.dump(2) << '\n';
        else if (fmt == Format::csv)
            out << "from,to,probability\n" << *a.from << ',' << *a.to << ',' << p << '\n';
        else
            out << "P(" << *a.to << " | " << *a.from << ") = " << p << '\n';
        return 0;
    }
    const auto start = detail::parse_start(a.start);
    if (a.absorption) {
        const auto r = chains::absorption_distribution(spec, start);
        if (fmt == Format::json) {
            Json j;
            j["absorbed"] = detail::dist_json(r.absorbed);
            j["escaping"] = r.escaping;
            j["defective"] = r.defective;
            out << j.dump(2) << '\n';
        } else if (fmt == Format::csv) {
            out << "state,probability\n";
            for (const auto& [k, v] : r.absorbed) out << k << ',' << detail::num(v, 17) << '\n';
        } else {
            out << detail::dist_pretty(r.absorbed) << '\n';
            out << "escaping mass " << detail::num(r.escaping, 3) << ", defective mass " << detail::num(r.defective, 3) << '\n';
        }
        return 0;
    }
    if (!a.prefix.empty()) {
        std::vector<unsigned> ranks;
        for (const auto& t : detail::split(a.prefix, ',')) ranks.push_back(static_cast<unsigned>(detail::parse_u64(t)));
        const auto p = chains::prefix_probability(spec, start, chains::RankPrefix(ranks));
        const auto* exact = std::get_if<Rational>(&p);
        const double bound = exact ? 0.0 : std::get<chains::Approx>(p).error_bound;
        if (fmt == Format::json) {
            Json j;
            j["prefix"] = ranks;
            if (exact) j["probability"] = exact->to_string();
            j["value"] = chains::as_double(p);
            j["error_bound"] = bound;
            out << j.dump(2) << '\n';
        } else if (fmt == Format::csv) {
            out << "value,error_bound\n" << detail::num(chains::as_double(p), 17) << ',' << detail::num(bound, 17) << '\n';
        } else {
            out << (exact ? exact->to_string() : detail::num(chains::as_double(p)) + " +- " + detail::num(bound, 3)) << '\n';
        }
        return 0;
    }
    const auto* exact = std::get_if<chains::ExactStart>(&start);
    if (!exact) throw usage_error("--sample needs an explicit --start law");
    const auto seq = chains::sample_sequence(spec, *exact, a.seed, a.sample);
    if (fmt == Format::json) {
        out << Json{{"seed", a.seed}, {"ranks", seq.ranks()}}.dump(2) << '\n';
    } else {
        if (fmt == Format::csv) out << "step,rank\n";
        for (std::size_t i = 0; i < seq.size(); ++i)
            out << (fmt == Format::csv ? std::to_string(i) + "," : "") << seq[i] << '\n';
    }
    return 0;
}

inline arith::SquarefreeInt squarefree_arg(std::int64_t d)
{
    try {
        return arith::SquarefreeInt::factor(d);
    } catch (const domain_error& e) {
        throw usage_error(e.what());
    }
}

inline int selmer(const Globals& g, std::int64_t dv, const std::string& method, std::ostream& out)
{
    const auto d = squarefree_arg(dv);
    arith::SelmerResult r;
    if (method == "monsky") {
        harness::require_gate(g.cache_dir(), "monsky");
        r = arith::selmer_rank_monsky(d);
    } else {
        r = arith::selmer_rank_descent(d);
    }
    switch (g.fmt()) {
    case Format::json:
        out << Json{{"d", dv}, {"sel2_dim", r.sel2_dim}, {"torsion_dim", r.torsion_dim}, {"r2", r.r2}, {"method", to_string(r.method)}}.dump(2)
            << '\n';
        break;
    case Format::csv:
        out << "d,sel2_dim,torsion_dim,r2\n" << dv << ',' << r.sel2_dim << ',' << r.torsion_dim << ',' << r.r2 << '\n';
        break;
    case Format::pretty:
        out << "d = " << d.to_string() << "\n  dim Sel_2 = " << r.sel2_dim << ", torsion image = " << r.torsion_dim
            << ", r2 = " << r.r2 << " (" << to_string(r.method) << ")\n";
        break;
    }
    return 0;
}

inline int classgroup(const Globals& g, std::int64_t dv, bool redei, std::ostream& out)
{
    const auto d = squarefree_arg(dv);
    if (d.negative()) throw usage_error("classgroup takes d >= 1 for Q(sqrt(-d))");
    Json j;
    j["d"] = dv;
    j["discriminant"] = arith::fundamental_discriminant(dv);
    if (redei) {
        harness::require_gate(g.cache_dir(), "redei");
        j["r2"] = arith::prime_discriminants(d).size() - 1;
        j["r4"] = arith::redei_rank4(d);
    } else {
        const auto cg = arith::class_group(d);
        j["h"] = cg.h;
        j["invariant_factors"] = cg.cyclic_factors;
        for (unsigned k = 1; k <= std::max<unsigned>(3, static_cast<unsigned>(cg.r2k.size())); ++k)
            j["r" + std::to_string(1u << k)] = cg.r(k);
    }
    switch (g.fmt()) {
    case Format::json: out << j.dump(2) << '\n'; break;
    case Format::csv: {
        std::string head, row;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.value().is_array()) continue;
            head += (head.empty() ? "" : ",") + it.key();
            row += (row.empty() ? "" : ",") + it.value().dump();
        }
        out << head << '\n' << row << '\n';
        break;
    }
    case Format::pretty:
        out << "Q(sqrt(-" << dv << ")), discriminant " << j["discriminant"].get<std::int64_t>() << '\n';
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.key() == "d" || it.key() == "discriminant") continue;
            out << "  " << it.key() << " = " << it.value().dump() << '\n';
        }
        break;
    }
    return 0;
}

struct SweepArgs {
    std::string kind = "selmer";
    harness::SweepConfig cfg;
    bool no_persist = false;
    bool strict = false;
};

inline void write_report(const Globals& g, const harness::DistributionReport& r, std::ostream& out)
{
    switch (g.fmt()) {
    case Format::json: out << harness::to_json(r, !g.no_timing).dump(2) << '\n'; break;
    case Format::csv: {
        out << "given,rank,count,observed,predicted,deviation\n";
        auto rows = [&](const harness::DistributionReport& x) {
            std::set<unsigned> keys;
            for (const auto& [k, v] : x.observed) keys.insert(k);
            for (const auto& [k, v] : x.predicted) keys.insert(k);
            const auto dev = x.deviations();
            for (const auto k : keys) {
                const auto c = x.counts.find(k);
                const auto p = x.predicted.find(k);
                const auto o = x.observed.find(k);
                out << (x.given ? std::to_string(*x.given) : "") << ',' << k << ',' << (c == x.counts.end() ? 0 : c->second) << ','
                    << detail::num(o == x.observed.end() ? 0.0 : o->second, 17) << ','
                    << detail::num(p == x.predicted.end() ? 0.0 : p->second, 17) << ',' << detail::num(dev.at(k), 17) << '\n';
            }
        };
        rows(r);
        for (const auto& c : r.conditionals) rows(c);
        break;
    }
    case Format::pretty: {
        auto one = [&](const harness::DistributionReport& x, const std::string& indent) {
            out << indent << x.kind << (x.given ? " given " + std::to_string(*x.given) : "") << ", H = " << x.H << ", count = " << x.count
                << '\n';
            out << indent << "  observed  " << detail::dist_pretty(x.observed) << '\n';
            out << indent << "  predicted " << detail::dist_pretty(x.predicted) << '\n';
            out << indent << "  tv = " << detail::num(x.tv_distance, 6) << " (threshold " << detail::num(x.threshold, 6) << ") "
                << (x.pass ? "PASS" : "FAIL") << '\n';
        };
        one(r, "");
        for (const auto& c : r.conditionals) one(c, "  ");
        if (!g.no_timing) out << "runtime " << detail::num(r.runtime_seconds, 4) << " s\n";
        break;
    }
    }
}

inline int sweep(const Globals& g, SweepArgs a, std::ostream& out)
{
    auto& cfg = a.cfg;
    cfg.cache = g.cache_dir();
    cfg.persist = !a.no_persist;
    if (a.kind == "selmer" || a.kind == "class") {
        cfg.kind = a.kind == "selmer" ? harness::SweepKind::selmer : harness::SweepKind::class_group;
        const auto r = a.kind == "selmer" ? harness::selmer_sweep(cfg) : harness::class_sweep(cfg);
        write_report(g, r, out);
        return a.strict && !r.pass ? 1 : 0;
    }
    cfg.kind = harness::SweepKind::monsky_invariance;
    const auto r = harness::monsky_invariance_battery(cfg);
    if (g.fmt() == Format::json) {
        out << harness::to_json(r, !g.no_timing).dump(2) << '\n';
    } else if (g.fmt() == Format::csv) {
        out << "d,e,r2_d,r2_e\n";
        for (const auto& m : r.pairs) out << m.d << ',' << m.e << ',' << m.r2_d << ',' << m.r2_e << '\n';
    } else {
        out << "matched pairs " << r.pairs.size() << " of " << r.requested << ", counterexamples " << r.counterexamples.size()
            << (r.exhausted ? ", search exhausted" : "") << ", attempts " << r.attempts << '\n';
        for (const auto& m : r.counterexamples) out << "  counterexample d = " << m.d << " e = " << m.e << '\n';
        out << (r.pass ? "PASS" : "FAIL") << '\n';
    }
    return a.strict && !r.pass ? 1 : 0;
}

struct GridArgs {
    std::string example;
    std::string file;
    unsigned ell = 2, k0 = 1, B = 0;
    bool all_subsets = false;
    std::string closure;
    bool basis = false;
    bool bye_ramsey = false;
    unsigned M = 2;
    std::uint64_t seed = 1;
    unsigned cap = 64;
};

inline int grid(const Globals& g, const GridArgs& a, std::ostream& out)
{
    const grids::RingSpec ring{a.ell, a.k0, a.B};
    std::optional<grids::Grid> X;
    if (!a.example.empty() == !a.file.empty()) throw usage_error("give exactly one of --example and --file");
    if (!a.example.empty()) {
        std::vector<unsigned> dims;
        for (const auto& t : detail::split(a.example, 'x')) dims.push_back(static_cast<unsigned>(detail::parse_u64(t)));
        if (dims.empty()) throw usage_error("example looks like 2x2 or 4x4x4");
        X = grids::Grid::sized(dims, ring);
    } else {
        std::ifstream in(a.file);
        if (!in) throw usage_error("cannot read grid file " + a.file);
        X = grids::parse_grid(in, ring);
    }
    const int modes = int(a.all_subsets) + int(!a.closure.empty()) + int(a.basis) + int(a.bye_ramsey);
    if (modes != 1) throw usage_error("choose exactly one of --all-subsets, --closure, --basis, --bye-ramsey");
    const auto fmt = g.fmt();

    if (a.all_subsets) {
        if (X->size() > 16) throw usage_error("--all-subsets is limited to grids of at most 16 points");
        Json arr = Json::array();
        if (fmt == Format::csv) out << "subset,size,closed\n";
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << X->size()); ++m) {
            grids::Subset Y;
            for (std::size_t i = 0; i < X->size(); ++i)
                if (m >> i & 1) Y.push_back(i);
            const bool closed = grids::is_closed(*X, Y);
            const auto name = X->format(Y);
            if (fmt == Format::json)
                arr.push_back({{"subset", name}, {"size", Y.size()}, {"closed", closed}});
            else if (fmt == Format::csv)
                out << '"' << name << "\"," << Y.size() << ',' << (closed ? 1 : 0) << '\n';
            else
                out << name << "  " << (closed ? "closed" : "not closed") << '\n';
        }
        if (fmt == Format::json) out << arr.dump(2) << '\n';
        return 0;
    }
    if (!a.closure.empty()) {
        grids::Subset Y;
        try {
            Y = X->parse_subset(a.closure);
        } catch (const domain_error& e) {
            throw usage_error(e.what());
        }
        const auto C = grids::closure(*X, Y);
        if (fmt == Format::json)
            out << Json{{"subset", X->format(Y)}, {"closure", X->format(C)}, {"closed", C == Y}}.dump(2) << '\n';
        else if (fmt == Format::csv)
            out << "subset,closure\n\"" << X->format(Y) << "\",\"" << X->format(C) << "\"\n";
        else
            out << "closure of " << X->format(Y) << " is " << X->format(C) << '\n';
        return 0;
    }
    if (a.basis) {
        const auto Bs = grids::basis_construct(*X, 0);
        const auto bound = grids::basis_bound(*X);
        if (fmt == Format::json)
            out << Json{{"basis", X->format(Bs)}, {"size", Bs.size()}, {"bound", bound}}.dump(2) << '\n';
        else if (fmt == Format::csv)
            out << "basis,size,bound\n\"" << X->format(Bs) << "\"," << Bs.size() << ',' << bound << '\n';
        else
            out << "basis " << X->format(Bs) << "\n  size " << Bs.size() << ", bound " << bound << '\n';
        return 0;
    }
    const auto r = grids::bye_ramsey_construct(*X, a.M, a.seed, a.cap);
    if (fmt == Format::json) {
        out << Json{{"M", a.M}, {"seed", a.seed}, {"attempts", r.attempts}, {"g", r.g}, {"bound", grids::ramsey_bound(*X, a.M)}}.dump(2)
            << '\n';
    } else {
        if (fmt == Format::csv) out << "point,g\n";
        else out << "g found after " << r.attempts << " attempts\n";
        for (std::size_t i = 0; i < r.g.size(); ++i)
            out << (fmt == Format::csv ? "\"" + X->format(i) + "\"," : "  " + X->format(i) + " -> ") << r.g[i] << '\n';
    }
    return 0;
}

struct JutilaArgs {
    std::string sizes = "100x100,1000x1000";
    std::string coeffs = "constant";
    std::string signs = "both";
    std::uint64_t seed = 1;
};

inline int jutila(const Globals& g, const JutilaArgs& a, std::ostream& out)
{
    std::vector<std::pair<std::uint64_t, std::uint64_t>> sizes;
    for (const auto& t : detail::split(a.sizes, ',')) {
        const auto x = detail::split(t, 'x');
        if (x.size() != 2) throw usage_error("sizes look like N1xN2, got " + t);
        sizes.emplace_back(detail::parse_u64(x[0]), detail::parse_u64(x[1]));
    }
    harness::JutilaScheme s;
    s.seed = a.seed;
    s.coefficients = a.coeffs == "random" ? harness::Coefficients::random_sign
                   : a.coeffs == "mobius" ? harness::Coefficients::mobius
                                          : harness::Coefficients::constant;
    s.signs = a.signs == "positive" ? harness::DSigns::positive : a.signs == "negative" ? harness::DSigns::negative : harness::DSigns::both;
    const auto rows = harness::jutila_probe(sizes, s);
    const bool decreasing = harness::strictly_decreasing(rows);
    switch (g.fmt()) {
    case Format::json: {
        Json j;
        j["coefficients"] = a.coeffs;
        j["signs"] = a.signs;
        j["seed"] = a.seed;
        j["rows"] = Json::array();
        for (const auto& r : rows)
            j["rows"].push_back({{"N1", r.N1},
                                 {"N2", r.N2},
                                 {"lhs", r.lhs},
                                 {"bound", static_cast<double>(r.bound)},
                                 {"ratio", static_cast<double>(r.ratio)},
                                 {"normalized", static_cast<double>(r.normalized)}});
        j["decreasing"] = decreasing;
        out << j.dump(2) << '\n';
        break;
    }
    case Format::csv:
        out << "N1,N2,lhs,bound,ratio,normalized\n";
        for (const auto& r : rows)
            out << r.N1 << ',' << r.N2 << ',' << r.lhs << ',' << detail::num(r.bound, 17) << ',' << detail::num(r.ratio, 17) << ','
                << detail::num(r.normalized, 17) << '\n';
        break;
    case Format::pretty:
        for (const auto& r : rows)
            out << "N1=" << r.N1 << " N2=" << r.N2 << "  lhs=" << r.lhs << "  bound=" << detail::num(r.bound, 6)
                << "  lhs/bound=" << detail::num(r.ratio, 6) << "  lhs/(N1 N2)=" << detail::num(r.normalized, 6) << '\n';
        out << "normalized sum " << (decreasing ? "strictly decreasing" : "not strictly decreasing") << '\n';
        break;
    }
    return 0;
}

inline int validate(const Globals& g, std::ostream& out)
{
    const auto cache = g.cache_dir();
    const auto gates = harness::run_validation(cache);
    bool ok = true;
    Json j = Json::object();
    for (const auto& gate : gates) {
        ok = ok && gate.passed;
        j[gate.name] = harness::to_json(gate);
    }
    switch (g.fmt()) {
    case Format::json: out << j.dump(2) << '\n'; break;
    case Format::csv:
        out << "gate,passed,checked,bound\n";
        for (const auto& gate : gates) out << gate.name << ',' << (gate.passed ? 1 : 0) << ',' << gate.checked << ',' << gate.bound << '\n';
        break;
    case Format::pretty:
        for (const auto& gate : gates) {
            out << gate.name << ": " << (gate.passed ? "passed" : "FAILED") << " (" << gate.checked << " cases";
            if (!g.no_timing) out << ", " << detail::num(gate.seconds, 3) << " s";
            out << ")\n";
            for (const auto& m : gate.mismatches) out << "  " << m << '\n';
        }
        out << "marker written to " << harness::validation_path(cache).string() << '\n';
        break;
    }
    return ok ? 0 : 1;
}

/// Parses argv and dispatches; never throws.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"selchain: rank statistics of random matrices, Selmer and class groups"};
    app.name("selchain");
    app.set_config("--config", "", "INI file; sections are named after subcommands");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--format", g.format, "csv, json or pretty")->check(CLI::IsMember({"csv", "json", "pretty"}))->capture_default_str();
    app.add_option("--cache", g.cache, "cache directory (default $SELCHAIN_CACHE or ./.selchain-cache)");
    app.add_flag("--no-timing", g.no_timing, "report runtime as 0 so output is byte-stable");

    MatstatsArgs ms;
    auto* c_ms = app.add_subcommand("matstats", "kernel-dimension law of random matrices over F_ell");
    c_ms->add_flag("--alt", ms.alt, "alternating ensemble over F_2");
    c_ms->add_option("--u", ms.u, "general ensemble of (n-u) x n matrices")->capture_default_str();
    c_ms->add_option("--ell", ms.ell, "prime field size")->capture_default_str();
    auto* ms_n = c_ms->add_option("--n", ms.n, "matrix size");
    auto* ms_lim = c_ms->add_flag("--limit", ms.limit, "n -> infinity law");
    ms_n->excludes(ms_lim);

    ChainArgs ch;
    std::optional<unsigned> ch_from, ch_to;
    auto* c_ch = app.add_subcommand("chain", "Markov chains on ranks");
    c_ch->add_flag("--alt", ch.alt, "alternating chain");
    c_ch->add_option("--u", ch.u)->capture_default_str();
    c_ch->add_option("--ell", ch.ell)->capture_default_str();
    c_ch->add_option("--max-rank", ch.max_rank)->capture_default_str();
    c_ch->add_flag("--absorption", ch.absorption, "absorption distribution");
    c_ch->add_option("--start", ch.start, "limit, or j:p,... with rational p")->capture_default_str();
    c_ch->add_option("--prefix", ch.prefix, "probability of a rank prefix r1,r2,...");
    c_ch->add_option("--sample", ch.sample, "sample this many steps");
    c_ch->add_option("--seed", ch.seed)->capture_default_str();
    c_ch->add_option("--from", ch_from, "transition probability from this rank");
    c_ch->add_option("--to", ch_to);

    std::int64_t sel_d = 0;
    std::string sel_method = "descent";
    auto* c_sel = app.add_subcommand("selmer", "2-Selmer rank of y^2 = x^3 - d^2 x");
    c_sel->add_option("--d", sel_d, "squarefree twist")->required();
    c_sel->add_option("--method", sel_method)->check(CLI::IsMember({"descent", "monsky"}))->capture_default_str();

    std::int64_t cg_d = 0;
    bool cg_redei = false;
    auto* c_cg = app.add_subcommand("classgroup", "class group of Q(sqrt(-d))");
    c_cg->add_option("--d", cg_d, "squarefree d >= 1")->required();
    c_cg->add_flag("--redei", cg_redei, "genus 2-rank and Redei 4-rank only");

    SweepArgs sw;
    auto* c_sw = app.add_subcommand("sweep", "distribution sweeps and the invariance battery");
    c_sw->add_option("--kind", sw.kind)->check(CLI::IsMember({"selmer", "class", "monsky-invariance"}))->capture_default_str();
    c_sw->add_option("--H", sw.cfg.H, "bound on d")->capture_default_str();
    c_sw->add_option("--seed", sw.cfg.seed)->capture_default_str();
    c_sw->add_option("--workers", sw.cfg.workers)->check(CLI::PositiveNumber)->capture_default_str();
    c_sw->add_option("--threshold", sw.cfg.threshold)->capture_default_str();
    c_sw->add_option("--conditional-threshold", sw.cfg.conditional_threshold)->capture_default_str();
    c_sw->add_option("--exact-limit", sw.cfg.exact_limit, "largest H handled by the exact methods")->capture_default_str();
    c_sw->add_option("--pairs", sw.cfg.pairs)->capture_default_str();
    c_sw->add_option("--max-r", sw.cfg.max_r)->capture_default_str();
    c_sw->add_option("--prime-bound", sw.cfg.prime_bound)->capture_default_str();
    c_sw->add_option("--attempt-cap", sw.cfg.attempt_cap)->capture_default_str();
    c_sw->add_flag("--no-persist", sw.no_persist, "do not write CSV rows");
    c_sw->add_flag("--strict", sw.strict, "exit 1 when the report fails its threshold");

    GridArgs gr;
    auto* c_gr = app.add_subcommand("grid", "closures, bases and bye_Ramsey functions on grids");
    c_gr->add_option("--example", gr.example, "sized grid such as 2x2");
    c_gr->add_option("--file", gr.file, "grid file, one factor per line");
    c_gr->add_option("--ell", gr.ell)->capture_default_str();
    c_gr->add_option("--k0", gr.k0)->capture_default_str();
    c_gr->add_option("--B", gr.B, "0 selects |S| + 1")->capture_default_str();
    c_gr->add_flag("--all-subsets", gr.all_subsets, "closed / not closed for every subset");
    c_gr->add_option("--closure", gr.closure, "subset such as {(a0,b0),(a1,b1)}");
    c_gr->add_flag("--basis", gr.basis, "basis of the whole grid");
    c_gr->add_flag("--bye-ramsey", gr.bye_ramsey, "construct a bye_Ramsey function");
    c_gr->add_option("--M", gr.M)->capture_default_str();
    c_gr->add_option("--seed", gr.seed)->capture_default_str();
    c_gr->add_option("--cap", gr.cap, "attempt cap")->capture_default_str();

    JutilaArgs ju;
    auto* c_ju = app.add_subcommand("jutila", "bilinear character-sum probe");
    c_ju->add_option("--sizes", ju.sizes, "N1xN2,...")->capture_default_str();
    c_ju->add_option("--coeffs", ju.coeffs)->check(CLI::IsMember({"constant", "random", "mobius"}))->capture_default_str();
    c_ju->add_option("--signs", ju.signs)->check(CLI::IsMember({"both", "positive", "negative"}))->capture_default_str();
    c_ju->add_option("--seed", ju.seed)->capture_default_str();

    auto* c_va = app.add_subcommand("validate", "run every oracle gate and record the outcome in the cache");

    for (auto* sub : app.get_subcommands([](CLI::App*) { return true; })) sub->allow_config_extras(CLI::config_extras_mode::error);

    try {
        std::vector<std::string> args;
        for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "selchain: " << e.what() << '\n';
        return 2;
    }

    try {
        if (c_ms->parsed()) {
            if (!ms.limit && c_ms->count("--n") == 0) throw usage_error("matstats needs --n or --limit");
            return matstats(g, ms, out);
        }
        if (c_ch->parsed()) {
            ch.from = ch_from;
            ch.to = ch_to;
            return chain(g, ch, out);
        }
        if (c_sel->parsed()) return selmer(g, sel_d, sel_method, out);
        if (c_cg->parsed()) return classgroup(g, cg_d, cg_redei, out);
        if (c_sw->parsed()) return sweep(g, sw, out);
        if (c_gr->parsed()) return grid(g, gr, out);
        if (c_ju->parsed()) return jutila(g, ju, out);
        if (c_va->parsed()) return validate(g, out);
    } catch (const usage_error& e) {
        err << "selchain: " << e.what() << '\n';
        return 2;
    } catch (const domain_error& e) {
        err << "selchain: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "selchain: " << e.what() << '\n';
        return 1;
    }
    err << "selchain: no subcommand\n";
    return 2;
}

} // namespace selchain::cli
