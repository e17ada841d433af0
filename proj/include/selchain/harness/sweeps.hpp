#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "selchain/arith/classgroup.hpp"
#include "selchain/arith/selmer.hpp"
#include "selchain/arith/sieve.hpp"
#include "selchain/arith/symbols.hpp"
#include "selchain/error.hpp"
#include "selchain/ffstats.hpp"
#include "selchain/harness/cache.hpp"
#include "selchain/harness/gates.hpp"
#include "selchain/harness/report.hpp"

namespace selchain::harness {

enum class SweepKind { selmer, class_group, monsky_invariance, jutila };

inline const char* to_string(SweepKind k)
{
    switch (k) {
    case SweepKind::selmer: return "selmer";
    case SweepKind::class_group: return "class";
    case SweepKind::monsky_invariance: return "monsky-invariance";
    case SweepKind::jutila: return "jutila";
    }
    return "?";
}

struct SweepConfig {
    SweepKind kind = SweepKind::selmer;
    std::uint64_t H = 1000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    fs::path cache = default_cache_dir();
    bool persist = true;                 // write CSV rows into the cache
    double threshold = 0.02;             // tv bound for the main comparison
    double conditional_threshold = 0.05; // tv bound for r_8 given r_4 = 1
    std::uint64_t exact_limit = 100;     // up to here the slow exact methods run, ungated
    // invariance battery
    unsigned pairs = 200;
    unsigned max_r = 3;
    std::uint64_t prime_bound = 100000;
    std::uint64_t attempt_cap = 1000000;

    void validate() const
    {
        if (H < 1) throw domain_error("H must be at least 1");
        if (workers < 1) throw domain_error("worker count must be at least 1");
        if (!(threshold >= 0) || !(conditional_threshold >= 0)) throw domain_error("thresholds must be nonnegative");
    }
};

namespace detail {

// Range-partitioned map over the squarefree d in [lo, hi]; shards are
// concatenated in range order, so the output is sorted by |d|.
template <class Fn>
std::vector<CsvRow> parallel_rows(std::uint64_t lo, std::uint64_t hi, arith::SieveFilter filter, unsigned workers, Fn fn)
{
    if (lo > hi) return {};
    workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, hi - lo + 1));
    const std::uint64_t span = (hi - lo + workers) / workers;
    std::vector<std::vector<CsvRow>> shards(workers);
    std::vector<std::exception_ptr> errors(workers);
    auto job = [&](unsigned w) {
        try {
            const std::uint64_t a = lo + w * span;
            if (a > hi) return;
            const std::uint64_t b = std::min(hi, a + span - 1);
            arith::SquarefreeSieve(b, filter).range(a, b, [&](const arith::SquarefreeInt& d) { shards[w].push_back(fn(d)); });
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        job(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(job, w);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<CsvRow> out;
    for (auto& s : shards) out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    return out;
}

// Cached rows with d <= H, topped up with freshly computed rows past the cached prefix.
template <class Compute>
std::vector<CsvRow> cached_rows(const CsvCache& cache, std::uint64_t H, Compute compute)
{
    auto rows = cache.load();
    std::int64_t last = 0;
    for (const auto& r : rows) {
        if (r[0] <= last) throw invariant_error("cache " + cache.path().string() + " is not sorted by d");
        last = r[0];
    }
    if (static_cast<std::uint64_t>(last) < H) {
        auto fresh = compute(static_cast<std::uint64_t>(last) + 1, H);
        cache.append(fresh);
        rows.insert(rows.end(), std::make_move_iterator(fresh.begin()), std::make_move_iterator(fresh.end()));
    }
    std::erase_if(rows, [&](const CsvRow& r) { return static_cast<std::uint64_t>(r[0]) > H; });
    return rows;
}

template <class F>
Distribution limit_support(F mass)
{
    Distribution out;
    for (unsigned j = 0;; ++j) {
        const double v = mass(j);
        if (v < 1e-14) break;
        out[j] = v;
    }
    return out;
}

} // namespace detail

/// r_2 of y^2 = x^3 - d^2 x over odd positive squarefree d <= H, against P^Alt(. | infinity).
inline DistributionReport selmer_sweep(const SweepConfig& cfg)
{
    if (cfg.kind != SweepKind::selmer) throw domain_error("selmer_sweep needs kind = selmer");
    cfg.validate();
    Stopwatch sw;
    const bool fast = cfg.H > cfg.exact_limit;
    if (fast) require_gate(cfg.cache, "monsky");
    const CsvCache cache(cfg.persist ? cfg.cache / "selmer.csv" : fs::path{}, {"d", "r2"});
    const auto rows = detail::cached_rows(cache, cfg.H, [&](std::uint64_t lo, std::uint64_t hi) {
        return detail::parallel_rows(lo, hi, {arith::Parity::odd, arith::Signs::positive}, cfg.workers,
                                     [&](const arith::SquarefreeInt& d) -> CsvRow {
                                         const auto r = fast ? arith::selmer_rank_monsky(d) : arith::selmer_rank_descent(d);
                                         return {d.value(), static_cast<std::int64_t>(r.r2)};
                                     });
    });
    DistributionReport rep;
    rep.kind = "selmer";
    rep.H = cfg.H;
    rep.seed = cfg.seed;
    rep.threshold = cfg.threshold;
    for (const auto& r : rows) ++rep.counts[static_cast<unsigned>(r[1])];
    rep.predicted = detail::limit_support([](unsigned j) { return ffstats::p_alt_limit(j).value; });
    finish(rep);
    rep.runtime_seconds = sw.seconds();
    return rep;
}

/// Class-group data of Q(sqrt(-d)) as a cache row d, disc, h, r2, r4, r8.
inline CsvRow class_row_exact(const arith::SquarefreeInt& d)
{
    const auto cg = arith::class_group(d);
    const auto t = arith::prime_discriminants(d).size();
    if (cg.r(1) + 1 != t) throw invariant_error("genus count disagrees with the forms 2-rank at d = " + std::to_string(d.value()));
    return {d.value(), cg.discriminant, static_cast<std::int64_t>(cg.h), cg.r(1), cg.r(2), cg.r(3)};
}

/// Same row from a known class number, genus theory, the Redei 4-rank and,
/// only when those leave r_8 open, the 2-Sylow subgroup.
inline CsvRow class_row_fast(const arith::SquarefreeInt& d, std::uint64_t h)
{
    const std::int64_t disc = arith::fundamental_discriminant(d.value());
    const unsigned r2 = static_cast<unsigned>(arith::prime_discriminants(d).size()) - 1;
    const unsigned r4 = arith::redei_rank4(d);
    const unsigned v = static_cast<unsigned>(std::countr_zero(h));
    unsigned r8 = 0;
    if (v < r2 + r4) throw invariant_error("2-adic valuation of h below r_2 + r_4 at d = " + std::to_string(d.value()));
    if (r4 == 0 || v == r2 + r4) {
        r8 = 0;
    } else if (r4 == 1) {
        r8 = v >= r2 + 2 ? 1 : 0;
    } else {
        const auto ranks = arith::two_sylow_ranks(d, h);
        r8 = ranks.size() > 2 ? ranks[2] : 0;
    }
    return {d.value(), disc, static_cast<std::int64_t>(h), r2, r4, r8};
}

/// r_4 and r_8 of Q(sqrt(-d)) over squarefree d <= H: r_4 against P^Mat_{0,2}(. | infinity),
/// r_8 given r_4 = j against P^Mat_{0,2}(. | j).
inline DistributionReport class_sweep(const SweepConfig& cfg)
{
    if (cfg.kind != SweepKind::class_group) throw domain_error("class_sweep needs kind = class");
    cfg.validate();
    Stopwatch sw;
    const bool fast = cfg.H > cfg.exact_limit;
    if (fast) require_gate(cfg.cache, "redei");
    const CsvCache cache(cfg.persist ? cfg.cache / "class.csv" : fs::path{}, {"d", "disc", "h", "r2", "r4", "r8"});
    const auto rows = detail::cached_rows(cache, cfg.H, [&](std::uint64_t lo, std::uint64_t hi) {
        std::vector<std::uint32_t> table;
        if (fast) table = arith::count_reduced_forms(4 * hi, hi);
        return detail::parallel_rows(lo, hi, {}, cfg.workers, [&](const arith::SquarefreeInt& d) -> CsvRow {
            if (!fast) return class_row_exact(d);
            return class_row_fast(d, table[static_cast<std::size_t>(-arith::fundamental_discriminant(d.value()))]);
        });
    });

    DistributionReport rep;
    rep.kind = "class";
    rep.H = cfg.H;
    rep.seed = cfg.seed;
    rep.threshold = cfg.threshold;
    std::map<unsigned, std::map<unsigned, std::uint64_t>> joint;
    for (const auto& r : rows) {
        ++rep.counts[static_cast<unsigned>(r[4])];
        ++joint[static_cast<unsigned>(r[4])][static_cast<unsigned>(r[5])];
    }
    rep.predicted = detail::limit_support([](unsigned j) { return ffstats::p_mat_limit(0, 2, j).value; });
    finish(rep);
    bool conditional_ok = false;
    for (const auto& [j, counts] : joint) {
        DistributionReport c;
        c.kind = "class-r8-given-r4";
        c.given = j;
        c.H = cfg.H;
        c.seed = cfg.seed;
        c.threshold = cfg.conditional_threshold;
        c.counts = counts;
        for (unsigned i = 0; i <= j; ++i) {
            const double p = ffstats::p_mat(0, 2, i, j).to_double();
            if (p > 0) c.predicted[i] = p;
        }
        finish(c);
        if (j == 1) conditional_ok = c.pass;
        rep.conditionals.push_back(std::move(c));
    }
    rep.pass = rep.pass && conditional_ok;
    rep.runtime_seconds = sw.seconds();
    for (auto& c : rep.conditionals) c.runtime_seconds = rep.runtime_seconds;
    return rep;
}

struct MatchedPair {
    std::vector<std::uint64_t> p, q;
    std::int64_t d = 1, e = 1;
    unsigned r2_d = 0, r2_e = 0;
};

struct InvarianceReport {
    std::uint64_t requested = 0;
    std::vector<MatchedPair> pairs;
    std::vector<MatchedPair> counterexamples;
    bool exhausted = false;
    std::uint64_t attempts = 0;
    std::uint64_t seed = 0;
    double runtime_seconds = 0;
    bool pass = false;
};

/// p_i = q_i mod 8 and (p_j / p_i) = (q_j / q_i) for j < i, all primes odd and distinct per tuple.
inline bool matched(const std::vector<std::uint64_t>& p, const std::vector<std::uint64_t>& q)
{
    if (p.size() != q.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] % 2 == 0 || q[i] % 2 == 0 || p[i] % 8 != q[i] % 8) return false;
        for (std::size_t j = 0; j < i; ++j) {
            if (p[j] == p[i] || q[j] == q[i]) return false;
            if (arith::jacobi(static_cast<std::int64_t>(p[j]), p[i]) != arith::jacobi(static_cast<std::int64_t>(q[j]), q[i]))
                return false;
        }
    }
    return true;
}

/// Descent ranks of d = prod p_i and e = prod q_i.
inline MatchedPair compare_pair(const std::vector<std::uint64_t>& p, const std::vector<std::uint64_t>& q)
{
    if (!matched(p, q)) throw domain_error("prime tuples are not matched");
    MatchedPair m{p, q, 1, 1, 0, 0};
    for (const auto x : p) m.d *= static_cast<std::int64_t>(x);
    for (const auto x : q) m.e *= static_cast<std::int64_t>(x);
    m.r2_d = arith::selmer_rank_descent(arith::SquarefreeInt::factor(m.d)).r2;
    m.r2_e = arith::selmer_rank_descent(arith::SquarefreeInt::factor(m.e)).r2;
    return m;
}

/// Random matched tuples by rejection search, ranks from the descent oracle.
inline InvarianceReport monsky_invariance_battery(const SweepConfig& cfg)
{
    if (cfg.kind != SweepKind::monsky_invariance) throw domain_error("battery needs kind = monsky-invariance");
    if (cfg.max_r < 1) throw domain_error("max_r must be at least 1");
    if (cfg.prime_bound < 3) throw domain_error("prime bound must be at least 3");
    Stopwatch sw;
    InvarianceReport rep;
    rep.requested = cfg.pairs;
    rep.seed = cfg.seed;

    std::vector<std::uint64_t> primes;
    {
        std::vector<bool> comp(cfg.prime_bound + 1, false);
        for (std::uint64_t n = 2; n <= cfg.prime_bound; ++n) {
            if (comp[n]) continue;
            if (n > 2) primes.push_back(n);
            for (std::uint64_t m = n * n; m <= cfg.prime_bound; m += n) comp[m] = true;
        }
    }
    if (primes.size() < cfg.max_r) throw domain_error("not enough odd primes below the bound");
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> pick(0, primes.size() - 1);
    std::uniform_int_distribution<unsigned> size(1, cfg.max_r);

    while (rep.pairs.size() < cfg.pairs && !rep.exhausted) {
        const unsigned r = size(rng);
        std::vector<std::uint64_t> p, q;
        while (p.size() < r) {
            const auto x = primes[pick(rng)];
            if (std::find(p.begin(), p.end(), x) == p.end()) p.push_back(x);
        }
        while (q.size() < r && !rep.exhausted) {
            if (++rep.attempts > cfg.attempt_cap) {
                rep.exhausted = true;
                break;
            }
            const auto x = primes[pick(rng)];
            q.push_back(x);
            std::vector<std::uint64_t> ps(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(q.size()));
            if (!matched(ps, q)) q.pop_back();
        }
        if (rep.exhausted) break;
        auto m = compare_pair(p, q);
        if (m.r2_d != m.r2_e) rep.counterexamples.push_back(m);
        rep.pairs.push_back(std::move(m));
    }

    if (cfg.persist) {
        const CsvCache cache(cfg.cache / "monsky_battery.csv", {"d", "e", "r2_d", "r2_e"});
        std::set<std::pair<std::int64_t, std::int64_t>> seen;
        for (const auto& row : cache.load()) seen.emplace(row[0], row[1]);
        std::vector<CsvRow> fresh;
        for (const auto& m : rep.pairs)
            if (seen.emplace(m.d, m.e).second) fresh.push_back({m.d, m.e, m.r2_d, m.r2_e});
        cache.append(fresh);
    }
    rep.pass = !rep.exhausted && rep.counterexamples.empty() && rep.pairs.size() == cfg.pairs;
    rep.runtime_seconds = sw.seconds();
    return rep;
}

inline nlohmann::ordered_json to_json(const InvarianceReport& r, bool timing = true)
{
    nlohmann::ordered_json j;
    j["kind"] = "monsky-invariance";
    j["requested"] = r.requested;
    j["count"] = r.pairs.size();
    j["counterexamples"] = nlohmann::ordered_json::array();
    for (const auto& m : r.counterexamples)
        j["counterexamples"].push_back({{"p", m.p}, {"q", m.q}, {"d", m.d}, {"e", m.e}, {"r2_d", m.r2_d}, {"r2_e", m.r2_e}});
    j["exhausted"] = r.exhausted;
    j["attempts"] = r.attempts;
    j["pass"] = r.pass;
    j["seed"] = r.seed;
    j["runtime_seconds"] = timing ? r.runtime_seconds : 0.0;
    return j;
}

enum class Coefficients { constant, random_sign, mobius };
enum class DSigns { both, positive, negative };

struct JutilaScheme {
    Coefficients coefficients = Coefficients::constant;
    DSigns signs = DSigns::both;
    std::uint64_t seed = 1;
};

struct JutilaRow {
    std::uint64_t N1 = 0, N2 = 0;
    std::int64_t lhs = 0;
    long double bound = 0;
    long double ratio = 0;       // lhs / bound
    long double normalized = 0;  // lhs / (N1 N2)
};

namespace detail {

inline std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

} // namespace detail

/// a_d for squarefree d under the scheme; random signs depend only on (seed, d).
inline int coefficient(const JutilaScheme& s, const arith::SquarefreeInt& d)
{
    switch (s.coefficients) {
    case Coefficients::constant: return 1;
    case Coefficients::mobius: return d.size() % 2 ? -1 : 1;
    case Coefficients::random_sign:
        return detail::splitmix(s.seed ^ detail::splitmix(static_cast<std::uint64_t>(d.value()))) & 1 ? 1 : -1;
    }
    return 0;
}

/// N1 N2^(1/2) + N1^(3/4) N2 (log N2)^3
inline long double jutila_bracket(std::uint64_t N1, std::uint64_t N2)
{
    const long double n1 = N1, n2 = N2, lg = std::log(n2);
    return n1 * std::sqrt(n2) + std::pow(n1, 0.75L) * n2 * lg * lg * lg;
}

/// sum over odd squarefree 0 < e < N1 of |sum over squarefree 0 < |d| < N2 of a_d (d/e)|.
inline JutilaRow jutila_row(std::uint64_t N1, std::uint64_t N2, const JutilaScheme& scheme)
{
    if (N1 < 1 || N2 < 1) throw domain_error("N1 and N2 must be positive");
    std::vector<std::pair<std::int64_t, int>> ds;
    if (N2 > 1)
        arith::SquarefreeSieve(N2 - 1, {arith::Parity::all, arith::Signs::both}).for_each([&](const arith::SquarefreeInt& d) {
            if (scheme.signs == DSigns::positive && d.negative()) return;
            if (scheme.signs == DSigns::negative && !d.negative()) return;
            ds.emplace_back(d.value(), coefficient(scheme, d));
        });
    JutilaRow row{N1, N2, 0, jutila_bracket(N1, N2), 0, 0};
    if (N1 > 1)
        arith::SquarefreeSieve(N1 - 1, {arith::Parity::odd, arith::Signs::positive}).for_each([&](const arith::SquarefreeInt& e) {
            std::int64_t inner = 0;
            const auto ev = static_cast<std::uint64_t>(e.value());
            for (const auto& [d, a] : ds) inner += a * arith::jacobi(d, ev);
            row.lhs += inner < 0 ? -inner : inner;
        });
    row.ratio = row.bound > 0 ? static_cast<long double>(row.lhs) / row.bound : 0;
    row.normalized = static_cast<long double>(row.lhs) / (static_cast<long double>(N1) * static_cast<long double>(N2));
    return row;
}

inline std::vector<JutilaRow> jutila_probe(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& sizes,
                                           const JutilaScheme& scheme)
{
    std::vector<JutilaRow> out;
    for (const auto& [n1, n2] : sizes) out.push_back(jutila_row(n1, n2, scheme));
    return out;
}

inline bool strictly_decreasing(const std::vector<JutilaRow>& rows)
{
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].normalized < rows[i - 1].normalized)) return false;
    return true;
}

} // namespace selchain::harness
