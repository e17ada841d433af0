#pragma once

// Oracle gates. Each fast path is checked against a slow independent method
// and the outcome is recorded in <cache>/validation.json; the sweeps refuse
// their fast paths until the matching gate is recorded as passed.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "selchain/arith/classgroup.hpp"
#include "selchain/arith/selmer.hpp"
#include "selchain/arith/sieve.hpp"
#include "selchain/error.hpp"
#include "selchain/ffstats.hpp"
#include "selchain/harness/cache.hpp"
#include "selchain/harness/report.hpp"

namespace selchain::harness {

struct GateResult {
    std::string name;
    bool passed = false;
    std::uint64_t checked = 0;
    std::uint64_t bound = 0;
    std::vector<std::string> mismatches;  // first few only
    double seconds = 0;
};

namespace detail {

// Brute-force rank histograms: rows are enumerated depth first over all
// ell^n codes while the span of the rows so far is carried as a membership table.
class RankEnumerator {
public:
    RankEnumerator(unsigned ell, unsigned m, unsigned n) : ell_(ell), m_(m), n_(n)
    {
        size_ = 1;
        for (unsigned i = 0; i < n; ++i) size_ *= ell;
        add_.assign(size_ * size_, 0);
        for (unsigned a = 0; a < size_; ++a)
            for (unsigned b = 0; b < size_; ++b) {
                unsigned x = a, y = b, out = 0, pw = 1;
                for (unsigned i = 0; i < n; ++i, x /= ell, y /= ell, pw *= ell) out += (x % ell + y % ell) % ell * pw;
                add_[a * size_ + b] = out;
            }
    }

    std::vector<std::uint64_t> run()
    {
        hist_.assign(std::min(m_, n_) + 1, 0);
        std::vector<char> span(size_, 0);
        span[0] = 1;
        walk(0, 0, span);
        return hist_;
    }

private:
    void walk(unsigned row, unsigned rank, const std::vector<char>& span)
    {
        if (row == m_) {
            ++hist_[rank];
            return;
        }
        for (unsigned v = 0; v < size_; ++v) {
            if (span[v]) {
                walk(row + 1, rank, span);
                continue;
            }
            // new span = span + {v, 2v, ...}
            std::vector<char> next(span);
            for (unsigned a = 0; a < size_; ++a) {
                if (!span[a]) continue;
                unsigned x = a;
                for (unsigned k = 1; k < ell_; ++k) {
                    x = add_[x * size_ + v];
                    next[x] = 1;
                }
            }
            walk(row + 1, rank + 1, next);
        }
    }

    unsigned ell_, m_, n_, size_ = 1;
    std::vector<unsigned> add_;
    std::vector<std::uint64_t> hist_;
};

inline unsigned rank_f2(std::vector<unsigned> rows)
{
    unsigned r = 0;
    for (unsigned bit = 0; bit < 32; ++bit) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](unsigned x) { return x >> bit & 1u; });
        if (it == rows.end()) continue;
        const unsigned p = *it;
        rows.erase(it);
        for (auto& x : rows)
            if (x >> bit & 1u) x ^= p;
        ++r;
    }
    return r;
}

// Rank histogram of all alternating n x n matrices over F_2.
inline std::vector<std::uint64_t> enumerate_alternating_f2(unsigned n)
{
    std::vector<std::pair<unsigned, unsigned>> slots;
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = i + 1; j < n; ++j) slots.emplace_back(i, j);
    std::vector<std::uint64_t> hist(n + 1, 0);
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << slots.size()); ++code) {
        std::vector<unsigned> rows(n, 0);
        for (std::size_t s = 0; s < slots.size(); ++s)
            if (code >> s & 1u) {
                rows[slots[s].first] |= 1u << slots[s].second;
                rows[slots[s].second] |= 1u << slots[s].first;
            }
        ++hist[rank_f2(rows)];
    }
    return hist;
}

inline void note(GateResult& g, const std::string& what)
{
    if (g.mismatches.size() < 20) g.mismatches.push_back(what);
}

} // namespace detail

/// Rank-count recurrences against enumeration: general m, n <= 4 over F_2 and F_3,
/// alternating n <= 5 over F_2.
inline GateResult recurrence_gate()
{
    Stopwatch sw;
    GateResult g{"recurrence", false, 0, 4, {}, 0};
    for (unsigned ell : {2u, 3u})
        for (unsigned m = 0; m <= 4; ++m)
            for (unsigned n = 0; n <= 4; ++n) {
                const auto brute = detail::RankEnumerator(ell, m, n).run();
                const auto fast = ffstats::rank_counts(ell, m, n);
                ++g.checked;
                bool same = brute.size() == fast.size();
                for (std::size_t r = 0; same && r < brute.size(); ++r) same = fast[r] == brute[r];
                if (!same) detail::note(g, "general ell=" + std::to_string(ell) + " " + std::to_string(m) + "x" + std::to_string(n));
            }
    for (unsigned n = 0; n <= 5; ++n) {
        const auto brute = detail::enumerate_alternating_f2(n);
        const auto fast = ffstats::alternating_rank_counts(2, n);
        ++g.checked;
        bool same = true;
        for (std::size_t r = 0; r < std::max(brute.size(), fast.size()); ++r) {
            const std::uint64_t b = r < brute.size() ? brute[r] : 0;
            const BigInt f = r < fast.size() ? fast[r] : BigInt(0);
            if (f != b) same = false;
        }
        if (!same) detail::note(g, "alternating n=" + std::to_string(n));
    }
    g.passed = g.mismatches.empty();
    g.seconds = sw.seconds();
    return g;
}

/// Monsky formula against full descent for odd positive squarefree d <= bound.
inline GateResult monsky_gate(std::uint64_t bound = 2000)
{
    Stopwatch sw;
    GateResult g{"monsky", false, 0, bound, {}, 0};
    arith::SquarefreeSieve(bound, {arith::Parity::odd, arith::Signs::positive}).for_each([&](const arith::SquarefreeInt& d) {
        ++g.checked;
        const auto a = arith::selmer_rank_monsky(d).r2, b = arith::selmer_rank_descent(d).r2;
        if (a != b) detail::note(g, "d=" + std::to_string(d.value()) + " monsky=" + std::to_string(a) + " descent=" + std::to_string(b));
    });
    g.passed = g.mismatches.empty();
    g.seconds = sw.seconds();
    return g;
}

/// Redei 4-rank against the class group of forms for squarefree d <= bound.
inline GateResult redei_gate(std::uint64_t bound = 10000)
{
    Stopwatch sw;
    GateResult g{"redei", false, 0, bound, {}, 0};
    arith::SquarefreeSieve(bound, {}).for_each([&](const arith::SquarefreeInt& d) {
        ++g.checked;
        const auto a = arith::redei_rank4(d), b = arith::class_group(d).r(2);
        if (a != b) detail::note(g, "d=" + std::to_string(d.value()) + " redei=" + std::to_string(a) + " forms=" + std::to_string(b));
    });
    g.passed = g.mismatches.empty();
    g.seconds = sw.seconds();
    return g;
}

inline fs::path validation_path(const fs::path& cache) { return cache / "validation.json"; }

inline nlohmann::ordered_json to_json(const GateResult& g)
{
    nlohmann::ordered_json j;
    j["passed"] = g.passed;
    j["checked"] = g.checked;
    j["bound"] = g.bound;
    j["mismatches"] = g.mismatches;
    return j;
}

inline nlohmann::ordered_json load_validation(const fs::path& cache)
{
    const auto p = validation_path(cache);
    if (!fs::exists(p)) return nlohmann::ordered_json::object();
    std::ifstream in(p);
    try {
        return nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::exception&) {
        throw invariant_error("unreadable validation marker " + p.string());
    }
}

/// Merges gate outcomes into the marker file.
inline void record_gates(const fs::path& cache, const std::vector<GateResult>& gates)
{
    auto j = load_validation(cache);
    for (const auto& g : gates) j[g.name] = to_json(g);
    fs::create_directories(cache);
    std::ofstream out(validation_path(cache));
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + validation_path(cache).string());
}

inline bool gate_passed(const fs::path& cache, const std::string& name)
{
    const auto j = load_validation(cache);
    return j.contains(name) && j[name].value("passed", false);
}

inline void require_gate(const fs::path& cache, const std::string& name)
{
    if (!gate_passed(cache, name))
        throw gate_error("the " + name + " gate has not passed in " + cache.string() + "; run `selchain validate` first");
}

/// Runs every gate, records them and returns the outcomes.
inline std::vector<GateResult> run_validation(const fs::path& cache,
                                              const std::function<void(const GateResult&)>& progress = {})
{
    std::vector<GateResult> out;
    for (auto* gate : {+[] { return recurrence_gate(); }, +[] { return monsky_gate(); }, +[] { return redei_gate(); }}) {
        out.push_back(gate());
        if (progress) progress(out.back());
    }
    record_gates(cache, out);
    return out;
}

} // namespace selchain::harness
