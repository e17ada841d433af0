#pragma once

// Markov chains on rank sequences whose transition kernels are the
// kernel-dimension laws of ffstats. The alternating chain drives 2^k-Selmer
// ranks; the general (u, ell) chain drives 2^k-class ranks (u = 0, ell = 2).

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "selchain/error.hpp"
#include "selchain/ffstats.hpp"
#include "selchain/rational.hpp"

namespace selchain::chains {

struct AlternatingChain {};

struct GeneralChain {
    int u = 0;
    std::uint64_t ell = 2;
};

struct ChainSpec {
    std::variant<AlternatingChain, GeneralChain> kind = AlternatingChain{};
    unsigned max_rank = 40;

    bool alternating() const { return std::holds_alternative<AlternatingChain>(kind); }
    std::uint64_t ell() const { return alternating() ? 2 : std::get<GeneralChain>(kind).ell; }

    void validate() const
    {
        if (max_rank < 1) throw domain_error("max_rank must be at least 1");
        if (!alternating()) ffstats::require_prime(std::get<GeneralChain>(kind).ell);
    }
};

inline ChainSpec alternating_chain(unsigned max_rank = 40) { return {AlternatingChain{}, max_rank}; }
inline ChainSpec general_chain(int u, std::uint64_t ell, unsigned max_rank = 40) { return {GeneralChain{u, ell}, max_rank}; }

/// A nonincreasing finite rank sequence.
class RankPrefix {
public:
    RankPrefix() = default;
    explicit RankPrefix(std::vector<unsigned> ranks) : ranks_(std::move(ranks))
    {
        for (std::size_t i = 1; i < ranks_.size(); ++i)
            if (ranks_[i] > ranks_[i - 1])
                throw domain_error("rank prefix must be nonincreasing");
    }

    const std::vector<unsigned>& ranks() const { return ranks_; }
    std::size_t size() const { return ranks_.size(); }
    bool empty() const { return ranks_.empty(); }
    unsigned operator[](std::size_t i) const { return ranks_[i]; }
    friend bool operator==(const RankPrefix&, const RankPrefix&) = default;

private:
    std::vector<unsigned> ranks_;
};

/// P(next = to | current = from) for the chain.
inline Rational transition(const ChainSpec& chain, unsigned from, unsigned to)
{
    if (chain.alternating()) return ffstats::p_alt(to, from);
    const auto& g = std::get<GeneralChain>(chain.kind);
    return ffstats::p_mat(g.u, g.ell, to, from);
}

struct TransitionMatrix {
    std::vector<std::vector<Rational>> entries;  // (max_rank + 1)^2, entries[n][j] = P(j | n)
    std::vector<Rational> escaping;              // per row: mass landing above max_rank

    Rational row_total(unsigned n) const
    {
        Rational s;
        for (const auto& p : entries.at(n)) s += p;
        return s;
    }
};

inline TransitionMatrix transition_matrix(const ChainSpec& chain)
{
    chain.validate();
    const unsigned size = chain.max_rank + 1;
    TransitionMatrix tm;
    tm.entries.assign(size, std::vector<Rational>(size));
    tm.escaping.assign(size, Rational(0));
    for (unsigned n = 0; n < size; ++n) {
        ffstats::EnsembleSpec spec;
        spec.ell = chain.ell();
        spec.n = n;
        if (chain.alternating())
            spec.kind = ffstats::Alternating{};
        else
            spec.kind = ffstats::General{std::get<GeneralChain>(chain.kind).u};
        for (const auto& [j, p] : ffstats::kernel_distribution(spec).masses) {
            if (j < size)
                tm.entries[n][j] = p;
            else
                tm.escaping[n] += p;
        }
    }
    return tm;
}

/// Start the chain from its n -> infinity limit law.
struct LimitStart {};
using ExactStart = std::map<unsigned, Rational>;
using Start = std::variant<LimitStart, ExactStart>;

/// Decimal value with an absolute error bound.
struct Approx {
    double value = 0;
    double error_bound = 0;
};

using Probability = std::variant<Rational, Approx>;

inline double as_double(const Probability& p)
{
    if (const auto* r = std::get_if<Rational>(&p)) return r->to_double();
    return std::get<Approx>(p).value;
}

/// Limit start law truncated at max_rank, plus the tail mass above it.
struct LimitLaw {
    std::vector<Approx> masses;  // index 0..max_rank
    double escaping = 0;         // mass above max_rank
};

inline LimitLaw limit_law(const ChainSpec& chain, double tol = ffstats::default_limit_tol)
{
    chain.validate();
    auto one = [&](unsigned j) {
        if (chain.alternating()) return ffstats::p_alt_limit(j, tol);
        const auto& g = std::get<GeneralChain>(chain.kind);
        return ffstats::p_mat_limit(g.u, g.ell, j, tol);
    };
    LimitLaw law;
    for (unsigned j = 0; j <= chain.max_rank; ++j) {
        const auto lv = one(j);
        law.masses.push_back({lv.value, lv.error_bound});
    }
    // The limit masses decay like ell^(-j^2/2); twenty further terms bound the tail
    // far below double resolution.
    for (unsigned j = chain.max_rank + 1; j <= chain.max_rank + 20; ++j) law.escaping += one(j).value;
    return law;
}

/// P(r_1) * prod P(r_{i+1} | r_i); exact unless the start is the limit law.
inline Probability prefix_probability(const ChainSpec& chain, const Start& start, const RankPrefix& prefix)
{
    chain.validate();
    if (prefix.empty()) return Rational(1);
    Rational steps(1);
    for (std::size_t i = 1; i < prefix.size(); ++i) steps *= transition(chain, prefix[i - 1], prefix[i]);

    if (const auto* exact = std::get_if<ExactStart>(&start)) {
        auto it = exact->find(prefix[0]);
        const Rational first = it == exact->end() ? Rational(0) : it->second;
        return first * steps;
    }
    ffstats::LimitValue first;
    if (chain.alternating()) {
        first = ffstats::p_alt_limit(prefix[0]);
    } else {
        const auto& g = std::get<GeneralChain>(chain.kind);
        first = ffstats::p_mat_limit(g.u, g.ell, prefix[0]);
    }
    const double s = steps.to_double();
    return Approx{first.value * s, first.error_bound * s};
}

struct AbsorptionResult {
    std::map<unsigned, double> absorbed;  // absorbing state -> probability
    double escaping = 0;                  // start mass above max_rank
    double defective = 0;                 // mass entering states with an all-zero row
};

/// States r with P(r | r) = 1 on the truncated chain.
inline std::vector<unsigned> absorbing_states(const TransitionMatrix& tm)
{
    std::vector<unsigned> out;
    for (unsigned r = 0; r < tm.entries.size(); ++r)
        if (tm.entries[r][r] == Rational(1)) out.push_back(r);
    return out;
}

namespace detail {

// Solves A x = b exactly by Gauss-Jordan elimination; A is square and nonsingular.
inline std::vector<Rational> solve(std::vector<std::vector<Rational>> a, std::vector<Rational> b)
{
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a[piv][col].is_zero()) ++piv;
        if (piv == n) throw invariant_error("absorption system is singular");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        const Rational inv = Rational(1) / a[col][col];
        for (std::size_t k = col; k < n; ++k) a[col][k] *= inv;
        b[col] *= inv;
        for (std::size_t row = 0; row < n; ++row) {
            if (row == col || a[row][col].is_zero()) continue;
            const Rational f = a[row][col];
            for (std::size_t k = col; k < n; ++k) a[row][k] -= f * a[col][k];
            b[row] -= f * b[col];
        }
    }
    return b;
}

} // namespace detail

/// Eventual absorption probabilities of the truncated chain.
inline AbsorptionResult absorption_distribution(const ChainSpec& chain, const Start& start)
{
    const auto tm = transition_matrix(chain);
    const unsigned size = chain.max_rank + 1;

    std::vector<double> init(size, 0.0);
    AbsorptionResult result;
    if (const auto* exact = std::get_if<ExactStart>(&start)) {
        Rational total;
        for (const auto& [r, p] : *exact) {
            if (p < Rational(0)) throw domain_error("start masses must be nonnegative");
            total += p;
            if (r < size)
                init[r] = p.to_double();
            else
                result.escaping += p.to_double();
        }
        if (std::fabs(total.to_double() - 1.0) > 1e-12) throw domain_error("start masses must sum to 1");
    } else {
        const auto law = limit_law(chain);
        double total = law.escaping;
        for (unsigned r = 0; r < size; ++r) {
            init[r] = law.masses[r].value;
            total += init[r];
        }
        if (std::fabs(total - 1.0) > 1e-12) throw domain_error("limit start law does not sum to 1");
        result.escaping = law.escaping;
    }

    std::vector<bool> absorbing(size, false), dead(size, false);
    for (unsigned r : absorbing_states(tm)) absorbing[r] = true;
    for (unsigned r = 0; r < size; ++r) dead[r] = tm.row_total(r).is_zero();

    // Reachability of an absorbing state from the start support.
    std::vector<bool> seen(size, false);
    std::vector<unsigned> stack;
    for (unsigned r = 0; r < size; ++r)
        if (init[r] > 0) stack.push_back(r), seen[r] = true;
    bool reachable = false;
    while (!stack.empty()) {
        const unsigned r = stack.back();
        stack.pop_back();
        if (absorbing[r]) reachable = true;
        for (unsigned j = 0; j < size; ++j)
            if (!seen[j] && !tm.entries[r][j].is_zero()) seen[j] = true, stack.push_back(j);
    }
    if (!reachable) throw domain_error("no absorbing state is reachable from the start law");

    // h[t][a] = P(absorbed at a | start t) for transient t: (I - Q) h = R.
    std::vector<unsigned> transient;
    std::vector<int> tindex(size, -1);
    for (unsigned r = 0; r < size; ++r)
        if (!absorbing[r] && !dead[r]) tindex[r] = static_cast<int>(transient.size()), transient.push_back(r);

    const auto absorbers = absorbing_states(tm);
    const std::size_t nt = transient.size();
    std::vector<std::vector<Rational>> lhs(nt, std::vector<Rational>(nt));
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t k = 0; k < nt; ++k) lhs[i][k] = -tm.entries[transient[i]][transient[k]];
        lhs[i][i] += Rational(1);
    }
    std::map<unsigned, std::vector<Rational>> h;
    for (unsigned a : absorbers) {
        std::vector<Rational> rhs(nt);
        for (std::size_t i = 0; i < nt; ++i) rhs[i] = tm.entries[transient[i]][a];
        h[a] = nt ? detail::solve(lhs, rhs) : std::vector<Rational>{};
    }

    for (unsigned a : absorbers) {
        double p = init[a];
        for (std::size_t i = 0; i < nt; ++i) p += init[transient[i]] * h[a][i].to_double();
        result.absorbed[a] = p;
    }
    double absorbed_total = 0;
    for (const auto& [a, p] : result.absorbed) absorbed_total += p;
    double in_range = 0;
    for (double v : init) in_range += v;
    result.defective = std::max(0.0, in_range - absorbed_total);
    return result;
}

/// Uniform double in [0, 1) from 53 high bits; stable across standard libraries.
inline double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline unsigned draw(std::mt19937_64& rng, const std::vector<std::pair<unsigned, double>>& law)
{
    const double x = unit_draw(rng);
    double acc = 0;
    for (const auto& [state, p] : law) {
        acc += p;
        if (x < acc) return state;
    }
    return law.back().first;
}

/// Samples r_1 from `start`, then steps - 1 transitions.
inline RankPrefix sample_sequence(const ChainSpec& chain, const ExactStart& start, std::uint64_t seed, unsigned steps)
{
    chain.validate();
    if (steps < 1) throw domain_error("steps must be at least 1");
    std::mt19937_64 rng(seed);
    std::vector<std::pair<unsigned, double>> law;
    for (const auto& [r, p] : start)
        if (!p.is_zero()) law.emplace_back(r, p.to_double());
    if (law.empty()) throw domain_error("start law is empty");

    std::map<unsigned, std::vector<std::pair<unsigned, double>>> rows;
    std::vector<unsigned> out;
    out.push_back(draw(rng, law));
    while (out.size() < steps) {
        const unsigned cur = out.back();
        auto it = rows.find(cur);
        if (it == rows.end()) {
            std::vector<std::pair<unsigned, double>> row;
            for (unsigned j = 0; j <= cur; ++j) {
                const Rational p = transition(chain, cur, j);
                if (!p.is_zero()) row.emplace_back(j, p.to_double());
            }
            if (row.empty()) throw domain_error("state " + std::to_string(cur) + " has no outgoing mass");
            it = rows.emplace(cur, std::move(row)).first;
        }
        out.push_back(draw(rng, it->second));
    }
    return RankPrefix(std::move(out));
}

} // namespace selchain::chains
