#pragma once

// Equidistribution of functions X -> (1/ell)Z/Z that are pinned down on
// disjoint closed sets by their zero-sum relations. R acts on (1/ell)Z/Z
// through R/omega = F_ell, so values are stored as residues g(x) in Z/ell.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>

#include "selchain/grids/grid.hpp"

namespace selchain::grids {

using LineFunction = std::map<std::size_t, unsigned>;  // point -> value in Z/ell

struct RamseyFunction {
    std::vector<unsigned> g;  // indexed by point
    unsigned attempts = 0;
};

struct RamseyCheck {
    bool pass = false;
    double deviation = 0;
    double bound = 0;
    double slack = 0;  // bound - deviation
};

/// (M log(ell |X|) sum_s 1/|X_s|)^(1/2) |X|.
inline double ramsey_bound(const Grid& X, unsigned M)
{
    double inv = 0;
    for (std::size_t s = 0; s < X.factors(); ++s) inv += 1.0 / static_cast<double>(X.dim(s));
    const double n = static_cast<double>(X.size());
    return std::sqrt(M * std::log(static_cast<double>(X.ring().ell) * n) * inv) * n;
}

namespace detail {

// Zero-sum relations of Y reduced mod ell, one row per saturated generator.
inline std::vector<std::vector<unsigned>> relations_mod_ell(const Grid& X, const Subset& Y)
{
    const mpz_class ell = static_cast<unsigned long>(X.ring().ell);
    std::vector<std::vector<unsigned>> rows;
    for (const auto& a : zs_integer_basis(X, X.all_factors(), Y)) {
        std::vector<unsigned> r(Y.size());
        for (std::size_t i = 0; i < Y.size(); ++i) {
            mpz_class c = a[i] % ell;
            if (c < 0) c += ell;
            r[i] = static_cast<unsigned>(c.get_ui());
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

// Basis of {h in F_ell^n : rows . h = 0}.
inline std::vector<std::vector<unsigned>> nullspace_mod(std::vector<std::vector<unsigned>> rows, std::size_t n, unsigned ell)
{
    auto inv = [ell](unsigned a) {
        for (unsigned x = 1; x < ell; ++x)
            if (a * x % ell == 1) return x;
        return 0u;
    };
    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < n && r < rows.size(); ++c) {
        std::size_t p = r;
        while (p < rows.size() && rows[p][c] == 0) ++p;
        if (p == rows.size()) continue;
        std::swap(rows[r], rows[p]);
        const unsigned iv = inv(rows[r][c]);
        for (auto& v : rows[r]) v = v * iv % ell;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == r || rows[i][c] == 0) continue;
            const unsigned f = rows[i][c];
            for (std::size_t j = 0; j < n; ++j) rows[i][j] = (rows[i][j] + ell * ell - f * rows[r][j]) % ell;
        }
        pivot_col.push_back(c);
        ++r;
    }
    std::vector<std::vector<unsigned>> out;
    for (std::size_t c = 0; c < n; ++c) {
        if (std::find(pivot_col.begin(), pivot_col.end(), c) != pivot_col.end()) continue;
        std::vector<unsigned> h(n, 0);
        h[c] = 1;
        for (std::size_t i = 0; i < pivot_col.size(); ++i) h[pivot_col[i]] = (ell - rows[i][c]) % ell;
        out.push_back(std::move(h));
    }
    return out;
}

} // namespace detail

/// Checks the deviation bound for one configuration; preconditions are verified.
inline RamseyCheck bye_ramsey_check(const Grid& X, const std::vector<unsigned>& g, const std::vector<Subset>& Ys,
                                    const LineFunction& f, unsigned c, unsigned M)
{
    const unsigned ell = static_cast<unsigned>(X.ring().ell);
    if (g.size() != X.size()) throw domain_error("g must be defined on all of X");
    if (Ys.size() > M) throw domain_error("more closed sets than M");
    if (c >= ell) throw domain_error("value out of range");
    std::vector<bool> used(X.size(), false);
    std::size_t total = 0;
    for (const auto& Y : Ys)
        for (const auto y : Y) {
            if (used[y]) throw domain_error("closed sets must be disjoint");
            used[y] = true;
            ++total;
        }
    if (f.size() != total) throw domain_error("f must be defined exactly on the union of the closed sets");
    for (const auto& [x, v] : f)
        if (x >= X.size() || !used[x] || v >= ell) throw domain_error("f must be defined exactly on the union of the closed sets");
    for (const auto& Y : Ys) {
        if (!is_closed(X, Y)) throw closure_error("set " + X.format(Y) + " is not closed");
        for (const auto& row : detail::relations_mod_ell(X, Y)) {
            unsigned acc = 0;
            for (std::size_t i = 0; i < Y.size(); ++i) acc = (acc + row[i] * ((f.at(Y[i]) + ell - g[Y[i]]) % ell)) % ell;
            if (acc != 0) throw compatibility_error("f and g differ on a zero-sum relation of " + X.format(Y));
        }
    }
    std::size_t hits = 0;
    for (const auto& [x, v] : f) hits += v == c;
    RamseyCheck out;
    out.deviation = std::fabs(static_cast<double>(hits) - static_cast<double>(total) / ell);
    out.bound = ramsey_bound(X, M);
    out.slack = out.bound - out.deviation;
    out.pass = out.deviation <= out.bound;
    return out;
}

/// Random disjoint closed sets (closures of random sparse subsets) and an f
/// compatible with g on them: g plus a random annihilator of the relations,
/// optionally shifted by a constant on each set.
template <class Rng>
std::pair<std::vector<Subset>, LineFunction> random_configuration(const Grid& X, const std::vector<unsigned>& g,
                                                                  unsigned M, Rng& rng)
{
    const unsigned ell = static_cast<unsigned>(X.ring().ell);
    std::vector<Subset> Ys;
    std::vector<bool> used(X.size(), false);
    const unsigned count = static_cast<unsigned>(rng() % (M + 1));
    for (unsigned i = 0; i < count; ++i) {
        Subset seed;
        for (std::size_t x = 0; x < X.size(); ++x)
            if (!used[x] && rng() % 3 == 0) seed.push_back(x);
        const auto Y = closure(X, seed);
        bool clash = false;
        for (const auto y : Y) clash = clash || used[y];
        if (clash || Y.empty()) continue;
        for (const auto y : Y) used[y] = true;
        Ys.push_back(Y);
    }
    LineFunction f;
    for (const auto& Y : Ys) {
        const auto null = detail::nullspace_mod(detail::relations_mod_ell(X, Y), Y.size(), ell);
        std::vector<unsigned> h(Y.size(), 0);
        for (const auto& v : null) {
            const unsigned k = static_cast<unsigned>(rng() % ell);
            for (std::size_t i = 0; i < Y.size(); ++i) h[i] = (h[i] + k * v[i]) % ell;
        }
        for (std::size_t i = 0; i < Y.size(); ++i) f[Y[i]] = (g[Y[i]] + h[i]) % ell;
    }
    return {Ys, f};
}

/// Samples g uniformly until it passes a battery of random configurations.
inline RamseyFunction bye_ramsey_construct(const Grid& X, unsigned M, std::uint64_t seed, unsigned cap = 64,
                                           unsigned battery = 20)
{
    if (M < 1) throw domain_error("M must be positive");
    const unsigned ell = static_cast<unsigned>(X.ring().ell);
    RamseyFunction out;
    if (X.size() == 1) {
        out.g.assign(1, 0);
        return out;
    }
    std::mt19937_64 rng(seed);
    for (unsigned attempt = 1; attempt <= cap; ++attempt) {
        std::vector<unsigned> g(X.size());
        for (auto& v : g) v = static_cast<unsigned>(rng() % ell);
        bool ok = true;
        for (unsigned t = 0; t < battery && ok; ++t) {
            const auto [Ys, f] = random_configuration(X, g, M, rng);
            for (unsigned c = 0; c < ell && ok; ++c) ok = bye_ramsey_check(X, g, Ys, f, c, M).pass;
        }
        if (ok) {
            out.g = std::move(g);
            out.attempts = attempt;
            return out;
        }
    }
    throw convergence_error("no admissible g found within " + std::to_string(cap) + " attempts");
}

} // namespace selchain::grids
