#pragma once

// Kernel-dimension statistics for uniformly random matrices over F_ell.
//
// Counts come from one-row-extension recurrences. Appending a row to an
// m x n matrix of rank r keeps the rank iff the row lies in the row space
// (ell^r choices) and raises it otherwise (ell^n - ell^r choices):
//
//   A(m+1, n, r) = A(m, n, r) ell^r + A(m, n, r-1) (ell^n - ell^(r-1))
//
// Bordering an alternating n x n matrix by a new row/column v (and -v^T)
// gives, for the even rank 2s,
//
//   B(n+1, 2s) = B(n, 2s) ell^(2s) + B(n, 2s-2) (ell^n - ell^(2s-2)).
//
// Both are checked against exhaustive enumeration in the test suite.

#include <cmath>
#include <cstdint>
#include <map>
#include <variant>
#include <vector>

#include "selchain/error.hpp"
#include "selchain/rational.hpp"

namespace selchain::ffstats {

inline bool is_prime(std::uint64_t n)
{
    if (n < 2) return false;
    for (std::uint64_t p = 2; p * p <= n; ++p)
        if (n % p == 0) return false;
    return true;
}

inline void require_prime(std::uint64_t ell)
{
    if (!is_prime(ell)) throw domain_error("ell must be prime, got " + std::to_string(ell));
}

struct General {
    int u = 0;  // the ensemble is (n - u) x n
};

struct Alternating {};

struct EnsembleSpec {
    std::uint64_t ell = 2;
    std::variant<General, Alternating> kind = General{};
    unsigned n = 0;
};

/// Counts of m x n matrices over F_ell by rank, index r = 0..min(m, n).
inline std::vector<BigInt> rank_counts(std::uint64_t ell, unsigned m, unsigned n)
{
    require_prime(ell);
    const unsigned rmax = std::min(m, n);
    std::vector<BigInt> pw(n + 1);  // ell^k for k <= n
    pw[0] = 1;
    for (unsigned k = 1; k <= n; ++k) pw[k] = pw[k - 1] * ell;

    std::vector<BigInt> cur(rmax + 1, 0), next(rmax + 1);
    cur[0] = 1;
    for (unsigned row = 0; row < m; ++row) {
        const unsigned reach = std::min(row + 1, rmax);
        for (unsigned r = 0; r <= reach; ++r) {
            next[r] = cur[r] * pw[r];
            if (r > 0) next[r] += cur[r - 1] * (pw[n] - pw[r - 1]);
        }
        for (unsigned r = 0; r <= reach; ++r) cur[r] = next[r];
    }
    return cur;
}

inline BigInt count_rank_matrices(std::uint64_t ell, unsigned m, unsigned n, unsigned r)
{
    require_prime(ell);
    if (r > std::min(m, n)) throw domain_error("rank exceeds min(m, n)");
    return rank_counts(ell, m, n)[r];
}

/// Counts of alternating n x n matrices over F_ell, indexed by rank (odd slots are 0).
inline std::vector<BigInt> alternating_rank_counts(std::uint64_t ell, unsigned n)
{
    require_prime(ell);
    std::vector<BigInt> pw(n + 1);
    pw[0] = 1;
    for (unsigned k = 1; k <= n; ++k) pw[k] = pw[k - 1] * ell;

    std::vector<BigInt> cur(n + 1, 0), next(n + 1, 0);
    cur[0] = 1;  // the empty matrix
    for (unsigned size = 0; size < n; ++size) {
        for (unsigned r = 0; r <= size + 1; r += 2) {
            next[r] = cur[r] * pw[r];
            if (r >= 2) next[r] += cur[r - 2] * (pw[size] - pw[r - 2]);
        }
        for (unsigned r = 0; r <= size + 1; r += 2) cur[r] = next[r];
    }
    return cur;
}

inline BigInt count_rank_alternating(std::uint64_t ell, unsigned n, unsigned r)
{
    require_prime(ell);
    if (r % 2 != 0) throw odd_rank_error("alternating matrices have even rank, got " + std::to_string(r));
    if (r > n) throw domain_error("rank exceeds matrix size");
    return alternating_rank_counts(ell, n)[r];
}

/// Probability that a uniform (n - u) x n matrix over F_ell has kernel dimension j.
inline Rational p_mat(int u, std::uint64_t ell, unsigned j, unsigned n)
{
    require_prime(ell);
    if (static_cast<long>(n) < u || j > n) return Rational(0);
    const auto m = static_cast<unsigned>(static_cast<long>(n) - u);
    const unsigned r = n - j;
    if (r > std::min(m, n)) return Rational(0);
    const auto counts = rank_counts(ell, m, n);
    return Rational(counts[r], big_pow(ell, static_cast<unsigned long>(m) * n));
}

/// Probability that a uniform alternating n x n matrix over F_ell has kernel dimension j.
inline Rational p_alt(std::uint64_t ell, unsigned j, unsigned n)
{
    require_prime(ell);
    if (j > n || (n - j) % 2 != 0) return Rational(0);
    const auto counts = alternating_rank_counts(ell, n);
    return Rational(counts[n - j], big_pow(ell, static_cast<unsigned long>(n) * (n - 1) / 2));
}

inline Rational p_alt(unsigned j, unsigned n) { return p_alt(2, j, n); }

struct KernelDistribution {
    EnsembleSpec ensemble;
    std::map<unsigned, Rational> masses;  // kernel dimension -> probability (zeros omitted)

    Rational total() const
    {
        Rational s;
        for (const auto& [j, p] : masses) s += p;
        return s;
    }
};

inline KernelDistribution kernel_distribution(const EnsembleSpec& spec)
{
    require_prime(spec.ell);
    KernelDistribution out{spec, {}};
    const unsigned n = spec.n;
    if (std::holds_alternative<Alternating>(spec.kind)) {
        const auto counts = alternating_rank_counts(spec.ell, n);
        const BigInt total = big_pow(spec.ell, static_cast<unsigned long>(n) * (n ? n - 1 : 0) / 2);
        for (unsigned r = 0; r <= n; r += 2)
            if (counts[r] != 0) out.masses.emplace(n - r, Rational(counts[r], total));
        return out;
    }
    const int u = std::get<General>(spec.kind).u;
    if (static_cast<long>(n) < u) return out;  // defined to be identically zero
    const auto m = static_cast<unsigned>(static_cast<long>(n) - u);
    const auto counts = rank_counts(spec.ell, m, n);
    const BigInt total = big_pow(spec.ell, static_cast<unsigned long>(m) * n);
    for (unsigned r = 0; r < counts.size(); ++r)
        if (counts[r] != 0) out.masses.emplace(n - r, Rational(counts[r], total));
    return out;
}

struct LimitValue {
    double value = 0;
    double error_bound = 0;  // size of the last refinement step
    unsigned n = 0;          // matrix size at which the sequence settled
};

inline constexpr unsigned default_limit_cap = 400;
inline constexpr double default_limit_tol = 1e-12;

namespace detail {

// Runs term(n) for n = start, start+1, ... until two successive values differ
// by less than tol. The first `warmup` terms are never accepted as settled.
template <class Term>
LimitValue settle(Term term, unsigned start, unsigned warmup, double tol, unsigned cap)
{
    if (!(tol > 0)) throw domain_error("tolerance must be positive");
    double prev = term(start);
    for (unsigned n = start + 1; n <= cap; ++n) {
        const double cur = term(n);
        const double diff = std::fabs(cur - prev);
        if (n >= start + warmup && diff < tol) return {cur, diff, n};
        prev = cur;
    }
    throw convergence_error("limit did not settle below tolerance before n = " + std::to_string(cap));
}

} // namespace detail

/// P^Alt(j | infinity): the even/odd-averaged limit over alternating F_2 matrices.
inline LimitValue p_alt_limit(unsigned j, double tol = default_limit_tol, unsigned cap = default_limit_cap)
{
    auto term = [j](unsigned k) {
        return 0.5 * (p_alt(j, 2 * k).to_double() + p_alt(j, 2 * k + 1).to_double());
    };
    const unsigned start = j / 2;
    auto lv = detail::settle(term, start, 2, tol, cap / 2);
    lv.n = 2 * lv.n + 1;
    return lv;
}

/// P^Mat_{u,ell}(j | infinity).
inline LimitValue p_mat_limit(int u, std::uint64_t ell, unsigned j, double tol = default_limit_tol,
                              unsigned cap = default_limit_cap)
{
    require_prime(ell);
    auto term = [&](unsigned n) { return p_mat(u, ell, j, n).to_double(); };
    const unsigned start = std::max<int>(static_cast<int>(j), std::max(u, 0));
    return detail::settle(term, start, 2, tol, cap);
}

} // namespace selchain::ffstats
