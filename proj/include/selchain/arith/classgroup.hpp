#pragma once

// Class groups of imaginary quadratic fields Q(sqrt(-d)) from reduced
// positive definite binary quadratic forms of the fundamental discriminant
// (-4d if -d = 2, 3 mod 4, else -d).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <vector>

#include "selchain/arith/gf2.hpp"
#include "selchain/arith/sieve.hpp"
#include "selchain/arith/symbols.hpp"
#include "selchain/error.hpp"

namespace selchain::arith {

struct Form {
    std::int64_t a = 1, b = 0, c = 1;

    std::int64_t discriminant() const { return b * b - 4 * a * c; }
    friend auto operator<=>(const Form&, const Form&) = default;
};

inline std::int64_t fundamental_discriminant(std::int64_t d)
{
    if (d < 1) throw domain_error("class groups need d >= 1");
    return d % 4 == 3 ? -d : -4 * d;
}

namespace detail {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Brings b into (-a, a].
inline void normalize(Form& f)
{
    if (-f.a < f.b && f.b <= f.a) return;
    const std::int64_t r = floor_div(f.a - f.b, 2 * f.a);
    const __int128 c = static_cast<__int128>(f.a) * r * r + static_cast<__int128>(f.b) * r + f.c;
    f.b += 2 * r * f.a;
    f.c = static_cast<std::int64_t>(c);
}

// Extended gcd: u a + v b = g >= 0.
inline std::int64_t xgcd(std::int64_t a, std::int64_t b, std::int64_t& u, std::int64_t& v)
{
    std::int64_t u0 = 1, v0 = 0, u1 = 0, v1 = 1;
    while (b != 0) {
        const std::int64_t q = a / b;
        std::tie(a, b) = std::make_tuple(b, a - q * b);
        std::tie(u0, u1) = std::make_tuple(u1, u0 - q * u1);
        std::tie(v0, v1) = std::make_tuple(v1, v0 - q * v1);
    }
    if (a < 0) {
        a = -a;
        u0 = -u0;
        v0 = -v0;
    }
    u = u0;
    v = v0;
    return a;
}

} // namespace detail

inline Form reduce(Form f)
{
    if (f.a <= 0 || f.discriminant() >= 0) throw domain_error("reduce: form must be positive definite");
    detail::normalize(f);
    while (f.a > f.c) {
        f = {f.c, -f.b, f.a};
        detail::normalize(f);
    }
    if (f.a == f.c && f.b < 0) f.b = -f.b;
    return f;
}

inline Form identity_form(std::int64_t D)
{
    if (D % 4 == 0) return {1, 0, -D / 4};
    return {1, 1, (1 - D) / 4};
}

inline Form inverse(const Form& f) { return reduce({f.a, -f.b, f.c}); }

/// Gauss composition (Shanks/Cohen style), result reduced.
inline Form compose(Form f1, Form f2)
{
    if (f1.discriminant() != f2.discriminant()) throw domain_error("compose: discriminants differ");
    if (f1.a > f2.a) std::swap(f1, f2);
    const std::int64_t s = (f1.b + f2.b) / 2;
    const std::int64_t n = f2.b - s;
    std::int64_t y1, d;
    if (f2.a % f1.a == 0) {
        y1 = 0;
        d = f1.a;
    } else {
        std::int64_t u, v;
        d = detail::xgcd(f2.a, f1.a, u, v);
        y1 = u;
    }
    std::int64_t x2, y2, d1;
    if (s % d == 0) {
        y2 = -1;
        x2 = 0;
        d1 = d;
    } else {
        d1 = detail::xgcd(s, d, x2, y2);
        y2 = -y2;
    }
    const std::int64_t v1 = f1.a / d1, v2 = f2.a / d1;
    __int128 r = (static_cast<__int128>(y1) * y2 * n - static_cast<__int128>(x2) * f2.c) % v1;
    if (r < 0) r += v1;
    const __int128 b3 = f2.b + 2 * static_cast<__int128>(v2) * r;
    const __int128 a3 = static_cast<__int128>(v1) * v2;
    const __int128 c3 = (static_cast<__int128>(f2.c) * d1 + r * (f2.b + v2 * r)) / v1;
    return reduce({static_cast<std::int64_t>(a3), static_cast<std::int64_t>(b3), static_cast<std::int64_t>(c3)});
}

inline Form power(Form f, std::uint64_t e)
{
    Form acc = identity_form(f.discriminant());
    while (e) {
        if (e & 1) acc = compose(acc, f);
        f = compose(f, f);
        e >>= 1;
    }
    return acc;
}

/// All reduced primitive forms of discriminant D < 0.
inline std::vector<Form> reduced_forms(std::int64_t D)
{
    if (D >= 0 || ((D % 4) + 4) % 4 > 1) throw domain_error("discriminant must be negative and 0 or 1 mod 4");
    std::vector<Form> out;
    const std::int64_t amax = static_cast<std::int64_t>(std::sqrt(static_cast<double>(-D) / 3.0)) + 1;
    for (std::int64_t a = 1; a <= amax; ++a) {
        for (std::int64_t b = -a + 1; b <= a; ++b) {
            const std::int64_t num = b * b - D;
            if (num % (4 * a) != 0) continue;
            const std::int64_t c = num / (4 * a);
            if (c < a || (c == a && b < 0)) continue;
            if (std::gcd(std::gcd(a, b), c) != 1) continue;
            out.push_back({a, b, c});
        }
    }
    return out;
}

struct ClassGroupResult {
    std::int64_t d = 1;
    std::int64_t discriminant = -4;
    std::uint64_t h = 1;
    std::vector<std::uint64_t> cyclic_factors;  // n_1 | n_2 | ..., trivial factors omitted
    std::vector<unsigned> r2k;                  // r_2, r_4, ... up to the last nonzero term

    /// r_{2^k}; zero past the stored prefix.
    unsigned r(unsigned k) const { return k >= 1 && k <= r2k.size() ? r2k[k - 1] : 0; }
};

namespace detail {

inline std::uint64_t element_order(const Form& f, std::uint64_t h, const std::vector<std::uint64_t>& primes)
{
    const Form e = identity_form(f.discriminant());
    std::uint64_t ord = h;
    for (const auto p : primes)
        while (ord % p == 0 && power(f, ord / p) == e) ord /= p;
    return ord;
}

inline std::vector<std::uint64_t> prime_divisors(std::uint64_t n)
{
    std::vector<std::uint64_t> out;
    for (std::uint64_t p = 2; p * p <= n; ++p)
        if (n % p == 0) {
            out.push_back(p);
            while (n % p == 0) n /= p;
        }
    if (n > 1) out.push_back(n);
    return out;
}

// Number of x in the list with x^(p^k) = 1, for each k until it stops growing.
inline std::vector<std::uint64_t> torsion_counts(const std::vector<Form>& forms, std::uint64_t p)
{
    const Form e = identity_form(forms.front().discriminant());
    std::vector<std::uint64_t> counts = {1};  // G[p^0]
    std::vector<Form> cur = forms;
    while (true) {
        std::uint64_t c = 0;
        for (auto& f : cur) {
            f = power(f, p);
            if (f == e) ++c;
        }
        if (c == counts.back()) break;
        counts.push_back(c);
    }
    return counts;
}

} // namespace detail

/// Class group of Q(sqrt(-d)) with its invariant factors and 2-power ranks.
inline ClassGroupResult class_group(const SquarefreeInt& d)
{
    if (d.negative()) throw domain_error("class_group needs d >= 1");
    ClassGroupResult out;
    out.d = d.value();
    out.discriminant = fundamental_discriminant(d.value());
    const auto forms = reduced_forms(out.discriminant);
    out.h = forms.size();

    // Per prime p | h, |G[p^k]| for k = 0, 1, ... determines the p-partition.
    std::map<std::uint64_t, std::vector<unsigned>> partitions;  // p -> exponents, descending
    for (const auto p : detail::prime_divisors(out.h)) {
        const auto counts = detail::torsion_counts(forms, p);
        std::vector<unsigned> ranks;  // r_{p^k} = log_p(|G[p^k]| / |G[p^(k-1)]|)
        for (std::size_t k = 1; k < counts.size(); ++k) {
            std::uint64_t q = counts[k] / counts[k - 1];
            unsigned r = 0;
            while (q > 1) {
                q /= p;
                ++r;
            }
            ranks.push_back(r);
        }
        // Number of cyclic factors of order >= p^k is r_{p^k}.
        std::vector<unsigned> exps(ranks.empty() ? 0 : ranks.front(), 0);
        for (const auto r : ranks)
            for (unsigned i = 0; i < r; ++i) ++exps[i];
        partitions[p] = exps;
        if (p == 2) out.r2k = ranks;
    }
    std::size_t width = 0;
    for (const auto& [p, exps] : partitions) width = std::max(width, exps.size());
    out.cyclic_factors.assign(width, 1);
    for (const auto& [p, exps] : partitions)
        for (std::size_t i = 0; i < exps.size(); ++i)
            for (unsigned k = 0; k < exps[i]; ++k) out.cyclic_factors[width - 1 - i] *= p;
    std::uint64_t prod = 1;
    for (const auto n : out.cyclic_factors) prod *= n;
    if (prod != out.h) throw invariant_error("invariant factors do not multiply to h");
    return out;
}

/// r_2, r_4, ... of Q(sqrt(-d)) from its 2-Sylow subgroup, built as the span of
/// prime forms raised to the odd part of h. Pass h when already known.
inline std::vector<unsigned> two_sylow_ranks(const SquarefreeInt& d, std::uint64_t h = 0)
{
    if (d.negative()) throw domain_error("two_sylow_ranks needs d >= 1");
    const std::int64_t D = fundamental_discriminant(d.value());
    if (h == 0) h = reduced_forms(D).size();
    const unsigned v = static_cast<unsigned>(std::countr_zero(h));
    const std::uint64_t m = h >> v;
    const Form e = identity_form(D);
    std::set<Form> sylow = {e};
    auto prime = [](std::int64_t p) {
        for (std::int64_t q = 2; q * q <= p; ++q)
            if (p % q == 0) return false;
        return true;
    };
    // Reduced forms have a <= sqrt(|D|/3), so primes up to there generate.
    for (std::int64_t p = 2; sylow.size() < (std::uint64_t{1} << v); ++p) {
        if (3 * p * p > -D) throw invariant_error("prime forms did not generate the 2-Sylow subgroup");
        if (!prime(p) || kronecker(D, p) < 0) continue;
        std::int64_t b = ((D % 2) + 2) % 2;
        while ((b * b - D) % (4 * p) != 0) b += 2;
        const Form g = power(reduce({p, b, (b * b - D) / (4 * p)}), m);
        const std::vector<Form> base(sylow.begin(), sylow.end());
        for (Form gi = g; !sylow.contains(gi); gi = compose(gi, g))
            for (const auto& s : base) sylow.insert(compose(gi, s));
    }
    std::vector<unsigned> out;
    std::vector<Form> cur(sylow.begin(), sylow.end());
    std::uint64_t prev = 1;
    while (prev < sylow.size()) {
        std::uint64_t c = 0;
        for (auto& f : cur) {
            f = compose(f, f);
            if (f == e) ++c;
        }
        out.push_back(static_cast<unsigned>(std::countr_zero(c / prev)));
        prev = c;
    }
    return out;
}

/// The prime discriminants whose product is the fundamental discriminant of Q(sqrt(-d)).
inline std::vector<std::int64_t> prime_discriminants(const SquarefreeInt& d)
{
    const std::int64_t D = fundamental_discriminant(d.value());
    std::vector<std::int64_t> out;
    std::int64_t odd = 1;
    for (const auto p : d) {
        if (p == 2) continue;
        const auto ps = static_cast<std::int64_t>(p);
        const std::int64_t star = p % 4 == 1 ? ps : -ps;
        out.push_back(star);
        odd *= star;
    }
    if (D != odd) out.insert(out.begin(), D / odd);
    return out;
}

/// 4-rank from the Redei matrix over F_2.
inline unsigned redei_rank4(const SquarefreeInt& d)
{
    const auto ds = prime_discriminants(d);
    const unsigned t = static_cast<unsigned>(ds.size());
    if (t > 64) throw domain_error("too many prime factors");
    auto prime_of = [](std::int64_t disc) -> std::int64_t {
        const std::int64_t a = disc < 0 ? -disc : disc;
        return a % 2 == 0 ? 2 : a;
    };
    std::vector<std::uint64_t> rows(t, 0);
    for (unsigned i = 0; i < t; ++i) {
        const std::int64_t p = prime_of(ds[i]);
        unsigned diag = 0;
        for (unsigned j = 0; j < t; ++j) {
            if (j == i) continue;
            const unsigned bit = kronecker(ds[j], p) < 0 ? 1u : 0u;
            rows[i] |= static_cast<std::uint64_t>(bit) << j;
            diag ^= bit;
        }
        rows[i] |= static_cast<std::uint64_t>(diag) << i;
    }
    return t - 1 - gf2_rank(rows);
}

/// Class numbers h(D) for every negative discriminant with |D| <= max_abs,
/// by counting reduced forms in blocks of |D|. Index by |D|. Only
/// meaningful at fundamental D (elsewhere imprimitive forms are counted too).
/// Odd |D| are only counted up to odd_max.
inline std::vector<std::uint32_t> count_reduced_forms(std::uint64_t max_abs, std::uint64_t odd_max,
                                                      std::uint64_t block = 1u << 18)
{
    std::vector<std::uint32_t> h(max_abs + 1, 0);
    for (std::uint64_t lo = 1; lo <= max_abs; lo += block) {
        const std::uint64_t hi = std::min(max_abs, lo + block - 1);
        // |D| = 4ac - b^2 with |b| <= a <= c.
        for (std::uint64_t a = 1; 3 * a * a <= hi; ++a) {
            for (std::int64_t b = -static_cast<std::int64_t>(a) + 1; b <= static_cast<std::int64_t>(a); ++b) {
                const std::uint64_t b2 = static_cast<std::uint64_t>(b * b);
                const bool odd = b2 % 2;
                const std::uint64_t top = odd ? std::min(hi, odd_max) : hi;
                if (top < lo) continue;
                // c from max(a, ceil((lo + b2) / 4a)), |D| = 4ac - b2.
                std::uint64_t c = std::max<std::uint64_t>(a, (lo + b2 + 4 * a - 1) / (4 * a));
                if (b < 0 && c == a) ++c;
                for (std::uint64_t D = 4 * a * c - b2; D <= top; D += 4 * a) ++h[D];
            }
        }
    }
    return h;
}

} // namespace selchain::arith
