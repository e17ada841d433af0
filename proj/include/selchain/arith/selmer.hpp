#pragma once

// 2-Selmer ranks of the twists y^2 = x^3 - d^2 x of the congruent number curve.
//
// The descent path works with the full rational 2-torsion, roots 0, d, -d.
// A point maps to the square classes of (x, x - d); a pair (b1, b2) of
// classes supported on {-1, 2, p | d} is a Selmer element when at every bad
// place it lies in the image of the local points. The local images are built
// by collecting points over Q_v until they reach their known size
// (2 at infinity, 4 at odd p, 8 at 2).

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "selchain/arith/gf2.hpp"
#include "selchain/arith/sieve.hpp"
#include "selchain/arith/symbols.hpp"
#include "selchain/error.hpp"

namespace selchain::arith {

enum class SelmerMethod { descent, monsky };

inline const char* to_string(SelmerMethod m) { return m == SelmerMethod::descent ? "descent" : "monsky"; }

struct SelmerResult {
    SquarefreeInt d;
    unsigned sel2_dim = 0;
    unsigned torsion_dim = 0;
    unsigned r2 = 0;
    SelmerMethod method = SelmerMethod::descent;
};

namespace detail {

using i128 = __int128;

inline i128 abs128(i128 x) { return x < 0 ? -x : x; }

// Class of a nonzero integer in Q_v^* / Q_v^*2; p == 0 is the real place.
// Odd p: bit 0 = valuation parity, bit 1 = unit is a nonresidue.
// p = 2: bit 0 = valuation parity, bit 1 = unit is 3 mod 4, bit 2 = unit is 3 or 5 mod 8.
inline unsigned local_class(i128 n, std::uint64_t p)
{
    if (p == 0) return n < 0 ? 1u : 0u;
    unsigned v = 0;
    while (n % static_cast<i128>(p) == 0) {
        n /= static_cast<i128>(p);
        ++v;
    }
    unsigned bits = v & 1u;
    if (p == 2) {
        const int u8 = static_cast<int>(((n % 8) + 8) % 8);
        if (u8 % 4 == 3) bits |= 2u;
        if (u8 == 3 || u8 == 5) bits |= 4u;
        return bits;
    }
    const auto r = static_cast<std::int64_t>(((n % static_cast<i128>(p)) + p) % p);
    if (jacobi(r, p) < 0) bits |= 2u;
    return bits;
}

inline unsigned class_width(std::uint64_t p) { return p == 0 ? 1 : p == 2 ? 3 : 2; }

// Image of E(Q_v)/2E(Q_v) as a 64-bit set of packed pairs (c1 | c2 << width).
inline std::uint64_t local_image(std::int64_t d, std::uint64_t p)
{
    const unsigned w = class_width(p);
    const unsigned want = 1u << (w == 1 ? 1 : w == 2 ? 2 : 3);
    auto pack = [&](unsigned c1, unsigned c2) { return c1 | (c2 << w); };
    std::uint64_t image = 0;
    // Torsion points.
    image |= 1ull << pack(local_class(-1, p), local_class(-static_cast<i128>(d), p));
    image |= 1ull << pack(local_class(d, p), local_class(2, p));
    image |= 1ull << pack(local_class(-static_cast<i128>(d), p), local_class(-2 * static_cast<i128>(d), p));
    image |= 1ull;

    const std::uint64_t q = p == 0 ? 2 : p;
    const i128 dd = d;
    // Largest k with q^k |d| small enough to keep every product inside 126 bits.
    unsigned K = 0;
    {
        i128 scale = (abs128(dd) + 64) * 4;
        const i128 limit = static_cast<i128>(1) << 120;
        while (K < 6 && scale <= limit / static_cast<i128>(q)) {
            scale *= q;
            ++K;
        }
        if (K == 0) throw domain_error("twist parameter too large for local analysis");
    }
    auto try_point = [&](i128 num, i128 den) {
        const i128 a = num, b = num - dd * den, c = num + dd * den;
        if (a == 0 || b == 0 || c == 0) return;
        const unsigned cd = local_class(den, p);
        const unsigned ca = local_class(a, p) ^ cd, cb = local_class(b, p) ^ cd, cc = local_class(c, p) ^ cd;
        if ((ca ^ cb ^ cc) != 0) return;  // x(x-d)(x+d) must be a local square
        image |= 1ull << pack(ca, cb);
    };
    for (std::int64_t u = 1; u <= 96 && static_cast<unsigned>(std::popcount(image)) < want; ++u) {
        for (int s : {1, -1}) {
            for (const i128 e : {static_cast<i128>(0), dd, -dd}) {
                i128 pw = 1;
                for (unsigned k = 0; k <= K; ++k) {
                    try_point(s * u * pw + e, 1);           // e + u q^k
                    if (k > 0) try_point(s * u + e * pw, pw);  // e + u q^-k
                    pw *= q;
                }
            }
        }
    }
    if (static_cast<unsigned>(std::popcount(image)) != want)
        throw invariant_error("local image at " + std::to_string(p) + " for d = " + std::to_string(d) +
                              " has size " + std::to_string(std::popcount(image)));
    for (unsigned a = 0; a < 64; ++a)
        for (unsigned b = 0; b < 64; ++b)
            if ((image >> a & 1) && (image >> b & 1) && !(image >> (a ^ b) & 1))
                throw invariant_error("local image is not a group");
    return image;
}

} // namespace detail

/// Full 2-descent. Valid for any nonzero squarefree d.
inline SelmerResult selmer_rank_descent(const SquarefreeInt& d)
{
    const std::int64_t dv = d.value();
    // Basis of the global classes: -1, 2, then the odd primes of d.
    std::vector<std::int64_t> gens = {-1, 2};
    for (const auto p : d)
        if (p != 2) gens.push_back(static_cast<std::int64_t>(p));
    const unsigned g = static_cast<unsigned>(gens.size());
    if (2 * g > 40) throw domain_error("too many prime factors for the descent oracle");

    std::vector<std::uint64_t> places = {0, 2};
    for (const auto p : d)
        if (p != 2) places.push_back(p);

    std::vector<std::uint64_t> images;
    for (const auto p : places) images.push_back(detail::local_image(dv, p));

    // Local class of each generator at each place.
    std::vector<std::vector<unsigned>> gen_class(places.size(), std::vector<unsigned>(g));
    for (std::size_t v = 0; v < places.size(); ++v)
        for (unsigned i = 0; i < g; ++i) gen_class[v][i] = detail::local_class(gens[i], places[v]);

    // Walk all 2^(2g) pairs in Gray-code order, tracking the packed local vectors.
    const std::uint64_t total = 1ull << (2 * g);
    std::vector<unsigned> packed(places.size(), 0);
    std::vector<std::uint64_t> survivors;
    std::uint64_t cur = 0;
    for (std::uint64_t step = 0; step < total; ++step) {
        if (step > 0) {
            const unsigned bit = static_cast<unsigned>(std::countr_zero(step));
            cur ^= 1ull << bit;
            const unsigned gi = bit % g;
            const unsigned shift_slot = bit / g;
            for (std::size_t v = 0; v < places.size(); ++v)
                packed[v] ^= gen_class[v][gi] << (shift_slot * detail::class_width(places[v]));
        }
        bool ok = true;
        for (std::size_t v = 0; v < places.size() && ok; ++v) ok = images[v] >> packed[v] & 1;
        if (ok) survivors.push_back(cur);
    }
    if (!std::has_single_bit(survivors.size())) throw invariant_error("Selmer survivors do not form a group");
    const unsigned sel = static_cast<unsigned>(std::countr_zero(survivors.size()));
    if (gf2_rank(survivors) != sel) throw invariant_error("Selmer survivors do not form a group");

    // Torsion images, written in the generator basis.
    auto vec = [&](std::int64_t n) {
        std::uint64_t m = 0;
        if (n < 0) {
            m |= 1;
            n = -n;
        }
        for (unsigned i = 1; i < g; ++i)
            while (n % gens[i] == 0) {
                n /= gens[i];
                m ^= 1ull << i;
            }
        if (n != 1) throw invariant_error("torsion class not supported on the bad primes");
        return m;
    };
    auto pair = [&](std::int64_t a, std::int64_t b) { return vec(a) | (vec(b) << g); };
    const unsigned tors = gf2_rank({pair(-1, -dv), pair(dv, 2), pair(-dv, -2 * dv)});

    SelmerResult out;
    out.d = d;
    out.sel2_dim = sel;
    out.torsion_dim = tors;
    out.r2 = sel - tors;
    out.method = SelmerMethod::descent;
    return out;
}

/// Monsky matrix rank formula; odd positive d only.
inline SelmerResult selmer_rank_monsky(const SquarefreeInt& d)
{
    if (d.negative() || !d.odd()) throw domain_error("Monsky path needs odd positive d; use descent");
    const unsigned t = static_cast<unsigned>(d.size());
    if (2 * t > 64) throw domain_error("too many prime factors");
    auto bit = [](int sym) { return sym < 0 ? 1u : 0u; };
    std::vector<std::uint64_t> rows(2 * t, 0);
    for (unsigned i = 0; i < t; ++i) {
        const std::uint64_t p = d.prime(i);
        unsigned diag = 0;
        std::uint64_t a_row = 0;
        for (unsigned j = 0; j < t; ++j) {
            if (j == i) continue;
            const unsigned a = bit(symbol_pair(p, d.prime(j)));
            a_row |= static_cast<std::uint64_t>(a) << j;
            diag ^= a;
        }
        a_row |= static_cast<std::uint64_t>(diag) << i;
        const unsigned two = bit(kronecker(2, static_cast<std::int64_t>(p)));
        const unsigned mtwo = bit(kronecker(-2, static_cast<std::int64_t>(p)));
        // [[A + D_2, D_2], [D_2, A + D_-2]]
        rows[i] = (a_row ^ (static_cast<std::uint64_t>(two) << i)) | (static_cast<std::uint64_t>(two) << (t + i));
        rows[t + i] = (static_cast<std::uint64_t>(two) << i) | ((a_row ^ (static_cast<std::uint64_t>(mtwo) << i)) << t);
    }
    SelmerResult out;
    out.d = d;
    out.r2 = 2 * t - gf2_rank(rows);
    out.torsion_dim = 2;
    out.sel2_dim = out.r2 + 2;
    out.method = SelmerMethod::monsky;
    return out;
}

} // namespace selchain::arith
