#pragma once

// Coefficient rings for the grid engine.
//
// R = Z_ell[xi] with xi a primitive ell^k0-th root of unity is totally
// ramified of degree e = ell^(k0-1)(ell-1), with uniformizer omega = xi - 1
// whose minimal polynomial E(w) = Phi(w + 1) is Eisenstein with E(0) = ell.
// R/omega^B is held in the omega basis: sum_{i<e} c_i omega^i with c_i
// taken mod ell^ceil((B - i)/e), computed with integers mod ell^m,
// m = ceil(B/e) + 1.
//
// ZlRing is Z localized at ell, held as exact rationals with ell-free
// denominators.

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "selchain/error.hpp"
#include "selchain/ffstats.hpp"

namespace selchain::grids {

struct RingSpec {
    std::uint64_t ell = 2;
    unsigned k0 = 1;
    unsigned B = 3;
};

class ChainRing {
public:
    using Elem = std::vector<std::int64_t>;

    explicit ChainRing(RingSpec spec) : spec_(spec)
    {
        ffstats::require_prime(spec.ell);
        if (spec.k0 < 1) throw domain_error("k0 must be positive");
        if (spec.B < 1) throw domain_error("truncation B must be positive");
        std::uint64_t q = 1;
        for (unsigned i = 1; i < spec.k0; ++i) q *= spec.ell;
        e_ = static_cast<unsigned>(q * (spec.ell - 1));
        m_ = (spec.B + e_ - 1) / e_ + 1;
        mpz_class mod = 1;
        for (unsigned i = 0; i < m_; ++i) mod *= spec.ell;
        if (mod >= mpz_class(1) << 62) throw domain_error("ring too large for 64-bit coefficients");
        mod_ = static_cast<std::int64_t>(mod.get_si());

        // E(w) = sum_{j < ell} (w + 1)^(j q); keep the low e coefficients.
        std::vector<mpz_class> poly(e_ + 1, 0);
        for (std::uint64_t j = 0; j < spec.ell; ++j) {
            const unsigned deg = static_cast<unsigned>(j * q);
            mpz_class binom = 1;
            for (unsigned i = 0; i <= deg; ++i) {
                poly[i] += binom;
                binom = binom * (deg - i) / (i + 1);
            }
        }
        if (poly[e_] != 1 || poly[0] != static_cast<long>(spec.ell))
            throw invariant_error("uniformizer polynomial is not Eisenstein");
        E_.resize(e_);
        for (unsigned i = 0; i < e_; ++i) E_[i] = static_cast<std::int64_t>(mpz_class(poly[i] % mod).get_si());

        caps_.resize(e_);
        for (unsigned i = 0; i < e_; ++i) {
            const unsigned c = spec.B > i ? (spec.B - i + e_ - 1) / e_ : 0;
            std::int64_t p = 1;
            for (unsigned k = 0; k < c; ++k) p *= static_cast<std::int64_t>(spec.ell);
            caps_[i] = p;
        }
    }

    const RingSpec& spec() const { return spec_; }
    std::uint64_t ell() const { return spec_.ell; }
    unsigned B() const { return spec_.B; }
    unsigned e() const { return e_; }

    Elem zero() const { return Elem(e_, 0); }
    Elem one() const { return from_int(1); }

    Elem from_int(std::int64_t n) const
    {
        Elem a = zero();
        a[0] = mod(n);
        canon(a);
        return a;
    }

    /// Image of a rational with ell-free denominator.
    Elem from_rational(const mpq_class& q) const
    {
        const mpz_class M = mod_;
        mpz_class inv;
        if (mpz_invert(inv.get_mpz_t(), q.get_den_mpz_t(), M.get_mpz_t()) == 0)
            throw domain_error("denominator is not invertible at ell");
        mpz_class r = (q.get_num() % M) * inv % M;
        if (r < 0) r += M;
        return from_int(r.get_si());
    }

    Elem omega() const { return reduce_poly({0, 1}); }

    Elem omega_pow(unsigned k) const
    {
        Elem acc = one();
        const Elem w = omega();
        for (unsigned i = 0; i < k && !is_zero(acc); ++i) acc = mul(acc, w);
        return acc;
    }

    Elem add(const Elem& a, const Elem& b) const
    {
        Elem c(e_);
        for (unsigned i = 0; i < e_; ++i) c[i] = mod(a[i] + b[i]);
        canon(c);
        return c;
    }

    Elem sub(const Elem& a, const Elem& b) const
    {
        Elem c(e_);
        for (unsigned i = 0; i < e_; ++i) c[i] = mod(a[i] - b[i]);
        canon(c);
        return c;
    }

    Elem neg(const Elem& a) const { return sub(zero(), a); }

    Elem mul(const Elem& a, const Elem& b) const
    {
        std::vector<std::int64_t> p(2 * e_ - 1, 0);
        for (unsigned i = 0; i < e_; ++i) {
            if (a[i] == 0) continue;
            for (unsigned j = 0; j < e_; ++j) p[i + j] = mod(p[i + j] + mulmod(a[i], b[j]));
        }
        return reduce_poly(std::move(p));
    }

    bool is_zero(const Elem& a) const
    {
        for (const auto c : a)
            if (c != 0) return false;
        return true;
    }

    bool equal(const Elem& a, const Elem& b) const { return a == b; }

    /// omega-adic valuation; B for zero.
    unsigned valuation(const Elem& a) const
    {
        unsigned v = spec_.B;
        for (unsigned i = 0; i < e_; ++i) {
            if (a[i] == 0) continue;
            std::int64_t c = a[i];
            unsigned k = 0;
            while (c % static_cast<std::int64_t>(spec_.ell) == 0) {
                c /= static_cast<std::int64_t>(spec_.ell);
                ++k;
            }
            v = std::min(v, e_ * k + i);
        }
        return v;
    }

    bool is_unit(const Elem& a) const { return valuation(a) == 0; }

    /// Some q with omega q = a, for a of positive valuation.
    Elem div_omega(const Elem& a) const
    {
        if (a[0] % static_cast<std::int64_t>(spec_.ell) != 0) throw domain_error("element is not divisible by omega");
        Elem q(e_, 0);
        q[e_ - 1] = mod(-(a[0] / static_cast<std::int64_t>(spec_.ell)));
        for (unsigned i = 1; i < e_; ++i) q[i - 1] = mod(a[i] + mulmod(q[e_ - 1], E_[i]));
        canon(q);
        return q;
    }

    Elem inverse(const Elem& u) const
    {
        if (!is_unit(u)) throw domain_error("element is not a unit");
        const auto p = static_cast<std::int64_t>(spec_.ell);
        std::int64_t x0 = 1;
        while ((x0 * (u[0] % p)) % p != 1) ++x0;
        Elem x = from_int(x0);
        const Elem two = from_int(2);
        for (unsigned it = 0; it < 2 * spec_.B + 4; ++it) {
            if (mul(u, x) == one()) return x;
            x = mul(x, sub(two, mul(u, x)));
        }
        throw invariant_error("unit inverse did not converge");
    }

    /// Some q with b q = a, assuming valuation(a) >= valuation(b) and b != 0.
    Elem div_exact(Elem a, Elem b) const
    {
        const unsigned vb = valuation(b);
        if (vb >= spec_.B) throw domain_error("division by zero");
        if (valuation(a) < vb) throw domain_error("quotient is not integral");
        for (unsigned i = 0; i < vb; ++i) {
            a = div_omega(a);
            b = div_omega(b);
        }
        return mul(a, inverse(b));
    }

    /// Image in the residue field F_ell.
    std::int64_t residue(const Elem& a) const { return a[0] % static_cast<std::int64_t>(spec_.ell); }

    std::string to_string(const Elem& a) const
    {
        if (e_ == 1) return std::to_string(a[0]);
        std::string s;
        for (unsigned i = 0; i < e_; ++i) {
            if (a[i] == 0) continue;
            if (!s.empty()) s += " + ";
            s += std::to_string(a[i]);
            if (i == 1) s += "w";
            if (i > 1) s += "w^" + std::to_string(i);
        }
        return s.empty() ? "0" : s;
    }

private:
    std::int64_t mod(std::int64_t x) const
    {
        x %= mod_;
        return x < 0 ? x + mod_ : x;
    }

    std::int64_t mulmod(std::int64_t a, std::int64_t b) const
    {
        return static_cast<std::int64_t>(static_cast<__int128>(a) * b % mod_);
    }

    void canon(Elem& a) const
    {
        for (unsigned i = 0; i < e_; ++i) a[i] %= caps_[i];
    }

    // Reduces a polynomial in omega using omega^e = -sum E_i omega^i.
    Elem reduce_poly(std::vector<std::int64_t> p) const
    {
        for (std::size_t d = p.size(); d-- > e_;) {
            const std::int64_t c = mod(p[d]);
            if (c == 0) continue;
            for (unsigned i = 0; i < e_; ++i) p[d - e_ + i] = mod(p[d - e_ + i] - mulmod(c, E_[i]));
            p[d] = 0;
        }
        Elem a(e_, 0);
        for (unsigned i = 0; i < e_ && i < p.size(); ++i) a[i] = mod(p[i]);
        canon(a);
        return a;
    }

    RingSpec spec_;
    unsigned e_ = 1;
    unsigned m_ = 1;
    std::int64_t mod_ = 2;
    std::vector<std::int64_t> E_;
    std::vector<std::int64_t> caps_;
};

/// Z localized at ell.
class ZlRing {
public:
    using Elem = mpq_class;

    explicit ZlRing(std::uint64_t ell) : ell_(ell) { ffstats::require_prime(ell); }

    std::uint64_t ell() const { return ell_; }
    Elem zero() const { return 0; }
    Elem one() const { return 1; }
    Elem add(const Elem& a, const Elem& b) const { return a + b; }
    Elem sub(const Elem& a, const Elem& b) const { return a - b; }
    Elem mul(const Elem& a, const Elem& b) const { return a * b; }
    bool is_zero(const Elem& a) const { return sgn(a) == 0; }

    /// ell-adic valuation of a nonzero element.
    unsigned valuation(const Elem& a) const
    {
        mpz_class n = a.get_num(), rest;
        const mpz_class p = ell_;
        return static_cast<unsigned>(mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t()));
    }

    Elem div_exact(const Elem& a, const Elem& b) const { return a / b; }

private:
    std::uint64_t ell_;
};

template <class Ring>
using Matrix = std::vector<std::vector<typename Ring::Elem>>;

template <class Ring>
struct Smith {
    Matrix<Ring> P;                 // rows x rows, P A Q = D
    Matrix<Ring> Q;                 // cols x cols
    std::vector<unsigned> pivots;   // valuations of the nonzero diagonal entries of D
    std::size_t rows = 0, cols = 0;
};

/// Smith form over a ring with a valuation (DVR or truncation of one).
template <class Ring>
Smith<Ring> smith(const Ring& R, Matrix<Ring> A, std::size_t cols)
{
    using Elem = typename Ring::Elem;
    const std::size_t rows = A.size();
    Smith<Ring> out;
    out.rows = rows;
    out.cols = cols;
    out.P.assign(rows, std::vector<Elem>(rows, R.zero()));
    for (std::size_t i = 0; i < rows; ++i) out.P[i][i] = R.one();
    out.Q.assign(cols, std::vector<Elem>(cols, R.zero()));
    for (std::size_t i = 0; i < cols; ++i) out.Q[i][i] = R.one();

    for (std::size_t k = 0; k < std::min(rows, cols); ++k) {
        std::size_t pi = rows, pj = cols;
        unsigned best = ~0u;
        for (std::size_t i = k; i < rows && best > 0; ++i)
            for (std::size_t j = k; j < cols; ++j) {
                if (R.is_zero(A[i][j])) continue;
                const unsigned v = R.valuation(A[i][j]);
                if (v < best) {
                    best = v;
                    pi = i;
                    pj = j;
                    if (v == 0) break;
                }
            }
        if (pi == rows) break;
        std::swap(A[k], A[pi]);
        std::swap(out.P[k], out.P[pi]);
        if (pj != k) {
            for (auto& row : A) std::swap(row[k], row[pj]);
            for (auto& row : out.Q) std::swap(row[k], row[pj]);
        }
        const Elem pivot = A[k][k];
        for (std::size_t i = k + 1; i < rows; ++i) {
            if (R.is_zero(A[i][k])) continue;
            const Elem f = R.div_exact(A[i][k], pivot);
            for (std::size_t j = k; j < cols; ++j) A[i][j] = R.sub(A[i][j], R.mul(f, A[k][j]));
            for (std::size_t j = 0; j < rows; ++j) out.P[i][j] = R.sub(out.P[i][j], R.mul(f, out.P[k][j]));
            A[i][k] = R.zero();
        }
        for (std::size_t j = k + 1; j < cols; ++j) {
            if (R.is_zero(A[k][j])) continue;
            const Elem f = R.div_exact(A[k][j], pivot);
            for (std::size_t i = 0; i < cols; ++i) out.Q[i][j] = R.sub(out.Q[i][j], R.mul(f, out.Q[i][k]));
            A[k][j] = R.zero();
        }
        out.pivots.push_back(best);
    }
    return out;
}

/// Z_(ell)-basis of the kernel of A (saturated), as integer column vectors.
inline std::vector<std::vector<mpz_class>> saturated_kernel(const ZlRing& R, const Matrix<ZlRing>& A, std::size_t cols)
{
    const auto sm = smith(R, A, cols);
    std::vector<std::vector<mpz_class>> out;
    for (std::size_t k = sm.pivots.size(); k < cols; ++k) {
        mpz_class den = 1;
        for (std::size_t i = 0; i < cols; ++i) den = lcm(den, sm.Q[i][k].get_den());
        std::vector<mpz_class> v(cols);
        mpz_class g = 0;
        for (std::size_t i = 0; i < cols; ++i) {
            v[i] = sm.Q[i][k].get_num() * (den / sm.Q[i][k].get_den());
            g = gcd(g, v[i]);
        }
        // Scaling by the ell-free content keeps this a lattice basis.
        bool flip = false;
        for (std::size_t i = 0; i < cols; ++i)
            if (v[i] != 0) {
                flip = v[i] < 0;
                break;
            }
        for (auto& x : v) {
            x /= g;
            if (flip) x = -x;
        }
        out.push_back(std::move(v));
    }
    return out;
}

/// Generators of the kernel of A over R/omega^B, plus log_ell of the kernel size.
struct ChainKernel {
    Matrix<ChainRing> generators;  // each a column vector of length cols
    unsigned log_size = 0;
};

inline ChainKernel chain_kernel(const ChainRing& R, const Matrix<ChainRing>& A, std::size_t cols)
{
    const auto sm = smith(R, A, cols);
    ChainKernel out;
    for (std::size_t k = 0; k < cols; ++k) {
        unsigned shift = 0;
        if (k < sm.pivots.size()) {
            shift = R.B() - sm.pivots[k];
            out.log_size += sm.pivots[k];
        } else {
            out.log_size += R.B();
        }
        if (shift >= R.B()) continue;
        const auto w = R.omega_pow(shift);
        std::vector<ChainRing::Elem> g(cols);
        for (std::size_t i = 0; i < cols; ++i) g[i] = R.mul(w, sm.Q[i][k]);
        out.generators.push_back(std::move(g));
    }
    return out;
}

} // namespace selchain::grids
