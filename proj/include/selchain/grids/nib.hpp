#pragma once

// The modules N_{I,b}(Y) for N = (Frac R / R)^rank with trivial twisting.
//
// Values live in N[omega^B] = omega^-B R^rank / R^rank and are stored as
// vectors v over R/omega^B standing for omega^-B v. Then a . n = 0 iff
// sum a(x) v(x) = 0 mod omega^B, and n is omega^k-torsion iff every
// coordinate of v has valuation >= B - k.
//
// zs_{I,b}(Y) is computed in the tensor basis beta_x = (x) b_s(x_s) with
// b_s(x0_s) = e_{x0_s} and b_s(y) = e_y - e_{x0_s}. There zs(U, X) is
// spanned by the beta_x with U inside T(x) = {s : x_s != x0_s}, so
//   sum_U omega^(b-|U|) zs(U, X) = (+)_x omega^(b - t(x)) R beta_x
// with t(x) the largest size of a member of I inside T(x). Intersecting
// with R^Y is a kernel computation over Z_(ell) followed by one over R/omega^B.

#include <bit>
#include <map>
#include <random>

#include "selchain/grids/grid.hpp"

namespace selchain::grids {

/// A downward closed nonempty family of subsets of S.
class Ideal {
public:
    static Ideal from_sets(std::size_t n, const std::vector<SMask>& sets)
    {
        Ideal I(n);
        if (sets.empty()) throw domain_error("an ideal must be nonempty");
        for (const auto U : sets) {
            if (U >> n) throw domain_error("ideal member is not a subset of S");
            I.member_[U] = true;
        }
        for (const auto U : sets)
            for (SMask W = U;; W = (W - 1) & U) {
                if (!I.member_[W]) throw domain_error("family is not downward closed");
                if (W == 0) break;
            }
        return I;
    }

    /// Downward closure of the given sets.
    static Ideal generated_by(std::size_t n, const std::vector<SMask>& gens)
    {
        Ideal I(n);
        I.member_[0] = true;
        for (const auto U : gens) {
            if (U >> n) throw domain_error("ideal generator is not a subset of S");
            for (SMask W = U;; W = (W - 1) & U) {
                I.member_[W] = true;
                if (W == 0) break;
            }
        }
        return I;
    }

    static Ideal power_set(std::size_t n) { return generated_by(n, {static_cast<SMask>((1ull << n) - 1)}); }
    static Ideal trivial(std::size_t n) { return generated_by(n, {}); }

    std::size_t factors() const { return n_; }
    bool contains(SMask U) const { return member_.at(U); }

    unsigned max_size() const { return max_inside(static_cast<SMask>((1ull << n_) - 1)); }

    /// Largest size of a member of I contained in U.
    unsigned max_inside(SMask U) const
    {
        unsigned best = 0;
        for (SMask W = U;; W = (W - 1) & U) {
            if (member_[W]) best = std::max(best, static_cast<unsigned>(std::popcount(W)));
            if (W == 0) break;
        }
        return best;
    }

    std::vector<SMask> sets() const
    {
        std::vector<SMask> out;
        for (SMask U = 0; U < member_.size(); ++U)
            if (member_[U]) out.push_back(U);
        return out;
    }

private:
    explicit Ideal(std::size_t n) : n_(n), member_(std::size_t{1} << n, false)
    {
        if (n > 20) throw domain_error("too many factors for an ideal");
    }

    std::size_t n_;
    std::vector<bool> member_;
};

using Vec = std::vector<ChainRing::Elem>;

struct ModuleElement {
    unsigned rank = 1;
    std::map<std::size_t, Vec> values;  // point -> v, meaning omega^-B v; zero values omitted
};

namespace detail {

inline bool is_zero_vec(const ChainRing& R, const Vec& v)
{
    for (const auto& c : v)
        if (!R.is_zero(c)) return false;
    return true;
}

inline void set_value(const ChainRing& R, ModuleElement& n, std::size_t x, Vec v)
{
    if (is_zero_vec(R, v))
        n.values.erase(x);
    else
        n.values[x] = std::move(v);
}

inline void check_params(const Grid& X, const Ideal& I, unsigned b)
{
    if (I.factors() != X.factors()) throw domain_error("ideal is over a different index set");
    if (b < I.max_size()) throw domain_error("b is smaller than a member of the ideal");
    if (b > X.ring().B) throw domain_error("b exceeds the truncation B");
}

// beta_x(z) for the base point with all coordinates 0.
inline int beta(const Point& x, const Point& z)
{
    int v = 1;
    for (std::size_t s = 0; s < x.size() && v != 0; ++s) {
        if (x[s] == 0)
            v = z[s] == 0 ? v : 0;
        else
            v = z[s] == x[s] ? v : (z[s] == 0 ? -v : 0);
    }
    return v;
}

inline SMask moved(const Point& x)
{
    SMask T = 0;
    for (std::size_t s = 0; s < x.size(); ++s)
        if (x[s] != 0) T |= SMask{1} << s;
    return T;
}

} // namespace detail

inline ModuleElement add(const ChainRing& R, const ModuleElement& a, const ModuleElement& b)
{
    ModuleElement out = a;
    for (const auto& [x, v] : b.values) {
        Vec w = out.values.count(x) ? out.values[x] : Vec(a.rank, R.zero());
        for (unsigned r = 0; r < a.rank; ++r) w[r] = R.add(w[r], v[r]);
        detail::set_value(R, out, x, std::move(w));
    }
    return out;
}

inline ModuleElement negate(const ChainRing& R, const ModuleElement& a)
{
    ModuleElement out = a;
    for (auto& [x, v] : out.values)
        for (auto& c : v) c = R.neg(c);
    return out;
}

inline ModuleElement restrict_to(const ModuleElement& n, const Subset& Y)
{
    ModuleElement out{n.rank, {}};
    for (const auto& [x, v] : n.values)
        if (contains(Y, x)) out.values.emplace(x, v);
    return out;
}

inline bool operator==(const ModuleElement& a, const ModuleElement& b) { return a.rank == b.rank && a.values == b.values; }

/// Generators of zs_{I,b}(Y) modulo omega^B.
inline std::vector<RElement> zs_ib_generators(const Grid& X, const Ideal& I, unsigned b, const Subset& Y)
{
    detail::check_params(X, I, b);
    const ChainRing R(X.ring());
    const ZlRing Z(X.ring().ell);
    const std::size_t nX = X.size();
    std::vector<Point> pts(nX);
    for (std::size_t i = 0; i < nX; ++i) pts[i] = X.point(i);

    // Saturated kernel of z -> sum_x c_x beta_x(z) for z outside Y.
    Matrix<ZlRing> A;
    for (std::size_t z = 0; z < nX; ++z) {
        if (contains(Y, z)) continue;
        std::vector<mpq_class> row(nX);
        for (std::size_t x = 0; x < nX; ++x) row[x] = detail::beta(pts[x], pts[z]);
        A.push_back(std::move(row));
    }
    std::vector<std::vector<mpz_class>> K;
    if (A.empty()) {
        for (std::size_t x = 0; x < nX; ++x) {
            std::vector<mpz_class> col(nX, 0);
            col[x] = 1;
            K.push_back(std::move(col));
        }
    } else {
        K = saturated_kernel(Z, A, nX);
    }
    const std::size_t q = K.size();
    if (q == 0) return {};

    // Coefficients c = K y must satisfy c_x in omega^(b - t(x)) R.
    Matrix<ChainRing> G(nX, Vec(q));
    for (std::size_t x = 0; x < nX; ++x) {
        const unsigned kx = b - I.max_inside(detail::moved(pts[x]));
        const auto w = R.omega_pow(R.B() - kx);
        for (std::size_t j = 0; j < q; ++j) G[x][j] = R.mul(w, R.from_rational(mpq_class(K[j][x])));
    }
    const auto ker = chain_kernel(R, G, q);

    // Values on Y of sum_x (K y)_x beta_x.
    Matrix<ChainRing> T(Y.size(), Vec(q, R.zero()));
    for (std::size_t i = 0; i < Y.size(); ++i)
        for (std::size_t j = 0; j < q; ++j) {
            mpz_class s = 0;
            for (std::size_t x = 0; x < nX; ++x) s += K[j][x] * detail::beta(pts[x], pts[Y[i]]);
            T[i][j] = R.from_rational(mpq_class(s));
        }
    std::vector<RElement> out;
    for (const auto& y : ker.generators) {
        RElement a{Y, Vec(Y.size(), R.zero())};
        bool nonzero = false;
        for (std::size_t i = 0; i < Y.size(); ++i) {
            for (std::size_t j = 0; j < q; ++j) a.coeffs[i] = R.add(a.coeffs[i], R.mul(T[i][j], y[j]));
            nonzero = nonzero || !R.is_zero(a.coeffs[i]);
        }
        if (nonzero) out.push_back(std::move(a));
    }
    return out;
}

namespace detail {

inline void check_support(const ModuleElement& n, const Subset& Y)
{
    for (const auto& [x, v] : n.values) {
        if (!contains(Y, x)) throw domain_error("module element is not supported on Y");
        if (v.size() != n.rank) throw domain_error("module element has inconsistent rank");
    }
}

inline bool annihilates(const ChainRing& R, const std::vector<RElement>& gens, const ModuleElement& n)
{
    for (const auto& a : gens) {
        for (unsigned r = 0; r < n.rank; ++r) {
            ChainRing::Elem acc = R.zero();
            for (std::size_t i = 0; i < a.support.size(); ++i) {
                const auto it = n.values.find(a.support[i]);
                if (it != n.values.end()) acc = R.add(acc, R.mul(a.coeffs[i], it->second[r]));
            }
            if (!R.is_zero(acc)) return false;
        }
    }
    return true;
}

} // namespace detail

inline bool nib_membership(const Grid& X, const Ideal& I, unsigned b, const Subset& Y, const ModuleElement& n)
{
    detail::check_support(n, Y);
    const ChainRing R(X.ring());
    return detail::annihilates(R, zs_ib_generators(X, I, b, Y), n);
}

inline bool nib_membership(const Grid& X, const Ideal& I, unsigned b, const ModuleElement& n)
{
    return nib_membership(X, I, b, X.all(), n);
}

/// eta(U, coords, m): constant m on the points agreeing with coords on U.
struct EtaTerm {
    SMask U = 0;
    Point coords;  // entries outside U are ignored
    Vec m;
};

inline ModuleElement eta_element(const Grid& X, const Ideal& I, unsigned b, const EtaTerm& term)
{
    detail::check_params(X, I, b);
    const ChainRing R(X.ring());
    if (term.coords.size() != X.factors()) throw domain_error("eta coordinates have the wrong arity");
    const unsigned t = I.max_inside(term.U);
    for (const auto& c : term.m)
        if (R.valuation(c) < R.B() - (b - t)) throw domain_error("eta value is not omega^(b-t)-torsion");
    ModuleElement n{static_cast<unsigned>(term.m.size()), {}};
    if (detail::is_zero_vec(R, term.m)) return n;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const Point p = X.point(i);
        bool on = true;
        for (std::size_t s = 0; s < p.size() && on; ++s)
            if ((term.U >> s & 1) && p[s] != term.coords[s]) on = false;
        if (on) n.values.emplace(i, term.m);
    }
    return n;
}

inline ModuleElement eta_sum(const Grid& X, const Ideal& I, unsigned b, const std::vector<EtaTerm>& terms, unsigned rank)
{
    const ChainRing R(X.ring());
    ModuleElement acc{rank, {}};
    for (const auto& t : terms) acc = add(R, acc, eta_element(X, I, b, t));
    return acc;
}

/// Writes a member of N_{I,b}(X) as a sum of eta elements, peeling off the
/// point with the most coordinates equal to the base point each time.
inline std::vector<EtaTerm> eta_decompose(const Grid& X, const Ideal& I, unsigned b, ModuleElement n)
{
    if (!nib_membership(X, I, b, n)) throw domain_error("element is not in N_{I,b}(X)");
    const ChainRing R(X.ring());
    auto rank_of = [&](std::size_t x) {
        const Point p = X.point(x);
        return static_cast<std::size_t>(std::count(p.begin(), p.end(), 0u));
    };
    std::vector<EtaTerm> out;
    while (!n.values.empty()) {
        std::size_t x1 = n.values.begin()->first;
        for (const auto& [x, v] : n.values)
            if (std::make_pair(rank_of(x), x) > std::make_pair(rank_of(x1), x1)) x1 = x;
        const Point p1 = X.point(x1);
        EtaTerm term{detail::moved(p1), p1, n.values.at(x1)};
        const auto eta = eta_element(X, I, b, term);  // throws if the torsion bound fails
        n = add(R, n, negate(R, eta));
        if (n.values.count(x1)) throw invariant_error("eta step did not clear the leading point");
        out.push_back(std::move(term));
    }
    return out;
}

/// Lifts a member of N_{I,b}(Y) to N_{I,b}(Y2) for Y inside Y2, one point at a time.
inline ModuleElement nib_extend(const Grid& X, const Ideal& I, unsigned b, const Subset& Y, const Subset& Y2,
                                ModuleElement n)
{
    const ChainRing R(X.ring());
    detail::check_support(n, Y);
    for (const auto y : Y)
        if (!contains(Y2, y)) throw domain_error("Y is not contained in the target set");
    Subset cur = Y;
    for (const auto x : Y2) {
        if (contains(cur, x)) continue;
        cur = with(cur, x);
        const auto gens = zs_ib_generators(X, I, b, cur);
        const RElement* best = nullptr;
        std::size_t best_pos = 0;
        unsigned best_v = R.B();
        for (const auto& a : gens) {
            const auto pos = static_cast<std::size_t>(std::lower_bound(a.support.begin(), a.support.end(), x) - a.support.begin());
            const unsigned v = R.valuation(a.coeffs[pos]);
            if (v < best_v) {
                best_v = v;
                best = &a;
                best_pos = pos;
            }
        }
        Vec w(n.rank, R.zero());
        if (best) {
            for (unsigned r = 0; r < n.rank; ++r) {
                ChainRing::Elem t = R.zero();
                for (std::size_t i = 0; i < best->support.size(); ++i) {
                    if (i == best_pos) continue;
                    const auto it = n.values.find(best->support[i]);
                    if (it != n.values.end()) t = R.add(t, R.mul(best->coeffs[i], it->second[r]));
                }
                if (R.valuation(t) < best_v) throw invariant_error("extension equation has no solution");
                w[r] = R.is_zero(t) ? R.zero() : R.neg(R.div_exact(t, best->coeffs[best_pos]));
            }
        }
        detail::set_value(R, n, x, std::move(w));
    }
    if (!detail::annihilates(R, zs_ib_generators(X, I, b, Y2), n)) throw invariant_error("extension is not a member");
    return n;
}

/// log_ell |N_{I,b}(Y)| for rank one.
inline unsigned nib_log_size(const Grid& X, const Ideal& I, unsigned b, const Subset& Y)
{
    const ChainRing R(X.ring());
    const auto gens = zs_ib_generators(X, I, b, Y);
    Matrix<ChainRing> A;
    for (const auto& a : gens) A.push_back(a.coeffs);
    if (A.empty()) return R.B() * static_cast<unsigned>(Y.size());
    return chain_kernel(R, A, Y.size()).log_size;
}

/// A random element of R/omega^B.
template <class Rng>
ChainRing::Elem random_elem(const ChainRing& R, Rng& rng)
{
    ChainRing::Elem acc = R.zero();
    ChainRing::Elem w = R.one();
    for (unsigned i = 0; i < R.e(); ++i) {
        acc = R.add(acc, R.mul(w, R.from_int(static_cast<std::int64_t>(rng() % (1u << 20)))));
        w = R.mul(w, R.omega());
    }
    return acc;
}

/// A random eta element for (I, b).
template <class Rng>
EtaTerm random_eta(const Grid& X, const Ideal& I, unsigned b, unsigned rank, Rng& rng)
{
    const ChainRing R(X.ring());
    EtaTerm t;
    t.U = static_cast<SMask>(rng() % (std::uint64_t{1} << X.factors()));
    t.coords.resize(X.factors());
    for (std::size_t s = 0; s < X.factors(); ++s) t.coords[s] = static_cast<unsigned>(rng() % X.dim(s));
    const auto w = R.omega_pow(R.B() - (b - I.max_inside(t.U)));
    for (unsigned r = 0; r < rank; ++r) t.m.push_back(R.mul(w, random_elem(R, rng)));
    return t;
}

} // namespace selchain::grids
