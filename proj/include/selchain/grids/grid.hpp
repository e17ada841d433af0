#pragma once

// Product grids X = prod_s X_s, zero-sums-in-lines modules and closure.

#include <algorithm>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "selchain/grids/ring.hpp"

namespace selchain::grids {

using Point = std::vector<unsigned>;       // coordinate index per s
using Subset = std::vector<std::size_t>;   // sorted point indices
using SMask = std::uint32_t;               // subset of S as a bit mask

class Grid {
public:
    /// labels[s] lists the elements of X_s. B = 0 selects |S| + 1.
    Grid(std::vector<std::vector<std::string>> labels, RingSpec ring = {2, 1, 0}) : labels_(std::move(labels)), ring_(ring)
    {
        if (labels_.empty()) throw domain_error("grid needs at least one factor");
        if (labels_.size() > 20) throw domain_error("grid has too many factors");
        std::set<std::string> seen;
        for (const auto& xs : labels_) {
            if (xs.empty()) throw domain_error("every factor of the grid must be nonempty");
            for (const auto& l : xs)
                if (!seen.insert(l).second) throw domain_error("grid factors must be disjoint: " + l);
        }
        if (ring_.B == 0) ring_.B = static_cast<unsigned>(labels_.size()) + 1;
        size_ = 1;
        for (const auto& xs : labels_) size_ *= xs.size();
        if (size_ > 4096) throw domain_error("grid too large");
    }

    /// Grid with factor sizes dims and labels like a0, a1, b0, ...
    static Grid sized(const std::vector<unsigned>& dims, RingSpec ring = {2, 1, 0})
    {
        std::vector<std::vector<std::string>> labels;
        for (std::size_t s = 0; s < dims.size(); ++s) {
            std::vector<std::string> xs;
            for (unsigned i = 0; i < dims[s]; ++i) xs.push_back(std::string(1, static_cast<char>('a' + s)) + std::to_string(i));
            labels.push_back(std::move(xs));
        }
        return Grid(std::move(labels), ring);
    }

    std::size_t factors() const { return labels_.size(); }
    std::size_t dim(std::size_t s) const { return labels_[s].size(); }
    std::size_t size() const { return size_; }
    const RingSpec& ring() const { return ring_; }
    const std::vector<std::vector<std::string>>& labels() const { return labels_; }
    SMask all_factors() const { return static_cast<SMask>((1ull << labels_.size()) - 1); }

    Point point(std::size_t index) const
    {
        Point p(labels_.size());
        for (std::size_t s = labels_.size(); s-- > 0;) {
            p[s] = static_cast<unsigned>(index % labels_[s].size());
            index /= labels_[s].size();
        }
        return p;
    }

    std::size_t index(const Point& p) const
    {
        if (p.size() != labels_.size()) throw domain_error("point has the wrong number of coordinates");
        std::size_t idx = 0;
        for (std::size_t s = 0; s < labels_.size(); ++s) {
            if (p[s] >= labels_[s].size()) throw domain_error("coordinate out of range");
            idx = idx * labels_[s].size() + p[s];
        }
        return idx;
    }

    Subset all() const
    {
        Subset out(size_);
        for (std::size_t i = 0; i < size_; ++i) out[i] = i;
        return out;
    }

    std::string format(std::size_t index) const
    {
        const Point p = point(index);
        std::string s = "(";
        for (std::size_t k = 0; k < p.size(); ++k) s += (k ? "," : "") + labels_[k][p[k]];
        return s + ")";
    }

    std::string format(const Subset& Y) const
    {
        std::string s = "{";
        for (std::size_t i = 0; i < Y.size(); ++i) s += (i ? " " : "") + format(Y[i]);
        return s + "}";
    }

    /// Parses "(a0,b1)".
    std::size_t parse_point(const std::string& text) const
    {
        std::string body = text;
        body.erase(std::remove_if(body.begin(), body.end(), [](char c) { return c == '(' || c == ')' || c == ' '; }),
                   body.end());
        std::vector<std::string> parts;
        std::stringstream ss(body);
        std::string tok;
        while (std::getline(ss, tok, ',')) parts.push_back(tok);
        if (parts.size() != labels_.size()) throw domain_error("point " + text + " has the wrong arity");
        Point p(labels_.size());
        for (std::size_t s = 0; s < parts.size(); ++s) {
            const auto it = std::find(labels_[s].begin(), labels_[s].end(), parts[s]);
            if (it == labels_[s].end()) throw domain_error("unknown label " + parts[s]);
            p[s] = static_cast<unsigned>(it - labels_[s].begin());
        }
        return index(p);
    }

    /// Parses whitespace separated points; an empty string or "{}" is the empty set.
    Subset parse_subset(const std::string& text) const
    {
        Subset out;
        std::string cur;
        bool open = false;
        for (const char c : text) {
            if (c == '(') {
                open = true;
                cur.clear();
            } else if (c == ')') {
                if (!open) throw domain_error("unbalanced parenthesis in subset");
                out.push_back(parse_point(cur));
                open = false;
            } else if (open) {
                cur += c;
            }
        }
        if (open) throw domain_error("unbalanced parenthesis in subset");
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    std::vector<std::vector<std::string>> labels_;
    RingSpec ring_;
    std::size_t size_ = 1;
};

/// One line per factor with its labels; '#' starts a comment.
inline Grid parse_grid(std::istream& in, RingSpec ring = {2, 1, 0})
{
    std::vector<std::vector<std::string>> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::stringstream ss(line);
        std::vector<std::string> xs;
        std::string tok;
        while (ss >> tok) xs.push_back(tok);
        if (!xs.empty()) labels.push_back(std::move(xs));
    }
    return Grid(std::move(labels), ring);
}

inline bool contains(const Subset& Y, std::size_t x) { return std::binary_search(Y.begin(), Y.end(), x); }

inline Subset with(Subset Y, std::size_t x)
{
    Y.insert(std::lower_bound(Y.begin(), Y.end(), x), x);
    return Y;
}

inline Subset without(Subset Y, std::size_t x)
{
    Y.erase(std::remove(Y.begin(), Y.end(), x), Y.end());
    return Y;
}

/// Coefficient vector a: Y -> R/omega^B, listed in the order of support.
struct RElement {
    Subset support;
    std::vector<ChainRing::Elem> coeffs;
};

namespace detail {

// Rows: s-lines (s in U) meeting Y; columns: points of Y.
inline Matrix<ZlRing> line_matrix(const Grid& X, SMask U, const Subset& Y)
{
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> row_of;  // (s, line key) -> row
    Matrix<ZlRing> A;
    for (std::size_t s = 0; s < X.factors(); ++s) {
        if (!(U >> s & 1)) continue;
        for (std::size_t c = 0; c < Y.size(); ++c) {
            Point p = X.point(Y[c]);
            p[s] = 0;
            const auto key = std::make_pair(s, X.index(p));
            auto it = row_of.find(key);
            if (it == row_of.end()) {
                it = row_of.emplace(key, A.size()).first;
                A.emplace_back(Y.size(), mpq_class(0));
            }
            A[it->second][c] = 1;
        }
    }
    return A;
}

} // namespace detail

/// Z_(ell)-basis of zs(U, Y) as primitive integer vectors over Y.
inline std::vector<std::vector<mpz_class>> zs_integer_basis(const Grid& X, SMask U, const Subset& Y)
{
    const ZlRing R(X.ring().ell);
    return saturated_kernel(R, detail::line_matrix(X, U, Y), Y.size());
}

/// Generators of zs(U, Y) over R/omega^B.
inline std::vector<RElement> zs_basis(const Grid& X, SMask U, const Subset& Y)
{
    const ChainRing R(X.ring());
    std::vector<RElement> out;
    for (const auto& v : zs_integer_basis(X, U, Y)) {
        RElement a{Y, {}};
        for (const auto& c : v) a.coeffs.push_back(R.from_rational(mpq_class(c)));
        out.push_back(std::move(a));
    }
    return out;
}

inline std::vector<RElement> zs_basis(const Grid& X, const Subset& Y) { return zs_basis(X, X.all_factors(), Y); }

/// Points x outside Y admitting a in zs(Y + x) with a(x) a unit: those whose
/// line-incidence column lies in the Z_(ell)-span of the columns of Y.
inline Subset closure_step(const Grid& X, const Subset& Y)
{
    const ZlRing R(X.ring().ell);
    const Subset all = X.all();
    const auto full = detail::line_matrix(X, X.all_factors(), all);
    const std::size_t rows = full.size();
    Matrix<ZlRing> A(rows, std::vector<mpq_class>(Y.size()));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < Y.size(); ++c) A[i][c] = full[i][Y[c]];
    const auto sm = smith(R, A, Y.size());
    Subset added;
    for (std::size_t x = 0; x < X.size(); ++x) {
        if (contains(Y, x)) continue;
        bool ok = true;
        for (std::size_t k = 0; k < rows && ok; ++k) {
            mpq_class t = 0;
            for (std::size_t i = 0; i < rows; ++i)
                if (sgn(full[i][x]) != 0) t += sm.P[k][i];
            if (sgn(t) == 0) continue;
            ok = k < sm.pivots.size() && R.valuation(t) >= sm.pivots[k];
        }
        if (ok) added.push_back(x);
    }
    return added;
}

inline Subset closure(const Grid& X, Subset Y)
{
    std::sort(Y.begin(), Y.end());
    while (true) {
        const auto added = closure_step(X, Y);
        if (added.empty()) return Y;
        for (const auto x : added) Y = with(Y, x);
    }
}

inline bool is_closed(const Grid& X, const Subset& Y) { return closure_step(X, Y).empty(); }

/// Points sharing at least one coordinate with x0.
inline Subset basis_construct(const Grid& X, std::size_t x0)
{
    const Point p0 = X.point(x0);
    Subset out;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const Point p = X.point(i);
        for (std::size_t s = 0; s < p.size(); ++s)
            if (p[s] == p0[s]) {
                out.push_back(i);
                break;
            }
    }
    return out;
}

/// |X| - prod (|X_s| - 1).
inline std::size_t basis_bound(const Grid& X)
{
    std::size_t prod = 1;
    for (std::size_t s = 0; s < X.factors(); ++s) prod *= X.dim(s) - 1;
    return X.size() - prod;
}

/// A basis of the closed set Y: drop a unit coordinate of a zs relation until none remain.
inline Subset find_basis(const Grid& X, Subset Y)
{
    const ZlRing R(X.ring().ell);
    while (true) {
        const auto zs = zs_integer_basis(X, X.all_factors(), Y);
        if (zs.empty()) return Y;
        std::size_t drop = Y.size();
        for (std::size_t c = 0; c < Y.size() && drop == Y.size(); ++c)
            if (sgn(zs[0][c]) != 0 && R.valuation(mpq_class(zs[0][c])) == 0) drop = c;
        if (drop == Y.size()) throw invariant_error("saturated relation without a unit coordinate");
        Y.erase(Y.begin() + static_cast<std::ptrdiff_t>(drop));
    }
}

/// Delta(x0, x1) as an integer function on X.
inline std::vector<int> delta_values(const Grid& X, std::size_t x0, std::size_t x1)
{
    const Point p0 = X.point(x0), p1 = X.point(x1);
    std::vector<int> out(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        const Point p = X.point(i);
        int v = 1;
        for (std::size_t s = 0; s < p.size() && v != 0; ++s) {
            if (p[s] == p0[s]) continue;
            v = (p[s] == p1[s]) ? -v : 0;
        }
        out[i] = v;
    }
    return out;
}

/// Delta(x0, x1) over its support.
inline RElement delta_element(const Grid& X, std::size_t x0, std::size_t x1)
{
    const ChainRing R(X.ring());
    const auto vals = delta_values(X, x0, x1);
    RElement a;
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (vals[i] != 0) {
            a.support.push_back(i);
            a.coeffs.push_back(R.from_int(vals[i]));
        }
    return a;
}

/// Do the line sums of the integer function a (indexed by X) vanish on every s-line, s in U?
inline bool zero_line_sums(const Grid& X, SMask U, const std::vector<int>& a)
{
    for (std::size_t s = 0; s < X.factors(); ++s) {
        if (!(U >> s & 1)) continue;
        std::map<std::size_t, long> sums;
        for (std::size_t i = 0; i < X.size(); ++i) {
            Point p = X.point(i);
            p[s] = 0;
            sums[X.index(p)] += a[i];
        }
        for (const auto& [k, v] : sums)
            if (v != 0) return false;
    }
    return true;
}

} // namespace selchain::grids
