#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "selchain/error.hpp"

namespace selchain::arith {

/// A nonzero squarefree integer together with its prime factors (ascending).
class SquarefreeInt {
public:
    static constexpr std::size_t max_factors = 15;

    SquarefreeInt() = default;

    std::int64_t value() const { return d_; }
    std::uint64_t magnitude() const { return static_cast<std::uint64_t>(d_ < 0 ? -d_ : d_); }
    bool negative() const { return d_ < 0; }
    std::size_t size() const { return count_; }
    std::uint64_t prime(std::size_t i) const { return primes_[i]; }
    const std::uint64_t* begin() const { return primes_.data(); }
    const std::uint64_t* end() const { return primes_.data() + count_; }
    bool odd() const { return count_ == 0 || primes_[0] != 2; }

    SquarefreeInt negated() const
    {
        SquarefreeInt out = *this;
        out.d_ = -d_;
        return out;
    }

    /// Trial-division factorization; throws unless d is nonzero and squarefree.
    static SquarefreeInt factor(std::int64_t d)
    {
        if (d == 0) throw domain_error("squarefree integer must be nonzero");
        SquarefreeInt out;
        out.d_ = d;
        std::uint64_t n = d < 0 ? static_cast<std::uint64_t>(-(d + 1)) + 1 : static_cast<std::uint64_t>(d);
        for (std::uint64_t p = 2; p * p <= n; ++p) {
            if (n % p) continue;
            n /= p;
            if (n % p == 0) throw domain_error(std::to_string(d) + " is not squarefree");
            out.push(p);
        }
        if (n > 1) out.push(n);
        return out;
    }

    std::string to_string() const
    {
        std::string s = std::to_string(d_) + " =";
        if (d_ < 0) s += " -1";
        if (count_ == 0 && d_ > 0) s += " 1";
        for (std::size_t i = 0; i < count_; ++i) s += (i || d_ < 0 ? " * " : " ") + std::to_string(primes_[i]);
        return s;
    }

    friend bool operator==(const SquarefreeInt& a, const SquarefreeInt& b) { return a.d_ == b.d_; }

private:
    friend class SquarefreeSieve;

    void push(std::uint64_t p)
    {
        if (count_ == max_factors) throw domain_error("too many prime factors");
        primes_[count_++] = p;
    }

    std::int64_t d_ = 1;
    std::uint8_t count_ = 0;
    std::array<std::uint64_t, max_factors> primes_{};
};

enum class Parity { all, odd };
enum class Signs { positive, both };

struct SieveFilter {
    Parity parity = Parity::all;
    Signs signs = Signs::positive;
};

/// Segmented sieve over 1..H producing squarefree integers with factorizations.
/// With both signs, -d is produced immediately before d.
class SquarefreeSieve {
public:
    explicit SquarefreeSieve(std::uint64_t H, SieveFilter filter = {}, std::uint64_t segment = 1u << 16)
        : H_(H), filter_(filter), segment_(segment)
    {
        if (H < 1) throw domain_error("sieve bound must be at least 1");
        if (segment < 1) throw domain_error("segment length must be positive");
        std::uint64_t root = 1;
        while ((root + 1) * (root + 1) <= H) ++root;
        std::vector<bool> comp(root + 1, false);
        for (std::uint64_t p = 2; p <= root; ++p) {
            if (comp[p]) continue;
            primes_.push_back(p);
            for (std::uint64_t q = p * p; q <= root; q += p) comp[q] = true;
        }
    }

    std::uint64_t bound() const { return H_; }

    /// Calls fn on every qualifying d with lo <= |d| <= hi, in the order described above.
    void range(std::uint64_t lo, std::uint64_t hi, const std::function<void(const SquarefreeInt&)>& fn) const
    {
        lo = std::max<std::uint64_t>(lo, 1);
        hi = std::min(hi, H_);
        std::vector<std::uint64_t> rest;
        std::vector<std::uint8_t> bad;
        std::vector<SquarefreeInt> items;
        for (std::uint64_t start = lo; start <= hi; start += segment_) {
            const std::uint64_t stop = std::min(hi, start + segment_ - 1);
            const std::size_t len = stop - start + 1;
            rest.resize(len);
            bad.assign(len, 0);
            items.assign(len, SquarefreeInt{});
            for (std::size_t i = 0; i < len; ++i) rest[i] = start + i;
            for (const std::uint64_t p : primes_) {
                if (p * p > stop) break;
                if (filter_.parity == Parity::odd && p == 2) {
                    for (std::uint64_t m = (start + 1) / 2 * 2; m <= stop; m += 2) bad[m - start] = 1;
                    continue;
                }
                const std::uint64_t p2 = p * p;
                for (std::uint64_t m = (start + p - 1) / p * p; m <= stop; m += p) {
                    const std::size_t i = m - start;
                    if (bad[i]) continue;
                    if (m % p2 == 0) {
                        bad[i] = 1;
                        continue;
                    }
                    rest[i] /= p;
                    items[i].push(p);
                }
            }
            for (std::size_t i = 0; i < len; ++i) {
                if (bad[i]) continue;
                const std::uint64_t n = start + i;
                if (filter_.parity == Parity::odd && n % 2 == 0) continue;
                SquarefreeInt& s = items[i];
                if (rest[i] > 1) s.push(rest[i]);
                s.d_ = static_cast<std::int64_t>(n);
                if (filter_.signs == Signs::both) fn(s.negated());
                fn(s);
            }
        }
    }

    void for_each(const std::function<void(const SquarefreeInt&)>& fn) const { range(1, H_, fn); }

private:
    std::uint64_t H_;
    SieveFilter filter_;
    std::uint64_t segment_;
    std::vector<std::uint64_t> primes_;
};

inline std::vector<SquarefreeInt> squarefree_sieve(std::uint64_t H, SieveFilter filter = {})
{
    std::vector<SquarefreeInt> out;
    SquarefreeSieve(H, filter).for_each([&](const SquarefreeInt& s) { out.push_back(s); });
    return out;
}

} // namespace selchain::arith
