#pragma once

#include <cstdint>

#include "selchain/error.hpp"

namespace selchain::arith {

/// Jacobi symbol (a/n) for odd n > 0.
inline int jacobi(std::int64_t a, std::uint64_t n)
{
    if (n == 0 || n % 2 == 0) throw domain_error("jacobi: modulus must be odd and positive");
    std::int64_t r = a % static_cast<std::int64_t>(n);
    std::uint64_t x = static_cast<std::uint64_t>(r < 0 ? r + static_cast<std::int64_t>(n) : r);
    int t = 1;
    while (x != 0) {
        while (x % 2 == 0) {
            x /= 2;
            const std::uint64_t m8 = n % 8;
            if (m8 == 3 || m8 == 5) t = -t;
        }
        std::swap(x, n);
        if (x % 4 == 3 && n % 4 == 3) t = -t;
        x %= n;
    }
    return n == 1 ? t : 0;
}

/// Kronecker symbol (a/n), n != 0.
inline int kronecker(std::int64_t a, std::int64_t n)
{
    if (n == 0) throw domain_error("kronecker: n must be nonzero");
    int t = 1;
    std::uint64_t m;
    if (n < 0) {
        if (a < 0) t = -t;
        m = static_cast<std::uint64_t>(-(n + 1)) + 1;
    } else {
        m = static_cast<std::uint64_t>(n);
    }
    while (m % 2 == 0) {
        if (a % 2 == 0) return 0;
        const std::int64_t a8 = ((a % 8) + 8) % 8;
        if (a8 == 3 || a8 == 5) t = -t;
        m /= 2;
    }
    if (m == 1) return t;
    return t * jacobi(a, m);
}

/// Legendre-symbol pairing [p, q] = (q / p) of two distinct odd primes.
inline int symbol_pair(std::uint64_t p, std::uint64_t q)
{
    if (p == q) throw domain_error("symbol_pair: primes must be distinct");
    if (p % 2 == 0 || q % 2 == 0) throw domain_error("symbol_pair: primes must be odd");
    return jacobi(static_cast<std::int64_t>(q), p);
}

} // namespace selchain::arith
