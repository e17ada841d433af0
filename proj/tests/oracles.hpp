#pragma once

// Brute-force oracles used only by the tests. None of these share code with
// the library paths they check.

#include <cstdint>
#include <cmath>
#include <map>
#include <numeric>
#include <algorithm>
#include <vector>

namespace oracle {

// Rank over F_ell of a rows x cols matrix stored row-major in a[]; a is clobbered.
inline unsigned rank_mod(int* a, unsigned rows, unsigned cols, int ell)
{
    unsigned rank = 0;
    for (unsigned c = 0; c < cols && rank < rows; ++c) {
        unsigned p = rank;
        while (p < rows && a[p * cols + c] == 0) ++p;
        if (p == rows) continue;
        for (unsigned k = 0; k < cols; ++k) std::swap(a[p * cols + k], a[rank * cols + k]);
        int inv = 1;
        while ((a[rank * cols + c] * inv) % ell != 1) ++inv;
        for (unsigned k = 0; k < cols; ++k) a[rank * cols + k] = (a[rank * cols + k] * inv) % ell;
        for (unsigned r = 0; r < rows; ++r) {
            const int f = a[r * cols + c];
            if (r == rank || f == 0) continue;
            for (unsigned k = 0; k < cols; ++k)
                a[r * cols + k] = ((a[r * cols + k] - f * a[rank * cols + k]) % ell + ell) % ell;
        }
        ++rank;
    }
    return rank;
}

// Rank histogram of every m x n matrix over F_ell (m * n <= 36).
inline std::map<unsigned, std::uint64_t> enumerate_general(int ell, unsigned m, unsigned n)
{
    std::map<unsigned, std::uint64_t> hist;
    const unsigned cells = m * n;
    int digits[36] = {};
    int work[36];
    std::vector<std::uint64_t> counts(std::min(m, n) + 1, 0);
    while (true) {
        std::copy(digits, digits + cells, work);
        ++counts[rank_mod(work, m, n, ell)];
        unsigned k = 0;
        while (k < cells && ++digits[k] == ell) digits[k++] = 0;
        if (k == cells) break;
    }
    for (unsigned r = 0; r < counts.size(); ++r)
        if (counts[r]) hist[r] = counts[r];
    return hist;
}

// Rank histogram of every alternating n x n matrix over F_ell
// (skew-symmetric, zero diagonal), n <= 6.
inline std::map<unsigned, std::uint64_t> enumerate_alternating(int ell, unsigned n)
{
    std::map<unsigned, std::uint64_t> hist;
    std::vector<std::pair<unsigned, unsigned>> slots;
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = i + 1; j < n; ++j) slots.emplace_back(i, j);
    std::vector<int> digits(slots.size(), 0);
    int work[36];
    while (true) {
        std::fill(work, work + n * n, 0);
        for (std::size_t s = 0; s < slots.size(); ++s) {
            work[slots[s].first * n + slots[s].second] = digits[s];
            work[slots[s].second * n + slots[s].first] = (ell - digits[s]) % ell;
        }
        ++hist[rank_mod(work, n, n, ell)];
        std::size_t k = 0;
        while (k < slots.size() && ++digits[k] == ell) digits[k++] = 0;
        if (k == slots.size()) break;
    }
    return hist;
}

// Is a a square modulo the odd prime p (a not divisible by p)?
inline bool is_square_mod(long long a, long long p)
{
    a = ((a % p) + p) % p;
    for (long long x = 0; x < p; ++x)
        if (x * x % p == a) return true;
    return false;
}

} // namespace oracle

namespace oracle {

// Does the positive definite form (a, b, c) represent n (|x|, |y| <= bound)?
inline bool represents(long long a, long long b, long long c, long long n, long long bound = 60)
{
    for (long long x = -bound; x <= bound; ++x)
        for (long long y = -bound; y <= bound; ++y)
            if (a * x * x + b * x * y + c * y * y == n) return true;
    return false;
}

// Rational points on y^2 = x^3 - d^2 x with x = a / c^2, |a| <= amax, c <= cmax; returns x numerators/denominators.
inline std::vector<std::pair<long long, long long>> points(long long d, long long amax, long long cmax)
{
    std::vector<std::pair<long long, long long>> out;
    for (long long c = 1; c <= cmax; ++c) {
        const __int128 c2 = c * c;
        for (long long a = -amax; a <= amax; ++a) {
            if (std::gcd(a, c) != 1) continue;
            // y^2 c^6 = a^3 - d^2 a c^4
            const __int128 rhs = static_cast<__int128>(a) * a * a - static_cast<__int128>(d) * d * a * c2 * c2;
            if (rhs < 0) continue;
            const auto r = static_cast<__int128>(std::sqrt(static_cast<long double>(rhs)));
            bool square = false;
            for (__int128 s = r > 2 ? r - 2 : 0; s <= r + 2; ++s)
                if (s * s == rhs) square = true;
            if (square) out.emplace_back(a, c * c);
        }
    }
    return out;
}

} // namespace oracle
