#include <gtest/gtest.h>

#include "oracles.hpp"
#include "selchain/ffstats.hpp"

using namespace selchain;
using namespace selchain::ffstats;

// The recurrences are only trusted after they reproduce enumeration exactly.
TEST(RecurrenceVsEnumeration, GeneralShapesUpToFour)
{
    for (int ell : {2, 3}) {
        for (unsigned m = 0; m <= 4; ++m) {
            for (unsigned n = 0; n <= 4; ++n) {
                if (ell == 3 && m * n > 12) continue;  // the 4x4, ell = 3 case runs in the acceptance suite
                const auto brute = oracle::enumerate_general(ell, m, n);
                const auto counts = rank_counts(ell, m, n);
                for (unsigned r = 0; r < counts.size(); ++r) {
                    const auto it = brute.find(r);
                    const std::uint64_t expect = it == brute.end() ? 0 : it->second;
                    EXPECT_EQ(counts[r], expect) << "ell=" << ell << " m=" << m << " n=" << n << " r=" << r;
                }
            }
        }
    }
}

TEST(RecurrenceVsEnumeration, AlternatingUpToFive)
{
    for (unsigned n = 0; n <= 5; ++n) {
        const auto brute = oracle::enumerate_alternating(2, n);
        const auto counts = alternating_rank_counts(2, n);
        for (unsigned r = 0; r <= n; ++r) {
            const auto it = brute.find(r);
            const std::uint64_t expect = it == brute.end() ? 0 : it->second;
            EXPECT_EQ(counts[r], expect) << "n=" << n << " r=" << r;
        }
    }
    // ell = 3 as a wider check of the bordering argument.
    for (unsigned n = 0; n <= 4; ++n) {
        const auto brute = oracle::enumerate_alternating(3, n);
        const auto counts = alternating_rank_counts(3, n);
        for (unsigned r = 0; r <= n; ++r) {
            const auto it = brute.find(r);
            EXPECT_EQ(counts[r], it == brute.end() ? 0 : it->second) << "n=" << n << " r=" << r;
        }
    }
}

TEST(CountRankMatrices, Examples)
{
    EXPECT_EQ(count_rank_matrices(2, 1, 1, 0), 1);
    EXPECT_EQ(count_rank_matrices(2, 3, 3, 3), 168);
    EXPECT_EQ(count_rank_matrices(2, 2, 2, 2), 6);  // enumerated: 16 matrices, 6 invertible
}

TEST(CountRankMatrices, Errors)
{
    EXPECT_THROW(count_rank_matrices(4, 2, 2, 1), domain_error);
    EXPECT_THROW(count_rank_matrices(2, 2, 3, 3), domain_error);
}

TEST(CountRankAlternating, Examples)
{
    EXPECT_EQ(count_rank_alternating(2, 4, 4), 28);
    EXPECT_EQ(count_rank_alternating(2, 4, 0), 1);
    EXPECT_EQ(count_rank_alternating(2, 5, 4), 868);  // enumerated over all 1024 matrices
}

TEST(CountRankAlternating, OddRankIsDistinctError)
{
    EXPECT_THROW(count_rank_alternating(2, 4, 3), odd_rank_error);
    EXPECT_THROW(count_rank_alternating(6, 4, 2), domain_error);
}

TEST(CountTotals, SumToWholeSpace)
{
    for (std::uint64_t ell : {2, 3, 5})
        for (unsigned m = 0; m <= 7; ++m)
            for (unsigned n = 0; n <= 7; ++n) {
                BigInt total = 0;
                for (const auto& c : rank_counts(ell, m, n)) total += c;
                EXPECT_EQ(total, big_pow(ell, m * n));
            }
    for (std::uint64_t ell : {2, 3})
        for (unsigned n = 0; n <= 12; ++n) {
            BigInt total = 0;
            for (const auto& c : alternating_rank_counts(ell, n)) total += c;
            EXPECT_EQ(total, big_pow(ell, n * (n ? n - 1 : 0) / 2));
        }
}

TEST(PMat, Examples)
{
    EXPECT_EQ(p_mat(0, 2, 0, 3), Rational(168, 512));
    EXPECT_EQ(p_mat(0, 2, 3, 3), Rational(1, 512));
    EXPECT_EQ(p_mat(5, 2, 0, 3), Rational(0));
    EXPECT_EQ(p_mat(0, 2, 4, 3), Rational(0));
}

TEST(PAlt, Examples)
{
    EXPECT_EQ(p_alt(2, 4), Rational(35, 64));
    EXPECT_EQ(p_alt(1, 3), Rational(7, 8));
    EXPECT_EQ(p_alt(0, 3), Rational(0));
}

TEST(KernelDistribution, MassesSumToOne)
{
    for (unsigned n = 0; n <= 12; ++n) {
        const auto alt = kernel_distribution({2, Alternating{}, n});
        EXPECT_EQ(alt.total(), Rational(1)) << n;
        for (const auto& [j, p] : alt.masses) EXPECT_EQ((n - j) % 2, 0u);
        for (int u : {-2, -1, 0, 1, 2}) {
            for (std::uint64_t ell : {2, 3}) {
                const auto gen = kernel_distribution({ell, General{u}, n});
                if (static_cast<int>(n) < u)
                    EXPECT_TRUE(gen.masses.empty());
                else
                    EXPECT_EQ(gen.total(), Rational(1)) << "u=" << u << " n=" << n;
            }
        }
    }
}

TEST(PAltLimit, AgreesWithLargeExactValue)
{
    const auto lv = p_alt_limit(0, 1e-12);
    EXPECT_GT(lv.value, 0.0);
    EXPECT_LT(lv.value, 1.0);
    EXPECT_LT(std::fabs(lv.value - 0.5 * p_alt(0, 40).to_double()), 1e-6);
}

TEST(PAltLimit, Normalization)
{
    const double tol = 1e-12;
    double sum = 0;
    for (unsigned j = 0; j <= 20; ++j) sum += p_alt_limit(j, tol).value;
    EXPECT_NEAR(sum, 1.0, 20 * tol);
}

TEST(PAltLimit, OddKernelComesFromOddSizesOnly)
{
    const auto lv = p_alt_limit(1, 1e-12);
    EXPECT_NEAR(lv.value, 0.5 * p_alt(1, 61).to_double(), 1e-12);
}

TEST(PMatLimit, Normalization)
{
    const double tol = 1e-12;
    double sum = 0;
    for (unsigned j = 0; j <= 20; ++j) sum += p_mat_limit(0, 2, j, tol).value;
    EXPECT_NEAR(sum, 1.0, 20 * tol);
}

TEST(PMatLimit, AgreesWithExactValue)
{
    EXPECT_LT(std::fabs(p_mat_limit(0, 2, 0, 1e-12).value - p_mat(0, 2, 0, 30).to_double()), 1e-6);
}

TEST(PMatLimit, ExtraRowsShrinkKernels)
{
    EXPECT_GT(p_mat_limit(-1, 2, 0, 1e-12).value, p_mat_limit(0, 2, 0, 1e-12).value);
}

TEST(PMatLimit, MatchesExactAtFifty)
{
    for (int u : {-1, 0, 1})
        for (std::uint64_t ell : {2, 3})
            for (unsigned j = 0; j <= 4; ++j)
                EXPECT_LT(std::fabs(p_mat_limit(u, ell, j, 1e-10).value - p_mat(u, ell, j, 50).to_double()), 1e-8)
                    << "u=" << u << " ell=" << ell << " j=" << j;
}

TEST(Limits, ErrorsAreDistinct)
{
    EXPECT_THROW(p_alt_limit(0, 0.0), domain_error);
    EXPECT_THROW(p_mat_limit(0, 2, 0, 1e-300, 10), convergence_error);
    EXPECT_THROW(p_mat_limit(0, 9, 0), domain_error);
}
