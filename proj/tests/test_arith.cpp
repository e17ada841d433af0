#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "selchain/arith/classgroup.hpp"
#include "selchain/arith/selmer.hpp"

using namespace selchain;
using namespace selchain::arith;

static std::vector<std::uint64_t> odd_primes_below(std::uint64_t n)
{
    std::vector<std::uint64_t> out;
    for (std::uint64_t p = 3; p < n; p += 2) {
        bool prime = true;
        for (std::uint64_t q = 3; q * q <= p; q += 2)
            if (p % q == 0) prime = false;
        if (prime) out.push_back(p);
    }
    return out;
}

TEST(Kronecker, Examples)
{
    for (std::int64_t p : {3, 5, 7, 11, 101}) EXPECT_EQ(kronecker(1, p), 1);
    EXPECT_EQ(kronecker(2, 7), 1);
    EXPECT_EQ(kronecker(3, 7), -1);
    EXPECT_EQ(kronecker(6, 3), 0);
    EXPECT_THROW(kronecker(3, 0), domain_error);
}

TEST(Kronecker, AgreesWithSquareEnumeration)
{
    for (const auto p : odd_primes_below(200))
        for (std::int64_t a = -60; a <= 60; ++a) {
            const auto P = static_cast<std::int64_t>(p);
            const int expect = a % P == 0 ? 0 : (oracle::is_square_mod(a, P) ? 1 : -1);
            ASSERT_EQ(kronecker(a, P), expect) << a << " " << p;
        }
}

TEST(Kronecker, Multiplicative)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t a = static_cast<std::int64_t>(rng() % 2001) - 1000;
        const std::int64_t b = static_cast<std::int64_t>(rng() % 2001) - 1000;
        std::int64_t n = static_cast<std::int64_t>(rng() % 999) + 1;
        if (rng() % 2) n = -n;
        EXPECT_EQ(kronecker(a * b, n), kronecker(a, n) * kronecker(b, n));
        const std::int64_t m = static_cast<std::int64_t>(rng() % 999) + 1;
        EXPECT_EQ(kronecker(a, n * m), kronecker(a, n) * kronecker(a, m));
    }
}

TEST(SymbolPair, Examples)
{
    EXPECT_EQ(symbol_pair(7, 3), -1);
    EXPECT_EQ(symbol_pair(3, 7), 1);
    EXPECT_EQ(symbol_pair(11, 23), 1);  // 23 = 1 mod 11
    EXPECT_THROW(symbol_pair(5, 5), domain_error);
}

TEST(SymbolPair, ReciprocityExhaustive)
{
    const auto ps = odd_primes_below(200);
    for (const auto p : ps)
        for (const auto q : ps) {
            if (p == q) continue;
            const int oracle_pq = oracle::is_square_mod(static_cast<long long>(q), static_cast<long long>(p)) ? 1 : -1;
            ASSERT_EQ(symbol_pair(p, q), oracle_pq);
            const int prod = symbol_pair(p, q) * symbol_pair(q, p);
            EXPECT_EQ(prod, (p % 4 == 3 && q % 4 == 3) ? -1 : 1) << p << " " << q;
        }
}

TEST(Sieve, Examples)
{
    std::vector<std::int64_t> got;
    for (const auto& s : squarefree_sieve(10)) got.push_back(s.value());
    EXPECT_EQ(got, (std::vector<std::int64_t>{1, 2, 3, 5, 6, 7, 10}));

    got.clear();
    for (const auto& s : squarefree_sieve(1, {Parity::all, Signs::both})) got.push_back(s.value());
    EXPECT_EQ(got, (std::vector<std::int64_t>{-1, 1}));

    got.clear();
    for (const auto& s : squarefree_sieve(15, {Parity::odd, Signs::positive})) got.push_back(s.value());
    EXPECT_EQ(got, (std::vector<std::int64_t>{1, 3, 5, 7, 11, 13, 15}));
    EXPECT_THROW(SquarefreeSieve(0), domain_error);
}

TEST(Sieve, FactorizationsMatchTrialDivision)
{
    // Small segments exercise the boundaries.
    SquarefreeSieve sieve(20000, {Parity::all, Signs::both}, 977);
    std::int64_t prev = 0;
    std::size_t n = 0;
    sieve.for_each([&](const SquarefreeInt& s) {
        const auto ref = SquarefreeInt::factor(s.value());
        ASSERT_EQ(std::vector<std::uint64_t>(s.begin(), s.end()), std::vector<std::uint64_t>(ref.begin(), ref.end()));
        std::int64_t prod = s.negative() ? -1 : 1;
        for (const auto p : s) prod *= static_cast<std::int64_t>(p);
        ASSERT_EQ(prod, s.value());
        if (n % 2 == 1) {
            EXPECT_EQ(s.value(), -prev);
        }
        prev = s.value();
        ++n;
    });
    EXPECT_THROW(SquarefreeInt::factor(12), domain_error);
}

TEST(Sieve, DensityAtOneMillion)
{
    std::size_t count = 0;
    SquarefreeSieve(1000000).for_each([&](const SquarefreeInt&) { ++count; });
    const double expect = 6.0 / (M_PI * M_PI) * 1e6;
    EXPECT_LT(std::fabs(count - expect) / expect, 1e-3);
}

TEST(SelmerDescent, DOneHasRankZero)
{
    const auto r = selmer_rank_descent(SquarefreeInt::factor(1));
    EXPECT_EQ(r.r2, 0u);
    EXPECT_EQ(r.torsion_dim, 2u);
    // Only the 2-torsion shows up in a point search to height 10^4.
    for (const auto& [a, c] : oracle::points(1, 10000, 100)) {
        EXPECT_EQ(c, 1);
        EXPECT_TRUE(a == 0 || a == 1 || a == -1) << a;
    }
}

TEST(SelmerDescent, DFiveHasAPoint)
{
    EXPECT_EQ(6 * 6, (-4) * (-4) * (-4) - 25 * (-4));
    const auto r = selmer_rank_descent(SquarefreeInt::factor(5));
    EXPECT_GE(r.r2, 1u);
    EXPECT_EQ(r.sel2_dim, r.r2 + r.torsion_dim);
}

TEST(SelmerDescent, LowerBoundFromPoints)
{
    // A non-torsion point forces r2 >= 1.
    for (std::int64_t d : {5, 6, 7, 13, 14, 15, 21, 22, 23}) {
        const auto pts = oracle::points(d, 3000, 12);
        bool nontorsion = false;
        for (const auto& [a, c] : pts)
            if (!(c == 1 && (a == 0 || a == d || a == -d))) nontorsion = true;
        if (nontorsion) {
            EXPECT_GE(selmer_rank_descent(SquarefreeInt::factor(d)).r2, 1u) << d;
        }
    }
}

TEST(SelmerDescent, SignOfTwistDoesNotMatter)
{
    for (const auto& s : squarefree_sieve(300))
        EXPECT_EQ(selmer_rank_descent(s).r2, selmer_rank_descent(s.negated()).r2) << s.value();
}

TEST(SelmerDescent, ParityFollowsRootNumber)
{
    // d = 5, 6, 7 mod 8 have odd analytic rank parity.
    for (const auto& s : squarefree_sieve(3000)) {
        const auto m = s.value() % 8;
        EXPECT_EQ(selmer_rank_descent(s).r2 % 2, (m == 5 || m == 6 || m == 7) ? 1u : 0u) << s.value();
    }
}

TEST(SelmerMonsky, MatchesDescentUpTo2000)
{
    SquarefreeSieve(2000, {Parity::odd, Signs::positive}).for_each([](const SquarefreeInt& s) {
        EXPECT_EQ(selmer_rank_monsky(s).r2, selmer_rank_descent(s).r2) << s.value();
    });
}

TEST(SelmerMonsky, SeventyThree)
{
    const auto d = SquarefreeInt::factor(73);
    EXPECT_EQ(selmer_rank_monsky(d).r2, selmer_rank_descent(d).r2);
}

TEST(SelmerMonsky, RejectsEvenAndNegative)
{
    EXPECT_THROW(selmer_rank_monsky(SquarefreeInt::factor(6)), domain_error);
    EXPECT_THROW(selmer_rank_monsky(SquarefreeInt::factor(-5)), domain_error);
}

TEST(ClassGroup, Examples)
{
    const auto g5 = class_group(SquarefreeInt::factor(5));
    EXPECT_EQ(g5.h, 2u);
    EXPECT_EQ(g5.cyclic_factors, (std::vector<std::uint64_t>{2}));
    EXPECT_EQ(g5.r(1), 1u);
    EXPECT_EQ(g5.r(2), 0u);
    EXPECT_EQ(reduced_forms(-20), (std::vector<Form>{{1, 0, 5}, {2, 2, 3}}));

    const auto g1 = class_group(SquarefreeInt::factor(1));
    EXPECT_EQ(g1.h, 1u);
    EXPECT_TRUE(g1.r2k.empty());

    const auto g14 = class_group(SquarefreeInt::factor(14));
    EXPECT_EQ(g14.discriminant, -56);
    EXPECT_EQ(g14.cyclic_factors, (std::vector<std::uint64_t>{4}));
    EXPECT_EQ(g14.r(1), 1u);
    EXPECT_EQ(g14.r(2), 1u);
    EXPECT_EQ(g14.r(3), 0u);
}

// Composition table checks on every discriminant with h <= 64 among d <= 400.
TEST(ClassGroup, CompositionTableIsAGroup)
{
    for (const auto& s : squarefree_sieve(400)) {
        const std::int64_t D = fundamental_discriminant(s.value());
        const auto forms = reduced_forms(D);
        if (forms.size() > 64) continue;
        const Form e = identity_form(D);
        std::map<Form, std::size_t> index;
        for (std::size_t i = 0; i < forms.size(); ++i) index[forms[i]] = i;
        ASSERT_TRUE(index.count(e));
        const std::size_t h = forms.size();
        std::vector<std::size_t> table(h * h);
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < h; ++j) {
                const Form f = compose(forms[i], forms[j]);
                ASSERT_TRUE(index.count(f)) << D;
                table[i * h + j] = index[f];
            }
        for (std::size_t i = 0; i < h; ++i) {
            EXPECT_EQ(compose(forms[i], e), forms[i]);
            EXPECT_EQ(compose(forms[i], inverse(forms[i])), e);
            for (std::size_t j = 0; j < h; ++j) {
                EXPECT_EQ(table[i * h + j], table[j * h + i]);
                for (std::size_t k = 0; k < h; ++k)
                    ASSERT_EQ(table[table[i * h + j] * h + k], table[i * h + table[j * h + k]]) << D;
            }
        }
        // Element-order histogram from the table against the invariant factors.
        const auto g = class_group(s);
        std::uint64_t prod = 1;
        for (const auto n : g.cyclic_factors) prod *= n;
        EXPECT_EQ(prod, g.h);
        std::size_t two_torsion = 0;
        for (std::size_t i = 0; i < h; ++i) two_torsion += table[i * h + i] == index[e];
        EXPECT_EQ(two_torsion, std::size_t{1} << g.r(1)) << D;
        for (unsigned k = 1; k + 1 <= g.r2k.size(); ++k) EXPECT_GE(g.r2k[k - 1], g.r2k[k]);
    }
}

TEST(ClassGroup, CompositionRespectsRepresentedNumbers)
{
    const auto forms = reduced_forms(-4 * 65);
    for (const auto& f : forms)
        for (const auto& g : forms) {
            const Form fg = compose(f, g);
            EXPECT_TRUE(oracle::represents(fg.a, fg.b, fg.c, f.a * g.a)) << f.a << " " << g.a;
        }
}

TEST(Redei, MatchesFormsUpTo10000)
{
    SquarefreeSieve(10000).for_each([](const SquarefreeInt& s) {
        const auto g = class_group(s);
        ASSERT_EQ(redei_rank4(s), g.r(2)) << s.value();
        ASSERT_EQ(g.r(1) + 1, prime_discriminants(s).size()) << s.value();
    });
}

TEST(Redei, PrimesThreeModFour)
{
    for (const auto p : odd_primes_below(1000)) {
        if (p % 4 != 3) continue;
        const auto s = SquarefreeInt::factor(static_cast<std::int64_t>(p));
        EXPECT_EQ(redei_rank4(s), 0u);
        EXPECT_EQ(class_group(s).r(2), 0u);
    }
    EXPECT_EQ(redei_rank4(SquarefreeInt::factor(1)), 0u);
}

TEST(ClassNumbers, GlobalCountMatchesPerDiscriminant)
{
    const auto h = count_reduced_forms(4 * 3000, 3000, 1000);
    for (const auto& s : squarefree_sieve(3000)) {
        const std::int64_t D = fundamental_discriminant(s.value());
        EXPECT_EQ(h[static_cast<std::size_t>(-D)], reduced_forms(D).size()) << D;
    }
}

TEST(ClassGroup, SylowRanksMatchFullGroup)
{
    using namespace selchain::arith;
    for (const auto& d : squarefree_sieve(3000, {Parity::all, Signs::positive})) {
        const auto full = class_group(d);
        EXPECT_EQ(two_sylow_ranks(d), full.r2k) << d.value();
        EXPECT_EQ(two_sylow_ranks(d, full.h), full.r2k) << d.value();
    }
    // large d with many prime factors
    for (std::int64_t v : {999997, 746130, 570570}) {
        const auto d = SquarefreeInt::factor(v);
        EXPECT_EQ(two_sylow_ranks(d), class_group(d).r2k) << v;
    }
}
