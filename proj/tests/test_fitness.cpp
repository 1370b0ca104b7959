#include <gtest/gtest.h>

#include <algorithm>
#include <stdexcept>

#include "oracles.hpp"
#include "pbil/fitness.hpp"
#include "pbil/rng.hpp"

using namespace pbil;

namespace {

Bitstring bs(const char* s) { return Bitstring::from_string(s); }

Bitstring random_bits(std::size_t n, Rng& rng)
{
    Bitstring x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x.set(i, rng.below(2) == 1);
    }
    return x;
}

} // namespace

TEST(LeadingOnes, Examples)
{
    EXPECT_EQ(leading_ones(bs("1111")), 4u);
    EXPECT_EQ(leading_ones(bs("0101")), 0u);
    EXPECT_EQ(leading_ones(bs("1101")), 2u);
}

TEST(LeadingOnes, AcrossWordBoundary)
{
    Bitstring x = Bitstring::all_ones(130);
    EXPECT_EQ(leading_ones(x), 130u);
    x.set(100, false);
    EXPECT_EQ(leading_ones(x), 100u);
    x.set(64, false);
    EXPECT_EQ(leading_ones(x), 64u);
    EXPECT_EQ(leading_ones(Bitstring::all_ones(64)), 64u);
}

TEST(LeadingOnes, FullIffAllOnes)
{
    Rng rng(3);
    for (int it = 0; it < 5000; ++it) {
        const std::size_t n = 1 + rng.below(150);
        Bitstring x = rng.below(4) == 0 ? Bitstring::all_ones(n) : random_bits(n, rng);
        EXPECT_EQ(leading_ones(x) == n, x.count_ones() == n);
    }
}

TEST(BinvalExact, Examples)
{
    EXPECT_EQ(binval_exact(bs("1010")), 10);
    EXPECT_EQ(binval_exact(bs("0000")), 0);
    EXPECT_EQ(binval_exact(bs("1111")), 15);
}

TEST(BinvalExact, BeyondMachineWords)
{
    BigInt expect = 1;
    expect <<= 100;
    expect -= 1;
    EXPECT_EQ(binval_exact(Bitstring::all_ones(100)), expect);
}

TEST(BinvalCompare, Examples)
{
    EXPECT_EQ(binval_compare(bs("1000"), bs("0111")), std::strong_ordering::greater);
    EXPECT_EQ(binval_compare(bs("0111"), bs("1000")), std::strong_ordering::less);
    EXPECT_EQ(binval_compare(bs("1010"), bs("1010")), std::strong_ordering::equal);
    EXPECT_THROW(binval_compare(bs("10"), bs("100")), std::invalid_argument);
}

TEST(BinvalCompare, ExhaustiveAgainstIntegerValue)
{
    for (std::size_t n = 1; n <= 8; ++n) {
        const std::uint64_t count = std::uint64_t{1} << n;
        for (std::uint64_t a = 0; a < count; ++a) {
            const auto xa = Bitstring::from_string(oracle::bits_of(a, n));
            for (std::uint64_t b = 0; b < count; ++b) {
                const auto xb = Bitstring::from_string(oracle::bits_of(b, n));
                ASSERT_EQ(binval_compare(xa, xb), a <=> b) << n << ' ' << a << ' ' << b;
            }
        }
    }
}

TEST(BinvalCompare, RandomPairsAgreeWithExactValue)
{
    Rng rng(17);
    for (std::size_t n : {std::size_t{20}, std::size_t{63}, std::size_t{64}, std::size_t{128}}) {
        for (int it = 0; it < 100000; ++it) {
            const auto x = random_bits(n, rng);
            Bitstring y = random_bits(n, rng);
            if (it % 4 == 0) {
                // Share a long prefix so later words decide.
                y = x;
                y.set(n - 1 - rng.below(std::min<std::size_t>(n, 8)), rng.below(2) == 1);
            }
            const auto ex = binval_exact(x);
            const auto ey = binval_exact(y);
            const auto want = ex < ey ? std::strong_ordering::less
                                      : (ex > ey ? std::strong_ordering::greater : std::strong_ordering::equal);
            ASSERT_EQ(binval_compare(x, y), want);
        }
    }
}

TEST(LevelOf, Examples)
{
    EXPECT_EQ(level_of(bs("1101"), Problem::LeadingOnes), 2u);
    EXPECT_EQ(level_of(bs("1101"), Problem::BinVal), 2u);
    // 13 lies in [8 + 4, 8 + 4 + 2).
    EXPECT_EQ(oracle::binval_level(13, 4), 2u);
    EXPECT_EQ(level_of(Bitstring::all_ones(9), Problem::LeadingOnes), 9u);
    EXPECT_EQ(level_of(Bitstring::all_ones(9), Problem::BinVal), 9u);
}

TEST(LevelOf, BinvalLevelMatchesValueRanges)
{
    for (std::size_t n = 1; n <= 12; ++n) {
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v) {
            const auto s = oracle::bits_of(v, n);
            const auto x = Bitstring::from_string(s);
            ASSERT_EQ(level_of(x, Problem::BinVal), oracle::binval_level(v, n));
            ASSERT_EQ(level_of(x, Problem::LeadingOnes), oracle::leading_ones(s));
        }
    }
}

TEST(LevelOf, BinvalSortingOrdersLevels)
{
    Rng rng(9);
    for (int it = 0; it < 200; ++it) {
        const std::size_t n = 2 + rng.below(100);
        std::vector<Bitstring> pop;
        for (int k = 0; k < 50; ++k) {
            Bitstring x = random_bits(n, rng);
            // Bias towards long prefixes so several levels appear.
            const std::size_t pre = rng.below(n + 1);
            for (std::size_t i = 0; i < pre; ++i) {
                x.set(i, true);
            }
            pop.push_back(x);
        }
        std::sort(pop.begin(), pop.end(), [](const Bitstring& a, const Bitstring& b) {
            return binval_compare(a, b) == std::strong_ordering::greater;
        });
        for (std::size_t k = 1; k < pop.size(); ++k) {
            ASSERT_GE(leading_ones(pop[k - 1]), leading_ones(pop[k]));
        }
    }
}

TEST(Problem, Names)
{
    EXPECT_EQ(parse_problem("leadingones"), Problem::LeadingOnes);
    EXPECT_EQ(parse_problem("binval"), Problem::BinVal);
    EXPECT_EQ(problem_name(Problem::BinVal), "binval");
    EXPECT_THROW(parse_problem("onemax"), std::invalid_argument);
}
