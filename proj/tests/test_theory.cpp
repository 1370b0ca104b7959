#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "oracles.hpp"
#include "pbil/rng.hpp"
#include "pbil/theory.hpp"

using namespace pbil;
using namespace pbil::theory;

namespace {

TheoryParams single_level(double z, double delta)
{
    TheoryParams p;
    p.delta = delta;
    p.upgrade_probs = {z};
    return p;
}

std::vector<double> random_probs(Rng& rng, std::size_t n)
{
    std::vector<double> p(n);
    for (double& v : p) {
        v = rng.uniform();
    }
    return p;
}

// Equal-sum pair with q obtained from p by Robin Hood transfers, so p majorises q.
std::pair<std::vector<double>, std::vector<double>> majorised_pair(Rng& rng, std::size_t n)
{
    auto p = random_probs(rng, n);
    auto q = p;
    for (int k = 0; k < 5; ++k) {
        const std::size_t i = rng.below(n);
        const std::size_t j = rng.below(n);
        if (i == j) {
            continue;
        }
        const std::size_t hi = q[i] >= q[j] ? i : j;
        const std::size_t lo = hi == i ? j : i;
        const double t = rng.uniform() * 0.5 * (q[hi] - q[lo]);
        q[hi] -= t;
        q[lo] += t;
    }
    return {p, q};
}

} // namespace

TEST(LevelBasedBound, SingleLevelExample)
{
    EXPECT_NEAR(level_based_bound(single_level(0.5, 1.0), 8), 8.0 * (8.0 * std::log(6.0) + 2.0), 1e-9);
    EXPECT_NEAR(level_based_bound(single_level(0.5, 1.0), 8), 130.67, 0.005);
}

TEST(LevelBasedBound, LargeLambdaLimit)
{
    const double lambda = 1e9;
    const double per_level = level_based_bound(single_level(1.0, 1.0), lambda) / 8.0;
    EXPECT_NEAR(per_level / (lambda * std::log(6.0) + 1.0), 1.0, 1e-8);
}

TEST(LevelBasedBound, RejectsNonPositiveUpgrade)
{
    EXPECT_THROW(level_based_bound(single_level(0.0, 1.0), 8), std::invalid_argument);
    EXPECT_THROW(level_based_bound(single_level(-0.1, 1.0), 8), std::invalid_argument);
}

TEST(LevelBasedBound, NonIncreasingInUpgradeProbs)
{
    Rng rng(11);
    for (int it = 0; it < 2000; ++it) {
        TheoryParams p;
        p.delta = 0.05 + 0.95 * rng.uniform();
        const std::size_t levels = 1 + rng.below(20);
        for (std::size_t j = 0; j < levels; ++j) {
            p.upgrade_probs.push_back(1e-4 + 0.4999 * rng.uniform());
        }
        const double lambda = 1.0 + static_cast<double>(rng.below(5000));
        const double base = level_based_bound(p, lambda);
        auto doubled = p;
        for (double& z : doubled.upgrade_probs) {
            z *= 2.0;
        }
        ASSERT_LE(level_based_bound(doubled, lambda), base * (1.0 + 1e-12));
        auto one = p;
        one.upgrade_probs[rng.below(levels)] *= 1.5;
        ASSERT_LE(level_based_bound(one, lambda), base * (1.0 + 1e-12));
    }
}

TEST(LevelBasedBound, NonIncreasingInDeltaAbovePopulationFloor)
{
    // Grid of valid settings: lambda at or above the population floor.
    for (double gamma0 : {0.05, 0.25, 0.5}) {
        for (double z : {1e-4, 1e-2, 0.3, 1.0}) {
            for (int k = 2; k < 20; ++k) {
                const double d = 0.05 * k;
                auto lo = single_level(z, d);
                auto hi = single_level(z, 0.05 * (k + 1));
                lo.gamma0 = hi.gamma0 = gamma0;
                const double lambda = std::ceil(g3_min_population(lo));
                ASSERT_LE(level_based_bound(hi, lambda), level_based_bound(lo, lambda) * (1.0 + 1e-12))
                    << "gamma0=" << gamma0 << " z=" << z << " delta=" << d;
            }
        }
    }
}

TEST(G3MinPopulation, Examples)
{
    auto p = single_level(0.5, 1.0);
    p.gamma0 = 0.5;
    EXPECT_NEAR(g3_min_population(p), 8.0 * std::log(512.0), 1e-9);
    EXPECT_NEAR(g3_min_population(p), 49.91, 0.01);

    auto more_levels = p;
    more_levels.upgrade_probs = {0.5, 0.5, 0.5};
    EXPECT_GT(g3_min_population(more_levels), g3_min_population(p));

    auto half_delta = p;
    half_delta.delta = 0.5;
    EXPECT_GE(g3_min_population(half_delta), 4.0 * g3_min_population(p));
}

TEST(LosBound, ComposesLevelBound)
{
    const auto params = los_params(10, 0.25, 0.1, 0.5);
    TheoryParams manual;
    manual.delta = 0.5;
    manual.upgrade_probs.assign(10, 0.25 / (1.1 * 10));
    EXPECT_EQ(params.levels(), 11u);
    EXPECT_DOUBLE_EQ(los_bound(10, 50, params), level_based_bound(manual, 50));

    const double z = 0.25 / 11.0;
    const double by_hand = 8.0 / 0.25 * 10.0 * (50.0 * std::log(6.0 * 0.5 * 50.0 / (4.0 + z * 0.5 * 50.0)) + 1.0 / z);
    EXPECT_NEAR(los_bound(10, 50, params), by_hand, 1e-9 * by_hand);
}

TEST(LosBound, QuadraticInNForFixedLambda)
{
    const auto params = los_params(1, 0.25, 0.1, 0.5);
    const double ratio = los_bound(200, 10, params) / los_bound(100, 10, params);
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}

TEST(LosBound, BoundedByNLambdaLogLambdaForLargeLambda)
{
    const auto params = los_params(1, 0.25, 0.1, 0.5);
    for (std::size_t n : {10u, 50u, 100u}) {
        double prev = 0.0;
        for (double lambda : {1e5, 1e6, 1e7, 1e8}) {
            const double r = los_bound(n, lambda, params) / (n * lambda * std::log(lambda));
            EXPECT_LT(r, 1000.0);
            if (prev > 0.0) {
                EXPECT_LE(r, prev * 1.01);
            }
            prev = r;
        }
    }
}

TEST(Dkw, Examples)
{
    EXPECT_NEAR(dkw_bound(100, 0.1), 2.0 * std::exp(-2.0), 1e-15);
    EXPECT_NEAR(dkw_bound(100, 0.1), 0.27067, 5e-6);
    EXPECT_EQ(dkw_bound(100, 0.0), 2.0);
    EXPECT_NEAR(dkw_bound(1000, 0.05), 0.01348, 5e-6);
}

TEST(Xi, Examples)
{
    EXPECT_NEAR(xi(0.5), 2.0 * std::numbers::ln2, 1e-15);
    EXPECT_NEAR(xi(1.0 - 1e-9), 1.0, 1e-8);
    EXPECT_THROW(xi(0.0), std::invalid_argument);
    EXPECT_THROW(xi(1.0), std::invalid_argument);
    EXPECT_THROW(xi(-0.3), std::invalid_argument);
    for (double p0 = 0.001; p0 < 1.0; p0 += 0.001) {
        ASSERT_GT(xi(p0), 1.0);
    }
}

TEST(Xi, GapFunctionApproachesAsymptoteFromAbove)
{
    for (double p0 : {1e-6, 0.01, 0.2273, 0.5, 0.9, 0.999}) {
        const double x = xi(p0);
        for (double j = 1.0; j <= 1e6; j *= 1.1) {
            ASSERT_GE(asymptote_gap_function(p0, j) + x, -1e-12) << "p0=" << p0 << " j=" << j;
        }
        EXPECT_NEAR(asymptote_gap_function(p0, 1e6), -x, 1e-4 * x);
    }
    // j = 1 is exactly -1.
    EXPECT_NEAR(asymptote_gap_function(0.3, 1.0), -1.0, 1e-15);
}

TEST(SelectivePressure, FeasibleExample)
{
    const auto r = check_selective_pressure(0.25, 1.0, 0.1, 0.1);
    EXPECT_NEAR(r.p0, 0.2273, 5e-5);
    EXPECT_NEAR(r.xi, 1.917, 5e-4);
    EXPECT_EQ(r.ceil_xi, 2);
    EXPECT_NEAR(r.rhs, 1.0 / (1.1 * std::numbers::e), 1e-15);
    EXPECT_NEAR(r.rhs, 0.3344, 5e-5);
    EXPECT_TRUE(r.satisfied);
}

TEST(SelectivePressure, InfeasibleExample)
{
    const auto r = check_selective_pressure(0.25, 0.5, 0.1, 0.1);
    EXPECT_NEAR(r.rhs, 0.125 / (1.1 * std::numbers::e), 1e-15);
    EXPECT_NEAR(r.rhs, 0.0418, 5e-5);
    EXPECT_FALSE(r.satisfied);
}

TEST(SelectivePressure, SmallGammaEventuallyFeasible)
{
    // For small p0, rhs behaves like p0^ln(1/eta), so shrinking gamma0 only
    // helps while ln(1/eta) < 1.
    for (double eta : {0.1, 0.3}) {
        for (double g = 0.5; g > 1e-300; g *= 0.5) {
            ASSERT_FALSE(check_selective_pressure(g, eta, 0.1, 0.1).satisfied) << "eta=" << eta << " g=" << g;
        }
    }
    for (double eta : {0.4, 0.5, 0.8, 1.0}) {
        bool found = false;
        for (double g = 0.5; g > 1e-300 && !found; g *= 0.5) {
            found = check_selective_pressure(g, eta, 0.1, 0.1).satisfied;
        }
        EXPECT_TRUE(found) << "eta=" << eta;
    }
}

TEST(SelectivePressure, CeilingGuardAtIntegerXi)
{
    // xi(p0) = 2 exactly solves ln p0 = 2 (p0 - 1); p0 ~ 0.2031878699.
    double lo = 0.1, hi = 0.3;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (xi(mid) > 2.0 ? lo : hi) = mid;
    }
    const double gamma0 = lo * 1.1;
    EXPECT_EQ(check_selective_pressure(gamma0, 1.0, 0.1, 0.1).ceil_xi, 2);
}

TEST(MaxFeasibleGamma, BoundaryIsSharp)
{
    EXPECT_EQ(max_feasible_gamma0(0.2, 0.1, 0.1), 0.0);
    for (double eta : {0.45, 0.5, 1.0}) {
        const double g = max_feasible_gamma0(eta, 0.1, 0.1);
        ASSERT_GT(g, 0.0);
        EXPECT_TRUE(check_selective_pressure(g, eta, 0.1, 0.1).satisfied);
        EXPECT_FALSE(check_selective_pressure(g * (1.0 + 1e-9), eta, 0.1, 0.1).satisfied);
    }
}

TEST(Majorises, Examples)
{
    const std::vector<double> a{0.9, 0.1}, b{0.6, 0.4}, c{0.5, 0.5}, d{0.6, 0.3};
    EXPECT_TRUE(majorises(a, b));
    EXPECT_FALSE(majorises(b, a));
    EXPECT_TRUE(majorises(a, a));
    EXPECT_FALSE(majorises(c, d));
    EXPECT_THROW(majorises(a, std::vector<double>{0.5}), std::invalid_argument);
    // Order of entries is irrelevant.
    EXPECT_TRUE(majorises(std::vector<double>{0.1, 0.9}, std::vector<double>{0.4, 0.6}));
}

TEST(Majorises, ReflexiveAndTransitive)
{
    Rng rng(3);
    for (int it = 0; it < 10000; ++it) {
        const std::size_t n = 2 + rng.below(12);
        auto [p, q] = majorised_pair(rng, n);
        auto r = q;
        const std::size_t i = rng.below(n), j = rng.below(n);
        if (i != j) {
            const std::size_t hi = r[i] >= r[j] ? i : j;
            const std::size_t lo = hi == i ? j : i;
            const double t = 0.5 * (r[hi] - r[lo]) * rng.uniform();
            r[hi] -= t;
            r[lo] += t;
        }
        ASSERT_TRUE(majorises(p, p));
        ASSERT_TRUE(majorises(p, q));
        ASSERT_TRUE(majorises(q, r));
        ASSERT_TRUE(majorises(p, r));
    }
}

TEST(Smoothing, Examples)
{
    EXPECT_EQ(apply_smoothing(std::vector<double>{0.5, 0.5}, 1.0), (std::vector<double>{1.0, 1.0}));
    const auto s = apply_smoothing(std::vector<double>{0.2, 0.8}, 0.5);
    EXPECT_NEAR(s[0], 0.6, 1e-15);
    EXPECT_NEAR(s[1], 0.9, 1e-15);
}

TEST(Smoothing, PreservesMajorisation)
{
    Rng rng(17);
    for (int it = 0; it < 10000; ++it) {
        auto [p2, p1] = majorised_pair(rng, 2 + rng.below(15));
        const double eta = 0.01 + 0.99 * rng.uniform();
        ASSERT_TRUE(majorises(p2, p1));
        ASSERT_TRUE(majorises(apply_smoothing(p2, eta), apply_smoothing(p1, eta)));
    }
}

TEST(PoissonBinomial, Examples)
{
    EXPECT_EQ(poisson_binomial_pmf(std::vector<double>{0.5, 0.5}), (std::vector<double>{0.25, 0.5, 0.25}));
    EXPECT_EQ(poisson_binomial_pmf(std::vector<double>{1.0, 1.0}), (std::vector<double>{0.0, 0.0, 1.0}));
}

TEST(PoissonBinomial, MatchesEnumeration)
{
    Rng rng(23);
    for (std::size_t n = 1; n <= 12; ++n) {
        for (int rep = 0; rep < 20; ++rep) {
            const auto p = random_probs(rng, n);
            const auto pmf = poisson_binomial_pmf(p);
            const auto want = oracle::poisson_binomial(p);
            ASSERT_EQ(pmf.size(), n + 1);
            double total = 0.0;
            for (std::size_t k = 0; k <= n; ++k) {
                ASSERT_GE(pmf[k], 0.0);
                ASSERT_NEAR(pmf[k], want[k], 1e-12);
                total += pmf[k];
            }
            ASSERT_NEAR(total, 1.0, 1e-12);
            ASSERT_NEAR(pmf[n], oracle::product(p), 1e-12);
        }
    }
}

TEST(PoissonBinomial, LargeInputStaysNormalised)
{
    Rng rng(29);
    const auto p = random_probs(rng, 2000);
    const auto pmf = poisson_binomial_pmf(p);
    double total = 0.0;
    for (double v : pmf) {
        ASSERT_GE(v, 0.0);
        total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(PoissonBinomial, BolandOrderingOnRandomPairs)
{
    Rng rng(31);
    for (int it = 0; it < 10000; ++it) {
        const std::size_t n = 2 + rng.below(20);
        auto [p2, p1] = majorised_pair(rng, n);
        const double all1 = poisson_binomial_pmf(p1)[n];
        const double all2 = poisson_binomial_pmf(p2)[n];
        ASSERT_GE(all1, all2 * (1.0 - 1e-12) - 1e-300);
    }
}

TEST(AmGm, Examples)
{
    EXPECT_EQ(am_gm_check(std::vector<double>{2, 2, 2}), (std::pair<double, double>{2.0, 2.0}));
    const auto [am, gm] = am_gm_check(std::vector<double>{1, 4});
    EXPECT_DOUBLE_EQ(am, 2.5);
    EXPECT_NEAR(gm, 2.0, 1e-15);
    EXPECT_EQ(am_gm_check(std::vector<double>{0.0, 3.0}).second, 0.0);
    EXPECT_THROW(am_gm_check(std::vector<double>{-1.0, 1.0}), std::invalid_argument);
}

TEST(AmGm, InequalityOnRandomVectors)
{
    Rng rng(37);
    for (int it = 0; it < 10000; ++it) {
        auto x = random_probs(rng, 1 + rng.below(30));
        for (double& v : x) {
            v *= 100.0;
        }
        const auto [am, gm] = am_gm_check(x);
        ASSERT_GE(am, gm * (1.0 - 1e-14));
        const bool all_equal = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
        ASSERT_EQ(std::abs(am - gm) <= 1e-12, all_equal) << "size " << x.size();
    }
}

TEST(MajorantCount, HoldsWhenProductAboveP0)
{
    Rng rng(41);
    const std::size_t n = 50;
    const double upper = 1.0 - 1.0 / n;
    int checked = 0;
    for (int it = 0; it < 20000; ++it) {
        const double p0 = 0.02 + 0.6 * rng.uniform();
        const std::size_t j = 1 + rng.below(n);
        std::vector<double> prefix(j);
        double prod = 1.0;
        for (double& v : prefix) {
            v = upper - (upper - p0) * std::pow(rng.uniform(), 4.0) * 0.2;
            prod *= v;
        }
        if (prod < p0) {
            continue;
        }
        ++checked;
        const auto r = majorant_count(prefix, p0, n);
        ASSERT_TRUE(r.holds) << "m=" << r.m << " required=" << r.required;
    }
    EXPECT_GT(checked, 1000);
}
