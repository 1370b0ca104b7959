#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pbil/rng.hpp"

namespace pbil::properties {

using PmfFunction = std::function<std::vector<double>(std::span<const double>)>;

struct PropertyResult {
    std::string name;
    bool passed = true;
    std::uint64_t checks = 0;
    std::string counterexample; // set on the first failure
};

// ---- generators

// Uniform vector in [0, 1]^n.
std::vector<double> random_unit_vector(std::size_t n, Rng& rng);

// A vector majorised by `q` with the same total, built from `transfers`
// random T-transforms (pairwise convex averaging).
std::vector<double> random_majorised(std::span<const double> q, std::size_t transfers, Rng& rng);

// PMF of sum X_i by summing the product law over all 2^n outcomes;
// independent of the dynamic-programming route. Intended for n <= 20.
std::vector<double> enumerate_poisson_binomial(std::span<const double> p);

// ---- Monte-Carlo DKW kernel

// Replication r draws lambda Bernoulli(p) samples from a stream seeded by
// mix_seed(seed, lambda, r) and counts as an exceedance when the sup
// deviation |F_hat(0) - (1 - p)| of the empirical CDF exceeds each epsilon.
// Returns one exceedance count per epsilon.
std::vector<std::uint64_t> dkw_exceedances(double p,
                                           std::size_t lambda,
                                           std::span<const double> epsilons,
                                           std::size_t replications,
                                           std::uint64_t seed,
                                           int workers = 0);

std::vector<std::uint64_t> dkw_exceedances_serial(double p,
                                                  std::size_t lambda,
                                                  std::span<const double> epsilons,
                                                  std::size_t replications,
                                                  std::uint64_t seed);

// ---- exhaustive Boland grid kernel

struct GridCheckResult {
    std::uint64_t vectors = 0;
    std::uint64_t transfers = 0;
    std::uint64_t predicate_checks = 0;
    std::uint64_t violations = 0;
    std::string counterexample;

    bool operator==(const GridCheckResult&) const = default;
};

// Every non-increasing vector on the grid {0, 1/units, ..., 1}^n and every
// unit Robin Hood transfer w of it (w is majorised by v): checks
// prod(w) >= prod(v). Unit transfers generate the whole majorisation order
// on integer grids, so this covers every equal-sum majorising pair. Every
// `predicate_stride`-th transfer also checks majorises(v, w).
GridCheckResult boland_grid_check(std::size_t n, int units, std::size_t predicate_stride = 64,
                                  int workers = 0);
GridCheckResult boland_grid_check_serial(std::size_t n, int units, std::size_t predicate_stride = 64);

// ---- property suites

PropertyResult check_boland(std::size_t iterations, Rng& rng, const PmfFunction& pmf,
                            std::size_t min_n = 2, std::size_t max_n = 20);
PropertyResult check_smoothing_preserves_majorisation(std::size_t iterations, Rng& rng,
                                                      std::span<const double> etas);
PropertyResult check_pmf_consistency(std::size_t iterations, Rng& rng, const PmfFunction& pmf,
                                     std::size_t max_n = 12, double tol = 1e-10);
PropertyResult check_am_gm(std::size_t iterations, Rng& rng);
PropertyResult check_asymptote(std::span<const double> p0_values, double j_max, double tol_low = 1e-9,
                               double tol_limit = 1e-3);
PropertyResult check_dkw_domination(std::size_t replications, std::uint64_t seed, int workers = 0);

struct VerifyOptions {
    std::size_t iterations = 10000;
    std::uint64_t seed = 1;
    int workers = 0;
    PmfFunction pmf; // empty selects theory::poisson_binomial_pmf
};

std::vector<PropertyResult> run_all(const VerifyOptions& options);

} // namespace pbil::properties
