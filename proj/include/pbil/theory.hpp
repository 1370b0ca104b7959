#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace pbil::theory {

// Parameters of the level-based runtime bound. `upgrade_probs` holds
// z_1..z_{m-1}; m is therefore upgrade_probs.size() + 1.
struct TheoryParams {
    double delta = 1.0;
    double epsilon = 0.1;
    double gamma0 = 0.25;
    double eta = 1.0;
    std::vector<double> upgrade_probs;

    std::size_t levels() const noexcept { return upgrade_probs.size() + 1; }
    double min_upgrade_prob() const; // z*

    // Throws std::invalid_argument on any parameter outside its interval.
    void validate() const;
};

struct ConstraintReport {
    double p0 = 0.0;
    double xi = 0.0;
    long ceil_xi = 0;
    double rhs = 0.0;
    bool satisfied = false;
};

// (8/delta^2) * sum_j [ lambda ln(6 delta lambda / (4 + z_j delta lambda)) + 1/z_j ]
double level_based_bound(const TheoryParams& params, double lambda);

// (4/(gamma0 delta^2)) ln(128 m / (z* delta^2))
double g3_min_population(const TheoryParams& params);

// Per-level upgrade probability gamma0/((1+eps) n) used for LeadingOnes and BinVal.
double los_upgrade_prob(std::size_t n, double gamma0, double epsilon);

// Params with m = n + 1 levels, every z_j = los_upgrade_prob(n, gamma0, epsilon).
TheoryParams los_params(std::size_t n, double gamma0, double epsilon, double delta, double eta = 1.0);

double los_bound(std::size_t n, double lambda, const TheoryParams& params);

// 2 exp(-2 lambda eps^2)
double dkw_bound(double lambda, double epsilon);

// ln(p0)/(p0 - 1); throws std::invalid_argument unless p0 in (0, 1).
double xi(double p0);

// j (p0^(1/j) - 1) / (1 - p0); tends to -xi(p0) from above.
double asymptote_gap_function(double p0, double j);

ConstraintReport check_selective_pressure(double gamma0, double eta, double delta, double epsilon);

// Largest gamma0 in (0, 1) for which check_selective_pressure holds, to
// relative precision ~1e-12. Returns 0 if none is found above 1e-300.
double max_feasible_gamma0(double eta, double delta, double epsilon);

// p majorises q: equal totals (abs tol 1e-9) and dominating descending prefix
// sums (slack 1e-12). Throws std::invalid_argument on length mismatch.
bool majorises(std::span<const double> p, std::span<const double> q);

// (1 - eta) p_i + eta, componentwise.
std::vector<double> apply_smoothing(std::span<const double> p, double eta);

// Exact PMF of a sum of independent Bernoulli(p_i); length n + 1.
std::vector<double> poisson_binomial_pmf(std::span<const double> p);

// (arithmetic mean, geometric mean)
std::pair<double, double> am_gm_check(std::span<const double> x);

// Diagnostic for the majorising construction: given marginals p_1..p_j whose
// product is at least p0, m = floor((sum p_i - j p0) / (1 - 1/n - p0)) and
// the construction needs m >= j - ceil(xi(p0)).
struct MajorantCountReport {
    long m = 0;
    long required = 0;
    bool holds = false;
};
MajorantCountReport majorant_count(std::span<const double> prefix, double p0, std::size_t n);

} // namespace pbil::theory
