#include "pbil/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace pbil::theory {

namespace {

constexpr double kCeilGuard = 1e-12;
constexpr double kTotalTol = 1e-9;
constexpr double kPrefixSlack = 1e-12;

long guarded_ceil(double x)
{
    return static_cast<long>(std::ceil(x - kCeilGuard));
}

void require(bool ok, const char* what)
{
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

} // namespace

double TheoryParams::min_upgrade_prob() const
{
    require(!upgrade_probs.empty(), "at least one upgrade probability (m >= 2) required");
    return *std::min_element(upgrade_probs.begin(), upgrade_probs.end());
}

void TheoryParams::validate() const
{
    require(delta > 0.0 && delta <= 1.0, "delta in (0, 1] required");
    require(epsilon > 0.0, "epsilon > 0 required");
    require(gamma0 > 0.0 && gamma0 < 1.0, "gamma0 in (0, 1) required");
    require(eta > 0.0 && eta <= 1.0, "eta in (0, 1] required");
    require(!upgrade_probs.empty(), "m >= 2 required");
    for (double z : upgrade_probs) {
        require(z > 0.0 && z <= 1.0, "every z_j in (0, 1] required");
    }
}

double level_based_bound(const TheoryParams& params, double lambda)
{
    require(lambda >= 1.0, "lambda >= 1 required");
    require(params.delta > 0.0 && params.delta <= 1.0, "delta in (0, 1] required");
    require(!params.upgrade_probs.empty(), "m >= 2 required");
    const double d = params.delta;
    double sum = 0.0;
    for (double z : params.upgrade_probs) {
        require(z > 0.0, "every z_j > 0 required");
        sum += lambda * std::log(6.0 * d * lambda / (4.0 + z * d * lambda)) + 1.0 / z;
    }
    return 8.0 / (d * d) * sum;
}

double g3_min_population(const TheoryParams& params)
{
    require(!params.upgrade_probs.empty(), "m >= 2 required");
    const double zstar = params.min_upgrade_prob();
    require(zstar > 0.0, "z* > 0 required");
    require(params.gamma0 > 0.0 && params.gamma0 < 1.0, "gamma0 in (0, 1) required");
    require(params.delta > 0.0 && params.delta <= 1.0, "delta in (0, 1] required");
    const double d2 = params.delta * params.delta;
    const auto m = static_cast<double>(params.levels());
    return 4.0 / (params.gamma0 * d2) * std::log(128.0 * m / (zstar * d2));
}

double los_upgrade_prob(std::size_t n, double gamma0, double epsilon)
{
    return gamma0 / ((1.0 + epsilon) * static_cast<double>(n));
}

TheoryParams los_params(std::size_t n, double gamma0, double epsilon, double delta, double eta)
{
    require(n >= 1, "n >= 1 required");
    TheoryParams p;
    p.delta = delta;
    p.epsilon = epsilon;
    p.gamma0 = gamma0;
    p.eta = eta;
    p.upgrade_probs.assign(n, los_upgrade_prob(n, gamma0, epsilon));
    return p;
}

double los_bound(std::size_t n, double lambda, const TheoryParams& params)
{
    TheoryParams p = los_params(n, params.gamma0, params.epsilon, params.delta, params.eta);
    return level_based_bound(p, lambda);
}

double dkw_bound(double lambda, double epsilon)
{
    return 2.0 * std::exp(-2.0 * lambda * epsilon * epsilon);
}

double xi(double p0)
{
    require(p0 > 0.0 && p0 < 1.0, "xi: p0 in (0, 1) required");
    return std::log(p0) / (p0 - 1.0);
}

double asymptote_gap_function(double p0, double j)
{
    require(p0 > 0.0 && p0 < 1.0, "p0 in (0, 1) required");
    require(j > 0.0, "j > 0 required");
    return j * std::expm1(std::log(p0) / j) / (1.0 - p0);
}

ConstraintReport check_selective_pressure(double gamma0, double eta, double delta, double epsilon)
{
    ConstraintReport r;
    r.p0 = gamma0 / (1.0 + epsilon);
    r.xi = xi(r.p0);
    r.ceil_xi = guarded_ceil(r.xi);
    r.rhs = std::pow(eta, static_cast<double>(r.ceil_xi + 1)) / ((1.0 + delta) * std::numbers::e);
    r.satisfied = gamma0 <= r.rhs;
    return r;
}

double max_feasible_gamma0(double eta, double delta, double epsilon)
{
    // The feasible set need not be an interval (ceil(xi) jumps), so scan a
    // geometric grid downwards for the first feasible point, then bisect the
    // boundary between it and its infeasible upper neighbour.
    const auto ok = [&](double g) {
        return check_selective_pressure(g, eta, delta, epsilon).satisfied;
    };
    double hi = 1.0 - 1e-12;
    if (ok(hi)) {
        return hi;
    }
    double lo = hi;
    while (true) {
        lo *= 0.9;
        if (lo < 1e-300) {
            return 0.0;
        }
        if (ok(lo)) {
            break;
        }
        hi = lo;
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * lo; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

bool majorises(std::span<const double> p, std::span<const double> q)
{
    require(p.size() == q.size(), "majorises: vectors differ in length");
    std::vector<double> a(p.begin(), p.end());
    std::vector<double> b(q.begin(), q.end());
    std::sort(a.begin(), a.end(), std::greater<>());
    std::sort(b.begin(), b.end(), std::greater<>());
    double sa = 0.0;
    double sb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += a[i];
        sb += b[i];
        if (i + 1 < a.size() && sa < sb - kPrefixSlack) {
            return false;
        }
    }
    return std::abs(sa - sb) <= kTotalTol;
}

std::vector<double> apply_smoothing(std::span<const double> p, double eta)
{
    std::vector<double> z(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        z[i] = (1.0 - eta) * p[i] + eta;
    }
    return z;
}

std::vector<double> poisson_binomial_pmf(std::span<const double> p)
{
    // pmf[k] after processing i positions = Pr(k successes among the first i).
    std::vector<double> pmf(p.size() + 1, 0.0);
    pmf[0] = 1.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double s = p[i];
        const double f = 1.0 - s;
        for (std::size_t k = i + 1; k > 0; --k) {
            pmf[k] = pmf[k] * f + pmf[k - 1] * s;
        }
        pmf[0] *= f;
    }

    // Kahan-summed total; renormalise only when rounding drifted.
    double total = 0.0;
    double comp = 0.0;
    for (double v : pmf) {
        const double y = v - comp;
        const double t = total + y;
        comp = (t - total) - y;
        total = t;
    }
    if (total > 0.0 && std::abs(total - 1.0) > 1e-15) {
        for (auto& v : pmf) {
            v /= total;
        }
    }
    return pmf;
}

std::pair<double, double> am_gm_check(std::span<const double> x)
{
    require(!x.empty(), "am_gm_check: empty input");
    double sum = 0.0;
    double log_sum = 0.0;
    bool has_zero = false;
    for (double v : x) {
        require(v >= 0.0, "am_gm_check: entries must be non-negative");
        sum += v;
        if (v == 0.0) {
            has_zero = true;
        } else {
            log_sum += std::log(v);
        }
    }
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); })) {
        return {x.front(), x.front()};
    }
    const auto n = static_cast<double>(x.size());
    const double am = sum / n;
    const double gm = has_zero ? 0.0 : std::exp(log_sum / n);
    return {am, gm};
}

MajorantCountReport majorant_count(std::span<const double> prefix, double p0, std::size_t n)
{
    require(n >= 2, "n >= 2 required");
    const double upper = 1.0 - 1.0 / static_cast<double>(n);
    require(p0 > 0.0 && p0 < upper, "p0 in (0, 1 - 1/n) required");
    double sum = 0.0;
    for (double v : prefix) {
        sum += v;
    }
    const auto j = static_cast<double>(prefix.size());
    MajorantCountReport r;
    r.m = static_cast<long>(std::floor((sum - j * p0) / (upper - p0)));
    r.required = static_cast<long>(prefix.size()) - guarded_ceil(xi(p0));
    r.holds = r.m >= r.required;
    return r;
}

} // namespace pbil::theory
