#include "pbil/properties.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "pbil/theory.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pbil::properties {

namespace {

std::string format_vector(std::span<const double> v)
{
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) {
        os << (i ? ", " : "") << v[i];
    }
    os << ')';
    return os.str();
}

void fail(PropertyResult& r, const std::string& what)
{
    if (r.passed) {
        r.passed = false;
        r.counterexample = what;
    }
}

int thread_count(int workers)
{
#ifdef _OPENMP
    return workers > 0 ? workers : omp_get_max_threads();
#else
    (void)workers;
    return 1;
#endif
}

} // namespace

std::vector<double> random_unit_vector(std::size_t n, Rng& rng)
{
    std::vector<double> v(n);
    for (auto& x : v) {
        x = rng.uniform();
    }
    return v;
}

std::vector<double> random_majorised(std::span<const double> q, std::size_t transfers, Rng& rng)
{
    std::vector<double> p(q.begin(), q.end());
    if (p.size() < 2) {
        return p;
    }
    for (std::size_t k = 0; k < transfers; ++k) {
        const auto i = static_cast<std::size_t>(rng.below(p.size()));
        auto j = static_cast<std::size_t>(rng.below(p.size() - 1));
        if (j >= i) {
            ++j;
        }
        const double t = rng.uniform();
        const double a = p[i];
        const double b = p[j];
        p[i] = t * a + (1.0 - t) * b;
        p[j] = a + b - p[i];
        p[j] = std::clamp(p[j], 0.0, 1.0);
    }
    return p;
}

std::vector<double> enumerate_poisson_binomial(std::span<const double> p)
{
    const std::size_t n = p.size();
    std::vector<double> pmf(n + 1, 0.0);
    const std::uint64_t outcomes = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < outcomes; ++mask) {
        double prob = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            prob *= ((mask >> i) & 1u) ? p[i] : 1.0 - p[i];
        }
        pmf[static_cast<std::size_t>(std::popcount(mask))] += prob;
    }
    return pmf;
}

// ---------------------------------------------------------------- DKW

namespace {

void dkw_replication(double p, std::size_t lambda, std::span<const double> epsilons,
                     std::uint64_t seed, std::size_t r, std::vector<std::uint64_t>& counts)
{
    Rng rng(mix_seed(seed, lambda, r));
    std::size_t zeros = 0;
    for (std::size_t k = 0; k < lambda; ++k) {
        zeros += rng.uniform() < p ? 0u : 1u;
    }
    // The empirical and true CDFs agree below 0 and from 1 upwards.
    const double dev = std::abs(static_cast<double>(zeros) / static_cast<double>(lambda) - (1.0 - p));
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
        if (dev > epsilons[e]) {
            ++counts[e];
        }
    }
}

} // namespace

std::vector<std::uint64_t> dkw_exceedances(double p,
                                           std::size_t lambda,
                                           std::span<const double> epsilons,
                                           std::size_t replications,
                                           std::uint64_t seed,
                                           int workers)
{
    std::vector<std::uint64_t> total(epsilons.size(), 0);
    const auto reps = static_cast<long>(replications);
    const int threads = thread_count(workers);
#pragma omp parallel num_threads(threads)
    {
        std::vector<std::uint64_t> local(epsilons.size(), 0);
#pragma omp for schedule(static)
        for (long r = 0; r < reps; ++r) {
            dkw_replication(p, lambda, epsilons, seed, static_cast<std::size_t>(r), local);
        }
#pragma omp critical
        for (std::size_t e = 0; e < local.size(); ++e) {
            total[e] += local[e];
        }
    }
    return total;
}

std::vector<std::uint64_t> dkw_exceedances_serial(double p,
                                                  std::size_t lambda,
                                                  std::span<const double> epsilons,
                                                  std::size_t replications,
                                                  std::uint64_t seed)
{
    std::vector<std::uint64_t> total(epsilons.size(), 0);
    for (std::size_t r = 0; r < replications; ++r) {
        dkw_replication(p, lambda, epsilons, seed, r, total);
    }
    return total;
}

// ---------------------------------------------------------------- Boland grid

namespace {

// Checks all vectors whose first coordinate equals `first`.
GridCheckResult grid_branch(std::size_t n, int units, int first, std::size_t stride)
{
    GridCheckResult res;
    std::vector<int> v(n, 0);
    v[0] = first;
    std::vector<double> pv(n);
    std::vector<double> pw(n);
    const double step = 1.0 / units;

    // Iterate non-increasing sequences v[1..n-1] with v[1] <= first, in
    // lexicographically decreasing order.
    for (std::size_t i = 1; i < n; ++i) {
        v[i] = first;
    }
    while (true) {
        ++res.vectors;
        double prod_v = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            pv[i] = v[i] * step;
            prod_v *= pv[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (v[i] - v[j] < 2) {
                    continue;
                }
                ++res.transfers;
                double prod_w = 1.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const int wk = k == i ? v[k] - 1 : (k == j ? v[k] + 1 : v[k]);
                    pw[k] = wk * step;
                    prod_w *= pw[k];
                }
                bool ok = prod_w >= prod_v * (1.0 - 1e-12);
                if (stride != 0 && res.transfers % stride == 0) {
                    ++res.predicate_checks;
                    ok = ok && theory::majorises(pv, pw) && !theory::majorises(pw, pv);
                }
                if (!ok) {
                    ++res.violations;
                    if (res.counterexample.empty()) {
                        res.counterexample = "v=" + format_vector(pv) + " w=" + format_vector(pw);
                    }
                }
            }
        }

        // Next non-increasing sequence: decrement the last position that can
        // be decremented, reset everything after it to the new value.
        std::size_t pos = n;
        while (pos > 1 && v[pos - 1] == 0) {
            --pos;
        }
        if (pos == 1) {
            break;
        }
        --v[pos - 1];
        for (std::size_t k = pos; k < n; ++k) {
            v[k] = v[pos - 1];
        }
    }
    return res;
}

void merge(GridCheckResult& into, const GridCheckResult& part)
{
    into.vectors += part.vectors;
    into.transfers += part.transfers;
    into.predicate_checks += part.predicate_checks;
    into.violations += part.violations;
    if (into.counterexample.empty()) {
        into.counterexample = part.counterexample;
    }
}

} // namespace

GridCheckResult boland_grid_check(std::size_t n, int units, std::size_t predicate_stride, int workers)
{
    if (n < 1 || units < 1) {
        return {};
    }
    std::vector<GridCheckResult> parts(static_cast<std::size_t>(units) + 1);
    const int threads = thread_count(workers);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (int first = units; first >= 0; --first) {
        parts[static_cast<std::size_t>(first)] = grid_branch(n, units, first, predicate_stride);
    }
    GridCheckResult total;
    for (int first = units; first >= 0; --first) {
        merge(total, parts[static_cast<std::size_t>(first)]);
    }
    return total;
}

GridCheckResult boland_grid_check_serial(std::size_t n, int units, std::size_t predicate_stride)
{
    GridCheckResult total;
    if (n < 1 || units < 1) {
        return total;
    }
    for (int first = units; first >= 0; --first) {
        merge(total, grid_branch(n, units, first, predicate_stride));
    }
    return total;
}

// ---------------------------------------------------------------- suites

PropertyResult check_boland(std::size_t iterations, Rng& rng, const PmfFunction& pmf,
                            std::size_t min_n, std::size_t max_n)
{
    PropertyResult r;
    r.name = "boland_bound";
    for (std::size_t it = 0; it < iterations; ++it) {
        const std::size_t n = min_n + static_cast<std::size_t>(rng.below(max_n - min_n + 1));
        const auto q = random_unit_vector(n, rng);
        const auto p = random_majorised(q, 1 + rng.below(2 * n), rng);
        ++r.checks;
        if (!theory::majorises(q, p)) {
            fail(r, "T-transform output not majorised: q=" + format_vector(q) + " p=" + format_vector(p));
            continue;
        }
        const double top_p = pmf(p).back();
        const double top_q = pmf(q).back();
        if (top_p < top_q * (1.0 - 1e-12) - 1e-300) {
            fail(r, "Pr(S=n) smaller for the majorised vector: p=" + format_vector(p) +
                        " q=" + format_vector(q));
        }
    }
    return r;
}

PropertyResult check_smoothing_preserves_majorisation(std::size_t iterations, Rng& rng,
                                                      std::span<const double> etas)
{
    PropertyResult r;
    r.name = "smoothing_preserves_majorisation";
    for (std::size_t it = 0; it < iterations; ++it) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.below(19));
        const auto p2 = random_unit_vector(n, rng);
        const auto p1 = random_majorised(p2, 1 + rng.below(2 * n), rng);
        for (double eta : etas) {
            ++r.checks;
            const auto z2 = theory::apply_smoothing(p2, eta);
            const auto z1 = theory::apply_smoothing(p1, eta);
            if (theory::majorises(p2, p1) && !theory::majorises(z2, z1)) {
                std::ostringstream os;
                os << "eta=" << eta << " p2=" << format_vector(p2) << " p1=" << format_vector(p1);
                fail(r, os.str());
            }
        }
    }
    return r;
}

PropertyResult check_pmf_consistency(std::size_t iterations, Rng& rng, const PmfFunction& pmf,
                                     std::size_t max_n, double tol)
{
    PropertyResult r;
    r.name = "pmf_consistency";
    for (std::size_t it = 0; it < iterations; ++it) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.below(max_n));
        const auto p = random_unit_vector(n, rng);
        const auto got = pmf(p);
        const auto want = enumerate_poisson_binomial(p);
        ++r.checks;
        bool ok = got.size() == want.size();
        double total = 0.0;
        for (std::size_t k = 0; ok && k < got.size(); ++k) {
            ok = got[k] >= 0.0 && std::abs(got[k] - want[k]) <= tol;
            total += got[k];
        }
        ok = ok && std::abs(total - 1.0) <= tol;
        if (!ok) {
            fail(r, "p=" + format_vector(p) + " pmf=" + format_vector(got) +
                        " enumerated=" + format_vector(want));
        }
    }
    return r;
}

PropertyResult check_am_gm(std::size_t iterations, Rng& rng)
{
    PropertyResult r;
    r.name = "am_gm";
    for (std::size_t it = 0; it < iterations; ++it) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.below(20));
        std::vector<double> x(n);
        for (auto& v : x) {
            v = 10.0 * rng.uniform();
        }
        ++r.checks;
        const auto [am, gm] = theory::am_gm_check(x);
        if (!(am >= gm)) {
            fail(r, "x=" + format_vector(x));
        }
    }
    return r;
}

PropertyResult check_asymptote(std::span<const double> p0_values, double j_max, double tol_low,
                               double tol_limit)
{
    PropertyResult r;
    r.name = "horizontal_asymptote";
    for (double p0 : p0_values) {
        const double x = theory::xi(p0);
        std::vector<double> js;
        for (int j = 1; j <= 100; ++j) {
            js.push_back(j);
        }
        const int steps = 400;
        for (int s = 0; s <= steps; ++s) {
            js.push_back(std::round(std::pow(j_max, static_cast<double>(s) / steps)));
        }
        for (double j : js) {
            ++r.checks;
            const double g = theory::asymptote_gap_function(p0, j);
            if (g + x < -tol_low) {
                std::ostringstream os;
                os.precision(17);
                os << "p0=" << p0 << " j=" << j << " g(j)=" << g << " -xi=" << -x;
                fail(r, os.str());
            }
        }
        ++r.checks;
        const double g_end = theory::asymptote_gap_function(p0, j_max);
        if (std::abs(g_end + x) > tol_limit) {
            std::ostringstream os;
            os.precision(17);
            os << "p0=" << p0 << " g(" << j_max << ")=" << g_end << " far from -xi=" << -x;
            fail(r, os.str());
        }
    }
    return r;
}

PropertyResult check_dkw_domination(std::size_t replications, std::uint64_t seed, int workers)
{
    PropertyResult r;
    r.name = "dkw_domination";
    const std::vector<double> eps{0.05, 0.1};
    for (std::size_t lambda : {std::size_t{100}, std::size_t{1000}}) {
        const auto counts = dkw_exceedances(0.5, lambda, eps, replications, seed, workers);
        for (std::size_t e = 0; e < eps.size(); ++e) {
            ++r.checks;
            const double freq = static_cast<double>(counts[e]) / static_cast<double>(replications);
            const double b = std::min(1.0, theory::dkw_bound(static_cast<double>(lambda), eps[e]));
            const double margin = 3.0 * std::sqrt(b * (1.0 - b) / static_cast<double>(replications));
            if (freq > b + margin) {
                std::ostringstream os;
                os << "lambda=" << lambda << " eps=" << eps[e] << " frequency=" << freq
                   << " bound=" << b << " margin=" << margin;
                fail(r, os.str());
            }
        }
    }
    return r;
}

std::vector<PropertyResult> run_all(const VerifyOptions& options)
{
    const PmfFunction pmf = options.pmf ? options.pmf : PmfFunction([](std::span<const double> p) {
        return theory::poisson_binomial_pmf(p);
    });
    Rng root(options.seed);
    const std::size_t it = std::max<std::size_t>(1, options.iterations);

    std::vector<PropertyResult> out;
    Rng r1 = root.split();
    out.push_back(check_pmf_consistency(std::max<std::size_t>(1, it / 10), r1, pmf));
    Rng r2 = root.split();
    out.push_back(check_boland(it, r2, pmf));
    Rng r3 = root.split();
    const double etas[] = {0.1, 0.5, 1.0};
    out.push_back(check_smoothing_preserves_majorisation(it, r3, etas));
    Rng r4 = root.split();
    out.push_back(check_am_gm(it, r4));
    const double p0s[] = {0.05, 0.1, 0.25, 0.5, 0.9};
    out.push_back(check_asymptote(p0s, 1e6));
    out.push_back(check_dkw_domination(std::max<std::size_t>(100, 10 * it), root.next(), options.workers));
    return out;
}

} // namespace pbil::properties
