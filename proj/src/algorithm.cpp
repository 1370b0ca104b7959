#include "pbil/algorithm.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pbil {

SelectionOutcome truncation_select(std::span<const Bitstring> population,
                                   std::size_t mu,
                                   Problem problem)
{
    if (mu > population.size()) {
        throw std::invalid_argument("truncation_select: mu exceeds population size");
    }
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    if (problem == Problem::LeadingOnes) {
        // Rank on cached levels rather than rescanning bitstrings per comparison.
        std::vector<std::size_t> level(population.size());
        for (std::size_t i = 0; i < population.size(); ++i) {
            level[i] = leading_ones(population[i]);
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return level[a] > level[b]; });
    } else {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return binval_compare(population[a], population[b]) == std::strong_ordering::greater;
        });
    }
    order.resize(mu);
    return SelectionOutcome{std::move(order)};
}

RunResult run_pbil(const PbilConfig& config, Problem problem, const RunOptions& options)
{
    config.validate();
    const std::size_t n = config.n;
    const std::uint64_t budget = config.budget();

    MarginalVector model = config.initial_probs ? MarginalVector(*config.initial_probs)
                                                : init_model(n);
    Rng rng(config.seed);
    std::vector<Bitstring> population(config.lambda, Bitstring(n));
    std::vector<std::size_t> levels(config.lambda);

    RunResult result;
    for (std::uint64_t t = 0; t < budget; ++t) {
        if (options.snapshot_interval != 0 && t % options.snapshot_interval == 0) {
            const auto p = model.probs();
            result.marginal_snapshots.push_back({t, std::vector<double>(p.begin(), p.end())});
        }

        std::size_t best = 0;
        for (std::size_t k = 0; k < config.lambda; ++k) {
            sample_individual(model, rng, population[k]);
            levels[k] = level_of(population[k], problem);
            best = std::max(best, levels[k]);
        }
        if (options.record_trace) {
            result.best_level_trace.push_back(best);
        }

        const auto selection = truncation_select(population, config.mu, problem);
        if (options.observer) {
            options.observer(
                GenerationView{t, &model, best, levels[selection.selected_indices.back()]});
        }
        if (best == n) {
            result.success = true;
            result.generations = t + 1;
            result.evaluations = result.generations * config.lambda;
            return result;
        }
        model = update_model(model, population, selection.selected_indices, config.eta);
    }

    result.success = false;
    result.generations = budget;
    result.evaluations = budget * config.lambda;
    return result;
}

RunResult run_umda(const PbilConfig& config, Problem problem, const RunOptions& options)
{
    PbilConfig umda = config;
    umda.eta = 1.0;
    return run_pbil(umda, problem, options);
}

} // namespace pbil
