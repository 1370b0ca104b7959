#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pbil/core_model.hpp"
#include "pbil/fitness.hpp"

namespace pbil {

struct SelectionOutcome {
    std::vector<std::size_t> selected_indices;
};

// Indices of the mu fittest individuals in rank order; ties keep sampling order.
SelectionOutcome truncation_select(std::span<const Bitstring> population,
                                   std::size_t mu,
                                   Problem problem);

struct MarginalSnapshot {
    std::uint64_t generation = 0;
    std::vector<double> probs;

    bool operator==(const MarginalSnapshot&) const = default;
};

struct RunResult {
    bool success = false;
    std::uint64_t generations = 0;
    std::uint64_t evaluations = 0;
    std::vector<std::size_t> best_level_trace;    // empty unless requested
    std::vector<MarginalSnapshot> marginal_snapshots; // empty unless requested

    bool operator==(const RunResult&) const = default;
};

// What an observer sees once per generation, after sampling and sorting and
// before the model update.
struct GenerationView {
    std::uint64_t generation = 0;
    const MarginalVector* model = nullptr; // the model the population was drawn from
    std::size_t best_level = 0;
    std::size_t mu_th_level = 0; // level of the mu-th fittest individual
};

struct RunOptions {
    bool record_trace = false;
    std::uint64_t snapshot_interval = 0; // 0 disables snapshots
    std::function<void(const GenerationView&)> observer;
};

RunResult run_pbil(const PbilConfig& config, Problem problem, const RunOptions& options = {});

// run_pbil with eta forced to 1.
RunResult run_umda(const PbilConfig& config, Problem problem, const RunOptions& options = {});

} // namespace pbil
