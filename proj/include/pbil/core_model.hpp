#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pbil/bitstring.hpp"
#include "pbil/rng.hpp"

namespace pbil {

/// Univariate model: one Bernoulli marginal per position, kept inside
/// [1/n, 1 - 1/n] after every update.
class MarginalVector {
public:
    MarginalVector() = default;

    // Throws std::invalid_argument when n < 2 or when an entry is outside [0, 1].
    explicit MarginalVector(std::vector<double> probs);

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const noexcept { return probs_[i]; }
    std::span<const double> probs() const noexcept { return probs_; }

    double lower_border() const noexcept { return 1.0 / static_cast<double>(probs_.size()); }
    double upper_border() const noexcept { return 1.0 - lower_border(); }

    bool operator==(const MarginalVector&) const = default;

private:
    std::vector<double> probs_;
};

struct PbilConfig {
    std::size_t n = 0;
    std::size_t lambda = 0;
    std::size_t mu = 0;
    double eta = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t max_generations = 0; // 0 selects default_max_generations(n, lambda)
    std::optional<std::vector<double>> initial_probs;

    double gamma0() const noexcept
    {
        return static_cast<double>(mu) / static_cast<double>(lambda);
    }

    // Throws std::invalid_argument naming the violated invariant.
    void validate() const;

    std::uint64_t budget() const;

    bool operator==(const PbilConfig&) const = default;
};

// ceil(50 * (n ln(lambda) + n^2 / lambda)).
std::uint64_t default_max_generations(std::size_t n, std::size_t lambda);

MarginalVector init_model(std::size_t n);

// Bit i is 1 iff the i-th uniform draw is below probs[i]; consumes n draws.
Bitstring sample_individual(const MarginalVector& model, Rng& rng);
void sample_individual(const MarginalVector& model, Rng& rng, Bitstring& out);

// p'_i = clamp((1 - eta) p_i + eta * (ones_i / mu), 1/n, 1 - 1/n).
MarginalVector update_model(const MarginalVector& model,
                            std::span<const Bitstring> selected,
                            double eta);

// Same update, selected individuals given by index into a population.
MarginalVector update_model(const MarginalVector& model,
                            std::span<const Bitstring> population,
                            std::span<const std::size_t> selected_indices,
                            double eta);

} // namespace pbil
