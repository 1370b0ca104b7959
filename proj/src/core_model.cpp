#include "pbil/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pbil {

Bitstring Bitstring::from_string(std::string_view text)
{
    Bitstring x(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '1') {
            x.set(i, true);
        } else if (text[i] != '0') {
            throw std::invalid_argument("bitstring may only contain '0' and '1'");
        }
    }
    return x;
}

Bitstring Bitstring::all_ones(std::size_t n)
{
    Bitstring x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x.set(i, true);
    }
    return x;
}

std::string Bitstring::to_string() const
{
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i) {
        if ((*this)[i]) {
            s[i] = '1';
        }
    }
    return s;
}

MarginalVector::MarginalVector(std::vector<double> probs) : probs_(std::move(probs))
{
    if (probs_.size() < 2) {
        throw std::invalid_argument("model dimension n must be at least 2");
    }
    for (double p : probs_) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("marginal probabilities must lie in [0, 1]");
        }
    }
}

void PbilConfig::validate() const
{
    if (n < 2) {
        throw std::invalid_argument("invalid config: n >= 2 required");
    }
    if (lambda < 1) {
        throw std::invalid_argument("invalid config: lambda >= 1 required");
    }
    if (mu < 1) {
        throw std::invalid_argument("invalid config: 1 <= mu required");
    }
    if (mu > lambda) {
        throw std::invalid_argument("invalid config: mu <= lambda required");
    }
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw std::invalid_argument("invalid config: eta in (0, 1] required");
    }
    if (initial_probs && initial_probs->size() != n) {
        throw std::invalid_argument("invalid config: initial model must have length n");
    }
}

std::uint64_t PbilConfig::budget() const
{
    return max_generations != 0 ? max_generations : default_max_generations(n, lambda);
}

std::uint64_t default_max_generations(std::size_t n, std::size_t lambda)
{
    const double nn = static_cast<double>(n);
    const double ll = static_cast<double>(lambda);
    const double g = 50.0 * (nn * std::log(ll) + nn * nn / ll);
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(g)));
}

MarginalVector init_model(std::size_t n)
{
    if (n < 2) {
        throw std::invalid_argument("init_model: n >= 2 required (borders 1/n and 1-1/n would cross)");
    }
    return MarginalVector(std::vector<double>(n, 0.5));
}

void sample_individual(const MarginalVector& model, Rng& rng, Bitstring& out)
{
    const std::size_t n = model.size();
    if (out.size() != n) {
        out = Bitstring(n);
    }
    auto& words = out.words();
    const auto probs = model.probs();
    for (std::size_t w = 0; w < words.size(); ++w) {
        std::uint64_t word = 0;
        const std::size_t begin = w * 64;
        const std::size_t end = std::min(n, begin + 64);
        for (std::size_t i = begin; i < end; ++i) {
            const std::uint64_t bit = rng.uniform() < probs[i] ? 1u : 0u;
            word |= bit << (i - begin);
        }
        words[w] = word;
    }
}

Bitstring sample_individual(const MarginalVector& model, Rng& rng)
{
    Bitstring x(model.size());
    sample_individual(model, rng, x);
    return x;
}

namespace {

MarginalVector apply_update(const MarginalVector& model,
                            const std::vector<std::size_t>& ones,
                            std::size_t mu,
                            double eta)
{
    const std::size_t n = model.size();
    const double lo = model.lower_border();
    const double hi = model.upper_border();
    const double keep = 1.0 - eta;
    const double m = static_cast<double>(mu);
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = keep * model[i] + eta * (static_cast<double>(ones[i]) / m);
        next[i] = std::max(lo, std::min(hi, v));
    }
    return MarginalVector(std::move(next));
}

void accumulate(std::vector<std::size_t>& ones, const Bitstring& x)
{
    if (x.size() != ones.size()) {
        throw std::invalid_argument("update_model: selected bitstring length differs from n");
    }
    for (std::size_t i = 0; i < ones.size(); ++i) {
        ones[i] += x[i] ? 1u : 0u;
    }
}

void check_eta(double eta)
{
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw std::invalid_argument("update_model: eta in (0, 1] required");
    }
}

} // namespace

MarginalVector update_model(const MarginalVector& model,
                            std::span<const Bitstring> selected,
                            double eta)
{
    if (selected.empty()) {
        throw std::invalid_argument("update_model: selected set is empty");
    }
    check_eta(eta);
    std::vector<std::size_t> ones(model.size(), 0);
    for (const auto& x : selected) {
        accumulate(ones, x);
    }
    return apply_update(model, ones, selected.size(), eta);
}

MarginalVector update_model(const MarginalVector& model,
                            std::span<const Bitstring> population,
                            std::span<const std::size_t> selected_indices,
                            double eta)
{
    if (selected_indices.empty()) {
        throw std::invalid_argument("update_model: selected set is empty");
    }
    check_eta(eta);
    std::vector<std::size_t> ones(model.size(), 0);
    for (std::size_t idx : selected_indices) {
        accumulate(ones, population[idx]);
    }
    return apply_update(model, ones, selected_indices.size(), eta);
}

} // namespace pbil
