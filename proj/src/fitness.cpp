#include "pbil/fitness.hpp"

#include <bit>
#include <stdexcept>

namespace pbil {

Problem parse_problem(std::string_view name)
{
    if (name == "leadingones") {
        return Problem::LeadingOnes;
    }
    if (name == "binval") {
        return Problem::BinVal;
    }
    throw std::invalid_argument("unknown problem '" + std::string(name) +
                                "' (expected leadingones or binval)");
}

std::string_view problem_name(Problem p) noexcept
{
    return p == Problem::LeadingOnes ? "leadingones" : "binval";
}

std::size_t leading_ones(const Bitstring& x) noexcept
{
    const auto& words = x.words();
    std::size_t count = 0;
    for (auto w : words) {
        const auto run = static_cast<std::size_t>(std::countr_one(w));
        count += run;
        if (run < 64) {
            break;
        }
    }
    return count < x.size() ? count : x.size();
}

BigInt binval_exact(const Bitstring& x)
{
    BigInt value = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        value <<= 1;
        if (x[i]) {
            value += 1;
        }
    }
    return value;
}

std::strong_ordering binval_compare(const Bitstring& x, const Bitstring& y)
{
    if (x.size() != y.size()) {
        throw std::invalid_argument("binval_compare: bitstrings differ in length");
    }
    const auto& a = x.words();
    const auto& b = y.words();
    for (std::size_t w = 0; w < a.size(); ++w) {
        const std::uint64_t diff = a[w] ^ b[w];
        if (diff != 0) {
            // Lowest set bit of the xor is the most significant differing position.
            const std::uint64_t bit = diff & (~diff + 1);
            return (a[w] & bit) != 0 ? std::strong_ordering::greater : std::strong_ordering::less;
        }
    }
    return std::strong_ordering::equal;
}

std::size_t level_of(const Bitstring& x, Problem) noexcept
{
    return leading_ones(x);
}

std::strong_ordering compare_fitness(const Bitstring& x, const Bitstring& y, Problem problem)
{
    if (problem == Problem::LeadingOnes) {
        return leading_ones(x) <=> leading_ones(y);
    }
    return binval_compare(x, y);
}

} // namespace pbil
