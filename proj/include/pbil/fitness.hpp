#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "pbil/bitstring.hpp"

namespace pbil {

enum class Problem { LeadingOnes, BinVal };

// "leadingones" | "binval"; throws std::invalid_argument otherwise.
Problem parse_problem(std::string_view name);
std::string_view problem_name(Problem p) noexcept;

using BigInt = boost::multiprecision::cpp_int;

// Length of the all-ones prefix.
std::size_t leading_ones(const Bitstring& x) noexcept;

// Sum of 2^(n-i) x_i with position 1 the most significant bit.
BigInt binval_exact(const Bitstring& x);

// Orders by binval_exact without materialising it: first differing
// position decides. Throws std::invalid_argument on length mismatch.
std::strong_ordering binval_compare(const Bitstring& x, const Bitstring& y);

// Level in the canonical partition. Both problems map a string to its
// number of leading ones; for BinVal this is the unique j with
// sum_{i<=j} 2^(n-i) <= BinVal(x) < sum_{i<=j+1} 2^(n-i).
std::size_t level_of(const Bitstring& x, Problem problem) noexcept;

/// Fitness order under `problem`: greater means fitter.
std::strong_ordering compare_fitness(const Bitstring& x, const Bitstring& y, Problem problem);

} // namespace pbil
