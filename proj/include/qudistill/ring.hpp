#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qudistill/types.hpp"

// Elementary arithmetic over the ring of integers modulo D.
namespace qudistill::ring {

// Canonical residue of value in [0, modulus). modulus >= 1.
std::int64_t mod_reduce(std::int64_t value, std::int64_t modulus);

// All positive divisors of modulus in ascending order. modulus >= 1.
std::vector<std::int64_t> divisors(std::int64_t modulus);

// Prime factorization as (prime, exponent) pairs with ascending primes.
// value >= 1; the factorization of 1 is empty.
std::vector<std::pair<std::int64_t, int>> factorize(std::int64_t value);

// Multiplicative inverse of a modulo modulus, or nullopt when
// gcd(a, modulus) != 1.
std::optional<std::int64_t> inverse(std::int64_t a, std::int64_t modulus);

// Largest d dividing modulus such that every component of v is a multiple of
// d; equals gcd(modulus, v_1, ..., v_k) on canonical representatives. The
// zero vector (and the empty vector) map to modulus itself.
std::int64_t gcd_d(const IVec& v, std::int64_t modulus);
std::int64_t gcd_d(const std::vector<std::int64_t>& v, std::int64_t modulus);

// Number of vectors in Z_modulus^n whose gcd_d equals 1. Multiplicative over
// prime powers: the factor for p^q is p^{n(q-1)} (p^n - 1). totient(n, 1) is
// 1 by convention. Throws std::overflow_error when the count does not fit in
// 64 bits.
std::uint64_t totient(int n, std::int64_t modulus);

// Size of the class {v in Z_modulus^n : gcd_d(v) == d}. d must divide
// modulus.
std::uint64_t partition_size(std::int64_t d, std::int64_t modulus, int n);

}  // namespace qudistill::ring
