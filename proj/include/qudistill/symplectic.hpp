#pragma once

#include <cstdint>
#include <vector>

#include "qudistill/rng.hpp"
#include "qudistill/types.hpp"

// The group of 2n x 2n matrices over Z_D preserving the alternating form
// Omega = [[0, I], [-I, 0]]: membership, inversion, generators, orders,
// completion of partial canonical sets, enumeration, and word decomposition.
namespace qudistill::symplectic {

IMat omega(int n, std::int64_t modulus);

bool is_symplectic(const IMat& m, int n, std::int64_t modulus);

// Group inverse: Omega^T M^T Omega. Requires a symplectic input.
IMat inverse(const IMat& m, int n, std::int64_t modulus);

enum class GeneratorKind {
  kShear,     // adds the first index of a pair onto its second index
  kRotate,    // quarter turn of one pair: (a, b) -> (b, -a)
  kPairSum,   // couples two pairs: first indices i_a += i_b, seconds j_b -= j_a
  kPairSwap,  // exchanges two pairs wholesale
};

struct Generator {
  GeneratorKind kind;
  int a = 0;  // acting pair
  int b = 0;  // partner pair for kPairSum / kPairSwap
};

IMat generator_matrix(const Generator& g, int n, std::int64_t modulus);

// A generating family: shear and rotate on the first pair, the coupling of
// the first two pairs, and all pair swaps.
std::vector<Generator> generating_set(int n);

// |group| = D^{n^2} * prod_{k=1..n} totient(2k, D). Throws
// std::overflow_error when it does not fit in 64 bits.
std::uint64_t group_order(std::int64_t modulus, int n);

// Extends partial lists u_1..u_r, v_1..v_s obeying the canonical relations
// (u_i^T Omega u_j == 0, v_i^T Omega v_j == 0, u_i^T Omega v_j == delta_ij,
// joint independence) to a full group element whose columns are
// u_1..u_n, v_1..v_n. Deterministic (first branch) when rng is null,
// uniform over the completions otherwise.
IMat complete_canonical_set(const std::vector<IVec>& us, const std::vector<IVec>& vs,
                            int n, std::int64_t modulus, SplitMix64* rng = nullptr);

// Every group element, in the deterministic branch order of the completion
// procedure. Throws resource_limit_error when the order exceeds cap.
std::vector<IMat> enumerate(std::int64_t modulus, int n,
                            std::uint64_t cap = kDefaultGroupCap);

IMat random_element(std::int64_t modulus, int n, SplitMix64& rng);

// Whether some group element maps x to y; the orbits are exactly the gcd_d
// classes of Z_modulus^2n.
bool same_orbit(const IVec& x, const IVec& y, std::int64_t modulus);

// Product of the generator matrices in word order (leftmost factor first).
IMat word_to_matrix(const std::vector<Generator>& word, int n, std::int64_t modulus);

// A word whose product reproduces m; verified internally by remultiplying.
std::vector<Generator> decompose_to_generators(const IMat& m, int n, std::int64_t modulus);

}  // namespace qudistill::symplectic
