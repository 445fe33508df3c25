#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qudistill/types.hpp"

// Probability vectors over Z_D^{2n} describing n shared pairs that are
// diagonal in the generalized Bell basis, together with the transforms and
// invariant families the distillation analysis needs.
namespace qudistill::states {

struct BellDiagonalState {
  std::int64_t d = 2;  // local dimension
  int n = 1;           // number of pairs
  Eigen::ArrayXd p;    // D^{2n} probabilities, see pack_index for the layout
};

// Index layout: x = (i_1..i_n, j_1..j_n) packs big-endian with x_1 most
// significant; for n = 1 the index of (i, j) is i*D + j.
std::int64_t pack_index(const IVec& x, std::int64_t d);
IVec unpack_index(std::int64_t index, int length, std::int64_t d);

// Number of entries D^{2n}; throws resource_limit_error beyond the span cap.
std::int64_t state_size(std::int64_t d, int n);

// Clamps tiny negative entries and rescales to unit mass. Entries below
// -1e-15 or total mass off by more than 1e-12 raise numerical_error.
void normalize(BellDiagonalState& s);

// Largest weight on the identity outcome: p at index 0.
double fidelity(const BellDiagonalState& s);

// One pair, weight f on the zero index and the rest spread uniformly.
BellDiagonalState isotropic(std::int64_t d, double f);

// n pairs of the same isotropic state.
BellDiagonalState isotropic_pairs(std::int64_t d, int n, double f);

// Character-sum transform of the probability vector; exactly real for the
// states handled here, and checked to be so.
struct FourierVector {
  std::int64_t d = 2;
  int n = 1;
  Eigen::ArrayXd values;
};
FourierVector fourier(const BellDiagonalState& s);
BellDiagonalState inverse_fourier(const FourierVector& f);

// Relabels outcomes by an invertible index map m (must preserve the
// alternating form): out[m x] = p[x].
BellDiagonalState apply_permutation(const BellDiagonalState& s, const IMat& m);

// Uniform distribution over the gcd class `divisor` of Z_d^{2n}.
BellDiagonalState heterotropic_invariant(std::int64_t divisor, std::int64_t d, int n);

// Averages the probabilities within each gcd class.
BellDiagonalState twirl_symplectic(const BellDiagonalState& s);

// One pair, uniform over the divisor^2 solutions of divisor * x == 0; these
// distributions are stationary under every relabeling step.
BellDiagonalState fixed_state(std::int64_t divisor, std::int64_t d);

BellDiagonalState tensor(const BellDiagonalState& a, const BellDiagonalState& b);

// Restriction to a subset of pairs (0-based, strictly increasing, nonempty).
BellDiagonalState marginal(const BellDiagonalState& s, const std::vector<int>& kept_pairs);

// Dense two-qudit density matrix of a one-pair state, row index (k, a)
// packing Alice-major: row = k*D + a.
Eigen::MatrixXcd to_density_matrix(const BellDiagonalState& s);

// Whether the partial transpose has a negative eigenvalue (one-pair states).
// Evaluated blockwise: the partial transpose is block diagonal in k + a.
bool is_nppt(const BellDiagonalState& s, double tol = 1e-9);

std::string to_json(const BellDiagonalState& s);
BellDiagonalState from_json(const std::string& text);
void save_state(const BellDiagonalState& s, const std::string& path);
BellDiagonalState load_state(const std::string& path);

}  // namespace qudistill::states
