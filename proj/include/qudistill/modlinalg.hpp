#pragma once

#include <cstdint>
#include <vector>

#include "qudistill/ring.hpp"
#include "qudistill/types.hpp"

// Linear algebra over the module Z_D^n: reduction transcripts, a diagonal
// normal form with invertible transformations, rank, basis extension,
// orthogonal complements, and span enumeration.
namespace qudistill::modlinalg {

// Entrywise canonical residues of any integer matrix expression.
template <typename Derived>
typename Derived::PlainObject mod_reduce(const Eigen::MatrixBase<Derived>& m,
                                         std::int64_t modulus) {
  typename Derived::PlainObject out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) = ring::mod_reduce(out(i, j), modulus);
    }
  }
  return out;
}

// The two invertible moves available on a pair of residues.
enum class PairOp {
  kAddFirstToSecond,  // (x, y) -> (x, x + y)
  kAddSecondToFirst,  // (x, y) -> (x + y, y)
};

struct PairReduction {
  std::vector<PairOp> ops;  // applied left to right to the input pair
  std::int64_t first = 0;   // always 0 on return
  std::int64_t second = 0;
};

// Drives (x, y) to (0, g) using only the two pair moves. Deterministic; the
// transcript replayed on the input reproduces (first, second).
PairReduction pair_reduce(std::int64_t x, std::int64_t y, std::int64_t modulus);

// a * m * b == c (mod modulus) with a, b invertible and c supported on its
// diagonal. a_inv and b_inv are the exact modular inverses of a and b.
struct Decomposition {
  IMat a, c, b;
  IMat a_inv, b_inv;
};
Decomposition decompose(const IMat& m, std::int64_t modulus);

// Largest r such that some r x r minor of m is invertible mod the modulus;
// computed from the diagonal form, minimizing over the prime divisors.
int rank(const IMat& m, std::int64_t modulus);

// Whether the vectors admit no nontrivial vanishing module combination.
// All vectors must share a length; the empty family is independent.
bool is_linearly_independent(const std::vector<IVec>& vectors, std::int64_t modulus);

// Vectors completing the linearly independent family `part` to a basis of
// Z_modulus^ambient_dim. Returns ambient_dim - part.size() vectors.
std::vector<IVec> extend_to_basis(const std::vector<IVec>& part, int ambient_dim,
                                  std::int64_t modulus);

// A free submodule handle: a validated linearly independent basis.
class Subspace {
 public:
  Subspace(std::vector<IVec> basis, int ambient_dim, std::int64_t modulus);
  const std::vector<IVec>& basis() const { return basis_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  int ambient_dim() const { return ambient_dim_; }
  std::int64_t modulus() const { return modulus_; }

 private:
  std::vector<IVec> basis_;
  int ambient_dim_;
  std::int64_t modulus_;
};

// Basis of {w : w . v == 0 for all v in the subspace} under the standard dot
// product; its dimension is ambient_dim - dim.
Subspace orthogonal_complement(const Subspace& v);

// All distinct module combinations of the generators, in ascending packed
// order. Throws resource_limit_error when modulus^generators exceeds cap.
std::vector<IVec> enumerate_span(const std::vector<IVec>& generators, int ambient_dim,
                                 std::int64_t modulus, std::int64_t cap = kDefaultSpanCap);
std::vector<IVec> enumerate_span(const Subspace& v, std::int64_t cap = kDefaultSpanCap);

// Coefficient matrix expressing each row of t in the row span of w, i.e.
// result * w == t (mod modulus). Rows of w must be linearly independent and
// every row of t must lie in their span.
IMat coordinates_in_rowspan(const IMat& t, const IMat& w, std::int64_t modulus);

}  // namespace qudistill::modlinalg
