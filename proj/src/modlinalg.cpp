#include "qudistill/modlinalg.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>

#include "qudistill/ring.hpp"

namespace qudistill::modlinalg {

namespace {

void require_modulus(std::int64_t modulus) {
  if (modulus < 1) {
    throw std::invalid_argument("modulus must be a positive integer");
  }
}

IMat stack_rows(const std::vector<IVec>& vectors, int ambient_dim) {
  IMat m(static_cast<Eigen::Index>(vectors.size()), ambient_dim);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != ambient_dim) {
      throw std::invalid_argument("vector length does not match the ambient dimension");
    }
    m.row(static_cast<Eigen::Index>(i)) = vectors[i].transpose();
  }
  return m;
}

}  // namespace

PairReduction pair_reduce(std::int64_t x, std::int64_t y, std::int64_t modulus) {
  require_modulus(modulus);
  x = ring::mod_reduce(x, modulus);
  y = ring::mod_reduce(y, modulus);
  PairReduction out;
  auto add_first_to_second = [&] {
    y = ring::mod_reduce(x + y, modulus);
    out.ops.push_back(PairOp::kAddFirstToSecond);
  };
  auto add_second_to_first = [&] {
    x = ring::mod_reduce(x + y, modulus);
    out.ops.push_back(PairOp::kAddSecondToFirst);
  };
  while (x != 0) {
    if (y == 0) {
      // (x, 0) -> (x, x) -> ... -> (Dx, x) == (0, x).
      add_first_to_second();
      for (std::int64_t k = 0; k < modulus - 1; ++k) add_second_to_first();
      break;
    }
    if (x <= y) {
      // Adding x to y repeatedly reaches values congruent to y modulo
      // gcd(x, modulus); the smallest of them lies below x.
      while (y >= x) add_first_to_second();
    } else {
      while (x >= y) add_second_to_first();
    }
  }
  out.first = x;
  out.second = y;
  return out;
}

Decomposition decompose(const IMat& m, std::int64_t modulus) {
  require_modulus(modulus);
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  Decomposition dec;
  dec.c = mod_reduce(m, modulus);
  dec.a = IMat::Identity(rows, rows);
  dec.a_inv = IMat::Identity(rows, rows);
  dec.b = IMat::Identity(cols, cols);
  dec.b_inv = IMat::Identity(cols, cols);
  IMat& r = dec.c;

  auto remod_row = [&](IMat& mat, Eigen::Index i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) mat(i, j) = ring::mod_reduce(mat(i, j), modulus);
  };
  auto remod_col = [&](IMat& mat, Eigen::Index j) {
    for (Eigen::Index i = 0; i < mat.rows(); ++i) mat(i, j) = ring::mod_reduce(mat(i, j), modulus);
  };
  auto row_sub = [&](Eigen::Index i, std::int64_t q, Eigen::Index t) {
    r.row(i) -= q * r.row(t);
    remod_row(r, i);
    dec.a.row(i) -= q * dec.a.row(t);
    remod_row(dec.a, i);
    dec.a_inv.col(t) += q * dec.a_inv.col(i);
    remod_col(dec.a_inv, t);
  };
  auto col_sub = [&](Eigen::Index j, std::int64_t q, Eigen::Index t) {
    r.col(j) -= q * r.col(t);
    remod_col(r, j);
    dec.b.col(j) -= q * dec.b.col(t);
    remod_col(dec.b, j);
    dec.b_inv.row(t) += q * dec.b_inv.row(j);
    remod_row(dec.b_inv, t);
  };
  auto row_swap = [&](Eigen::Index i1, Eigen::Index i2) {
    if (i1 == i2) return;
    r.row(i1).swap(r.row(i2));
    dec.a.row(i1).swap(dec.a.row(i2));
    dec.a_inv.col(i1).swap(dec.a_inv.col(i2));
  };
  auto col_swap = [&](Eigen::Index j1, Eigen::Index j2) {
    if (j1 == j2) return;
    r.col(j1).swap(r.col(j2));
    dec.b.col(j1).swap(dec.b.col(j2));
    dec.b_inv.row(j1).swap(dec.b_inv.row(j2));
  };

  const Eigen::Index steps = std::min(rows, cols);
  for (Eigen::Index t = 0; t < steps; ++t) {
    while (true) {
      // Smallest nonzero canonical entry of the trailing submatrix.
      Eigen::Index pi = -1, pj = -1;
      std::int64_t best = 0;
      for (Eigen::Index i = t; i < rows; ++i) {
        for (Eigen::Index j = t; j < cols; ++j) {
          if (r(i, j) != 0 && (pi < 0 || r(i, j) < best)) {
            best = r(i, j);
            pi = i;
            pj = j;
          }
        }
      }
      if (pi < 0) {
        t = steps;  // trailing block is zero; the form is final
        break;
      }
      row_swap(t, pi);
      col_swap(t, pj);
      const std::int64_t piv = r(t, t);
      bool clean = true;
      for (Eigen::Index i = t + 1; i < rows; ++i) {
        if (r(i, t) != 0) {
          row_sub(i, r(i, t) / piv, t);
          if (r(i, t) != 0) clean = false;
        }
      }
      for (Eigen::Index j = t + 1; j < cols; ++j) {
        if (r(t, j) != 0) {
          col_sub(j, r(t, j) / piv, t);
          if (r(t, j) != 0) clean = false;
        }
      }
      if (clean) break;
      // Some remainder survived; it is strictly smaller than the pivot, so
      // the next sweep picks it up and the minimum keeps decreasing.
    }
    if (t >= steps) break;
  }

  // The transformations are exact by construction; fail loudly if not.
  IMat check = mod_reduce(dec.a * mod_reduce(m, modulus) * dec.b, modulus);
  if (check != dec.c || mod_reduce(dec.a * dec.a_inv, modulus) != IMat::Identity(rows, rows) ||
      mod_reduce(dec.b * dec.b_inv, modulus) != IMat::Identity(cols, cols)) {
    throw numerical_error("diagonal decomposition failed its own verification");
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (i != j && dec.c(i, j) != 0) {
        throw numerical_error("diagonal decomposition left an off-diagonal entry");
      }
    }
  }
  return dec;
}

int rank(const IMat& m, std::int64_t modulus) {
  require_modulus(modulus);
  if (m.rows() == 0 || m.cols() == 0) return 0;
  if (modulus == 1) return 0;
  Decomposition dec = decompose(m, modulus);
  const Eigen::Index k = std::min(m.rows(), m.cols());
  int best = static_cast<int>(k);
  for (const auto& [p, q] : ring::factorize(modulus)) {
    (void)q;
    int count = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (dec.c(i, i) % p != 0) ++count;
    }
    best = std::min(best, count);
  }
  return best;
}

bool is_linearly_independent(const std::vector<IVec>& vectors, std::int64_t modulus) {
  require_modulus(modulus);
  if (vectors.empty()) return true;
  const int ambient = static_cast<int>(vectors.front().size());
  IMat m = stack_rows(vectors, ambient);
  if (m.rows() > m.cols()) return false;
  return rank(m, modulus) == static_cast<int>(vectors.size());
}

std::vector<IVec> extend_to_basis(const std::vector<IVec>& part, int ambient_dim,
                                  std::int64_t modulus) {
  require_modulus(modulus);
  if (ambient_dim < 1) throw std::invalid_argument("ambient dimension must be positive");
  for (const IVec& v : part) {
    if (v.size() != ambient_dim) {
      throw std::invalid_argument("vector length does not match the ambient dimension");
    }
  }
  if (!is_linearly_independent(part, modulus)) {
    throw std::invalid_argument("extend_to_basis requires a linearly independent family");
  }
  const int k = static_cast<int>(part.size());
  std::vector<IVec> out;
  if (k == ambient_dim) return out;
  if (k == 0) {
    for (int i = 0; i < ambient_dim; ++i) {
      IVec e = IVec::Zero(ambient_dim);
      e(i) = ring::mod_reduce(1, modulus);
      out.push_back(e);
    }
    return out;
  }
  // With rows T = A^-1 C B^-1 and unit diagonal entries in C, the row span of
  // T is that of the first k rows of B^-1; the remaining rows complete it.
  Decomposition dec = decompose(stack_rows(part, ambient_dim), modulus);
  for (int i = k; i < ambient_dim; ++i) {
    out.push_back(dec.b_inv.row(i).transpose());
  }
  return out;
}

Subspace::Subspace(std::vector<IVec> basis, int ambient_dim, std::int64_t modulus)
    : basis_(std::move(basis)), ambient_dim_(ambient_dim), modulus_(modulus) {
  require_modulus(modulus_);
  if (ambient_dim_ < 0) throw std::invalid_argument("ambient dimension must be nonnegative");
  for (IVec& v : basis_) {
    if (v.size() != ambient_dim_) {
      throw std::invalid_argument("vector length does not match the ambient dimension");
    }
    v = mod_reduce(v, modulus_);
  }
  if (static_cast<int>(basis_.size()) > ambient_dim_ ||
      !is_linearly_independent(basis_, modulus_)) {
    throw std::invalid_argument("subspace basis must be linearly independent");
  }
}

Subspace orthogonal_complement(const Subspace& v) {
  const int n = v.ambient_dim();
  const std::int64_t modulus = v.modulus();
  const int k = v.dim();
  std::vector<IVec> comp;
  if (k == 0) {
    for (int i = 0; i < n; ++i) {
      IVec e = IVec::Zero(n);
      e(i) = ring::mod_reduce(1, modulus);
      comp.push_back(e);
    }
    return Subspace(std::move(comp), n, modulus);
  }
  // W x == 0 transforms to C (B^-1 x) == 0 with unit pivots, so the solution
  // space is spanned by the trailing columns of B.
  Decomposition dec = decompose(stack_rows(v.basis(), n), modulus);
  for (int j = k; j < n; ++j) {
    comp.push_back(dec.b.col(j));
  }
  return Subspace(std::move(comp), n, modulus);
}

std::vector<IVec> enumerate_span(const std::vector<IVec>& generators, int ambient_dim,
                                 std::int64_t modulus, std::int64_t cap) {
  require_modulus(modulus);
  if (ambient_dim < 0) throw std::invalid_argument("ambient dimension must be nonnegative");
  const int k = static_cast<int>(generators.size());
  unsigned __int128 total = 1;
  for (int i = 0; i < k; ++i) {
    total *= static_cast<unsigned __int128>(modulus);
    if (total > static_cast<unsigned __int128>(cap)) {
      throw resource_limit_error("span enumeration exceeds the configured cap");
    }
  }
  IMat gen = stack_rows(generators, ambient_dim);
  gen = mod_reduce(gen, modulus);

  std::map<std::vector<std::int64_t>, IVec> seen;
  std::vector<std::int64_t> digits(k, 0);
  IVec acc = IVec::Zero(ambient_dim);
  const std::int64_t count = static_cast<std::int64_t>(total);
  for (std::int64_t it = 0; it < count; ++it) {
    std::vector<std::int64_t> key(acc.data(), acc.data() + acc.size());
    seen.emplace(std::move(key), acc);
    // Odometer step with incremental update: bumping digit i adds generator
    // row i; a wrap has then added it modulus times, which cancels, so the
    // carry just moves on.
    for (int i = k - 1; i >= 0; --i) {
      acc += gen.row(i).transpose();
      acc = mod_reduce(acc, modulus);
      if (++digits[i] < modulus) break;
      digits[i] = 0;
    }
  }
  std::vector<IVec> out;
  out.reserve(seen.size());
  for (auto& [key, vec] : seen) {
    (void)key;
    out.push_back(vec);
  }
  return out;
}

std::vector<IVec> enumerate_span(const Subspace& v, std::int64_t cap) {
  return enumerate_span(v.basis(), v.ambient_dim(), v.modulus(), cap);
}

IMat coordinates_in_rowspan(const IMat& t, const IMat& w, std::int64_t modulus) {
  require_modulus(modulus);
  if (t.cols() != w.cols()) {
    throw std::invalid_argument("matrices must share their ambient dimension");
  }
  const Eigen::Index k = w.rows();
  if (rank(w, modulus) != k) {
    throw std::invalid_argument("coordinates_in_rowspan requires independent rows");
  }
  Decomposition dec = decompose(w, modulus);
  // w == A^-1 C B^-1, so for each target row tau: tau B == (coef A^-1) C.
  IMat y = mod_reduce(t * dec.b, modulus);
  IMat z = IMat::Zero(t.rows(), k);
  for (Eigen::Index row = 0; row < t.rows(); ++row) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      if (j < k) {
        auto inv = ring::inverse(dec.c(j, j), modulus);
        if (!inv) throw numerical_error("diagonal pivot of an independent family is not a unit");
        z(row, j) = ring::mod_reduce(y(row, j) * *inv, modulus);
      } else if (y(row, j) != 0) {
        throw std::invalid_argument("target row lies outside the row span");
      }
    }
  }
  return mod_reduce(z * dec.a, modulus);
}

}  // namespace qudistill::modlinalg
