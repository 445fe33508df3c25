#include "qudistill/symplectic.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "qudistill/modlinalg.hpp"
#include "qudistill/ring.hpp"

namespace qudistill::symplectic {

namespace {

void require_shape(const IMat& m, int n) {
  if (n < 1) throw std::invalid_argument("pair count must be positive");
  if (m.rows() != 2 * n || m.cols() != 2 * n) {
    throw std::invalid_argument("matrix must be 2n x 2n");
  }
}

std::int64_t form_product(const IVec& x, const IMat& om, const IVec& y, std::int64_t d) {
  return ring::mod_reduce(x.dot(om * y), d);
}

}  // namespace

IMat omega(int n, std::int64_t modulus) {
  if (n < 1) throw std::invalid_argument("pair count must be positive");
  IMat om = IMat::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    om(i, n + i) = ring::mod_reduce(1, modulus);
    om(n + i, i) = ring::mod_reduce(-1, modulus);
  }
  return om;
}

bool is_symplectic(const IMat& m, int n, std::int64_t modulus) {
  require_shape(m, n);
  IMat om = omega(n, modulus);
  return modlinalg::mod_reduce(m.transpose() * om * m, modulus) == om;
}

IMat inverse(const IMat& m, int n, std::int64_t modulus) {
  if (!is_symplectic(m, n, modulus)) {
    throw std::invalid_argument("inverse requires a symplectic matrix");
  }
  IMat om = omega(n, modulus);
  return modlinalg::mod_reduce(om.transpose() * m.transpose() * om, modulus);
}

IMat generator_matrix(const Generator& g, int n, std::int64_t modulus) {
  if (n < 1) throw std::invalid_argument("pair count must be positive");
  const bool two_pairs = g.kind == GeneratorKind::kPairSum || g.kind == GeneratorKind::kPairSwap;
  if (g.a < 0 || g.a >= n || (two_pairs && (g.b < 0 || g.b >= n || g.b == g.a))) {
    throw std::invalid_argument("generator indices must name distinct pairs");
  }
  IMat m = IMat::Identity(2 * n, 2 * n);
  switch (g.kind) {
    case GeneratorKind::kShear:
      m(n + g.a, g.a) = 1;
      break;
    case GeneratorKind::kRotate:
      m(g.a, g.a) = 0;
      m(n + g.a, n + g.a) = 0;
      m(g.a, n + g.a) = 1;
      m(n + g.a, g.a) = -1;
      break;
    case GeneratorKind::kPairSum:
      m(g.a, g.b) = 1;
      m(n + g.b, n + g.a) = -1;
      break;
    case GeneratorKind::kPairSwap:
      m(g.a, g.a) = 0;
      m(g.b, g.b) = 0;
      m(g.a, g.b) = 1;
      m(g.b, g.a) = 1;
      m(n + g.a, n + g.a) = 0;
      m(n + g.b, n + g.b) = 0;
      m(n + g.a, n + g.b) = 1;
      m(n + g.b, n + g.a) = 1;
      break;
  }
  return modlinalg::mod_reduce(m, modulus);
}

std::vector<Generator> generating_set(int n) {
  if (n < 1) throw std::invalid_argument("pair count must be positive");
  std::vector<Generator> out;
  out.push_back({GeneratorKind::kShear, 0, 0});
  out.push_back({GeneratorKind::kRotate, 0, 0});
  if (n >= 2) out.push_back({GeneratorKind::kPairSum, 0, 1});
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      out.push_back({GeneratorKind::kPairSwap, a, b});
    }
  }
  return out;
}

std::uint64_t group_order(std::int64_t modulus, int n) {
  if (modulus < 1) throw std::invalid_argument("modulus must be a positive integer");
  if (n < 1) throw std::invalid_argument("pair count must be positive");
  using u128 = unsigned __int128;
  constexpr u128 kMax = std::numeric_limits<std::uint64_t>::max();
  u128 acc = 1;
  for (int i = 0; i < n * n; ++i) {
    acc *= static_cast<u128>(modulus);
    if (acc > kMax) throw std::overflow_error("group order does not fit in 64 bits");
  }
  for (int k = 1; k <= n; ++k) {
    acc *= static_cast<u128>(ring::totient(2 * k, modulus));
    if (acc > kMax) throw std::overflow_error("group order does not fit in 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

namespace {

void validate_canonical(const std::vector<IVec>& us, const std::vector<IVec>& vs, int n,
                        std::int64_t d, const IMat& om) {
  if (static_cast<int>(us.size()) > n || static_cast<int>(vs.size()) > n) {
    throw std::invalid_argument("partial lists may hold at most n vectors");
  }
  for (const IVec& w : us) {
    if (w.size() != 2 * n) throw std::invalid_argument("vectors must have length 2n");
  }
  for (const IVec& w : vs) {
    if (w.size() != 2 * n) throw std::invalid_argument("vectors must have length 2n");
  }
  for (std::size_t i = 0; i < us.size(); ++i) {
    for (std::size_t j = 0; j < us.size(); ++j) {
      if (form_product(us[i], om, us[j], d) != 0) {
        throw std::invalid_argument("u vectors must pairwise annihilate the form");
      }
    }
  }
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = 0; j < vs.size(); ++j) {
      if (form_product(vs[i], om, vs[j], d) != 0) {
        throw std::invalid_argument("v vectors must pairwise annihilate the form");
      }
    }
  }
  for (std::size_t i = 0; i < us.size(); ++i) {
    for (std::size_t j = 0; j < vs.size(); ++j) {
      std::int64_t want = (i == j) ? ring::mod_reduce(1, d) : 0;
      if (form_product(us[i], om, vs[j], d) != want) {
        throw std::invalid_argument("u and v vectors must pair canonically");
      }
    }
  }
  std::vector<IVec> joint = us;
  joint.insert(joint.end(), vs.begin(), vs.end());
  if (!modlinalg::is_linearly_independent(joint, d)) {
    throw std::invalid_argument("partial canonical set must be linearly independent");
  }
}

enum class WalkMode { kFirst, kRandom, kAll };

// Depth-first construction of canonical completions. The u phase runs until
// n u vectors exist, then the v phase fills in the partners; both choose the
// next vector from an adapted basis of the annihilator of what is already
// pinned down.
struct Walker {
  int n;
  std::int64_t d;
  IMat om;
  WalkMode mode;
  SplitMix64* rng = nullptr;
  std::uint64_t cap = 0;
  std::vector<IMat>* all_out = nullptr;
  IMat single;
  bool done = false;

  // Rows are the dot-product constraints Omega * w for pinned vectors w.
  IMat constraint_rows(const std::vector<IVec>& us, const std::vector<IVec>& vs,
                       int skip_u) const {
    std::vector<IVec> rows;
    for (int i = 0; i < static_cast<int>(us.size()); ++i) {
      if (i == skip_u) continue;
      rows.push_back(modlinalg::mod_reduce(om * us[i], d));
    }
    for (const IVec& w : vs) rows.push_back(modlinalg::mod_reduce(om * w, d));
    IMat m(static_cast<Eigen::Index>(rows.size()), 2 * n);
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(i) = rows[i].transpose();
    return m;
  }

  // Basis of the annihilator, reorganized so the vectors of `inside` (which
  // must lie in it) come first; the returned list is the remainder.
  std::vector<IVec> adapted_remainder(const IMat& constraints,
                                      const std::vector<IVec>& inside) const {
    std::vector<IVec> comp_rows;
    {
      std::vector<IVec> cons;
      for (Eigen::Index i = 0; i < constraints.rows(); ++i) {
        cons.push_back(constraints.row(i).transpose());
      }
      modlinalg::Subspace v(cons, 2 * n, d);
      comp_rows = modlinalg::orthogonal_complement(v).basis();
    }
    IMat wm(static_cast<Eigen::Index>(comp_rows.size()), 2 * n);
    for (std::size_t i = 0; i < comp_rows.size(); ++i) wm.row(i) = comp_rows[i].transpose();
    if (inside.empty()) return comp_rows;
    IMat tm(static_cast<Eigen::Index>(inside.size()), 2 * n);
    for (std::size_t i = 0; i < inside.size(); ++i) tm.row(i) = inside[i].transpose();
    IMat coef = modlinalg::coordinates_in_rowspan(tm, wm, d);
    std::vector<IVec> coef_rows;
    for (Eigen::Index i = 0; i < coef.rows(); ++i) coef_rows.push_back(coef.row(i).transpose());
    std::vector<IVec> completion =
        modlinalg::extend_to_basis(coef_rows, static_cast<int>(comp_rows.size()), d);
    std::vector<IVec> out;
    for (const IVec& k : completion) {
      out.push_back(modlinalg::mod_reduce(wm.transpose() * k, d));
    }
    return out;
  }

  void emit(const std::vector<IVec>& us, const std::vector<IVec>& vs) {
    IMat m(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
      m.col(i) = us[i];
      m.col(n + i) = vs[i];
    }
    if (all_out) {
      if (all_out->size() >= cap) {
        throw resource_limit_error("group enumeration exceeds the configured cap");
      }
      all_out->push_back(std::move(m));
    } else {
      single = std::move(m);
      done = true;
    }
  }

  void walk(std::vector<IVec>& us, std::vector<IVec>& vs) {
    if (done) return;
    const int r = static_cast<int>(us.size());
    const int s = static_cast<int>(vs.size());
    if (r == n && s == n) {
      emit(us, vs);
      return;
    }
    if (r < n) {
      // Next u: an element of the annihilator of everything pinned, with a
      // unit-gcd contribution outside the span of u_s..u_{r-1} so that the
      // canonical relations can keep extending.
      std::vector<IVec> inside(us.begin() + s, us.end());
      std::vector<IVec> fresh = adapted_remainder(constraint_rows(us, vs, -1), inside);
      const int ka = static_cast<int>(inside.size());
      const int kb = static_cast<int>(fresh.size());
      auto compose = [&](const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
        IVec z = IVec::Zero(2 * n);
        for (int i = 0; i < ka; ++i) z += a[i] * inside[i];
        for (int j = 0; j < kb; ++j) z += b[j] * fresh[j];
        return modlinalg::mod_reduce(z, d);
      };
      if (mode == WalkMode::kAll) {
        std::vector<std::int64_t> a(ka, 0), b(kb, 0);
        std::uint64_t atotal = 1, btotal = 1;
        for (int i = 0; i < ka; ++i) atotal *= static_cast<std::uint64_t>(d);
        for (int j = 0; j < kb; ++j) btotal *= static_cast<std::uint64_t>(d);
        for (std::uint64_t ai = 0; ai < atotal; ++ai) {
          std::uint64_t rem = ai;
          for (int i = ka - 1; i >= 0; --i) {
            a[i] = static_cast<std::int64_t>(rem % d);
            rem /= d;
          }
          for (std::uint64_t bi = 0; bi < btotal; ++bi) {
            std::uint64_t rem2 = bi;
            for (int j = kb - 1; j >= 0; --j) {
              b[j] = static_cast<std::int64_t>(rem2 % d);
              rem2 /= d;
            }
            if (ring::gcd_d(b, d) != 1) continue;
            us.push_back(compose(a, b));
            walk(us, vs);
            us.pop_back();
          }
        }
        return;
      }
      std::vector<std::int64_t> a(ka, 0), b(kb, 0);
      if (mode == WalkMode::kFirst) {
        b[kb - 1] = ring::mod_reduce(1, d);
      } else {
        for (auto& e : a) e = static_cast<std::int64_t>(rng->next_below(static_cast<std::uint64_t>(d)));
        int guard = 0;
        do {
          if (++guard > 1000000) {
            throw numerical_error("failed to sample a unit-gcd coefficient vector");
          }
          for (auto& e : b) e = static_cast<std::int64_t>(rng->next_below(static_cast<std::uint64_t>(d)));
        } while (ring::gcd_d(b, d) != 1);
      }
      us.push_back(compose(a, b));
      walk(us, vs);
      us.pop_back();
      return;
    }
    // Next v: pair with u_s. The adapted remainder of the annihilator of
    // everything except u_s is a single vector w with u_s^T Omega w a unit.
    std::vector<IVec> inside(us.begin() + s, us.end());
    std::vector<IVec> fresh = adapted_remainder(constraint_rows(us, vs, s), inside);
    if (fresh.size() != 1) {
      throw numerical_error("partner construction produced a wrong-sized remainder");
    }
    const IVec& w = fresh.front();
    std::int64_t sigma = form_product(us[s], om, w, d);
    auto sigma_inv = ring::inverse(sigma, d);
    if (!sigma_inv) {
      throw numerical_error("partner pairing value is not a unit");
    }
    const int kc = static_cast<int>(inside.size());
    auto compose = [&](const std::vector<std::int64_t>& c) {
      IVec z = *sigma_inv * w;
      for (int i = 0; i < kc; ++i) z += c[i] * inside[i];
      return modlinalg::mod_reduce(z, d);
    };
    if (mode == WalkMode::kAll) {
      std::vector<std::int64_t> c(kc, 0);
      std::uint64_t ctotal = 1;
      for (int i = 0; i < kc; ++i) ctotal *= static_cast<std::uint64_t>(d);
      for (std::uint64_t ci = 0; ci < ctotal; ++ci) {
        std::uint64_t rem = ci;
        for (int i = kc - 1; i >= 0; --i) {
          c[i] = static_cast<std::int64_t>(rem % d);
          rem /= d;
        }
        vs.push_back(compose(c));
        walk(us, vs);
        vs.pop_back();
      }
      return;
    }
    std::vector<std::int64_t> c(kc, 0);
    if (mode == WalkMode::kRandom) {
      for (auto& e : c) e = static_cast<std::int64_t>(rng->next_below(static_cast<std::uint64_t>(d)));
    }
    vs.push_back(compose(c));
    walk(us, vs);
    vs.pop_back();
  }
};

}  // namespace

IMat complete_canonical_set(const std::vector<IVec>& us, const std::vector<IVec>& vs, int n,
                            std::int64_t modulus, SplitMix64* rng) {
  if (n < 1) throw std::invalid_argument("pair count must be positive");
  if (modulus < 2) throw std::invalid_argument("group construction requires a modulus of at least 2");
  IMat om = omega(n, modulus);
  std::vector<IVec> u2, v2;
  for (const IVec& w : us) u2.push_back(modlinalg::mod_reduce(w, modulus));
  for (const IVec& w : vs) v2.push_back(modlinalg::mod_reduce(w, modulus));
  validate_canonical(u2, v2, n, modulus, om);
  if (v2.size() > u2.size()) {
    // Exchange the roles: (u, v) -> (v, -u) preserves the canonical
    // relations, so complete the exchanged set and map the result back.
    std::vector<IVec> nv;
    for (const IVec& w : u2) nv.push_back(modlinalg::mod_reduce(-w, modulus));
    IMat mp = complete_canonical_set(v2, nv, n, modulus, rng);
    IMat m(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
      m.col(k) = modlinalg::mod_reduce(IVec(-mp.col(n + k)), modulus);
      m.col(n + k) = mp.col(k);
    }
    if (!is_symplectic(m, n, modulus)) {
      throw numerical_error("canonical completion failed the group membership check");
    }
    return m;
  }
  Walker walker;
  walker.n = n;
  walker.d = modulus;
  walker.om = om;
  walker.mode = rng ? WalkMode::kRandom : WalkMode::kFirst;
  walker.rng = rng;
  walker.walk(u2, v2);
  if (!walker.done) {
    throw numerical_error("canonical completion produced no result");
  }
  IMat m = walker.single;
  if (!is_symplectic(m, n, modulus)) {
    throw numerical_error("canonical completion failed the group membership check");
  }
  for (std::size_t i = 0; i < us.size(); ++i) {
    if (IVec(m.col(static_cast<Eigen::Index>(i))) != modlinalg::mod_reduce(us[i], modulus)) {
      throw numerical_error("canonical completion moved a pinned u vector");
    }
  }
  for (std::size_t j = 0; j < vs.size(); ++j) {
    if (IVec(m.col(static_cast<Eigen::Index>(n + j))) != modlinalg::mod_reduce(vs[j], modulus)) {
      throw numerical_error("canonical completion moved a pinned v vector");
    }
  }
  return m;
}

std::vector<IMat> enumerate(std::int64_t modulus, int n, std::uint64_t cap) {
  if (n < 1) throw std::invalid_argument("pair count must be positive");
  if (modulus < 2) throw std::invalid_argument("group construction requires a modulus of at least 2");
  std::uint64_t order;
  try {
    order = group_order(modulus, n);
  } catch (const std::overflow_error&) {
    throw resource_limit_error("group enumeration exceeds the configured cap");
  }
  if (order > cap) {
    throw resource_limit_error("group enumeration exceeds the configured cap");
  }
  std::vector<IMat> out;
  out.reserve(order);
  Walker walker;
  walker.n = n;
  walker.d = modulus;
  walker.om = omega(n, modulus);
  walker.mode = WalkMode::kAll;
  walker.cap = cap;
  walker.all_out = &out;
  std::vector<IVec> us, vs;
  walker.walk(us, vs);
  if (out.size() != order) {
    throw numerical_error("group enumeration count disagrees with the order formula");
  }
  return out;
}

IMat random_element(std::int64_t modulus, int n, SplitMix64& rng) {
  return complete_canonical_set({}, {}, n, modulus, &rng);
}

bool same_orbit(const IVec& x, const IVec& y, std::int64_t modulus) {
  if (x.size() != y.size() || x.size() == 0 || x.size() % 2 != 0) {
    throw std::invalid_argument("orbit test requires equal even-length vectors");
  }
  return ring::gcd_d(x, modulus) == ring::gcd_d(y, modulus);
}

IMat word_to_matrix(const std::vector<Generator>& word, int n, std::int64_t modulus) {
  IMat acc = modlinalg::mod_reduce(IMat::Identity(2 * n, 2 * n), modulus);
  for (const Generator& g : word) {
    acc = modlinalg::mod_reduce(acc * generator_matrix(g, n, modulus), modulus);
  }
  return acc;
}

std::vector<Generator> decompose_to_generators(const IMat& m, int n, std::int64_t modulus) {
  if (!is_symplectic(m, n, modulus)) {
    throw std::invalid_argument("decomposition requires a symplectic matrix");
  }
  const std::int64_t d = modulus;
  if (d == 1) return {};
  IMat x = modlinalg::mod_reduce(m, d);
  std::vector<Generator> applied;

  auto remod_row = [&](Eigen::Index i) {
    for (Eigen::Index j = 0; j < 2 * n; ++j) x(i, j) = ring::mod_reduce(x(i, j), d);
  };
  auto apply = [&](const Generator& g) {
    switch (g.kind) {
      case GeneratorKind::kShear:
        x.row(n + g.a) += x.row(g.a);
        remod_row(n + g.a);
        break;
      case GeneratorKind::kRotate: {
        IVec tmp = x.row(g.a).transpose();
        x.row(g.a) = x.row(n + g.a);
        x.row(n + g.a) = -tmp.transpose();
        remod_row(n + g.a);
        break;
      }
      case GeneratorKind::kPairSum:
        x.row(g.a) += x.row(g.b);
        remod_row(g.a);
        x.row(n + g.b) -= x.row(n + g.a);
        remod_row(n + g.b);
        break;
      case GeneratorKind::kPairSwap:
        x.row(g.a).swap(x.row(g.b));
        x.row(n + g.a).swap(x.row(n + g.b));
        break;
    }
    applied.push_back(g);
  };
  auto shear_times = [&](int i, std::int64_t k) {
    k = ring::mod_reduce(k, d);
    for (std::int64_t t = 0; t < k; ++t) apply({GeneratorKind::kShear, i, 0});
  };
  auto rotate1 = [&](int i) { apply({GeneratorKind::kRotate, i, 0}); };
  auto pairsum_times = [&](int i, int j, std::int64_t k) {
    k = ring::mod_reduce(k, d);
    for (std::int64_t t = 0; t < k; ++t) apply({GeneratorKind::kPairSum, i, j});
  };
  // row_i += t * row_{n+i}
  auto shear_up = [&](int i, std::int64_t t) {
    t = ring::mod_reduce(t, d);
    if (t == 0) return;
    rotate1(i);
    shear_times(i, d - t);
    rotate1(i);
    rotate1(i);
    rotate1(i);
  };
  // row_j += t * row_{n+i} and row_i += t * row_{n+j}
  auto cross_up = [&](int i, int j, std::int64_t t) {
    t = ring::mod_reduce(t, d);
    if (t == 0) return;
    rotate1(i);
    pairsum_times(j, i, t);
    rotate1(i);
    rotate1(i);
    rotate1(i);
  };

  // Sweep each column to a single nonzero pivot on the diagonal of the
  // upper-left block, using the in-pair Euclid (shear + rotate) against the
  // bottom half and the cross-pair Euclid (coupling) within the top half.
  for (int c = 0; c < n; ++c) {
    for (int i = c; i < n; ++i) {
      while (true) {
        std::int64_t top = x(i, c), bot = x(n + i, c);
        if (bot == 0) break;
        if (top == 0) {
          rotate1(i);
          continue;
        }
        while (x(n + i, c) >= top) apply({GeneratorKind::kShear, i, 0});
        if (x(n + i, c) != 0) rotate1(i);
      }
    }
    for (int i = c + 1; i < n; ++i) {
      while (true) {
        std::int64_t a = x(c, c), b = x(i, c);
        if (b == 0) break;
        if (a == 0) {
          pairsum_times(c, i, 1);
          continue;
        }
        if (b >= a) {
          pairsum_times(i, c, d - b / a);
        } else {
          pairsum_times(c, i, d - a / b);
        }
      }
    }
    if (x(c, c) == 0 || !ring::inverse(x(c, c), d)) {
      throw numerical_error("column sweep failed to produce a unit pivot");
    }
  }
  for (int c = 0; c < n; ++c) {
    for (int i = 0; i < n; ++i) {
      if (i > c && x(i, c) != 0) {
        throw numerical_error("column sweep left the upper block non-triangular");
      }
      if (x(n + i, c) != 0) {
        throw numerical_error("column sweep left the lower block nonzero");
      }
    }
  }

  // Clear the above-diagonal entries of the upper-left block.
  for (int c = 1; c < n; ++c) {
    for (int i = 0; i < c; ++i) {
      if (x(i, c) == 0) continue;
      std::int64_t q = ring::mod_reduce(-x(i, c) * *ring::inverse(x(c, c), d), d);
      pairsum_times(i, c, q);
    }
  }

  // Clear the upper-right block. Both blocks on the diagonal are now
  // diagonal matrices, inverse transposes of each other, which makes each
  // update below target exactly one entry (plus its forced mirror).
  for (int i = 0; i < n; ++i) {
    std::int64_t tau = x(i, n + i);
    if (tau != 0) shear_up(i, -tau * x(i, i));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      std::int64_t tau = x(i, n + j);
      if (tau != 0) cross_up(i, j, -tau * x(j, j));
      if (x(i, n + j) != 0 || x(j, n + i) != 0) {
        throw numerical_error("paired off-diagonal clearing failed");
      }
    }
  }

  // Normalize each pair block diag(delta, delta^-1) to the identity.
  for (int i = 0; i < n; ++i) {
    std::int64_t delta = x(i, i);
    if (delta == 1) continue;
    auto delta_inv = ring::inverse(delta, d);
    if (!delta_inv) throw numerical_error("diagonal entry is not a unit");
    shear_up(i, -delta);
    shear_times(i, *delta_inv);
    shear_up(i, -delta);
    rotate1(i);
  }
  if (x != IMat::Identity(2 * n, 2 * n)) {
    throw numerical_error("generator reduction did not reach the identity");
  }

  // applied, in order, left-multiplies m to the identity, so m is the
  // product of the inverses in the same order; inverses expand to positive
  // powers of the same generator.
  std::vector<Generator> word;
  for (const Generator& g : applied) {
    switch (g.kind) {
      case GeneratorKind::kShear:
      case GeneratorKind::kPairSum:
        for (std::int64_t t = 0; t < d - 1; ++t) word.push_back(g);
        break;
      case GeneratorKind::kRotate:
        word.push_back(g);
        word.push_back(g);
        word.push_back(g);
        break;
      case GeneratorKind::kPairSwap:
        word.push_back(g);
        break;
    }
  }
  if (word_to_matrix(word, n, modulus) != modlinalg::mod_reduce(m, modulus)) {
    throw numerical_error("generator word failed to reproduce the matrix");
  }
  return word;
}

}  // namespace qudistill::symplectic
