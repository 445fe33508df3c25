#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "qudistill/modlinalg.hpp"
#include "qudistill/ring.hpp"
#include "qudistill/rng.hpp"

using namespace qudistill;

namespace {

IMat random_matrix(SplitMix64& rng, int rows, int cols, std::int64_t modulus) {
  IMat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      m(i, j) = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(modulus)));
    }
  }
  return m;
}

std::int64_t det_small(const IMat& m) {
  switch (m.rows()) {
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default:
      REQUIRE(false);
      return 0;
  }
}

// Largest r for which the r x r minors are jointly coprime to the modulus.
int minor_rank(const IMat& m, std::int64_t modulus) {
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  int best = 0;
  for (int r = 1; r <= std::min(rows, cols); ++r) {
    std::vector<int> ri(r), ci(r);
    std::vector<bool> rmask(rows, false), cmask(cols, false);
    std::fill(rmask.begin(), rmask.begin() + r, true);
    std::int64_t g = modulus;
    do {
      int a = 0;
      for (int i = 0; i < rows; ++i) {
        if (rmask[i]) ri[a++] = i;
      }
      std::fill(cmask.begin(), cmask.end(), false);
      std::fill(cmask.begin(), cmask.begin() + r, true);
      do {
        int b = 0;
        for (int j = 0; j < cols; ++j) {
          if (cmask[j]) ci[b++] = j;
        }
        IMat sub(r, r);
        for (int i = 0; i < r; ++i) {
          for (int j = 0; j < r; ++j) sub(i, j) = m(ri[i], ci[j]);
        }
        g = std::gcd(g, ring::mod_reduce(det_small(sub), modulus));
      } while (std::prev_permutation(cmask.begin(), cmask.end()));
    } while (std::prev_permutation(rmask.begin(), rmask.end()));
    if (g == 1) best = r;
  }
  return best;
}

std::vector<std::int64_t> as_key(const IVec& v) {
  return std::vector<std::int64_t>(v.data(), v.data() + v.size());
}

}  // namespace

TEST_CASE("pair_reduce reaches (0, g) with a replayable transcript") {
  using modlinalg::PairOp;

  auto r = modlinalg::pair_reduce(2, 0, 4);
  CHECK(r.ops == std::vector<PairOp>{PairOp::kAddFirstToSecond, PairOp::kAddSecondToFirst,
                                     PairOp::kAddSecondToFirst, PairOp::kAddSecondToFirst});
  CHECK(r.first == 0);
  CHECK(r.second == 2);

  r = modlinalg::pair_reduce(0, 5, 7);
  CHECK(r.ops.empty());
  CHECK(r.first == 0);
  CHECK(r.second == 5);

  r = modlinalg::pair_reduce(3, 5, 7);
  CHECK(r.first == 0);
  CHECK(r.second == 1);

  SplitMix64 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    std::int64_t d = 1 + static_cast<std::int64_t>(rng.next_below(12));
    std::int64_t x = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(d)));
    std::int64_t y = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(d)));
    auto red = modlinalg::pair_reduce(x, y, d);
    CHECK(red.first == 0);
    // The final pair carries the whole orbit information: gcd is preserved.
    CHECK(std::gcd(std::gcd(x, y), d) == std::gcd(red.second, d));
    // Replay the transcript.
    std::int64_t a = x, b = y;
    for (PairOp op : red.ops) {
      if (op == PairOp::kAddFirstToSecond) {
        b = ring::mod_reduce(a + b, d);
      } else {
        a = ring::mod_reduce(a + b, d);
      }
    }
    CHECK(a == red.first);
    CHECK(b == red.second);
  }
}

TEST_CASE("decompose produces a verified diagonal form") {
  SplitMix64 rng(21);
  const std::int64_t mods[] = {2, 3, 4, 5, 6, 8, 9, 12};
  for (int trial = 0; trial < 400; ++trial) {
    std::int64_t d = mods[rng.next_below(8)];
    int rows = 1 + static_cast<int>(rng.next_below(4));
    int cols = 1 + static_cast<int>(rng.next_below(4));
    IMat m = random_matrix(rng, rows, cols, d);
    auto dec = modlinalg::decompose(m, d);
    CHECK(modlinalg::mod_reduce(dec.a * m * dec.b, d) == dec.c);
    CHECK(modlinalg::mod_reduce(dec.a * dec.a_inv, d) == IMat::Identity(rows, rows));
    CHECK(modlinalg::mod_reduce(dec.a_inv * dec.a, d) == IMat::Identity(rows, rows));
    CHECK(modlinalg::mod_reduce(dec.b * dec.b_inv, d) == IMat::Identity(cols, cols));
    CHECK(modlinalg::mod_reduce(dec.b_inv * dec.b, d) == IMat::Identity(cols, cols));
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        if (i != j) CHECK(dec.c(i, j) == 0);
      }
    }
  }
}

TEST_CASE("rank agrees with the invertible-minor definition") {
  IMat m(2, 2);
  m << 2, 0, 0, 3;
  CHECK(modlinalg::rank(m, 6) == 1);
  m << 2, 0, 0, 2;
  CHECK(modlinalg::rank(m, 4) == 0);
  CHECK(modlinalg::rank(IMat::Identity(3, 3), 6) == 3);
  CHECK(modlinalg::rank(IMat::Zero(2, 3), 5) == 0);

  SplitMix64 rng(31);
  const std::int64_t mods[] = {2, 3, 4, 5, 6, 9};
  for (int trial = 0; trial < 300; ++trial) {
    std::int64_t d = mods[rng.next_below(6)];
    int rows = 1 + static_cast<int>(rng.next_below(3));
    int cols = 1 + static_cast<int>(rng.next_below(3));
    IMat a = random_matrix(rng, rows, cols, d);
    CHECK(modlinalg::rank(a, d) == minor_rank(a, d));
  }
}

TEST_CASE("linear independence detects torsion directions") {
  IVec v(2);
  v << 0, 2;
  CHECK(!modlinalg::is_linearly_independent({v}, 4));
  v << 2, 3;
  CHECK(modlinalg::is_linearly_independent({v}, 6));
  IVec e0(2), e1(2);
  e0 << 1, 0;
  e1 << 0, 1;
  CHECK(modlinalg::is_linearly_independent({e0, e1}, 4));
  CHECK(modlinalg::is_linearly_independent({}, 4));
  IVec w(2);
  w << 1, 1;
  CHECK(!modlinalg::is_linearly_independent({e0, e1, w}, 5));
}

TEST_CASE("extend_to_basis completes independent families") {
  SplitMix64 rng(41);
  const std::int64_t mods[] = {2, 3, 4, 5, 6, 8};
  int done = 0;
  while (done < 200) {
    std::int64_t d = mods[rng.next_below(6)];
    int n = 2 + static_cast<int>(rng.next_below(3));
    int k = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n) + 1));
    std::vector<IVec> part;
    for (int i = 0; i < k; ++i) part.push_back(random_matrix(rng, n, 1, d));
    if (!modlinalg::is_linearly_independent(part, d)) continue;
    ++done;
    auto comp = modlinalg::extend_to_basis(part, n, d);
    CHECK(static_cast<int>(comp.size()) == n - k);
    std::vector<IVec> all = part;
    all.insert(all.end(), comp.begin(), comp.end());
    CHECK(modlinalg::is_linearly_independent(all, d));
  }

  auto full = modlinalg::extend_to_basis({}, 3, 4);
  REQUIRE(full.size() == 3);
  CHECK(modlinalg::is_linearly_independent(full, 4));

  IVec bad(2);
  bad << 0, 2;
  CHECK_THROWS_AS(modlinalg::extend_to_basis({bad}, 2, 4), std::invalid_argument);
}

TEST_CASE("subspace construction validates its basis") {
  IVec bad(2);
  bad << 0, 2;
  CHECK_THROWS_AS(modlinalg::Subspace({bad}, 2, 4), std::invalid_argument);
  IVec good(2);
  good << 1, 2;
  CHECK_NOTHROW(modlinalg::Subspace({good}, 2, 4));
  CHECK_THROWS_AS(modlinalg::Subspace({good}, 3, 4), std::invalid_argument);
}

TEST_CASE("orthogonal complement annihilates and tiles") {
  SplitMix64 rng(51);
  const std::int64_t mods[] = {2, 3, 4, 5, 6};
  int done = 0;
  while (done < 150) {
    std::int64_t d = mods[rng.next_below(5)];
    int n = 2 + static_cast<int>(rng.next_below(3));
    int k = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    std::vector<IVec> part;
    for (int i = 0; i < k; ++i) part.push_back(random_matrix(rng, n, 1, d));
    if (!modlinalg::is_linearly_independent(part, d)) continue;
    ++done;
    modlinalg::Subspace v(part, n, d);
    auto comp = modlinalg::orthogonal_complement(v);
    CHECK(comp.dim() == n - k);
    for (const IVec& a : v.basis()) {
      for (const IVec& b : comp.basis()) {
        CHECK(ring::mod_reduce(a.dot(b), d) == 0);
      }
    }
    // Double complement restores the original span.
    auto back = modlinalg::orthogonal_complement(comp);
    std::set<std::vector<std::int64_t>> sv, sb;
    for (const IVec& x : modlinalg::enumerate_span(v)) sv.insert(as_key(x));
    for (const IVec& x : modlinalg::enumerate_span(back)) sb.insert(as_key(x));
    CHECK(sv == sb);
  }
}

TEST_CASE("span enumeration is exhaustive, deduplicated, and capped") {
  IVec e0(3), e1(3);
  e0 << 1, 0, 2;
  e1 << 0, 1, 1;
  auto span = modlinalg::enumerate_span({e0, e1}, 3, 4);
  CHECK(span.size() == 16);
  std::set<std::vector<std::int64_t>> distinct;
  for (const IVec& v : span) distinct.insert(as_key(v));
  CHECK(distinct.size() == span.size());
  CHECK(std::is_sorted(span.begin(), span.end(), [](const IVec& a, const IVec& b) {
    return as_key(a) < as_key(b);
  }));

  // Dependent generators collapse to the same span.
  IVec twice = modlinalg::mod_reduce(2 * e0, 4);
  auto bigger = modlinalg::enumerate_span({e0, e1, twice}, 3, 4);
  CHECK(bigger.size() == 16);

  auto empty_span = modlinalg::enumerate_span({}, 3, 5);
  REQUIRE(empty_span.size() == 1);
  CHECK(empty_span[0] == IVec::Zero(3));

  std::vector<IVec> many(30, e0);
  CHECK_THROWS_AS(modlinalg::enumerate_span(many, 3, 4), resource_limit_error);
}

TEST_CASE("coordinates_in_rowspan inverts row combinations") {
  SplitMix64 rng(61);
  const std::int64_t mods[] = {2, 3, 4, 5, 6, 9};
  int done = 0;
  while (done < 200) {
    std::int64_t d = mods[rng.next_below(6)];
    int n = 2 + static_cast<int>(rng.next_below(3));
    int k = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    IMat w = random_matrix(rng, k, n, d);
    if (modlinalg::rank(w, d) != k) continue;
    ++done;
    IMat coef = random_matrix(rng, 2, k, d);
    IMat t = modlinalg::mod_reduce(coef * w, d);
    IMat rec = modlinalg::coordinates_in_rowspan(t, w, d);
    CHECK(modlinalg::mod_reduce(rec * w, d) == t);
  }

  IMat w(1, 2);
  w << 1, 0;
  IMat t(1, 2);
  t << 0, 1;
  CHECK_THROWS_AS(modlinalg::coordinates_in_rowspan(t, w, 5), std::invalid_argument);
}
