#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>
#include <map>
#include <set>
#include <vector>

#include "qudistill/modlinalg.hpp"
#include "qudistill/ring.hpp"
#include "qudistill/rng.hpp"
#include "qudistill/symplectic.hpp"

using namespace qudistill;

namespace {

std::vector<std::int64_t> serialize(const IMat& m) {
  return std::vector<std::int64_t>(m.data(), m.data() + m.size());
}

IVec make_vec(std::initializer_list<std::int64_t> vals) {
  IVec v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (std::int64_t e : vals) v(i++) = e;
  return v;
}

}  // namespace

TEST_CASE("omega squares to minus one and annihilates every vector") {
  for (std::int64_t d : {2, 3, 5, 6}) {
    for (int n : {1, 2, 3}) {
      IMat om = symplectic::omega(n, d);
      IMat m1 = modlinalg::mod_reduce(IMat(-IMat::Identity(2 * n, 2 * n)), d);
      CHECK(modlinalg::mod_reduce(IMat(om * om), d) == m1);
      SplitMix64 rng(5);
      for (int t = 0; t < 50; ++t) {
        IVec x(2 * n);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
          x(i) = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(d)));
        }
        CHECK(ring::mod_reduce(x.dot(om * x), d) == 0);
      }
    }
  }
}

TEST_CASE("generator matrices belong to the group") {
  for (std::int64_t d : {2, 3, 4, 5, 6}) {
    for (int n : {1, 2, 3}) {
      for (const auto& g : symplectic::generating_set(n)) {
        IMat m = symplectic::generator_matrix(g, n, d);
        CHECK(symplectic::is_symplectic(m, n, d));
        IMat inv = symplectic::inverse(m, n, d);
        CHECK(modlinalg::mod_reduce(IMat(m * inv), d) == IMat::Identity(2 * n, 2 * n));
      }
    }
  }
  CHECK_THROWS_AS(symplectic::generator_matrix({symplectic::GeneratorKind::kPairSum, 0, 0}, 2, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(symplectic::generator_matrix({symplectic::GeneratorKind::kShear, 2, 0}, 2, 3),
                  std::invalid_argument);
}

TEST_CASE("group order table") {
  const std::uint64_t n1[] = {6, 24, 48, 120, 144};
  const std::uint64_t n2[] = {720, 51840, 737280, 9360000, 37324800};
  const std::uint64_t n3[] = {1451520, 9170703360ull, 3044058071040ull, 457002000000000ull,
                              13311459341107200ull};
  for (std::int64_t d = 2; d <= 6; ++d) {
    CHECK(symplectic::group_order(d, 1) == n1[d - 2]);
    CHECK(symplectic::group_order(d, 2) == n2[d - 2]);
    CHECK(symplectic::group_order(d, 3) == n3[d - 2]);
  }
  CHECK_THROWS_AS(symplectic::group_order(10, 3), std::overflow_error);
}

TEST_CASE("enumeration is exhaustive and duplicate free") {
  for (std::int64_t d : {2, 3, 4, 5}) {
    auto all = symplectic::enumerate(d, 1);
    CHECK(all.size() == symplectic::group_order(d, 1));
    std::set<std::vector<std::int64_t>> distinct;
    for (const IMat& m : all) {
      CHECK(symplectic::is_symplectic(m, 1, d));
      distinct.insert(serialize(m));
    }
    CHECK(distinct.size() == all.size());
  }
  auto all22 = symplectic::enumerate(2, 2);
  CHECK(all22.size() == 720);
  std::set<std::vector<std::int64_t>> distinct;
  for (const IMat& m : all22) {
    CHECK(symplectic::is_symplectic(m, 2, 2));
    distinct.insert(serialize(m));
  }
  CHECK(distinct.size() == 720);

  CHECK_THROWS_AS(symplectic::enumerate(3, 2, 1000), resource_limit_error);
  CHECK_THROWS_AS(symplectic::enumerate(6, 4), resource_limit_error);
}

TEST_CASE("the deterministic completion is the first enumerated element") {
  for (std::int64_t d : {2, 3, 5}) {
    auto all = symplectic::enumerate(d, 1);
    IMat first = symplectic::complete_canonical_set({}, {}, 1, d);
    CHECK(first == all.front());
  }
}

TEST_CASE("the generating set generates the whole group") {
  struct Case {
    std::int64_t d;
    int n;
  };
  for (Case c : {Case{2, 1}, Case{3, 1}, Case{5, 1}, Case{2, 2}, Case{3, 2}}) {
    std::vector<IMat> gens;
    for (const auto& g : symplectic::generating_set(c.n)) {
      gens.push_back(symplectic::generator_matrix(g, c.n, c.d));
    }
    std::set<std::vector<std::int64_t>> seen;
    std::deque<IMat> frontier;
    IMat id = IMat::Identity(2 * c.n, 2 * c.n);
    seen.insert(serialize(id));
    frontier.push_back(id);
    while (!frontier.empty()) {
      IMat cur = frontier.front();
      frontier.pop_front();
      for (const IMat& g : gens) {
        IMat next = modlinalg::mod_reduce(IMat(cur * g), c.d);
        if (seen.insert(serialize(next)).second) frontier.push_back(next);
      }
    }
    CHECK(seen.size() == symplectic::group_order(c.d, c.n));
  }
}

TEST_CASE("completion respects pinned vectors and validates its input") {
  SplitMix64 rng(99);
  for (std::int64_t d : {2, 3, 4, 6}) {
    for (int n : {1, 2, 3}) {
      for (int trial = 0; trial < 20; ++trial) {
        IMat m = symplectic::random_element(d, n, rng);
        CHECK(symplectic::is_symplectic(m, n, d));
        // Re-complete from partial column data of a known element.
        int r = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n) + 1));
        int s = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n) + 1));
        std::vector<IVec> us, vs;
        for (int i = 0; i < r; ++i) us.push_back(m.col(i));
        for (int j = 0; j < s; ++j) vs.push_back(m.col(n + j));
        IMat done = symplectic::complete_canonical_set(us, vs, n, d, &rng);
        CHECK(symplectic::is_symplectic(done, n, d));
        for (int i = 0; i < r; ++i) CHECK(IVec(done.col(i)) == IVec(m.col(i)));
        for (int j = 0; j < s; ++j) CHECK(IVec(done.col(n + j)) == IVec(m.col(n + j)));
      }
    }
  }

  // A pair violating the pairing relation is rejected.
  IVec u = make_vec({1, 0}), v = make_vec({0, 2});
  CHECK_THROWS_AS(symplectic::complete_canonical_set({u}, {v}, 1, 4), std::invalid_argument);
  // Dependent u vectors are rejected.
  IVec a = make_vec({1, 0, 0, 0}), b = make_vec({2, 0, 0, 0});
  CHECK_THROWS_AS(symplectic::complete_canonical_set({a, b}, {}, 2, 4), std::invalid_argument);
}

TEST_CASE("completion also works when more v than u vectors are pinned") {
  SplitMix64 rng(7);
  for (std::int64_t d : {2, 3, 5}) {
    for (int trial = 0; trial < 10; ++trial) {
      IMat m = symplectic::random_element(d, 2, rng);
      std::vector<IVec> vs = {m.col(2), m.col(3)};
      IMat done = symplectic::complete_canonical_set({}, vs, 2, d, &rng);
      CHECK(symplectic::is_symplectic(done, 2, d));
      CHECK(IVec(done.col(2)) == IVec(m.col(2)));
      CHECK(IVec(done.col(3)) == IVec(m.col(3)));
    }
  }
}

TEST_CASE("orbits coincide with gcd classes") {
  for (std::int64_t d : {2, 3}) {
    auto all = symplectic::enumerate(d, 1);
    for (std::int64_t xi = 0; xi < d * d; ++xi) {
      IVec x = make_vec({xi / d, xi % d});
      std::set<std::vector<std::int64_t>> reach;
      for (const IMat& m : all) {
        reach.insert(serialize(IMat(modlinalg::mod_reduce(IVec(m * x), d))));
      }
      for (std::int64_t yi = 0; yi < d * d; ++yi) {
        IVec y = make_vec({yi / d, yi % d});
        bool reached = reach.count(serialize(y)) > 0;
        CHECK(symplectic::same_orbit(x, y, d) == reached);
      }
    }
  }
}

TEST_CASE("generator words reproduce every small group element") {
  for (std::int64_t d : {2, 3}) {
    for (const IMat& m : symplectic::enumerate(d, 1)) {
      auto word = symplectic::decompose_to_generators(m, 1, d);
      CHECK(symplectic::word_to_matrix(word, 1, d) == m);
    }
  }
}

TEST_CASE("generator words reproduce random multi-pair elements") {
  SplitMix64 rng(1234);
  for (std::int64_t d : {2, 3, 4, 5, 6}) {
    for (int n : {2, 3}) {
      for (int trial = 0; trial < 25; ++trial) {
        IMat m = symplectic::random_element(d, n, rng);
        auto word = symplectic::decompose_to_generators(m, n, d);
        CHECK(symplectic::word_to_matrix(word, n, d) == m);
      }
    }
  }
  IMat not_sympl = IMat::Identity(4, 4);
  not_sympl(0, 0) = 2;
  CHECK_THROWS_AS(symplectic::decompose_to_generators(not_sympl, 2, 5), std::invalid_argument);
}
