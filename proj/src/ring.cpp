#include "qudistill/ring.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qudistill::ring {

namespace {

void require_modulus(std::int64_t modulus) {
  if (modulus < 1) {
    throw std::invalid_argument("modulus must be a positive integer");
  }
}

}  // namespace

std::int64_t mod_reduce(std::int64_t value, std::int64_t modulus) {
  require_modulus(modulus);
  std::int64_t r = value % modulus;
  return r < 0 ? r + modulus : r;
}

std::vector<std::int64_t> divisors(std::int64_t modulus) {
  require_modulus(modulus);
  std::vector<std::int64_t> small, large;
  for (std::int64_t i = 1; i * i <= modulus; ++i) {
    if (modulus % i == 0) {
      small.push_back(i);
      if (i != modulus / i) large.push_back(modulus / i);
    }
  }
  small.insert(small.end(), large.rbegin(), large.rend());
  return small;
}

std::vector<std::pair<std::int64_t, int>> factorize(std::int64_t value) {
  require_modulus(value);
  std::vector<std::pair<std::int64_t, int>> out;
  for (std::int64_t p = 2; p * p <= value; ++p) {
    if (value % p == 0) {
      int q = 0;
      while (value % p == 0) {
        value /= p;
        ++q;
      }
      out.emplace_back(p, q);
    }
  }
  if (value > 1) out.emplace_back(value, 1);
  return out;
}

std::optional<std::int64_t> inverse(std::int64_t a, std::int64_t modulus) {
  require_modulus(modulus);
  if (modulus == 1) return 0;
  a = mod_reduce(a, modulus);
  // Extended Euclid on (a, modulus).
  std::int64_t r0 = a, r1 = modulus;
  std::int64_t s0 = 1, s1 = 0;
  while (r1 != 0) {
    std::int64_t q = r0 / r1;
    std::int64_t r2 = r0 - q * r1;
    std::int64_t s2 = s0 - q * s1;
    r0 = r1;
    r1 = r2;
    s0 = s1;
    s1 = s2;
  }
  if (r0 != 1) return std::nullopt;
  return mod_reduce(s0, modulus);
}

std::int64_t gcd_d(const IVec& v, std::int64_t modulus) {
  require_modulus(modulus);
  std::int64_t g = modulus;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    g = std::gcd(g, mod_reduce(v(i), modulus));
  }
  return g;
}

std::int64_t gcd_d(const std::vector<std::int64_t>& v, std::int64_t modulus) {
  require_modulus(modulus);
  std::int64_t g = modulus;
  for (std::int64_t e : v) g = std::gcd(g, mod_reduce(e, modulus));
  return g;
}

std::uint64_t totient(int n, std::int64_t modulus) {
  require_modulus(modulus);
  if (n < 1) throw std::invalid_argument("totient requires n >= 1");
  if (modulus == 1) return 1;
  using u128 = unsigned __int128;
  constexpr u128 kMax = std::numeric_limits<std::uint64_t>::max();
  // The per-prime factors multiply monotonically, so the moment any
  // intermediate exceeds 64 bits the final count does too. Keeping every
  // operand at or below 2^64 also keeps the 128-bit products exact.
  u128 acc = 1;
  for (const auto& [p, q] : factorize(modulus)) {
    u128 pn = 1;
    for (int i = 0; i < n; ++i) {
      pn *= static_cast<u128>(p);
      if (pn > kMax + 1) throw std::overflow_error("totient does not fit in 64 bits");
    }
    u128 factor = pn - 1;
    for (int i = 0; i < q - 1; ++i) {
      factor *= pn;
      if (factor > kMax) throw std::overflow_error("totient does not fit in 64 bits");
    }
    acc *= factor;
    if (acc > kMax) throw std::overflow_error("totient does not fit in 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

std::uint64_t partition_size(std::int64_t d, std::int64_t modulus, int n) {
  require_modulus(modulus);
  if (d < 1 || modulus % d != 0) {
    throw std::invalid_argument("partition_size requires d to divide the modulus");
  }
  return totient(n, modulus / d);
}

}  // namespace qudistill::ring
