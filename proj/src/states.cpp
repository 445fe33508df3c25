#include "qudistill/states.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qudistill/modlinalg.hpp"
#include "qudistill/ring.hpp"
#include "qudistill/symplectic.hpp"

namespace qudistill::states {

namespace {

constexpr double kNegativeTol = 1e-15;
constexpr double kMassTol = 1e-12;
constexpr double kImagTol = 1e-12;

void require_dims(std::int64_t d, int n) {
  if (d < 2) throw std::invalid_argument("local dimension must be at least 2");
  if (n < 1) throw std::invalid_argument("pair count must be positive");
}

void require_state(const BellDiagonalState& s) {
  require_dims(s.d, s.n);
  if (s.p.size() != state_size(s.d, s.n)) {
    throw std::invalid_argument("probability vector has the wrong length");
  }
}

std::int64_t pow_i64(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Character kernel w(k, t) = exp(2 pi i k t / d).
Eigen::MatrixXcd kernel(std::int64_t d, bool inverse) {
  Eigen::MatrixXcd w(d, d);
  const double sign = inverse ? -1.0 : 1.0;
  for (std::int64_t k = 0; k < d; ++k) {
    for (std::int64_t t = 0; t < d; ++t) {
      double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((k * t) % d) /
                     static_cast<double>(d);
      w(k, t) = std::complex<double>(std::cos(angle), std::sin(angle));
    }
  }
  return w;
}

Eigen::ArrayXcd axiswise_transform(const Eigen::ArrayXcd& in, std::int64_t d, int axes,
                                   const Eigen::MatrixXcd& w) {
  const std::int64_t total = in.size();
  Eigen::ArrayXcd cur = in;
  Eigen::ArrayXcd next(total);
  std::int64_t stride = total / d;
  for (int axis = 0; axis < axes; ++axis) {
    const std::int64_t block = stride * d;
    for (std::int64_t base = 0; base < total; base += block) {
      for (std::int64_t off = 0; off < stride; ++off) {
        for (std::int64_t k = 0; k < d; ++k) {
          std::complex<double> sum = 0;
          for (std::int64_t t = 0; t < d; ++t) {
            sum += w(k, t) * cur(base + t * stride + off);
          }
          next(base + k * stride + off) = sum;
        }
      }
    }
    cur.swap(next);
    stride /= d;
  }
  return cur;
}

}  // namespace

std::int64_t pack_index(const IVec& x, std::int64_t d) {
  if (d < 2) throw std::invalid_argument("local dimension must be at least 2");
  std::int64_t idx = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    idx = idx * d + ring::mod_reduce(x(i), d);
  }
  return idx;
}

IVec unpack_index(std::int64_t index, int length, std::int64_t d) {
  if (d < 2) throw std::invalid_argument("local dimension must be at least 2");
  if (length < 0) throw std::invalid_argument("length must be nonnegative");
  if (index < 0) throw std::invalid_argument("index out of range for the given shape");
  IVec x(length);
  for (int i = length - 1; i >= 0; --i) {
    x(i) = index % d;
    index /= d;
  }
  if (index != 0) throw std::invalid_argument("index out of range for the given shape");
  return x;
}

std::int64_t state_size(std::int64_t d, int n) {
  require_dims(d, n);
  unsigned __int128 total = 1;
  for (int i = 0; i < 2 * n; ++i) {
    total *= static_cast<unsigned __int128>(d);
    if (total > static_cast<unsigned __int128>(kDefaultSpanCap)) {
      throw resource_limit_error("state size exceeds the configured cap");
    }
  }
  return static_cast<std::int64_t>(total);
}

void normalize(BellDiagonalState& s) {
  require_state(s);
  double sum = 0;
  for (Eigen::Index i = 0; i < s.p.size(); ++i) {
    if (s.p(i) < -kNegativeTol) {
      throw numerical_error("probability entry is significantly negative");
    }
    if (s.p(i) < 0) s.p(i) = 0;
    sum += s.p(i);
  }
  if (std::abs(sum - 1.0) > kMassTol) {
    throw numerical_error("probability mass deviates from one");
  }
  s.p /= sum;
}

double fidelity(const BellDiagonalState& s) {
  require_state(s);
  return s.p(0);
}

BellDiagonalState isotropic(std::int64_t d, double f) {
  require_dims(d, 1);
  if (!(f >= 0.0 && f <= 1.0)) {
    throw std::invalid_argument("fidelity must lie in [0, 1]");
  }
  BellDiagonalState s;
  s.d = d;
  s.n = 1;
  s.p = Eigen::ArrayXd::Constant(d * d, (1.0 - f) / static_cast<double>(d * d - 1));
  s.p(0) = f;
  return s;
}

BellDiagonalState isotropic_pairs(std::int64_t d, int n, double f) {
  BellDiagonalState s = isotropic(d, f);
  BellDiagonalState out = s;
  for (int i = 1; i < n; ++i) out = tensor(out, s);
  return out;
}

FourierVector fourier(const BellDiagonalState& s) {
  require_state(s);
  Eigen::ArrayXcd in(s.p.size());
  for (Eigen::Index i = 0; i < s.p.size(); ++i) in(i) = s.p(i);
  Eigen::ArrayXcd out = axiswise_transform(in, s.d, 2 * s.n, kernel(s.d, false));
  FourierVector f;
  f.d = s.d;
  f.n = s.n;
  f.values.resize(out.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (std::abs(out(i).imag()) > kImagTol) {
      throw numerical_error("character transform of this state is not real");
    }
    f.values(i) = out(i).real();
  }
  if (std::abs(f.values(0) - 1.0) > kMassTol) {
    throw numerical_error("character transform lost the total mass");
  }
  return f;
}

BellDiagonalState inverse_fourier(const FourierVector& f) {
  require_dims(f.d, f.n);
  if (f.values.size() != state_size(f.d, f.n)) {
    throw std::invalid_argument("transform vector has the wrong length");
  }
  Eigen::ArrayXcd in(f.values.size());
  for (Eigen::Index i = 0; i < f.values.size(); ++i) in(i) = f.values(i);
  Eigen::ArrayXcd out = axiswise_transform(in, f.d, 2 * f.n, kernel(f.d, true));
  BellDiagonalState s;
  s.d = f.d;
  s.n = f.n;
  s.p.resize(out.size());
  const double scale = static_cast<double>(out.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (std::abs(out(i).imag()) > kImagTol * scale) {
      throw numerical_error("inverse transform produced complex probabilities");
    }
    s.p(i) = out(i).real() / scale;
  }
  normalize(s);
  return s;
}

BellDiagonalState apply_permutation(const BellDiagonalState& s, const IMat& m) {
  require_state(s);
  if (!symplectic::is_symplectic(m, s.n, s.d)) {
    throw std::invalid_argument("relabeling matrix must preserve the alternating form");
  }
  BellDiagonalState out;
  out.d = s.d;
  out.n = s.n;
  out.p = Eigen::ArrayXd::Zero(s.p.size());
  for (std::int64_t x = 0; x < s.p.size(); ++x) {
    IVec v = unpack_index(x, 2 * s.n, s.d);
    std::int64_t y = pack_index(modlinalg::mod_reduce(IVec(m * v), s.d), s.d);
    out.p(y) = s.p(x);
  }
  return out;
}

BellDiagonalState heterotropic_invariant(std::int64_t divisor, std::int64_t d, int n) {
  require_dims(d, n);
  if (divisor < 1 || d % divisor != 0) {
    throw std::invalid_argument("class label must divide the local dimension");
  }
  const std::int64_t size = state_size(d, n);
  const auto count = ring::partition_size(divisor, d, 2 * n);
  BellDiagonalState s;
  s.d = d;
  s.n = n;
  s.p = Eigen::ArrayXd::Zero(size);
  std::uint64_t hit = 0;
  for (std::int64_t x = 0; x < size; ++x) {
    if (ring::gcd_d(unpack_index(x, 2 * n, d), d) == divisor) {
      s.p(x) = 1.0 / static_cast<double>(count);
      ++hit;
    }
  }
  if (hit != count) {
    throw numerical_error("gcd class size disagrees with the counting formula");
  }
  return s;
}

BellDiagonalState twirl_symplectic(const BellDiagonalState& s) {
  require_state(s);
  const std::int64_t size = s.p.size();
  std::vector<std::int64_t> cls(size);
  std::vector<double> mass;
  std::vector<std::int64_t> count;
  auto divs = ring::divisors(s.d);
  mass.assign(divs.size(), 0.0);
  count.assign(divs.size(), 0);
  std::vector<std::int64_t> div_pos(s.d + 1, -1);
  for (std::size_t i = 0; i < divs.size(); ++i) div_pos[divs[i]] = static_cast<std::int64_t>(i);
  for (std::int64_t x = 0; x < size; ++x) {
    std::int64_t g = ring::gcd_d(unpack_index(x, 2 * s.n, s.d), s.d);
    cls[x] = div_pos[g];
    mass[cls[x]] += s.p(x);
    count[cls[x]] += 1;
  }
  BellDiagonalState out;
  out.d = s.d;
  out.n = s.n;
  out.p.resize(size);
  for (std::int64_t x = 0; x < size; ++x) {
    out.p(x) = mass[cls[x]] / static_cast<double>(count[cls[x]]);
  }
  return out;
}

BellDiagonalState fixed_state(std::int64_t divisor, std::int64_t d) {
  require_dims(d, 1);
  if (divisor < 1 || d % divisor != 0) {
    throw std::invalid_argument("class label must divide the local dimension");
  }
  BellDiagonalState s;
  s.d = d;
  s.n = 1;
  s.p = Eigen::ArrayXd::Zero(d * d);
  std::int64_t hit = 0;
  for (std::int64_t i = 0; i < d; ++i) {
    for (std::int64_t j = 0; j < d; ++j) {
      if ((divisor * i) % d == 0 && (divisor * j) % d == 0) {
        s.p(i * d + j) = 1.0 / static_cast<double>(divisor * divisor);
        ++hit;
      }
    }
  }
  if (hit != divisor * divisor) {
    throw numerical_error("solution count disagrees with the square formula");
  }
  return s;
}

BellDiagonalState tensor(const BellDiagonalState& a, const BellDiagonalState& b) {
  require_state(a);
  require_state(b);
  if (a.d != b.d) throw std::invalid_argument("tensor requires matching local dimensions");
  const std::int64_t d = a.d;
  BellDiagonalState out;
  out.d = d;
  out.n = a.n + b.n;
  out.p.resize(state_size(d, out.n));
  const std::int64_t pa = pow_i64(d, a.n);
  const std::int64_t pb = pow_i64(d, b.n);
  const std::int64_t pn = pow_i64(d, out.n);
  for (std::int64_t xa = 0; xa < a.p.size(); ++xa) {
    const std::int64_t ia = xa / pa, ja = xa % pa;
    for (std::int64_t xb = 0; xb < b.p.size(); ++xb) {
      const std::int64_t ib = xb / pb, jb = xb % pb;
      out.p((ia * pb + ib) * pn + (ja * pb + jb)) = a.p(xa) * b.p(xb);
    }
  }
  return out;
}

BellDiagonalState marginal(const BellDiagonalState& s, const std::vector<int>& kept_pairs) {
  require_state(s);
  if (kept_pairs.empty()) throw std::invalid_argument("marginal must keep at least one pair");
  for (std::size_t i = 0; i < kept_pairs.size(); ++i) {
    if (kept_pairs[i] < 0 || kept_pairs[i] >= s.n ||
        (i > 0 && kept_pairs[i] <= kept_pairs[i - 1])) {
      throw std::invalid_argument("kept pairs must be strictly increasing and in range");
    }
  }
  const int m = static_cast<int>(kept_pairs.size());
  BellDiagonalState out;
  out.d = s.d;
  out.n = m;
  out.p = Eigen::ArrayXd::Zero(state_size(s.d, m));
  for (std::int64_t x = 0; x < s.p.size(); ++x) {
    IVec v = unpack_index(x, 2 * s.n, s.d);
    IVec w(2 * m);
    for (int r = 0; r < m; ++r) {
      w(r) = v(kept_pairs[r]);
      w(m + r) = v(s.n + kept_pairs[r]);
    }
    out.p(pack_index(w, s.d)) += s.p(x);
  }
  return out;
}

namespace {

// S(delta, t) = sum_i w^(delta * i) p[i, t]; the building block of both the
// dense matrix and its partial transpose.
Eigen::MatrixXcd character_sums(const BellDiagonalState& s) {
  const std::int64_t d = s.d;
  Eigen::MatrixXcd w = kernel(d, false);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (std::int64_t delta = 0; delta < d; ++delta) {
    for (std::int64_t t = 0; t < d; ++t) {
      std::complex<double> sum = 0;
      for (std::int64_t i = 0; i < d; ++i) {
        sum += w(delta, i) * s.p(i * d + t);
      }
      out(delta, t) = sum;
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXcd to_density_matrix(const BellDiagonalState& s) {
  require_state(s);
  if (s.n != 1) throw std::invalid_argument("dense form is only provided for one pair");
  if (s.d > 64) throw resource_limit_error("dense form is capped at local dimension 64");
  const std::int64_t d = s.d;
  Eigen::MatrixXcd sums = character_sums(s);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d * d, d * d);
  for (std::int64_t k = 0; k < d; ++k) {
    for (std::int64_t a = 0; a < d; ++a) {
      for (std::int64_t l = 0; l < d; ++l) {
        const std::int64_t b = ring::mod_reduce(l - k + a, d);
        rho(k * d + a, l * d + b) =
            sums(ring::mod_reduce(k - l, d), ring::mod_reduce(k - a, d)) /
            static_cast<double>(d);
      }
    }
  }
  return rho;
}

bool is_nppt(const BellDiagonalState& s, double tol) {
  require_state(s);
  if (s.n != 1) throw std::invalid_argument("the negativity test is only provided for one pair");
  const std::int64_t d = s.d;
  Eigen::MatrixXcd sums = character_sums(s);
  for (std::int64_t sigma = 0; sigma < d; ++sigma) {
    Eigen::MatrixXcd block(d, d);
    for (std::int64_t k = 0; k < d; ++k) {
      block(k, k) = sums(0, ring::mod_reduce(2 * k - sigma, d)) / static_cast<double>(d);
      for (std::int64_t l = k + 1; l < d; ++l) {
        block(k, l) = sums(ring::mod_reduce(k - l, d), ring::mod_reduce(k + l - sigma, d)) /
                      static_cast<double>(d);
        block(l, k) = std::conj(block(k, l));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(block, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
      throw numerical_error("eigenvalue solve failed on a transpose block");
    }
    if (solver.eigenvalues().minCoeff() < -tol) return true;
  }
  return false;
}

std::string to_json(const BellDiagonalState& s) {
  require_state(s);
  nlohmann::json j;
  j["D"] = s.d;
  j["n"] = s.n;
  j["p"] = std::vector<double>(s.p.data(), s.p.data() + s.p.size());
  return j.dump();
}

BellDiagonalState from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed state document: ") + e.what());
  }
  BellDiagonalState s;
  try {
    s.d = j.at("D").get<std::int64_t>();
    s.n = j.at("n").get<int>();
    auto vals = j.at("p").get<std::vector<double>>();
    s.p = Eigen::Map<Eigen::ArrayXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed state document: ") + e.what());
  }
  normalize(s);
  return s;
}

void save_state(const BellDiagonalState& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open state file for writing: " + path);
  out << to_json(s) << "\n";
  if (!out) throw std::invalid_argument("failed to write state file: " + path);
}

BellDiagonalState load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open state file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace qudistill::states
