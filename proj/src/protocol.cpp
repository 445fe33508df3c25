#include "qudistill/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "qudistill/modlinalg.hpp"
#include "qudistill/ring.hpp"
#include "qudistill/symplectic.hpp"

namespace qudistill::protocol {
namespace {

constexpr double kSuccessFloor = 1e-15;
constexpr double kConsistencyTol = 1e-9;

void require_shape(std::int64_t d, int n, int m) {
  if (d < 2) throw std::invalid_argument("protocol steps require a modulus of at least 2");
  if (n < 2 || m < 1 || m >= n) {
    throw std::invalid_argument("protocol steps require 1 <= m < n with n >= 2");
  }
}

// The reduced measured-row basis, with every structural invariant checked:
// correct count and length, independence, pairwise orthogonality under the
// alternating form.
std::vector<IVec> checked_basis(const ProtocolStep& step) {
  require_shape(step.d, step.n, step.m);
  const int k = step.n - step.m;
  if (static_cast<int>(step.vm_basis.size()) != k) {
    throw std::invalid_argument("vm_basis must hold exactly n - m vectors");
  }
  std::vector<IVec> basis;
  basis.reserve(k);
  for (const IVec& v : step.vm_basis) {
    if (v.size() != 2 * step.n) {
      throw std::invalid_argument("vm_basis vectors must have length 2n");
    }
    basis.push_back(modlinalg::mod_reduce(v, step.d));
  }
  if (!modlinalg::is_linearly_independent(basis, step.d)) {
    throw std::invalid_argument("vm_basis must be linearly independent");
  }
  const IMat om = symplectic::omega(step.n, step.d);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const std::int64_t form = (basis[i].transpose() * om * basis[j])(0);
      if (ring::mod_reduce(form, step.d) != 0) {
        throw std::invalid_argument(
            "vm_basis vectors must be pairwise orthogonal under the alternating form");
      }
    }
  }
  return basis;
}

// Deterministic completion with the measured rows placed verbatim: extend the
// basis to a canonical set N (columns u_1..u_n, v_1..v_n), so the columns of
// N*Omega are (-v_1..-v_n, u_1..u_n); a paired column permutation then parks
// each given u_i at column n+m+i, and transposing turns columns into rows.
IMat complete_step_matrix(const std::vector<IVec>& basis, std::int64_t d, int n, int m) {
  const int k = n - m;
  const IMat canonical = symplectic::complete_canonical_set(basis, {}, n, d);
  const IMat om = symplectic::omega(n, d);
  std::vector<int> perm(n, 0);
  for (int j = 0; j < k; ++j) perm[m + j] = j;
  for (int t = 0; t < m; ++t) perm[t] = k + t;
  IMat shuffle = IMat::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    shuffle(perm[j], j) = 1;
    shuffle(n + perm[j], n + j) = 1;
  }
  const IMat mat = modlinalg::mod_reduce((canonical * om * shuffle).transpose(), d);
  if (!symplectic::is_symplectic(mat, n, d)) {
    throw numerical_error("step completion failed to preserve the alternating form");
  }
  for (int i = 0; i < k; ++i) {
    for (int c = 0; c < 2 * n; ++c) {
      if (mat(n + m + i, c) != basis[i](c)) {
        throw numerical_error("step completion misplaced a measured row");
      }
    }
  }
  return mat;
}

std::int64_t pow_i64(std::int64_t base, int exp) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

int zero_pair_blocks(const IVec& x, int n) {
  int zeros = 0;
  for (int r = 0; r < n; ++r) {
    if (x(r) == 0 && x(n + r) == 0) ++zeros;
  }
  return zeros;
}

}  // namespace

ProtocolStep make_step(std::int64_t d, int n, int m, std::vector<IVec> vm_basis) {
  ProtocolStep step{d, n, m, std::move(vm_basis), std::nullopt};
  const std::vector<IVec> basis = checked_basis(step);
  step.vm_basis = basis;
  step.relabeling = complete_step_matrix(basis, d, n, m);
  return step;
}

ProtocolStep make_step_from_matrix(std::int64_t d, int n, int m, const IMat& matrix) {
  require_shape(d, n, m);
  if (matrix.rows() != 2 * n || matrix.cols() != 2 * n) {
    throw std::invalid_argument("relabeling matrices must be 2n x 2n");
  }
  const IMat reduced = modlinalg::mod_reduce(matrix, d);
  if (!symplectic::is_symplectic(reduced, n, d)) {
    throw std::invalid_argument("relabeling matrices must preserve the alternating form");
  }
  ProtocolStep step{d, n, m, {}, reduced};
  for (int i = n + m; i < 2 * n; ++i) {
    step.vm_basis.push_back(reduced.row(i).transpose());
  }
  checked_basis(step);
  return step;
}

ProtocolStep random_step(std::int64_t d, int n, int m, SplitMix64& rng) {
  require_shape(d, n, m);
  return make_step_from_matrix(d, n, m, symplectic::random_element(d, n, rng));
}

IMat step_matrix(const ProtocolStep& step) {
  const std::vector<IVec> basis = checked_basis(step);
  if (!step.relabeling.has_value()) {
    return complete_step_matrix(basis, step.d, step.n, step.m);
  }
  const IMat& mat = *step.relabeling;
  if (mat.rows() != 2 * step.n || mat.cols() != 2 * step.n) {
    throw std::invalid_argument("relabeling matrices must be 2n x 2n");
  }
  const IMat reduced = modlinalg::mod_reduce(mat, step.d);
  if (!symplectic::is_symplectic(reduced, step.n, step.d)) {
    throw std::invalid_argument("relabeling matrices must preserve the alternating form");
  }
  for (int i = 0; i < step.n - step.m; ++i) {
    if (reduced.row(step.n + step.m + i).transpose() != basis[i]) {
      throw std::invalid_argument("the stored relabeling's measured rows must equal vm_basis");
    }
  }
  return reduced;
}

PreparedStep prepare_step(const ProtocolStep& step) {
  const std::vector<IVec> basis = checked_basis(step);
  const std::int64_t d = step.d;
  const int n = step.n;
  const int m = step.m;

  PreparedStep prep;
  prep.d = d;
  prep.n = n;
  prep.m = m;
  prep.matrix = step_matrix(step);

  const IMat om = symplectic::omega(n, d);
  const std::vector<IVec> span = modlinalg::enumerate_span(basis, 2 * n, d);
  prep.vm_size = static_cast<std::int64_t>(span.size());

  std::vector<IVec> form_images;
  form_images.reserve(span.size());
  prep.numerator.reserve(span.size());
  for (const IVec& y : span) {
    form_images.push_back(modlinalg::mod_reduce(om * y, d));
    prep.numerator.push_back(states::pack_index(form_images.back(), d));
  }

  const modlinalg::Subspace measured(basis, 2 * n, d);
  for (const IVec& x : modlinalg::enumerate_span(modlinalg::orthogonal_complement(measured))) {
    prep.survival.push_back(states::pack_index(x, d));
  }

  prep.out_size = states::state_size(d, m);
  const IMat inv = symplectic::inverse(prep.matrix, n, d);
  prep.gather.resize(prep.out_size * prep.vm_size);
  IVec padded(2 * n);
  for (std::int64_t x = 0; x < prep.out_size; ++x) {
    const IVec out_index = states::unpack_index(x, 2 * m, d);
    padded.setZero();
    for (int i = 0; i < m; ++i) {
      padded(i) = out_index(i);
      padded(n + i) = out_index(m + i);
    }
    const IVec shift = modlinalg::mod_reduce(inv * padded, d);
    for (std::int64_t k = 0; k < prep.vm_size; ++k) {
      prep.gather[x * prep.vm_size + k] =
          states::pack_index(form_images[static_cast<std::size_t>(k)] + shift, d);
    }
  }
  return prep;
}

StepResult measure_step(const states::BellDiagonalState& s, const PreparedStep& prep) {
  if (s.d != prep.d || s.n != prep.n) {
    throw std::invalid_argument("state shape does not match the step");
  }
  double success = 0.0;
  for (const std::int64_t idx : prep.survival) success += s.p(idx);
  if (success < kSuccessFloor) {
    throw numerical_error("measurement succeeds with negligible probability");
  }
  states::BellDiagonalState out;
  out.d = prep.d;
  out.n = prep.m;
  out.p = Eigen::ArrayXd::Zero(prep.out_size);
  double mass = 0.0;
  for (std::int64_t x = 0; x < prep.out_size; ++x) {
    const std::int64_t* row = prep.gather.data() + x * prep.vm_size;
    double acc = 0.0;
    for (std::int64_t k = 0; k < prep.vm_size; ++k) acc += s.p(row[k]);
    out.p(x) = acc;
    mass += acc;
  }
  if (std::abs(mass - success) > kConsistencyTol * std::max(1.0, success)) {
    throw numerical_error("surviving mass disagrees with the success probability");
  }
  out.p /= success;
  return {std::move(out), success};
}

StepResult measure_step(const states::BellDiagonalState& s, const ProtocolStep& step) {
  return measure_step(s, prepare_step(step));
}

double joint_fidelity(const states::BellDiagonalState& s, const ProtocolStep& step,
                      FidelityMode mode) {
  const std::vector<IVec> basis = checked_basis(step);
  if (s.d != step.d || s.n != step.n) {
    throw std::invalid_argument("state shape does not match the step");
  }
  const std::int64_t d = step.d;
  const int n = step.n;
  const IMat om = symplectic::omega(n, d);
  const std::vector<IVec> span = modlinalg::enumerate_span(basis, 2 * n, d);
  double numerator = 0.0;
  for (const IVec& y : span) {
    numerator += s.p(states::pack_index(modlinalg::mod_reduce(om * y, d), d));
  }

  if (mode == FidelityMode::kDirect) {
    const modlinalg::Subspace measured(basis, 2 * n, d);
    double success = 0.0;
    for (const IVec& x : modlinalg::enumerate_span(modlinalg::orthogonal_complement(measured))) {
      success += s.p(states::pack_index(x, d));
    }
    if (success < kSuccessFloor) {
      throw numerical_error("measurement succeeds with negligible probability");
    }
    return numerator / success;
  }

  // Transform route: the denominator is the transform summed over the
  // measured span, which equals D^{n-m} times the success probability by the
  // subgroup character-sum identity; its imaginary part cancels exactly.
  std::vector<std::complex<double>> root_pow(d);
  const double base_angle = 2.0 * std::numbers::pi / static_cast<double>(d);
  for (std::int64_t t = 0; t < d; ++t) {
    root_pow[t] = std::polar(1.0, base_angle * static_cast<double>(t));
  }
  std::complex<double> denominator(0.0, 0.0);
  const std::int64_t size = states::state_size(d, n);
  for (std::int64_t packed = 0; packed < size; ++packed) {
    const IVec x = states::unpack_index(packed, 2 * n, d);
    std::complex<double> character(0.0, 0.0);
    for (const IVec& y : span) {
      character += root_pow[ring::mod_reduce(y.dot(x), d)];
    }
    denominator += s.p(packed) * character;
  }
  if (std::abs(denominator.imag()) > kConsistencyTol) {
    throw numerical_error("transform denominator failed to be real");
  }
  const double scale = std::pow(static_cast<double>(d), n - step.m);
  if (denominator.real() / scale < kSuccessFloor) {
    throw numerical_error("measurement succeeds with negligible probability");
  }
  return scale * numerator / denominator.real();
}

double ChiPolynomial::eval(double x) const {
  double acc = 0.0;
  for (auto it = lambda.rbegin(); it != lambda.rend(); ++it) {
    acc = acc * x + static_cast<double>(*it);
  }
  return acc;
}

double ChiPolynomial::derivative(double x) const {
  double acc = 0.0;
  for (int s = static_cast<int>(lambda.size()) - 1; s >= 1; --s) {
    acc = acc * x + static_cast<double>(s) * static_cast<double>(lambda[s]);
  }
  return acc;
}

ChiPolynomial chi_from_vm(const ProtocolStep& step) {
  const std::vector<IVec> basis = checked_basis(step);
  ChiPolynomial chi{step.d, step.n, step.m,
                    std::vector<std::int64_t>(static_cast<std::size_t>(step.n) + 1, 0)};
  for (const IVec& x : modlinalg::enumerate_span(basis, 2 * step.n, step.d)) {
    chi.lambda[step.n - zero_pair_blocks(x, step.n)] += 1;
  }
  return chi;
}

std::optional<ChiPolynomial> chi_from_vm_columns(const ProtocolStep& step) {
  const std::vector<IVec> basis = checked_basis(step);
  const std::int64_t d = step.d;
  const int n = step.n;
  const int k = n - step.m;

  std::vector<IVec> columns(2 * n, IVec(k));
  for (int c = 0; c < 2 * n; ++c) {
    for (int i = 0; i < k; ++i) columns[c](i) = basis[i](c);
  }
  // The shortcut needs every per-pair coefficient span to be free, so that
  // membership in its orthogonal complement is decided by the generators.
  for (int r = 0; r < n; ++r) {
    std::size_t span_size =
        modlinalg::enumerate_span({columns[r], columns[n + r]}, k, d).size();
    while (span_size % d == 0) span_size /= static_cast<std::size_t>(d);
    if (span_size != 1) return std::nullopt;
  }

  ChiPolynomial chi{d, n, step.m, std::vector<std::int64_t>(static_cast<std::size_t>(n) + 1, 0)};
  const std::int64_t total = pow_i64(d, k);
  for (std::int64_t packed = 0; packed < total; ++packed) {
    const IVec v = states::unpack_index(packed, k, d);
    int zeros = 0;
    for (int r = 0; r < n; ++r) {
      if (ring::mod_reduce(v.dot(columns[r]), d) == 0 &&
          ring::mod_reduce(v.dot(columns[n + r]), d) == 0) {
        ++zeros;
      }
    }
    chi.lambda[n - zeros] += 1;
  }
  return chi;
}

RecursionPoint twirl_recursion(double f, const ChiPolynomial& chi) {
  if (!(f > 0.0) || f > 1.0) {
    throw std::invalid_argument("fidelity must lie in (0, 1]");
  }
  const double dd = static_cast<double>(chi.d);
  const double c1 = (1.0 - f) / (f * (dd * dd - 1.0));
  const double c2 = (dd * dd * f - 1.0) / (dd * dd - 1.0);
  const double chi_c2 = chi.eval(c2);
  const double scale = std::pow(dd, chi.n - chi.m);
  if (std::abs(chi_c2) < kSuccessFloor) {
    throw numerical_error("success probability vanishes at this fidelity");
  }
  RecursionPoint point;
  point.fidelity = scale * std::pow(f, chi.n) * chi.eval(c1) / chi_c2;
  point.success = chi_c2 / scale;
  return point;
}

PerformanceReport performance(const ChiPolynomial& chi) {
  if (chi.m != 1) {
    throw std::invalid_argument("performance coefficients are defined for single-kept-pair rounds");
  }
  const double dd = static_cast<double>(chi.d);
  const double x0 = 1.0 / (dd + 1.0);
  const double value = chi.eval(x0);
  PerformanceReport report;
  report.f1 = chi.n - (2.0 * dd / (dd * dd - 1.0)) * chi.derivative(x0) / value;
  report.p0 = std::pow(dd, 1 - chi.n) * value;
  if (report.f1 <= 1.0) {
    throw std::domain_error("the fidelity map does not amplify at the separable point");
  }
  report.eta = std::exp((std::log(report.p0) - std::log(static_cast<double>(chi.n))) /
                        std::log(report.f1));
  return report;
}

std::optional<ProtocolStep> search_vm_for_chi(std::int64_t d, int n,
                                              const std::vector<std::int64_t>& lambda) {
  if (d < 2 || n < 2) {
    throw std::invalid_argument("the search requires a modulus of at least 2 and n >= 2");
  }
  if (static_cast<int>(lambda.size()) != n + 1) {
    throw std::invalid_argument("lambda must hold n + 1 coefficients");
  }
  if (lambda[0] != 1) throw std::invalid_argument("lambda[0] must be 1");
  std::int64_t total = 0;
  for (const std::int64_t coef : lambda) {
    if (coef < 0) throw std::invalid_argument("lambda coefficients must be nonnegative");
    total += coef;
  }
  int dim = 0;
  if (total == d) {
    dim = 1;
  } else if (total == d * d) {
    dim = 2;
  } else {
    throw std::invalid_argument("only measured spans of dimension one or two are searched");
  }
  const int m = n - dim;
  if (m < 1) throw std::invalid_argument("the requested span leaves no kept pair");

  // allowed[z] marks the zero-block counts that nonzero span elements may
  // take; hitting a forbidden count prunes a candidate immediately.
  std::vector<char> allowed(static_cast<std::size_t>(n) + 1, 0);
  for (int s = 1; s <= n; ++s) {
    if (lambda[s] > 0) allowed[n - s] = 1;
  }

  const std::int64_t size = states::state_size(d, n);  // D^{2n} candidates
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n) + 1, 0);

  const auto multiples_allowed = [&](const IVec& x) {
    for (std::int64_t c = 1; c < d; ++c) {
      if (!allowed[zero_pair_blocks(modlinalg::mod_reduce(c * x, d), n)]) return false;
    }
    return true;
  };

  if (dim == 1) {
    for (std::int64_t packed = 1; packed < size; ++packed) {
      const IVec u = states::unpack_index(packed, 2 * n, d);
      if (ring::gcd_d(u, d) != 1) continue;
      std::fill(counts.begin(), counts.end(), 0);
      counts[0] = 1;
      bool viable = true;
      for (std::int64_t c = 1; c < d && viable; ++c) {
        const int zeros = zero_pair_blocks(modlinalg::mod_reduce(c * u, d), n);
        const int s = n - zeros;
        viable = allowed[zeros] && ++counts[s] <= lambda[s];
      }
      if (viable && counts == lambda) return make_step(d, n, m, {u});
    }
    return std::nullopt;
  }

  const IMat om = symplectic::omega(n, d);
  for (std::int64_t packed = 1; packed < size; ++packed) {
    const IVec u = states::unpack_index(packed, 2 * n, d);
    if (ring::gcd_d(u, d) != 1 || !multiples_allowed(u)) continue;
    // Partners must be orthogonal to u under the alternating form, i.e. lie
    // in the plain-dot complement of Omega^T u.
    const IVec w = modlinalg::mod_reduce(om.transpose() * u, d);
    const modlinalg::Subspace line({w}, 2 * n, d);
    for (const IVec& v : modlinalg::enumerate_span(modlinalg::orthogonal_complement(line))) {
      if (states::pack_index(v, d) <= packed) continue;
      if (ring::gcd_d(v, d) != 1 || !multiples_allowed(v)) continue;
      // Unimodular pair: the two-row minors must jointly be coprime to d.
      std::int64_t minor_gcd = d;
      for (int a = 0; a < 2 * n && minor_gcd != 1; ++a) {
        for (int b = a + 1; b < 2 * n && minor_gcd != 1; ++b) {
          minor_gcd = std::gcd(minor_gcd, std::abs(u(a) * v(b) - u(b) * v(a)));
        }
      }
      if (minor_gcd != 1) continue;
      std::fill(counts.begin(), counts.end(), 0);
      bool viable = true;
      for (std::int64_t a = 0; a < d && viable; ++a) {
        for (std::int64_t b = 0; b < d && viable; ++b) {
          const int zeros = zero_pair_blocks(modlinalg::mod_reduce(a * u + b * v, d), n);
          const int s = n - zeros;
          if (s == 0) continue;  // the zero combination
          viable = allowed[zeros] && ++counts[s] <= lambda[s];
        }
      }
      counts[0] = 1;
      if (viable && counts == lambda) return make_step(d, n, m, {u, v});
    }
  }
  return std::nullopt;
}

ProtocolStep builtin_step(const std::string& name, std::int64_t d) {
  if (d < 2) throw std::invalid_argument("protocol steps require a modulus of at least 2");
  static std::mutex mutex;
  static std::map<std::pair<std::string, std::int64_t>, ProtocolStep> cache;
  const std::pair<std::string, std::int64_t> key{name, d};
  {
    std::lock_guard<std::mutex> lock(mutex);
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  ProtocolStep step;
  if (name == "n2") {
    auto found = search_vm_for_chi(d, 2, {1, 0, d - 1});
    if (!found) throw std::domain_error("no two-copy span reaches the requested polynomial");
    step = std::move(*found);
  } else if (name == "n3-odd") {
    if (d % 2 == 0) {
      throw std::domain_error("the odd three-copy polynomial is unreachable for even moduli");
    }
    auto found = search_vm_for_chi(d, 3, {1, 0, 0, d * d - 1});
    if (!found) throw std::domain_error("no three-copy span reaches the requested polynomial");
    step = std::move(*found);
  } else if (name == "n3-even") {
    auto found = search_vm_for_chi(d, 3, {1, 0, d - 1, d * d - d});
    if (!found) throw std::domain_error("no three-copy span reaches the requested polynomial");
    step = std::move(*found);
  } else if (name == "n4") {
    IVec u(8), v(8), w(8);
    u << 1, 0, 0, 1, 0, 1, 0, 0;
    v << 0, 1, 0, 0, 1, 0, 1, 0;
    w << 1, 1, -1, 0, 0, 0, 0, 1;
    step = make_step(d, 4, 1, {u, v, w});
    const std::vector<std::int64_t> expected{1, 0, 0, 4 * (d - 1), d * d * d - 4 * d + 3};
    if (chi_from_vm(step).lambda != expected) {
      throw numerical_error("the four-copy basis produced an unexpected polynomial");
    }
  } else {
    throw std::invalid_argument("unknown protocol name: " + name);
  }

  std::lock_guard<std::mutex> lock(mutex);
  return cache.emplace(key, std::move(step)).first->second;
}

namespace {

const PreparedStep& four_to_two_prepared(std::int64_t d) {
  static std::mutex mutex;
  static std::map<std::int64_t, PreparedStep> cache;
  std::lock_guard<std::mutex> lock(mutex);
  const auto it = cache.find(d);
  if (it != cache.end()) return it->second;

  const int n = 4;
  const auto shear = [&](int a) {
    return symplectic::generator_matrix({symplectic::GeneratorKind::kShear, a, 0}, n, d);
  };
  const auto couple = [&](int a, int b) {
    return symplectic::generator_matrix({symplectic::GeneratorKind::kPairSum, a, b}, n, d);
  };
  // The conjugated coupling: undo (couple * shear_b * shear_a) after
  // shear_a * couple, leaving a coupling that feeds each pair's first index
  // into the other's second index.
  const auto cross = [&](int a, int b) {
    const IMat forward = modlinalg::mod_reduce(couple(a, b) * shear(b) * shear(a), d);
    return modlinalg::mod_reduce(
        symplectic::inverse(forward, n, d) * shear(a) * couple(a, b), d);
  };
  const IMat matrix = modlinalg::mod_reduce(
      couple(0, 2) * couple(1, 3) * cross(0, 3) * cross(1, 2), d);
  const ProtocolStep step = make_step_from_matrix(d, n, 2, matrix);
  const std::vector<std::int64_t> expected{1, 0, 0, 0, d * d - 1};
  if (chi_from_vm(step).lambda != expected) {
    throw numerical_error("the four-to-two composition produced an unexpected polynomial");
  }
  return cache.emplace(d, prepare_step(step)).first->second;
}

}  // namespace

StepResult n4m2_step(const states::BellDiagonalState& s) {
  if (s.n != 4) throw std::invalid_argument("the four-to-two round needs a four-pair state");
  return measure_step(s, four_to_two_prepared(s.d));
}

StepResult qpa_step(const states::BellDiagonalState& s) {
  if (s.n != 1) throw std::invalid_argument("the alternating round needs a single-pair state");
  const std::int64_t d = s.d;
  states::BellDiagonalState out;
  out.d = d;
  out.n = 1;
  out.p = Eigen::ArrayXd::Zero(d * d);
  for (std::int64_t i = 0; i < d; ++i) {
    for (std::int64_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::int64_t k = 0; k < d; ++k) {
        acc += s.p(ring::mod_reduce(i + k, d) * d + ring::mod_reduce(-i - j - k, d)) *
               s.p(k * d + ring::mod_reduce(j - k, d));
      }
      out.p(i * d + j) = acc;
    }
  }
  const double success = out.p.sum();
  if (success < kSuccessFloor) {
    throw numerical_error("measurement succeeds with negligible probability");
  }
  // The success probability equals the mean square of the transform's
  // diagonal, a second route kept as a consistency guard.
  std::complex<double> squares(0.0, 0.0);
  const double base_angle = 2.0 * std::numbers::pi / static_cast<double>(d);
  for (std::int64_t k = 0; k < d; ++k) {
    std::complex<double> diagonal(0.0, 0.0);
    for (std::int64_t a = 0; a < d; ++a) {
      for (std::int64_t b = 0; b < d; ++b) {
        diagonal += std::polar(s.p(a * d + b),
                               base_angle * static_cast<double>(ring::mod_reduce(k * (a + b), d)));
      }
    }
    squares += diagonal * diagonal;
  }
  if (std::abs(success - squares.real() / static_cast<double>(d)) > kConsistencyTol) {
    throw numerical_error("success probability disagrees with its transform evaluation");
  }
  out.p /= success;
  return {std::move(out), success};
}

namespace {

struct GreedyTables {
  std::vector<IMat> elements;
  std::vector<std::vector<std::int64_t>> index_maps;  // packed single-pair images
  PreparedStep coupler;                               // fixed n=2, m=1 round
};

const GreedyTables& greedy_tables(std::int64_t d) {
  static std::mutex mutex;
  static std::map<std::int64_t, GreedyTables> cache;
  std::lock_guard<std::mutex> lock(mutex);
  const auto it = cache.find(d);
  if (it != cache.end()) return it->second;

  GreedyTables tables;
  tables.elements = symplectic::enumerate(d, 1);
  tables.index_maps.reserve(tables.elements.size());
  for (const IMat& g : tables.elements) {
    std::vector<std::int64_t> map(static_cast<std::size_t>(d * d), 0);
    for (std::int64_t packed = 0; packed < d * d; ++packed) {
      map[packed] = states::pack_index(g * states::unpack_index(packed, 2, d), d);
    }
    tables.index_maps.push_back(std::move(map));
  }
  const IMat coupling =
      symplectic::generator_matrix({symplectic::GeneratorKind::kPairSum, 0, 1}, 2, d);
  tables.coupler = prepare_step(make_step_from_matrix(d, 2, 1, coupling));
  return cache.emplace(d, std::move(tables)).first->second;
}

}  // namespace

GreedyResult greedy_step(const states::BellDiagonalState& s) {
  if (s.n != 1) throw std::invalid_argument("the greedy round needs a single-pair state");
  const std::int64_t d = s.d;
  const GreedyTables& tables = greedy_tables(d);

  // For the fixed coupling round on a product input q x q, the success
  // probability collapses to sum_j (sum_i q_ij)^2 and the kept-pair zero mass
  // to sum_c q(-c,0) q(c,0), so every relabeling can be scored without
  // forming the four-index product state.
  std::vector<double> relabeled(static_cast<std::size_t>(d * d), 0.0);
  std::ptrdiff_t best = -1;
  double best_fidelity = -1.0;
  double best_success = 0.0;
  for (std::size_t g = 0; g < tables.elements.size(); ++g) {
    const std::vector<std::int64_t>& map = tables.index_maps[g];
    for (std::int64_t packed = 0; packed < d * d; ++packed) {
      relabeled[map[packed]] = s.p(packed);
    }
    double success = 0.0;
    for (std::int64_t j = 0; j < d; ++j) {
      double column = 0.0;
      for (std::int64_t i = 0; i < d; ++i) column += relabeled[i * d + j];
      success += column * column;
    }
    if (success < kSuccessFloor) continue;
    double zero_mass = 0.0;
    for (std::int64_t c = 0; c < d; ++c) {
      zero_mass += relabeled[((d - c) % d) * d] * relabeled[c * d];
    }
    const double fidelity = zero_mass / success;
    if (fidelity > best_fidelity) {
      best = static_cast<std::ptrdiff_t>(g);
      best_fidelity = fidelity;
      best_success = success;
    }
  }
  if (best < 0) {
    throw numerical_error("every relabeling makes the measurement impossible");
  }

  states::BellDiagonalState winner;
  winner.d = d;
  winner.n = 1;
  winner.p = Eigen::ArrayXd::Zero(d * d);
  const std::vector<std::int64_t>& map = tables.index_maps[static_cast<std::size_t>(best)];
  for (std::int64_t packed = 0; packed < d * d; ++packed) {
    winner.p(map[packed]) = s.p(packed);
  }
  StepResult result = measure_step(states::tensor(winner, winner), tables.coupler);
  if (std::abs(result.success - best_success) > kConsistencyTol ||
      std::abs(states::fidelity(result.state) - best_fidelity) > kConsistencyTol) {
    throw numerical_error("greedy scoring disagrees with the measured outcome");
  }
  return {std::move(result.state), result.success, tables.elements[static_cast<std::size_t>(best)]};
}

namespace {
const std::vector<std::string> kPolicyNames = {"n2",   "n3-odd", "n3-even", "n4",
                                               "n4m2", "qpa",    "greedy"};
}  // namespace

Policy policy_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kPolicyNames.size(); ++i) {
    if (kPolicyNames[i] == name) return static_cast<Policy>(i);
  }
  throw std::invalid_argument("unknown policy name: " + name);
}

std::string policy_name(Policy policy) {
  return kPolicyNames[static_cast<std::size_t>(policy)];
}

const std::vector<std::string>& policy_names() { return kPolicyNames; }

PolicyIterator::PolicyIterator(Policy policy, const states::BellDiagonalState& start)
    : policy_(policy), d_(start.d), state_(start) {
  if (start.n != 1) throw std::invalid_argument("policies iterate single-pair states");
  f_ = states::fidelity(start);
  switch (policy_) {
    case Policy::kN2Twirl:
      chi_ = chi_from_vm(builtin_step("n2", d_));
      break;
    case Policy::kN3OddTwirl:
      chi_ = chi_from_vm(builtin_step("n3-odd", d_));
      break;
    case Policy::kN3EvenTwirl:
      chi_ = chi_from_vm(builtin_step("n3-even", d_));
      break;
    case Policy::kN4Twirl:
      chi_ = chi_from_vm(builtin_step("n4", d_));
      break;
    default:
      break;
  }
}

double PolicyIterator::fidelity() const {
  switch (policy_) {
    case Policy::kQpa:
    case Policy::kGreedy:
      return states::fidelity(state_);
    default:
      return f_;
  }
}

double PolicyIterator::advance() {
  switch (policy_) {
    case Policy::kN2Twirl:
    case Policy::kN3OddTwirl:
    case Policy::kN3EvenTwirl:
    case Policy::kN4Twirl: {
      const RecursionPoint point = twirl_recursion(f_, chi_);
      f_ = std::min(point.fidelity, 1.0);
      return point.success;
    }
    case Policy::kN4M2: {
      const StepResult result = n4m2_step(states::isotropic_pairs(d_, 4, f_));
      f_ = std::min(states::fidelity(states::marginal(result.state, {0})), 1.0);
      return result.success;
    }
    case Policy::kQpa: {
      StepResult result = qpa_step(state_);
      state_ = std::move(result.state);
      return result.success;
    }
    case Policy::kGreedy: {
      GreedyResult result = greedy_step(state_);
      state_ = std::move(result.state);
      return result.success;
    }
  }
  throw std::logic_error("unreachable policy");
}

double PolicyIterator::pair_ratio() const {
  switch (policy_) {
    case Policy::kN2Twirl:
      return 1.0 / 2.0;
    case Policy::kN3OddTwirl:
    case Policy::kN3EvenTwirl:
      return 1.0 / 3.0;
    case Policy::kN4Twirl:
      return 1.0 / 4.0;
    case Policy::kN4M2:
    case Policy::kQpa:
    case Policy::kGreedy:
      return 1.0 / 2.0;
  }
  throw std::logic_error("unreachable policy");
}

YieldTrace yield_trace(Policy policy, const states::BellDiagonalState& start, double target_f,
                       int max_steps) {
  if (!(target_f > 0.0) || target_f > 1.0) {
    throw std::invalid_argument("target fidelity must lie in (0, 1]");
  }
  if (max_steps < 0) throw std::invalid_argument("max_steps must be nonnegative");
  PolicyIterator it(policy, start);
  YieldTrace trace;
  trace.records.push_back({0, it.fidelity(), 1.0, 1.0});
  if (it.fidelity() >= target_f) {
    trace.reached_target = true;
    return trace;
  }
  double yield = 1.0;
  for (int k = 1; k <= max_steps; ++k) {
    double success = 0.0;
    try {
      success = it.advance();
    } catch (const numerical_error&) {
      break;
    }
    yield *= success * it.pair_ratio();
    trace.records.push_back({k, it.fidelity(), success, yield});
    if (it.fidelity() >= target_f) {
      trace.reached_target = true;
      break;
    }
  }
  return trace;
}

bool distillable(Policy policy, const states::BellDiagonalState& start,
                 const DistillCriteria& criteria) {
  PolicyIterator it(policy, start);
  double best = it.fidelity();
  if (best >= criteria.target) return true;
  int stalled = 0;
  for (int k = 0; k < criteria.max_steps; ++k) {
    try {
      it.advance();
    } catch (const numerical_error&) {
      return false;
    } catch (const std::invalid_argument&) {
      return false;
    }
    const double f = it.fidelity();
    if (f >= criteria.target) return true;
    if (f > best + criteria.min_progress) {
      best = f;
      stalled = 0;
    } else if (++stalled >= criteria.stall_window) {
      return false;
    }
  }
  return false;
}

}  // namespace qudistill::protocol
