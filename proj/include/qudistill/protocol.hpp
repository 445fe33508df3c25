#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qudistill/rng.hpp"
#include "qudistill/states.hpp"
#include "qudistill/types.hpp"

// Recursion-method distillation rounds: relabel n pairs by a form-preserving
// matrix, measure the last n - m pairs on both sides, keep the first m pairs
// when all measured pairs agree. Provides the measurement map itself, the
// polynomial recursion for twirl-assisted iterations, performance
// coefficients, named protocol families, the alternating privacy
// amplification recursion, a greedy per-step search, and yield accounting.
namespace qudistill::protocol {

// Everything observable about a round depends only on the span of the last
// n - m rows of the relabeling matrix, kept here as vm_basis.
struct ProtocolStep {
  std::int64_t d = 2;
  int n = 2;
  int m = 1;
  std::vector<IVec> vm_basis;      // n - m rows, pairwise alternating-orthogonal
  std::optional<IMat> relabeling;  // full 2n x 2n matrix when already known
};

// Validates the basis (independence, pairwise orthogonality under the
// alternating form) and completes it deterministically to a full matrix.
ProtocolStep make_step(std::int64_t d, int n, int m, std::vector<IVec> vm_basis);
ProtocolStep make_step_from_matrix(std::int64_t d, int n, int m, const IMat& matrix);
// The step induced by a uniformly random group element.
ProtocolStep random_step(std::int64_t d, int n, int m, SplitMix64& rng);

// The stored relabeling matrix, or a deterministic completion whose last
// n - m rows are exactly vm_basis.
IMat step_matrix(const ProtocolStep& step);

// Precomputed index tables that make repeated measurements cheap.
struct PreparedStep {
  std::int64_t d = 2;
  int n = 2;
  int m = 1;
  IMat matrix;
  std::vector<std::int64_t> survival;   // packed indices summed for P
  std::vector<std::int64_t> numerator;  // packed images of V_M under the form
  std::vector<std::int64_t> gather;     // [out * vm_size + k] packed sources
  std::int64_t out_size = 0;
  std::int64_t vm_size = 0;
};
PreparedStep prepare_step(const ProtocolStep& step);

struct StepResult {
  states::BellDiagonalState state;
  double success = 0.0;
};
StepResult measure_step(const states::BellDiagonalState& s, const PreparedStep& prep);
StepResult measure_step(const states::BellDiagonalState& s, const ProtocolStep& step);

// Probability that every kept pair lands on the reference index, conditioned
// on a successful measurement. The direct mode sums the input distribution;
// the transform mode exercises the subspace character-sum identity. Both
// agree within numerical tolerance.
enum class FidelityMode { kDirect, kFourier };
double joint_fidelity(const states::BellDiagonalState& s, const ProtocolStep& step,
                      FidelityMode mode = FidelityMode::kDirect);

// chi(x) = sum_s lambda_s x^s, where lambda_s counts the elements of the
// measured-row span having exactly n - s all-zero pair blocks.
struct ChiPolynomial {
  std::int64_t d = 2;
  int n = 2;
  int m = 1;
  std::vector<std::int64_t> lambda;  // size n + 1, lambda[0] == 1
  double eval(double x) const;
  double derivative(double x) const;
};
ChiPolynomial chi_from_vm(const ProtocolStep& step);
// Column-pair counting shortcut, available when every column-pair span of the
// basis matrix is a free module (always for prime moduli); agrees with
// chi_from_vm whenever it applies.
std::optional<ChiPolynomial> chi_from_vm_columns(const ProtocolStep& step);

// One twirl-assisted round on n isotropic copies of fidelity f: the joint
// fidelity of the kept pairs and the success probability.
struct RecursionPoint {
  double fidelity = 0.0;
  double success = 0.0;
};
RecursionPoint twirl_recursion(double f, const ChiPolynomial& chi);

// Low-fidelity figures of merit for m = 1 rounds: the slope f1 of the
// fidelity map at 1/D, the success probability p0 there, and the yield
// coefficient per amplification decade.
struct PerformanceReport {
  double f1 = 0.0;
  double p0 = 0.0;
  double eta = 0.0;
};
PerformanceReport performance(const ChiPolynomial& chi);

// First step in deterministic scan order whose polynomial matches lambda.
// Only spans of dimension one or two (m = n-1, n-2) are searched.
std::optional<ProtocolStep> search_vm_for_chi(std::int64_t d, int n,
                                              const std::vector<std::int64_t>& lambda);

// Named rounds: "n2", "n3-odd", "n3-even" (found by search, cached) and "n4"
// (fixed basis). "n3-odd" requires an odd modulus.
ProtocolStep builtin_step(const std::string& name, std::int64_t d);

// Four copies in, two kept: a fixed composition of pair couplings arranged so
// that only the zero vector of the measured span has any zero pair block.
StepResult n4m2_step(const states::BellDiagonalState& s);

// One alternating privacy-amplification round on two copies of a single-pair
// state; the basis alternation is absorbed into the index algebra so the
// output is again a single-pair distribution.
StepResult qpa_step(const states::BellDiagonalState& s);

struct GreedyResult {
  states::BellDiagonalState state;
  double success = 0.0;
  IMat chosen;  // the single-pair relabeling applied to both copies
};
// Scans every single-pair relabeling, applying the best one (ties broken by
// enumeration order) to both copies before the fixed coupling round.
GreedyResult greedy_step(const states::BellDiagonalState& s);

enum class Policy { kN2Twirl, kN3OddTwirl, kN3EvenTwirl, kN4Twirl, kN4M2, kQpa, kGreedy };
Policy policy_from_name(const std::string& name);
std::string policy_name(Policy policy);
const std::vector<std::string>& policy_names();

// Drives one policy from a single-pair start state. Twirl-assisted policies
// carry only the fidelity; the others carry the full distribution.
class PolicyIterator {
 public:
  PolicyIterator(Policy policy, const states::BellDiagonalState& start);
  double fidelity() const;
  double advance();           // one round; returns its success probability
  double pair_ratio() const;  // kept / consumed pairs per round
  Policy policy() const { return policy_; }

 private:
  Policy policy_;
  std::int64_t d_ = 2;
  double f_ = 0.0;                   // twirl-assisted policies
  ChiPolynomial chi_;                // twirl-recursion policies
  states::BellDiagonalState state_;  // qpa / greedy
};

struct YieldRecord {
  int step = 0;
  double fidelity = 0.0;
  double success = 1.0;
  double yield = 1.0;
};
struct YieldTrace {
  std::vector<YieldRecord> records;
  bool reached_target = false;
};
// Iterates until the fidelity reaches target_f or max_steps rounds elapse;
// the yield picks up a factor success * pair_ratio per round. A round whose
// measurement becomes impossible ends the trace as unconverged.
YieldTrace yield_trace(Policy policy, const states::BellDiagonalState& start,
                       double target_f, int max_steps);

struct DistillCriteria {
  double target = 0.99;
  int max_steps = 200;
  double min_progress = 1e-12;
  int stall_window = 20;
};
// Whether the policy reaches the target fidelity within the step budget,
// declaring failure early when progress stalls for a full window.
bool distillable(Policy policy, const states::BellDiagonalState& start,
                 const DistillCriteria& criteria = {});

}  // namespace qudistill::protocol
