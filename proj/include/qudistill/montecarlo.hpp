#pragma once

#include <cstdint>

#include "qudistill/protocol.hpp"
#include "qudistill/rng.hpp"
#include "qudistill/states.hpp"

// Rejection sampling of single-pair Bell-diagonal states at a fixed fidelity,
// and normalized-volume estimates of the distillable and entanglement-
// witnessed sets at that fidelity.
namespace qudistill::montecarlo {

struct SamplerConfig {
  std::int64_t d = 2;
  double fidelity = 0.5;                      // in [0, 1]
  std::uint64_t seed = 0;                     // stream base used by volume runs
  std::int64_t rejection_limit = 1'000'000;   // consecutive rejections per sample
};

// Draws D^2 - 2 uniforms, sorts them between the fixed endpoints 0 and 1, and
// scales the resulting gaps by 1 - F to fill the non-reference entries; the
// reference entry is F exactly. Any gap exceeding F rejects the draw.
// Exhausting the rejection limit raises resource_limit_error (low fidelities
// leave no room for D^2 - 1 gaps each below F).
states::BellDiagonalState sample_state(const SamplerConfig& cfg, SplitMix64& rng);

struct VolumeEstimate {
  double fraction = 0.0;
  double std_error = 0.0;  // sqrt(fraction * (1 - fraction) / samples_accepted)
  std::int64_t samples_accepted = 0;
  std::int64_t samples_rejected = 0;
};

// Fraction of sampled states the policy drives to the distillation target.
// Sample i draws from its own substream derived from (seed, i), so estimates
// are identical for any worker count; jobs <= 0 uses the hardware count.
VolumeEstimate volume_distilled(std::int64_t d, double fidelity, protocol::Policy policy,
                                std::int64_t samples, std::uint64_t seed, int jobs = 0);

// Fraction of sampled states whose partial transpose has a negative
// eigenvalue (a necessary condition for distillability).
VolumeEstimate volume_nppt(std::int64_t d, double fidelity, std::int64_t samples,
                           std::uint64_t seed, int jobs = 0);

// Both estimates from the same sample set, so the witnessed fraction can be
// compared to the distilled fraction pointwise.
struct PairedVolumes {
  VolumeEstimate distilled;
  VolumeEstimate nppt;
};
PairedVolumes volume_both(std::int64_t d, double fidelity, protocol::Policy policy,
                          std::int64_t samples, std::uint64_t seed, int jobs = 0);

}  // namespace qudistill::montecarlo
