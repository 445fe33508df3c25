#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qudistill/montecarlo.hpp"
#include "qudistill/protocol.hpp"
#include "qudistill/rng.hpp"
#include "qudistill/states.hpp"
#include "qudistill/types.hpp"

using namespace qudistill;
using montecarlo::SamplerConfig;
using montecarlo::VolumeEstimate;

TEST_CASE("sampler rejects malformed configurations") {
  SplitMix64 rng(1);
  SamplerConfig cfg;
  cfg.d = 1;
  CHECK_THROWS_AS(montecarlo::sample_state(cfg, rng), std::invalid_argument);
  cfg.d = 2;
  cfg.fidelity = -0.1;
  CHECK_THROWS_AS(montecarlo::sample_state(cfg, rng), std::invalid_argument);
  cfg.fidelity = 1.1;
  CHECK_THROWS_AS(montecarlo::sample_state(cfg, rng), std::invalid_argument);
  cfg.fidelity = 0.5;
  cfg.rejection_limit = 0;
  CHECK_THROWS_AS(montecarlo::sample_state(cfg, rng), std::invalid_argument);
}

TEST_CASE("accepted samples sit at the requested fidelity") {
  SplitMix64 rng(42);
  for (std::int64_t d : {2, 3, 4}) {
    for (double f : {0.5, 0.7, 0.95}) {
      SamplerConfig cfg;
      cfg.d = d;
      cfg.fidelity = f;
      for (int trial = 0; trial < 50; ++trial) {
        const states::BellDiagonalState s = montecarlo::sample_state(cfg, rng);
        CHECK(s.d == d);
        CHECK(s.n == 1);
        CHECK(s.p.size() == d * d);
        CHECK(s.p(0) == f);  // the reference entry is assigned, not derived
        CHECK(s.p.minCoeff() >= 0.0);
        CHECK(s.p.maxCoeff() <= f + 1e-15);
        CHECK(s.p.sum() == doctest::Approx(1.0).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("perfect fidelity gives the point mass and zero noise") {
  SplitMix64 rng(3);
  SamplerConfig cfg;
  cfg.d = 3;
  cfg.fidelity = 1.0;
  const states::BellDiagonalState s = montecarlo::sample_state(cfg, rng);
  CHECK(s.p(0) == 1.0);
  for (Eigen::Index i = 1; i < s.p.size(); ++i) CHECK(s.p(i) == 0.0);
}

TEST_CASE("infeasibly low fidelity exhausts the rejection budget") {
  SplitMix64 rng(9);
  SamplerConfig cfg;
  cfg.d = 2;
  cfg.fidelity = 0.0;  // three gaps summing to one can never all be zero
  cfg.rejection_limit = 1000;
  CHECK_THROWS_AS(montecarlo::sample_state(cfg, rng), resource_limit_error);
}

TEST_CASE("gap means match the symmetric spacings law") {
  SplitMix64 rng(2026);
  SamplerConfig cfg;
  cfg.d = 2;
  cfg.fidelity = 0.6;
  const int samples = 10000;
  double mean[3] = {0.0, 0.0, 0.0};
  for (int i = 0; i < samples; ++i) {
    const states::BellDiagonalState s = montecarlo::sample_state(cfg, rng);
    for (int j = 0; j < 3; ++j) mean[j] += s.p(j + 1);
  }
  // Each scaled gap is noise * Beta(1,2): mean noise/3, variance noise^2/18.
  const double expected = 0.4 / 3.0;
  const double sigma = 0.4 / std::sqrt(18.0 * samples);
  for (int j = 0; j < 3; ++j) {
    mean[j] /= samples;
    CHECK(std::abs(mean[j] - expected) < 3.0 * sigma);
  }
}

TEST_CASE("volume estimates are deterministic and thread-count independent") {
  const VolumeEstimate serial =
      montecarlo::volume_distilled(2, 0.55, protocol::Policy::kQpa, 200, 7, 1);
  const VolumeEstimate parallel =
      montecarlo::volume_distilled(2, 0.55, protocol::Policy::kQpa, 200, 7, 4);
  CHECK(serial.fraction == parallel.fraction);
  CHECK(serial.std_error == parallel.std_error);
  CHECK(serial.samples_accepted == parallel.samples_accepted);
  CHECK(serial.samples_rejected == parallel.samples_rejected);
  CHECK(serial.samples_accepted == 200);
  CHECK(serial.std_error ==
        doctest::Approx(std::sqrt(serial.fraction * (1.0 - serial.fraction) / 200.0))
            .epsilon(1e-15));

  CHECK_THROWS_AS(montecarlo::volume_distilled(2, 0.5, protocol::Policy::kQpa, 0, 7, 1),
                  std::invalid_argument);
}

TEST_CASE("qubit alternating policy splits cleanly across the half threshold") {
  const VolumeEstimate above =
      montecarlo::volume_distilled(2, 0.55, protocol::Policy::kQpa, 300, 12345, 0);
  CHECK(above.fraction >= 0.99);
  const VolumeEstimate below =
      montecarlo::volume_distilled(2, 0.45, protocol::Policy::kQpa, 300, 12345, 0);
  CHECK(below.fraction <= 0.01);
  // Low fidelity leaves less room for the gaps, so rejections appear.
  CHECK(below.samples_rejected > 0);

  const VolumeEstimate perfect =
      montecarlo::volume_distilled(2, 1.0, protocol::Policy::kQpa, 50, 5, 0);
  CHECK(perfect.fraction == 1.0);
  CHECK(perfect.std_error == 0.0);
}

TEST_CASE("witnessed volume bounds the distilled volume pointwise") {
  for (double f : {0.45, 0.6, 0.8}) {
    const auto paired =
        montecarlo::volume_both(3, f, protocol::Policy::kGreedy, 150, 99, 0);
    const double slack =
        3.0 * std::hypot(paired.distilled.std_error, paired.nppt.std_error);
    CHECK(paired.nppt.fraction >= paired.distilled.fraction - slack);
    // Shared sample set: the paired estimates match the standalone runs.
    const VolumeEstimate alone = montecarlo::volume_nppt(3, f, 150, 99, 0);
    CHECK(paired.nppt.fraction == alone.fraction);
    CHECK(paired.nppt.samples_rejected == alone.samples_rejected);
  }
  const VolumeEstimate perfect = montecarlo::volume_nppt(3, 1.0, 50, 2, 0);
  CHECK(perfect.fraction == 1.0);
}
