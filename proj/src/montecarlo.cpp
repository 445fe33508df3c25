#include "qudistill/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>
#include <vector>

#include "qudistill/types.hpp"

namespace qudistill::montecarlo {

namespace {

struct CountedSample {
  states::BellDiagonalState state;
  std::int64_t rejections = 0;
};

CountedSample sample_counted(const SamplerConfig& cfg, SplitMix64& rng) {
  if (cfg.d < 2) throw std::invalid_argument("modulus must be at least 2");
  if (!(cfg.fidelity >= 0.0 && cfg.fidelity <= 1.0)) {
    throw std::invalid_argument("target fidelity must lie in [0, 1]");
  }
  if (cfg.rejection_limit < 1) throw std::invalid_argument("rejection limit must be positive");

  // Grid of D^2 points: 0, the D^2 - 2 sorted uniforms, 1. Its D^2 - 1 gaps,
  // scaled by 1 - F, fill the non-reference entries in index order.
  const std::int64_t size = states::state_size(cfg.d, 1);
  const double noise = 1.0 - cfg.fidelity;
  std::vector<double> grid(static_cast<std::size_t>(size));
  grid.front() = 0.0;
  grid.back() = 1.0;

  CountedSample out;
  for (std::int64_t attempt = 0; attempt < cfg.rejection_limit; ++attempt) {
    for (std::int64_t i = 1; i + 1 < size; ++i) {
      grid[static_cast<std::size_t>(i)] = rng.next_double();
    }
    std::sort(grid.begin() + 1, grid.end() - 1);

    bool accepted = true;
    for (std::int64_t j = 1; j < size; ++j) {
      if (noise * (grid[static_cast<std::size_t>(j)] - grid[static_cast<std::size_t>(j) - 1]) >
          cfg.fidelity) {
        accepted = false;
        break;
      }
    }
    if (!accepted) {
      ++out.rejections;
      continue;
    }

    out.state.d = cfg.d;
    out.state.n = 1;
    out.state.p.resize(size);
    out.state.p(0) = cfg.fidelity;
    for (std::int64_t j = 1; j < size; ++j) {
      out.state.p(j) =
          noise * (grid[static_cast<std::size_t>(j)] - grid[static_cast<std::size_t>(j) - 1]);
    }
    return out;
  }
  throw resource_limit_error("rejection limit reached while sampling at this fidelity");
}

int resolve_jobs(int jobs, std::int64_t samples) {
  int resolved = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  if (resolved < 1) resolved = 1;
  if (static_cast<std::int64_t>(resolved) > samples) resolved = static_cast<int>(samples);
  return resolved;
}

VolumeEstimate finish(std::int64_t hits, std::int64_t samples, std::int64_t rejected) {
  VolumeEstimate est;
  est.fraction = static_cast<double>(hits) / static_cast<double>(samples);
  est.std_error =
      std::sqrt(est.fraction * (1.0 - est.fraction) / static_cast<double>(samples));
  est.samples_accepted = samples;
  est.samples_rejected = rejected;
  return est;
}

// Runs the sampler over [0, samples) with per-index substreams, counting how
// many accepted states satisfy each predicate. Partitioning across threads
// cannot change the counts because every index owns its stream.
template <typename Predicates>
std::vector<std::int64_t> count_over_samples(const SamplerConfig& cfg, std::int64_t samples,
                                             int jobs, int predicate_count,
                                             const Predicates& predicates) {
  if (samples < 1) throw std::invalid_argument("sample count must be positive");
  const int workers = resolve_jobs(jobs, samples);

  std::vector<std::vector<std::int64_t>> hits(
      static_cast<std::size_t>(workers),
      std::vector<std::int64_t>(static_cast<std::size_t>(predicate_count) + 1, 0));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));

  const auto run = [&](int worker, std::int64_t lo, std::int64_t hi) {
    try {
      auto& local = hits[static_cast<std::size_t>(worker)];
      for (std::int64_t i = lo; i < hi; ++i) {
        SplitMix64 rng = SplitMix64::stream(cfg.seed, static_cast<std::uint64_t>(i));
        const CountedSample sample = sample_counted(cfg, rng);
        local.back() += sample.rejections;
        for (int p = 0; p < predicate_count; ++p) {
          if (predicates(p, sample.state)) ++local[static_cast<std::size_t>(p)];
        }
      }
    } catch (...) {
      failures[static_cast<std::size_t>(worker)] = std::current_exception();
    }
  };

  if (workers == 1) {
    run(0, 0, samples);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      const std::int64_t lo = samples * w / workers;
      const std::int64_t hi = samples * (w + 1) / workers;
      pool.emplace_back(run, w, lo, hi);
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<std::int64_t> totals(static_cast<std::size_t>(predicate_count) + 1, 0);
  for (const auto& local : hits) {
    for (std::size_t p = 0; p < totals.size(); ++p) totals[p] += local[p];
  }
  return totals;
}

}  // namespace

states::BellDiagonalState sample_state(const SamplerConfig& cfg, SplitMix64& rng) {
  return sample_counted(cfg, rng).state;
}

VolumeEstimate volume_distilled(std::int64_t d, double fidelity, protocol::Policy policy,
                                std::int64_t samples, std::uint64_t seed, int jobs) {
  SamplerConfig cfg;
  cfg.d = d;
  cfg.fidelity = fidelity;
  cfg.seed = seed;
  const auto totals = count_over_samples(
      cfg, samples, jobs, 1, [&](int, const states::BellDiagonalState& s) {
        return protocol::distillable(policy, s);
      });
  return finish(totals[0], samples, totals[1]);
}

VolumeEstimate volume_nppt(std::int64_t d, double fidelity, std::int64_t samples,
                           std::uint64_t seed, int jobs) {
  SamplerConfig cfg;
  cfg.d = d;
  cfg.fidelity = fidelity;
  cfg.seed = seed;
  const auto totals = count_over_samples(
      cfg, samples, jobs, 1,
      [&](int, const states::BellDiagonalState& s) { return states::is_nppt(s); });
  return finish(totals[0], samples, totals[1]);
}

PairedVolumes volume_both(std::int64_t d, double fidelity, protocol::Policy policy,
                          std::int64_t samples, std::uint64_t seed, int jobs) {
  SamplerConfig cfg;
  cfg.d = d;
  cfg.fidelity = fidelity;
  cfg.seed = seed;
  const auto totals = count_over_samples(
      cfg, samples, jobs, 2, [&](int which, const states::BellDiagonalState& s) {
        return which == 0 ? protocol::distillable(policy, s) : states::is_nppt(s);
      });
  return PairedVolumes{finish(totals[0], samples, totals[2]),
                       finish(totals[1], samples, totals[2])};
}

}  // namespace qudistill::montecarlo
