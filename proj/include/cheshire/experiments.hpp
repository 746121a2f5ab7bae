#ifndef CHESHIRE_EXPERIMENTS_HPP
#define CHESHIRE_EXPERIMENTS_HPP

// Bench-level detection schemes built on the cavity simulator:
//  - the homodyne comparison against a reference arm,
//  - the delta-tilt / mu-attenuation polarimetry experiment, in closed form
//    and as a seeded photon-counting Monte Carlo.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "cheshire/core_sim.hpp"
#include "cheshire/errors.hpp"
#include "cheshire/polarisation.hpp"

namespace cheshire {

// ---------------------------------------------------------------------------
// Homodyne

struct HomodyneResult {
  double p_d0 = 0.0;
  double p_d1 = 0.0;
  double p_loss = 0.0;
  cplx survival{};  // amplitude left on (L, H) after 2N cycles
};

/// H input split 50/50 into a reference arm and the protocol; the two are
/// recombined on a second balanced splitter with zero path-length phase.
inline HomodyneResult homodyne_run(int half_cycles, bool mirror_present) {
  const ProtocolParams params(half_cycles, mirror_present);
  const SystemState out = evolve(make_initial(Polarisation::H()), params,
                                 params.default_steps());
  const cplx s = out.left().h;

  HomodyneResult r;
  r.survival = s;
  r.p_d0 = std::norm((1.0 + s) / 2.0);
  r.p_d1 = std::norm((1.0 - s) / 2.0);
  // Everything the protocol arm did not return as (L, H).
  r.p_loss = 0.5 * (std::norm(out.left().v) + out.right().norm() +
                    leak_probability(out));
  return r;
}

// ---------------------------------------------------------------------------
// Perturbation experiment

struct PerturbationParams {
  double delta = 0.0;  // tilt of the input from H toward V
  double mu = 1.0;     // attenuation applied to the H arm
  int half_cycles = 1;

  void validate() const {
    if (!(delta >= 0.0 && delta < std::numbers::pi / 2)) {
      throw std::invalid_argument("delta must lie in [0, pi/2)");
    }
    if (!(mu >= 0.0 && mu <= 1.0)) {
      throw std::invalid_argument("mu must lie in [0, 1]");
    }
    if (half_cycles < 1) throw std::invalid_argument("N must be >= 1");
  }
};

/// Amplitudes arriving at DD and DA.
struct DetectorAmplitudes {
  double d = 0.0;
  double a = 0.0;
};

struct DetectionProbabilities {
  double d = 0.0;
  double a = 0.0;
  double lost() const { return 1.0 - d - a; }
};

/// Closed form. With the mirror: ((mu c cos d -/+ sin d)/sqrt2) on D/A;
/// without it the V arm is attenuated by c as well.
inline DetectorAmplitudes perturbed_amplitudes(const PerturbationParams& p,
                                               bool mirror_present = true) {
  p.validate();
  const double c = survival_amplitude_closed_form(p.half_cycles);
  const double h = p.mu * c * std::cos(p.delta);
  const double v = mirror_present ? -std::sin(p.delta) : c * std::sin(p.delta);
  return {(h + v) * kInvSqrt2, (h - v) * kInvSqrt2};
}

/// Same amplitudes from the simulator: evolve the tilted input for 2N cycles,
/// attenuate H on the L output, project on D/A.
inline DetectorAmplitudes perturbed_amplitudes_simulated(
    const PerturbationParams& p, bool mirror_present = true) {
  p.validate();
  const ProtocolParams params(p.half_cycles, mirror_present);
  const SystemState out = evolve(make_initial(Polarisation::linear(p.delta)),
                                 params, params.default_steps());
  const Polarisation attenuated{p.mu * out.left().h, out.left().v};
  return {attenuated.d().real(), attenuated.a().real()};
}

inline DetectionProbabilities perturbed_probabilities(
    const PerturbationParams& p, bool mirror_present = true) {
  const DetectorAmplitudes amp = perturbed_amplitudes(p, mirror_present);
  return {amp.d * amp.d, amp.a * amp.a};
}

/// (x_D - x_A) / (x_D + x_A). Throws UndefinedRatio when the sum is zero.
inline double ratio(double x_d, double x_a) {
  const double sum = x_d + x_a;
  if (sum == 0.0) throw UndefinedRatio();
  return (x_d - x_a) / sum;
}

/// Ratio of detector amplitudes, (x_D - x_A)/(x_D + x_A). Evaluated as the
/// weak value -sin d/(c cos d) (or +tan d without the mirror) divided by mu.
inline double amplitude_ratio(const PerturbationParams& p,
                              bool mirror_present = true) {
  p.validate();
  const double c = survival_amplitude_closed_form(p.half_cycles);
  if (p.mu == 0.0 || c == 0.0) {
    // x_D + x_A vanishes with the H arm.
    throw UndefinedRatio();
  }
  const double weak = mirror_present
                          ? -std::sin(p.delta) / (c * std::cos(p.delta))
                          : std::tan(p.delta);
  return weak / p.mu;
}

/// Ratio of detection probabilities, which is what photon counting estimates.
inline double probability_ratio(const PerturbationParams& p,
                                bool mirror_present = true) {
  const DetectionProbabilities pr = perturbed_probabilities(p, mirror_present);
  return ratio(pr.d, pr.a);
}

/// Attenuation for which mu c = tan d, making the amplitude ratio exactly -1.
inline double weak_value_tuned_mu(double delta, int half_cycles) {
  const double c = survival_amplitude_closed_form(half_cycles);
  return std::sin(delta) / (c * std::cos(delta));
}

/// mu = tan d. Gives amplitude ratio -1/c rather than -1 at finite N.
inline double tan_delta_mu(double delta) { return std::tan(delta); }

// ---------------------------------------------------------------------------
// Monte Carlo

/// splitmix64 finaliser, used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(seed ^ mix_seed(stream));
}

struct DetectionStats {
  std::uint64_t count_d = 0;
  std::uint64_t count_a = 0;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;

  std::uint64_t detected() const { return count_d + count_a; }
  std::uint64_t lost() const { return shots - detected(); }

  /// (n_D - n_A) / (n_D + n_A); UndefinedRatio if nothing was detected.
  double ratio() const {
    return cheshire::ratio(static_cast<double>(count_d),
                           static_cast<double>(count_a));
  }

  /// Binomial standard error of ratio(), conditioned on the detected count.
  double standard_error() const {
    const double r = ratio();
    return std::sqrt(std::max(0.0, 1.0 - r * r) /
                     static_cast<double>(detected()));
  }
};

/// Shots per shard. Fixed, so the shard layout depends only on the shot count.
inline constexpr std::uint64_t kShardShots = 1u << 16;

namespace detail {

struct ShardCounts {
  std::uint64_t d = 0;
  std::uint64_t a = 0;
};

inline ShardCounts run_shard(const DetectionProbabilities& prob,
                             std::uint64_t seed, std::uint64_t shard,
                             std::uint64_t shots) {
  const std::uint64_t stream = derive_seed(seed, shard);
  std::seed_seq seq{static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  ShardCounts out;
  for (std::uint64_t i = 0; i < shots; ++i) {
    // 53-bit uniform in [0, 1); avoids implementation-defined distributions.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u < prob.d) {
      ++out.d;
    } else if (u < prob.d + prob.a) {
      ++out.a;
    }
  }
  return out;
}

}  // namespace detail

/// Each shot lands in DD with probability P_D, in DA with P_A, otherwise it is
/// lost. Shard s draws from a stream derived from (seed, s); results are merged
/// in shard order, so the counts do not depend on the worker count.
inline DetectionStats monte_carlo(const DetectionProbabilities& prob,
                                  std::uint64_t shots, std::uint64_t seed,
                                  unsigned workers = 1) {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  if (prob.d < 0.0 || prob.a < 0.0 || prob.d + prob.a > 1.0 + 1e-12) {
    throw std::invalid_argument("detection probabilities out of range");
  }
  const std::uint64_t shards = (shots + kShardShots - 1) / kShardShots;
  std::vector<detail::ShardCounts> partial(shards);
  auto shard_shots = [&](std::uint64_t s) {
    return std::min(kShardShots, shots - s * kShardShots);
  };

  workers = std::max(1u, std::min<unsigned>(
                             workers, static_cast<unsigned>(shards)));
  if (workers == 1) {
    for (std::uint64_t s = 0; s < shards; ++s) {
      partial[s] = detail::run_shard(prob, seed, s, shard_shots(s));
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t s = w; s < shards; s += workers) {
          partial[s] = detail::run_shard(prob, seed, s, shard_shots(s));
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  DetectionStats stats;
  stats.shots = shots;
  stats.seed = seed;
  for (const auto& c : partial) {
    stats.count_d += c.d;
    stats.count_a += c.a;
  }
  return stats;
}

inline DetectionStats monte_carlo(const PerturbationParams& p,
                                  std::uint64_t shots, std::uint64_t seed,
                                  bool mirror_present = true,
                                  unsigned workers = 1) {
  return monte_carlo(perturbed_probabilities(p, mirror_present), shots, seed,
                     workers);
}

// ---------------------------------------------------------------------------
// SNR scan

struct FixedMu {
  double mu = 1.0;
};
struct WeakValueTunedMu {};  // mu c = tan(delta)
struct TanDeltaMu {};        // mu = tan(delta)
using MuPolicy = std::variant<FixedMu, WeakValueTunedMu, TanDeltaMu>;

inline double resolve_mu(const MuPolicy& policy, double delta, int half_cycles) {
  if (const auto* fixed = std::get_if<FixedMu>(&policy)) return fixed->mu;
  if (std::holds_alternative<TanDeltaMu>(policy)) return tan_delta_mu(delta);
  return weak_value_tuned_mu(delta, half_cycles);
}

/// |r_mirror - r_open| / sqrt(se_mirror^2 + se_open^2).
inline double z_score(double r1, double se1, double r2, double se2) {
  const double diff = std::abs(r1 - r2);
  const double se = std::sqrt(se1 * se1 + se2 * se2);
  if (diff == 0.0) return 0.0;
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  return diff / se;
}

/// z-score one expects from `shots` shots per apparatus, using closed-form
/// probabilities in place of counts.
inline double expected_z_score(const PerturbationParams& p, std::uint64_t shots) {
  const auto side = [&](bool mirror) {
    const DetectionProbabilities pr = perturbed_probabilities(p, mirror);
    const double detected = static_cast<double>(shots) * (pr.d + pr.a);
    const double r = ratio(pr.d, pr.a);
    return std::pair{r, std::sqrt(std::max(0.0, 1.0 - r * r) / detected)};
  };
  const auto [r1, se1] = side(true);
  const auto [r2, se2] = side(false);
  return z_score(r1, se1, r2, se2);
}

struct ScanRow {
  double delta = 0.0;
  double mu = 0.0;
  int half_cycles = 0;
  double p_d = 0.0;             // mirror present
  double p_a = 0.0;             // mirror present
  double ratio_closed = 0.0;    // probability ratio, mirror present
  double ratio_amplitude = 0.0; // amplitude ratio, mirror present
  double ratio_empirical = 0.0; // from counts, mirror present
  double standard_error = 0.0;
  double z = 0.0;               // mirror vs no mirror, from counts
  DetectionStats mirror_stats;
  DetectionStats open_stats;
};

/// For each delta, run the experiment with and without the mirror (separate
/// seeded streams) and report how well the two can be told apart. Rows where
/// nothing is detected carry NaN estimates and z = 0.
inline std::vector<ScanRow> snr_scan(const std::vector<double>& deltas,
                                     const MuPolicy& policy, int half_cycles,
                                     std::uint64_t shots, std::uint64_t seed,
                                     unsigned workers = 1) {
  if (deltas.empty()) throw std::invalid_argument("delta grid is empty");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<ScanRow> rows;
  rows.reserve(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    ScanRow row;
    row.delta = deltas[i];
    row.half_cycles = half_cycles;
    row.mu = resolve_mu(policy, deltas[i], half_cycles);
    const PerturbationParams p{deltas[i], row.mu, half_cycles};
    const DetectionProbabilities pr = perturbed_probabilities(p, true);
    row.p_d = pr.d;
    row.p_a = pr.a;
    const bool defined = pr.d + pr.a > 0.0;
    row.ratio_closed = defined ? ratio(pr.d, pr.a) : nan;
    const bool h_arm = row.mu * survival_amplitude_closed_form(half_cycles) > 0.0;
    row.ratio_amplitude = h_arm ? amplitude_ratio(p, true) : nan;

    row.mirror_stats = monte_carlo(p, shots, derive_seed(seed, 2 * i), true, workers);
    row.open_stats = monte_carlo(p, shots, derive_seed(seed, 2 * i + 1), false, workers);
    if (row.mirror_stats.detected() > 0 && row.open_stats.detected() > 0) {
      row.ratio_empirical = row.mirror_stats.ratio();
      row.standard_error = row.mirror_stats.standard_error();
      row.z = z_score(row.ratio_empirical, row.standard_error,
                      row.open_stats.ratio(), row.open_stats.standard_error());
    } else {
      row.ratio_empirical = nan;
      row.standard_error = nan;
      row.z = 0.0;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cheshire

#endif  // CHESHIRE_EXPERIMENTS_HPP
