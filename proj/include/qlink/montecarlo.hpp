#pragma once

// Seeded trial engine for the single-photon (SPI) and two-photon (TPI)
// entangling schemes, and the exact enumeration the SPI engine converges to.
//
// SPI model: each node holds a two-mode squeezed spin-wave/write-out pair
// with p(n) proportional to chi^n up to an excitation cutoff. Write-out
// photons pass a pure-loss channel, the second node's photon is split into
// a component overlapping the first node's mode and an orthogonal one, and
// a balanced beamsplitter feeds two threshold detectors with dark counts. A
// herald is exactly one click. Heralded spin-waves are retrieved through a
// second loss channel and either detected directly (Fock-visibility setting)
// or interfered with relative phase theta (fringe settings). Settings are
// assigned round-robin by trial index: the direct setting first, then the
// theta grid in order.

#include <cstdint>
#include <optional>
#include <vector>

#include "qlink/core_modes.hpp"
#include "qlink/degradation.hpp"
#include "qlink/link_budget.hpp"
#include "qlink/protocol_states.hpp"

namespace qlink {

enum class Scheme { SPI, TPI };

struct OverlapPair {
  ModeOverlap write_out = ModeOverlap::identical();
  ModeOverlap read_out = ModeOverlap::identical();
};

struct RunConfig {
  std::uint64_t n_trials = 1'000'000;
  std::uint64_t seed = 1;
  std::vector<double> theta_grid;  ///< radians; empty selects eight equally spaced angles
  Scheme scheme = Scheme::SPI;
  LinkParams params_a{};
  LinkParams params_b{};
  PhaseNoiseModel noise{};  ///< SPI: fringe phase noise; TPI: analyzer jitter
  OverlapPair overlaps{};

  int excitation_cutoff = 0;           ///< 0 picks the smallest cutoff meeting the tolerance
  double truncation_tolerance = 1e-6;  ///< bound on the dropped tail chi^(K+1)
  unsigned threads = 0;                ///< 0 uses the hardware concurrency

  double tpi_filter_efficiency = 0.98;  ///< polarization-drift filtering in each arm
  double tpi_flip_rate = -1.0;          ///< < 0 derives it from the write-out overlap

  /// Throws ValidationError for zero trials, invalid link parameters or
  /// tolerances, and TruncationError if the cutoff cannot meet the tolerance.
  void validate() const;
  std::vector<double> effective_theta_grid() const;
  int effective_cutoff() const;
};

/// Smallest K with max(chi_a, chi_b)^(K+1) <= tolerance, capped at 6.
/// Throws TruncationError when no such K exists.
int select_excitation_cutoff(double chi_a, double chi_b, double tolerance);

struct ThetaCounts {
  double theta = 0.0;
  std::uint64_t heralds = 0;
  std::uint64_t parallel = 0;  ///< herald port 1 with C, or port 2 with D
  std::uint64_t cross = 0;     ///< herald port 1 with D, or port 2 with C
  std::uint64_t both = 0;      ///< C and D together (counted in parallel and cross)

  friend bool operator==(const ThetaCounts&, const ThetaCounts&) = default;
};

struct CountsAccumulator {
  std::uint64_t trials = 0;
  std::uint64_t heralds = 0;
  std::uint64_t false_heralds = 0;  ///< heralds with no photon at either detector
  std::uint64_t heralds_port1 = 0;
  std::uint64_t heralds_port2 = 0;

  std::uint64_t direct_heralds = 0;
  std::uint64_t direct_none = 0;
  std::uint64_t direct_one = 0;
  std::uint64_t direct_both = 0;
  std::vector<ThetaCounts> theta;

  std::uint64_t tpi_population_heralds = 0;
  std::uint64_t tpi_population_same = 0;
  std::uint64_t tpi_population_diff = 0;
  std::uint64_t tpi_coherence_heralds = 0;
  std::uint64_t tpi_coherence_same = 0;
  std::uint64_t tpi_coherence_diff = 0;

  double readout_efficiency = 1.0;  ///< geometric mean over nodes, used to unfold V_F

  CountsAccumulator& operator+=(const CountsAccumulator& other);
  friend bool operator==(const CountsAccumulator&, const CountsAccumulator&) = default;
};

CountsAccumulator run_spi(const RunConfig& config);
CountsAccumulator run_tpi(const RunConfig& config);
/// Dispatches on config.scheme.
CountsAccumulator run(const RunConfig& config);

/// Real-valued counts so the estimator can run on exact expectations.
struct SpiTallies {
  double trials = 0.0;
  double heralds = 0.0;
  double direct_heralds = 0.0;
  double direct_none = 0.0;
  double direct_one = 0.0;
  double direct_both = 0.0;
  std::vector<FringeSample> fringe;  ///< count_c = parallel, count_d = cross
  double readout_efficiency = 1.0;
};

SpiTallies to_tallies(const CountsAccumulator& counts);

struct MixEstimate {
  BellDiagonalMix mix;
  double c00 = 0.0, c00_err = 0.0;
  double v_f = 0.0, v_f_err = 0.0;
  double v_theta = 0.0, v_theta_err = 0.0;
  double f_post = 0.0, f_post_err = 0.0;
  double p_ent = 0.0, p_ent_err = 0.0;
  std::optional<SinusoidFit> fit;
};

/// c00 is the no-click fraction of the direct setting; V_F unfolds the one-
/// and two-click fractions with the read-out efficiency; V_theta is the
/// fitted relative fringe amplitude of the parallel share. The mix is built
/// with min(V_theta, V_F). Throws DegenerateInputError for zero heralds or
/// zero direct-setting heralds and FitError for fewer than four fringe angles.
MixEstimate estimate_mix(const SpiTallies& tallies);
MixEstimate estimate_mix(const CountsAccumulator& counts);

struct TpiEstimate {
  double v1 = 0.0, v1_err = 0.0;
  double v2 = 0.0, v2_err = 0.0;
  double fidelity = 0.0, fidelity_err = 0.0;
  double p_ent = 0.0, p_ent_err = 0.0;
};

/// V1 = (diff - same)/(diff + same) in the population basis, V2 = (same -
/// diff)/(same + diff) in the coherence basis. Throws DegenerateInputError if
/// either basis has no coincidences.
TpiEstimate estimate_tpi(const CountsAccumulator& counts);

struct OracleResult {
  double p_ent = 0.0;
  double p_false_herald = 0.0;  ///< herald probability with no photon present
  int cutoff = 0;
  SpiTallies expected;  ///< expectations for one trial per setting slot
  MixEstimate estimate; ///< estimator applied to `expected`
};

/// Exact expectation of every quantity run_spi samples, without phase noise.
/// Throws TruncationError if the cutoff misses the tolerance.
OracleResult oracle_enumerate(const RunConfig& config);

/// Expected tallies for `config.n_trials` trials.
SpiTallies scale_tallies(const SpiTallies& per_trial, double n_trials);

}  // namespace qlink
