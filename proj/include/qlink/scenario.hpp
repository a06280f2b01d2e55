#pragma once

// Scenario configuration: a JSON document with one section per model type,
// strict key checking, a canonical dump, and the bundled presets.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qlink/degradation.hpp"
#include "qlink/link_budget.hpp"
#include "qlink/montecarlo.hpp"

namespace qlink {

enum class NoiseKind { None, Gaussian, Uniform, Servo };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  double sigma_rad = 0.0;         ///< Gaussian
  double width_rad = 0.0;         ///< uniform
  double servo_duration_s = 2.0;  ///< simulated record length for the servo model
};

/// Conversion-module breakdown and its noise figure, used by the budget report.
struct QfcSpec {
  double conversion_efficiency = 1.0;
  double filter_transmission = 1.0;
  double coupling_efficiency = 1.0;
  double noise_rate_hz = 0.0;
};

struct RunKnobs {
  std::uint64_t n_trials = 1'000'000;
  std::uint64_t seed = 1;
  std::vector<double> theta_grid;
  int excitation_cutoff = 0;
  double truncation_tolerance = 1e-6;
  unsigned threads = 0;
  double tpi_filter_efficiency = 0.98;
  double tpi_flip_rate = -1.0;
};

struct ScenarioConfig {
  std::string name = "custom";
  Scheme scheme = Scheme::SPI;
  LinkParams node_a{};
  LinkParams node_b{};
  TimingModel timing{};
  QfcSpec qfc{};
  NoiseSpec noise{};
  ServoSpec servo{};
  WaveformSpec waveform_a{};
  WaveformSpec waveform_b{};
  double write_out_hom = 0.0;  ///< HOM visibility of the write-out photons, in [0, 0.5]
  double read_out_hom = 0.0;
  std::optional<double> calibrate_p_ent;  ///< when set, eta_loss of both nodes is solved from it
  RunKnobs run{};

  /// Throws ConfigError (wrapping any module validation failure) if invalid.
  void validate() const;

  PhaseNoiseModel noise_model() const;
  OverlapPair overlaps() const;
  RunConfig run_config() const;
};

/// Parses and validates a JSON document. Unknown keys, wrong types and
/// invalid values throw ConfigError naming the offending field; syntax errors
/// report line and column. A present `calibrate_p_ent` overwrites eta_loss.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Canonical JSON (sorted keys, two-space indent) that parse_config accepts.
std::string dump_config(const ScenarioConfig& config);

/// 64-bit FNV-1a of the canonical dump, as 16 hex digits. The thread count
/// does not change results and is left out.
std::string config_hash(const ScenarioConfig& config);

std::vector<std::string> preset_names();
/// Throws ConfigError listing valid names for an unknown preset.
ScenarioConfig preset(const std::string& name);

}  // namespace qlink
