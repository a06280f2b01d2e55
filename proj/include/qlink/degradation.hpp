#pragma once

// Penalty models that shrink interference visibility: residual interferometer
// phase noise, detector/conversion noise, temporal-mode mismatch, and the
// phase spreads set by ensemble size and the conversion waveguide.

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "qlink/link_budget.hpp"
#include "qlink/protocol_states.hpp"

namespace qlink {

struct GaussianPhase {
  double sigma_rad = 0.0;
};
struct UniformPhase {
  double width_rad = 0.0;  ///< full width of the flat distribution
};
struct EmpiricalPhase {
  std::vector<double> samples;
};

/// Distribution of the residual relative phase of an interferometer.
class PhaseNoiseModel {
 public:
  using Kind = std::variant<GaussianPhase, UniformPhase, EmpiricalPhase>;

  PhaseNoiseModel() : kind_(GaussianPhase{0.0}) {}
  static PhaseNoiseModel none() { return {}; }
  static PhaseNoiseModel gaussian(double sigma_rad);
  static PhaseNoiseModel uniform(double width_rad);
  static PhaseNoiseModel empirical(std::vector<double> samples);

  const Kind& kind() const { return kind_; }
  bool is_noiseless() const;

  /// One phase draw; empirical models resample their stored values.
  double draw(std::mt19937_64& rng) const;

 private:
  explicit PhaseNoiseModel(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

/// Mean of cos(delta_theta) under the model: exp(-sigma^2/2) for Gaussian
/// noise, sinc(width/2) for uniform noise, the sample mean otherwise.
double c_ph(const PhaseNoiseModel& noise);

/// Multiplies c+ - c- by `factor` while keeping c00, c11 and c+ + c- fixed.
/// Throws DomainError for |factor| > 1.
BellDiagonalMix scale_theta_visibility(const BellDiagonalMix& mix, double factor);

/// Fringe damping by a phase-noise coefficient.
BellDiagonalMix apply_phase_noise(const BellDiagonalMix& mix, double c_ph);

/// V * p_coin / (p_coin + p_noise). Throws DomainError for p_coin <= 0 or
/// negative p_noise.
double snr_visibility_scale(double v, double p_coin, double p_noise);

struct CoincidenceNoise {
  double p_coin;
  double p_noise;
};

/// p_coin = 2 chi eta_SN eta_r eta_Si, p_noise = 2 (chi eta_SN / snr) p_as eta_Si,
/// where p_as is the read-out click probability in a window whose herald came
/// from noise. An infinite snr yields p_noise = 0.
CoincidenceNoise coincidence_noise_probs(const LinkParams& params, double snr, double p_as);

/// Gaussian temporal mode; width is the 1/e half-width of the intensity.
struct WaveformSpec {
  double width_ns = 10.0;
  double arrival_offset_ns = 0.0;

  void validate() const;
};

/// 1 - |<a|b>|. Equal widths give 1 - exp(-dt^2 / (4 w^2)).
double mismatch_penalty(const WaveformSpec& a, const WaveformSpec& b);

/// Equal-width Gaussian width reproducing `penalty` at arrival offset `dt_ns`.
double calibrate_waveform_width(double dt_ns, double penalty);

/// Two-loop phase stabilization: a Wiener drift, a continuous first-order
/// loop and an intermittent correction that removes `loop_gain` of the
/// accumulated phase once per period.
struct ServoSpec {
  double diffusion_rad2_per_s = 0.0;
  double correction_period_ms = 20.0;  ///< <= 0 or inf disables the intermittent loop
  double continuous_bandwidth_hz = 0.0;
  double loop_gain = 1.0;
  double step_us = 0.0;  ///< integration step; 0 picks one from the bandwidth

  void validate() const;
};

/// Simulated residual phase, one sample per integration step.
PhaseNoiseModel servo_residual(const ServoSpec& servo, double duration_s, std::uint64_t seed);

/// Time-averaged residual variance for a full-reset (loop_gain = 1) or purely
/// continuous servo. Throws DomainError for partial intermittent gains.
double servo_residual_variance(const ServoSpec& servo);

/// Diffusion constant giving the requested residual standard deviation.
double calibrate_servo_diffusion(const ServoSpec& servo, double target_sigma_rad);

struct MotPhaseSpread {
  double delta_theta_rad;
  double sigma_rad;
};

/// Phase spread across an ensemble of extent `diameter_m` for two fields
/// detuned by `detuning_hz`; the emission point is taken as uniform.
MotPhaseSpread mot_phase_spread(double diameter_m, double detuning_hz);

/// Phase (in cycles) accumulated through a difference-frequency chip of
/// length `chip_length_m` when conversion happens at `x_m` from the front
/// facet. Wavelengths in meters. Throws DomainError unless
/// 1/signal = 1/pump + 1/telecom within 1e-9 relative.
double dfg_phase_invariance_check(double x_m, double chip_length_m, double lambda_signal_m, double lambda_pump_m,
                                  double lambda_telecom_m);

/// Telecom wavelength fixed by energy conservation.
double dfg_telecom_wavelength(double lambda_signal_m, double lambda_pump_m);

}  // namespace qlink
