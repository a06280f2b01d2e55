#pragma once

// Efficiency, rate and timing arithmetic for a two-node heralded link.

namespace qlink {

/// Fiber span. For the single-photon scheme this is the full node-to-node
/// separation; for the two-photon scheme it is one node-to-station arm.
struct ChannelSpec {
  double length_km = 0.0;
  double attenuation_db_per_km = 0.3;
  double extra_loss_db = 0.0;
  double propagation_us_per_km = 5.0;

  void validate() const;
};

/// Per-node, per-trial efficiencies and detector figures.
struct LinkParams {
  double chi = 0.015;             ///< excitation probability per trial
  double eta_qfc = 1.0;           ///< frequency-conversion end-to-end efficiency
  double eta_loss = 1.0;          ///< local collection/coupling efficiency
  double eta_ret = 0.5;           ///< spin-wave retrieval efficiency
  double eta_det_snspd = 0.5;     ///< herald detector efficiency
  double eta_det_si = 0.7;        ///< read-out detector efficiency
  double dark_rate_hz = 100.0;    ///< herald detector dark-count rate
  double dark_rate_si_hz = 0.0;   ///< read-out detector dark-count rate
  double gate_ns = 200.0;         ///< detection window per trial
  ChannelSpec channel{};

  /// Throws ValidationError if an efficiency leaves [0, 1], a rate is
  /// negative, or chi exceeds 0.1.
  void validate() const;

  /// eta_qfc * eta_loss * eta_det_snspd: everything between memory and
  /// herald detector except the fiber.
  double local_herald_efficiency() const { return eta_qfc * eta_loss * eta_det_snspd; }
};

struct TimingModel {
  double cycle_hz = 50.0;
  double mot_ms = 18.0;
  double trial_us = 5.0;
  int trials_per_cycle = 400;

  /// Throws ConfigError if loading plus trials overrun the cycle period.
  void validate() const;
};

/// 10^(-(length * attenuation + extra) / 10).
double fiber_transmission(const ChannelSpec& channel);

/// Product of conversion, filter and fiber-coupling efficiencies.
double qfc_end_to_end(double eta_conv, double filter_transmission, double coupling_efficiency);

/// chi * eta_conv / (noise_rate * gate); +infinity for a noiseless converter.
/// The trial rate cancels and is accepted only for validation.
double qfc_snr(double chi, double eta_conv, double noise_rate_hz, double gate_ns, double trial_rate_hz);

/// Single-photon-interference success probability per trial,
/// 2 chi eta_qfc eta_loss sqrt(eta_fiber) eta_det. Dark counts excluded.
double p_ent_spi(const LinkParams& params);

/// Two-photon-interference success probability per trial. Each arm must
/// deliver its photon, chi * eta_qfc * eta_loss * eta_fiber(arm) * eta_det,
/// and a linear-optics BSM resolves half of the Bell states. Leading order in
/// chi; no such formula is published for the experiment, so this is the
/// textbook linear-optics derivation.
double p_ent_tpi(const LinkParams& arm_a, const LinkParams& arm_b);

/// Heralding latency length * propagation.
double communication_time_s(const ChannelSpec& channel);

/// Mean time per heralded pair T_com / p_ent. Throws DomainError for p_ent <= 0.
double t_ent(double p_ent, const ChannelSpec& channel);

struct DutyCycle {
  double trials_per_second;
  double duty_fraction;
};

DutyCycle duty_cycle(const TimingModel& timing);

/// Solves p_ent_spi(params with eta_loss = x) = measured_p_ent for x.
/// Throws DomainError for nonpositive inputs and CalibrationError if the
/// solution leaves [0, 1].
double calibrate_eta_loss(double measured_p_ent, const LinkParams& params);

}  // namespace qlink
