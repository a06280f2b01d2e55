#include "qlink/link_budget.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qlink/errors.hpp"

namespace qlink {
namespace {

void require_unit_interval(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

void ChannelSpec::validate() const {
  if (!(length_km >= 0.0)) throw ValidationError("channel length must be nonnegative");
  if (!(attenuation_db_per_km >= 0.0)) throw ValidationError("attenuation must be nonnegative");
  if (!std::isfinite(extra_loss_db)) throw ValidationError("extra loss must be finite");
  if (!(propagation_us_per_km >= 0.0)) throw ValidationError("propagation delay must be nonnegative");
}

void LinkParams::validate() const {
  require_unit_interval(chi, "chi");
  if (chi > 0.1) throw ValidationError("chi above 0.1 is outside the low-excitation model");
  require_unit_interval(eta_qfc, "eta_qfc");
  require_unit_interval(eta_loss, "eta_loss");
  require_unit_interval(eta_ret, "eta_ret");
  require_unit_interval(eta_det_snspd, "eta_det_snspd");
  require_unit_interval(eta_det_si, "eta_det_si");
  if (!(dark_rate_hz >= 0.0) || !(dark_rate_si_hz >= 0.0)) throw ValidationError("dark rates must be nonnegative");
  if (!(gate_ns >= 0.0)) throw ValidationError("gate must be nonnegative");
  channel.validate();
}

void TimingModel::validate() const {
  if (!(cycle_hz > 0.0)) throw ConfigError("cycle rate must be positive");
  if (!(mot_ms >= 0.0) || !(trial_us >= 0.0) || trials_per_cycle < 0) {
    throw ConfigError("timing entries must be nonnegative");
  }
  const double period_ms = 1e3 / cycle_hz;
  const double busy_ms = mot_ms + trials_per_cycle * trial_us * 1e-3;
  if (busy_ms > period_ms * (1.0 + 1e-12)) {
    throw ConfigError("loading (" + std::to_string(mot_ms) + " ms) plus trials (" +
                      std::to_string(trials_per_cycle * trial_us * 1e-3) + " ms) exceed the " +
                      std::to_string(period_ms) + " ms cycle");
  }
}

double fiber_transmission(const ChannelSpec& channel) {
  channel.validate();
  const double loss_db = channel.length_km * channel.attenuation_db_per_km + channel.extra_loss_db;
  return std::pow(10.0, -loss_db / 10.0);
}

double qfc_end_to_end(double eta_conv, double filter_transmission, double coupling_efficiency) {
  require_unit_interval(eta_conv, "conversion efficiency");
  require_unit_interval(filter_transmission, "filter transmission");
  require_unit_interval(coupling_efficiency, "coupling efficiency");
  return eta_conv * filter_transmission * coupling_efficiency;
}

double qfc_snr(double chi, double eta_conv, double noise_rate_hz, double gate_ns, double trial_rate_hz) {
  if (!(gate_ns > 0.0) || !(trial_rate_hz > 0.0)) throw DomainError("gate and trial rate must be positive");
  if (!(noise_rate_hz >= 0.0)) throw DomainError("noise rate must be nonnegative");
  const double signal = chi * eta_conv;
  const double noise = noise_rate_hz * gate_ns * 1e-9;
  if (noise == 0.0) return signal > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return signal / noise;
}

double p_ent_spi(const LinkParams& params) {
  params.validate();
  return 2.0 * params.chi * params.local_herald_efficiency() * std::sqrt(fiber_transmission(params.channel));
}

double p_ent_tpi(const LinkParams& arm_a, const LinkParams& arm_b) {
  arm_a.validate();
  arm_b.validate();
  const auto arm = [](const LinkParams& p) {
    return p.chi * p.local_herald_efficiency() * fiber_transmission(p.channel);
  };
  return 0.5 * arm(arm_a) * arm(arm_b);
}

double communication_time_s(const ChannelSpec& channel) {
  channel.validate();
  return channel.length_km * channel.propagation_us_per_km * 1e-6;
}

double t_ent(double p_ent, const ChannelSpec& channel) {
  if (!(p_ent > 0.0)) throw DomainError("entangling probability must be positive");
  return communication_time_s(channel) / p_ent;
}

DutyCycle duty_cycle(const TimingModel& timing) {
  timing.validate();
  const double period_s = 1.0 / timing.cycle_hz;
  return {timing.cycle_hz * timing.trials_per_cycle, timing.trials_per_cycle * timing.trial_us * 1e-6 / period_s};
}

double calibrate_eta_loss(double measured_p_ent, const LinkParams& params) {
  if (!(measured_p_ent > 0.0)) throw DomainError("measured entangling probability must be positive");
  LinkParams unit = params;
  unit.eta_loss = 1.0;
  const double per_unit_loss = p_ent_spi(unit);
  if (!(per_unit_loss > 0.0)) throw DomainError("remaining link factors must be positive");
  const double eta = measured_p_ent / per_unit_loss;
  if (eta > 1.0) {
    throw CalibrationError("calibrated eta_loss " + std::to_string(eta) + " exceeds 1");
  }
  return eta;
}

}  // namespace qlink
