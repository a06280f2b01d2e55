#include "qlink/degradation.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "qlink/errors.hpp"

namespace qlink {
namespace {

constexpr double kSpeedOfLight = 299'792'458.0;

bool intermittent_enabled(const ServoSpec& s) {
  return s.correction_period_ms > 0.0 && std::isfinite(s.correction_period_ms);
}

double loop_rate(const ServoSpec& s) { return 2.0 * std::numbers::pi * s.continuous_bandwidth_hz; }

}  // namespace

PhaseNoiseModel PhaseNoiseModel::gaussian(double sigma_rad) {
  if (!(sigma_rad >= 0.0)) throw ValidationError("phase noise sigma must be nonnegative");
  return PhaseNoiseModel(GaussianPhase{sigma_rad});
}

PhaseNoiseModel PhaseNoiseModel::uniform(double width_rad) {
  if (!(width_rad >= 0.0)) throw ValidationError("uniform phase width must be nonnegative");
  return PhaseNoiseModel(UniformPhase{width_rad});
}

PhaseNoiseModel PhaseNoiseModel::empirical(std::vector<double> samples) {
  if (samples.empty()) throw ValidationError("empirical phase noise needs at least one sample");
  return PhaseNoiseModel(EmpiricalPhase{std::move(samples)});
}

bool PhaseNoiseModel::is_noiseless() const {
  if (const auto* g = std::get_if<GaussianPhase>(&kind_)) return g->sigma_rad == 0.0;
  if (const auto* u = std::get_if<UniformPhase>(&kind_)) return u->width_rad == 0.0;
  return false;
}

double PhaseNoiseModel::draw(std::mt19937_64& rng) const {
  return std::visit(
      [&rng](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianPhase>) {
          if (k.sigma_rad == 0.0) return 0.0;
          return std::normal_distribution<double>(0.0, k.sigma_rad)(rng);
        } else if constexpr (std::is_same_v<T, UniformPhase>) {
          if (k.width_rad == 0.0) return 0.0;
          return std::uniform_real_distribution<double>(-0.5 * k.width_rad, 0.5 * k.width_rad)(rng);
        } else {
          std::uniform_int_distribution<std::size_t> pick(0, k.samples.size() - 1);
          return k.samples[pick(rng)];
        }
      },
      kind_);
}

double c_ph(const PhaseNoiseModel& noise) {
  return std::visit(
      [](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianPhase>) {
          return std::exp(-0.5 * k.sigma_rad * k.sigma_rad);
        } else if constexpr (std::is_same_v<T, UniformPhase>) {
          const double h = 0.5 * k.width_rad;
          return h == 0.0 ? 1.0 : std::sin(h) / h;
        } else {
          double acc = 0.0;
          for (double s : k.samples) acc += std::cos(s);
          return acc / static_cast<double>(k.samples.size());
        }
      },
      noise.kind());
}

BellDiagonalMix scale_theta_visibility(const BellDiagonalMix& mix, double factor) {
  if (!(std::abs(factor) <= 1.0)) throw DomainError("visibility factor must lie in [-1, 1]");
  mix.validate();
  const double sum = mix.c_plus + mix.c_minus;
  const double diff = (mix.c_plus - mix.c_minus) * factor;
  BellDiagonalMix out = mix;
  out.c_plus = 0.5 * (sum + diff);
  out.c_minus = 0.5 * (sum - diff);
  return out;
}

BellDiagonalMix apply_phase_noise(const BellDiagonalMix& mix, double c_ph) { return scale_theta_visibility(mix, c_ph); }

double snr_visibility_scale(double v, double p_coin, double p_noise) {
  if (!(p_coin > 0.0)) throw DomainError("coincidence probability must be positive");
  if (!(p_noise >= 0.0)) throw DomainError("noise probability must be nonnegative");
  return v * p_coin / (p_coin + p_noise);
}

CoincidenceNoise coincidence_noise_probs(const LinkParams& params, double snr, double p_as) {
  if (!(snr > 0.0)) throw DomainError("SNR must be positive");
  if (!(p_as >= 0.0 && p_as <= 1.0)) throw DomainError("accidental read-out probability must lie in [0, 1]");
  params.validate();
  const double herald = params.chi * params.eta_det_snspd;
  const double p_coin = 2.0 * herald * params.eta_ret * params.eta_det_si;
  const double p_noise = std::isinf(snr) ? 0.0 : 2.0 * (herald / snr) * p_as * params.eta_det_si;
  return {p_coin, p_noise};
}

void WaveformSpec::validate() const {
  if (!(width_ns > 0.0)) throw ValidationError("waveform width must be positive");
  if (!std::isfinite(arrival_offset_ns)) throw ValidationError("arrival offset must be finite");
}

double mismatch_penalty(const WaveformSpec& a, const WaveformSpec& b) {
  a.validate();
  b.validate();
  // Amplitudes exp(-(t - t0)^2 / (2 w^2)), normalized.
  const double wa2 = a.width_ns * a.width_ns;
  const double wb2 = b.width_ns * b.width_ns;
  const double dt = a.arrival_offset_ns - b.arrival_offset_ns;
  const double shape = std::sqrt(2.0 * a.width_ns * b.width_ns / (wa2 + wb2));
  const double overlap = shape * std::exp(-dt * dt / (2.0 * (wa2 + wb2)));
  return 1.0 - overlap;
}

double calibrate_waveform_width(double dt_ns, double penalty) {
  if (!(dt_ns > 0.0)) throw DomainError("arrival offset must be positive");
  if (!(penalty > 0.0 && penalty < 1.0)) throw DomainError("penalty must lie in (0, 1)");
  return dt_ns / std::sqrt(-4.0 * std::log1p(-penalty));
}

void ServoSpec::validate() const {
  if (!(diffusion_rad2_per_s >= 0.0) || !(continuous_bandwidth_hz >= 0.0) || !(step_us >= 0.0)) {
    throw ValidationError("servo parameters must be nonnegative");
  }
  if (!(loop_gain >= 0.0 && loop_gain <= 2.0)) throw ValidationError("intermittent loop gain must lie in [0, 2]");
}

PhaseNoiseModel servo_residual(const ServoSpec& servo, double duration_s, std::uint64_t seed) {
  servo.validate();
  if (!(duration_s > 0.0)) throw DomainError("servo duration must be positive");
  const double k = loop_rate(servo);
  double dt = servo.step_us * 1e-6;
  if (dt == 0.0) dt = k > 0.0 ? std::min(1e-4, 0.05 / k) : 1e-4;
  const auto steps = static_cast<std::size_t>(std::ceil(duration_s / dt));

  const bool intermittent = intermittent_enabled(servo);
  const auto steps_per_correction =
      intermittent ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(servo.correction_period_ms * 1e-3 / dt)))
                   : 0;

  const double decay = std::exp(-k * dt);
  const double kick = k > 0.0 ? std::sqrt(servo.diffusion_rad2_per_s * (1.0 - decay * decay) / (2.0 * k))
                              : std::sqrt(servo.diffusion_rad2_per_s * dt);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> residual;
  residual.reserve(steps);
  double phase = 0.0;
  for (std::size_t n = 1; n <= steps; ++n) {
    phase = phase * decay + kick * normal(rng);
    residual.push_back(phase);
    if (intermittent && n % steps_per_correction == 0) phase *= (1.0 - servo.loop_gain);
  }
  return PhaseNoiseModel::empirical(std::move(residual));
}

double servo_residual_variance(const ServoSpec& servo) {
  servo.validate();
  const double d = servo.diffusion_rad2_per_s;
  const double k = loop_rate(servo);
  if (!intermittent_enabled(servo)) {
    if (k == 0.0) return std::numeric_limits<double>::infinity();
    return d / (2.0 * k);
  }
  if (servo.loop_gain != 1.0) throw DomainError("analytic residual needs a full-reset intermittent loop");
  const double t = servo.correction_period_ms * 1e-3;
  if (k == 0.0) return 0.5 * d * t;
  const double x = 2.0 * k * t;
  return d / (2.0 * k) * (1.0 - (-std::expm1(-x)) / x);
}

double calibrate_servo_diffusion(const ServoSpec& servo, double target_sigma_rad) {
  if (!(target_sigma_rad >= 0.0)) throw DomainError("target sigma must be nonnegative");
  ServoSpec unit = servo;
  unit.diffusion_rad2_per_s = 1.0;
  const double per_unit = servo_residual_variance(unit);
  if (!std::isfinite(per_unit) || per_unit <= 0.0) throw DomainError("servo has no finite stationary residual");
  return target_sigma_rad * target_sigma_rad / per_unit;
}

MotPhaseSpread mot_phase_spread(double diameter_m, double detuning_hz) {
  if (!(diameter_m >= 0.0) || !(detuning_hz >= 0.0)) throw DomainError("diameter and detuning must be nonnegative");
  const double spread = 2.0 * std::numbers::pi * diameter_m * detuning_hz / kSpeedOfLight;
  return {spread, spread / std::sqrt(12.0)};
}

double dfg_telecom_wavelength(double lambda_signal_m, double lambda_pump_m) {
  if (!(lambda_signal_m > 0.0 && lambda_pump_m > lambda_signal_m)) {
    throw DomainError("pump wavelength must exceed the signal wavelength");
  }
  return 1.0 / (1.0 / lambda_signal_m - 1.0 / lambda_pump_m);
}

double dfg_phase_invariance_check(double x_m, double chip_length_m, double lambda_signal_m, double lambda_pump_m,
                                  double lambda_telecom_m) {
  if (!(chip_length_m >= 0.0) || !(x_m >= 0.0 && x_m <= chip_length_m)) {
    throw DomainError("conversion point must lie inside the chip");
  }
  if (!(lambda_signal_m > 0.0 && lambda_pump_m > 0.0 && lambda_telecom_m > 0.0)) {
    throw DomainError("wavelengths must be positive");
  }
  const double ks = 1.0 / lambda_signal_m;
  const double kp = 1.0 / lambda_pump_m;
  const double kt = 1.0 / lambda_telecom_m;
  if (std::abs(ks - kp - kt) > 1e-9 * ks) throw DomainError("wavelengths violate energy conservation");
  return x_m * ks - x_m * kp + (chip_length_m - x_m) * kt;
}

}  // namespace qlink
