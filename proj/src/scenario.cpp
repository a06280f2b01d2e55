#include "qlink/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qlink/errors.hpp"

namespace qlink {

using nlohmann::json;

namespace {

double deg(double d) { return d * std::numbers::pi / 180.0; }

/// Strict view of one JSON object: every accessed key is recorded and
/// finish() rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
    return v.get<double>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(field(key) + ": expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
    return v.get<int>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    if (!has(key)) return out;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(field(key) + ": expected an array of numbers");
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(field(key) + ": expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  /// Child section; an absent key yields an empty object.
  Section child(const std::string& key) {
    static const json empty = json::object();
    if (!has(key)) return Section(empty, field(key));
    return Section(j_.at(key), field(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(field(key) + ": unknown key");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "/" : path_; }
  std::string field(const std::string& key) const { return path_ + "/" + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ChannelSpec read_channel(Section s, const ChannelSpec& d) {
  ChannelSpec c;
  c.length_km = s.number("length_km", d.length_km);
  c.attenuation_db_per_km = s.number("attenuation_db_per_km", d.attenuation_db_per_km);
  c.extra_loss_db = s.number("extra_loss_db", d.extra_loss_db);
  c.propagation_us_per_km = s.number("propagation_us_per_km", d.propagation_us_per_km);
  s.finish();
  return c;
}

LinkParams read_node(Section s) {
  const LinkParams d;
  LinkParams p;
  p.chi = s.number("chi", d.chi);
  p.eta_qfc = s.number("eta_qfc", d.eta_qfc);
  p.eta_loss = s.number("eta_loss", d.eta_loss);
  p.eta_ret = s.number("eta_ret", d.eta_ret);
  p.eta_det_snspd = s.number("eta_det_snspd", d.eta_det_snspd);
  p.eta_det_si = s.number("eta_det_si", d.eta_det_si);
  p.dark_rate_hz = s.number("dark_rate_hz", d.dark_rate_hz);
  p.dark_rate_si_hz = s.number("dark_rate_si_hz", d.dark_rate_si_hz);
  p.gate_ns = s.number("gate_ns", d.gate_ns);
  p.channel = read_channel(s.child("channel"), d.channel);
  s.finish();
  return p;
}

json write_node(const LinkParams& p) {
  return {{"chi", p.chi},
          {"eta_qfc", p.eta_qfc},
          {"eta_loss", p.eta_loss},
          {"eta_ret", p.eta_ret},
          {"eta_det_snspd", p.eta_det_snspd},
          {"eta_det_si", p.eta_det_si},
          {"dark_rate_hz", p.dark_rate_hz},
          {"dark_rate_si_hz", p.dark_rate_si_hz},
          {"gate_ns", p.gate_ns},
          {"channel",
           {{"length_km", p.channel.length_km},
            {"attenuation_db_per_km", p.channel.attenuation_db_per_km},
            {"extra_loss_db", p.channel.extra_loss_db},
            {"propagation_us_per_km", p.channel.propagation_us_per_km}}}};
}

WaveformSpec read_waveform(Section s) {
  const WaveformSpec d;
  WaveformSpec w;
  w.width_ns = s.number("width_ns", d.width_ns);
  w.arrival_offset_ns = s.number("arrival_offset_ns", d.arrival_offset_ns);
  s.finish();
  return w;
}

const char* scheme_name(Scheme s) { return s == Scheme::SPI ? "SPI" : "TPI"; }

const char* noise_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::None: return "none";
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::Uniform: return "uniform";
    case NoiseKind::Servo: return "servo";
  }
  return "none";
}

void apply_calibration(ScenarioConfig& c) {
  if (!c.calibrate_p_ent) return;
  if (c.scheme != Scheme::SPI) throw ConfigError("/calibrate_p_ent: calibration applies to the SPI scheme only");
  try {
    c.node_a.eta_loss = calibrate_eta_loss(*c.calibrate_p_ent, c.node_a);
    c.node_b.eta_loss = calibrate_eta_loss(*c.calibrate_p_ent, c.node_b);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("/calibrate_p_ent: ") + e.what());
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  const auto guard = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(section) + ": " + e.what());
    } catch (const Error& e) {
      throw ConfigError(std::string(section) + ": " + e.what());
    }
  };
  guard("/node_a", [&] { node_a.validate(); });
  guard("/node_b", [&] { node_b.validate(); });
  guard("/timing", [&] { timing.validate(); });
  guard("/qfc", [&] {
    qfc_end_to_end(qfc.conversion_efficiency, qfc.filter_transmission, qfc.coupling_efficiency);
    if (!(qfc.noise_rate_hz >= 0.0)) throw ValidationError("noise_rate_hz must be nonnegative");
  });
  guard("/noise", [&] {
    if (!(noise.sigma_rad >= 0.0) || !(noise.width_rad >= 0.0) || !(noise.servo_duration_s > 0.0)) {
      throw ValidationError("noise parameters must be nonnegative and the servo duration positive");
    }
  });
  guard("/servo", [&] { servo.validate(); });
  guard("/waveforms/a", [&] { waveform_a.validate(); });
  guard("/waveforms/b", [&] { waveform_b.validate(); });
  guard("/overlaps", [&] {
    overlap_from_hom(write_out_hom);
    overlap_from_hom(read_out_hom);
  });
  guard("/run", [&] { run_config().validate(); });
}

PhaseNoiseModel ScenarioConfig::noise_model() const {
  switch (noise.kind) {
    case NoiseKind::None: return PhaseNoiseModel::none();
    case NoiseKind::Gaussian: return PhaseNoiseModel::gaussian(noise.sigma_rad);
    case NoiseKind::Uniform: return PhaseNoiseModel::uniform(noise.width_rad);
    case NoiseKind::Servo: return servo_residual(servo, noise.servo_duration_s, run.seed);
  }
  return PhaseNoiseModel::none();
}

OverlapPair ScenarioConfig::overlaps() const {
  return {overlap_from_hom(write_out_hom), overlap_from_hom(read_out_hom)};
}

RunConfig ScenarioConfig::run_config() const {
  RunConfig r;
  r.n_trials = run.n_trials;
  r.seed = run.seed;
  r.theta_grid = run.theta_grid;
  r.scheme = scheme;
  r.params_a = node_a;
  r.params_b = node_b;
  r.noise = noise_model();
  r.overlaps = overlaps();
  r.excitation_cutoff = run.excitation_cutoff;
  r.truncation_tolerance = run.truncation_tolerance;
  r.threads = run.threads;
  r.tpi_filter_efficiency = run.tpi_filter_efficiency;
  r.tpi_flip_rate = run.tpi_flip_rate;
  return r;
}

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("syntax error: ") + e.what());
  }

  ScenarioConfig c;
  Section root(j, "");
  c.name = root.text("name", c.name);
  const std::string scheme = root.text("scheme", "SPI");
  if (scheme == "SPI") {
    c.scheme = Scheme::SPI;
  } else if (scheme == "TPI") {
    c.scheme = Scheme::TPI;
  } else {
    throw ConfigError("/scheme: expected \"SPI\" or \"TPI\"");
  }
  c.node_a = read_node(root.child("node_a"));
  c.node_b = read_node(root.child("node_b"));

  {
    Section s = root.child("timing");
    c.timing.cycle_hz = s.number("cycle_hz", c.timing.cycle_hz);
    c.timing.mot_ms = s.number("mot_ms", c.timing.mot_ms);
    c.timing.trial_us = s.number("trial_us", c.timing.trial_us);
    c.timing.trials_per_cycle = s.integer("trials_per_cycle", c.timing.trials_per_cycle);
    s.finish();
  }
  {
    Section s = root.child("qfc");
    c.qfc.conversion_efficiency = s.number("conversion_efficiency", c.qfc.conversion_efficiency);
    c.qfc.filter_transmission = s.number("filter_transmission", c.qfc.filter_transmission);
    c.qfc.coupling_efficiency = s.number("coupling_efficiency", c.qfc.coupling_efficiency);
    c.qfc.noise_rate_hz = s.number("noise_rate_hz", c.qfc.noise_rate_hz);
    s.finish();
  }
  {
    Section s = root.child("noise");
    const std::string kind = s.text("kind", "none");
    if (kind == "none") {
      c.noise.kind = NoiseKind::None;
    } else if (kind == "gaussian") {
      c.noise.kind = NoiseKind::Gaussian;
    } else if (kind == "uniform") {
      c.noise.kind = NoiseKind::Uniform;
    } else if (kind == "servo") {
      c.noise.kind = NoiseKind::Servo;
    } else {
      throw ConfigError("/noise/kind: expected none, gaussian, uniform or servo");
    }
    c.noise.sigma_rad = s.number("sigma_rad", c.noise.sigma_rad);
    c.noise.width_rad = s.number("width_rad", c.noise.width_rad);
    c.noise.servo_duration_s = s.number("servo_duration_s", c.noise.servo_duration_s);
    s.finish();
  }
  {
    Section s = root.child("servo");
    c.servo.diffusion_rad2_per_s = s.number("diffusion_rad2_per_s", c.servo.diffusion_rad2_per_s);
    c.servo.correction_period_ms = s.number("correction_period_ms", c.servo.correction_period_ms);
    c.servo.continuous_bandwidth_hz = s.number("continuous_bandwidth_hz", c.servo.continuous_bandwidth_hz);
    c.servo.loop_gain = s.number("loop_gain", c.servo.loop_gain);
    c.servo.step_us = s.number("step_us", c.servo.step_us);
    s.finish();
  }
  {
    Section s = root.child("waveforms");
    c.waveform_a = read_waveform(s.child("a"));
    c.waveform_b = read_waveform(s.child("b"));
    s.finish();
  }
  {
    Section s = root.child("overlaps");
    c.write_out_hom = s.number("write_out_hom", c.write_out_hom);
    c.read_out_hom = s.number("read_out_hom", c.read_out_hom);
    s.finish();
  }
  if (root.has("calibrate_p_ent")) c.calibrate_p_ent = root.number("calibrate_p_ent", 0.0);
  {
    Section s = root.child("run");
    c.run.n_trials = s.unsigned_integer("n_trials", c.run.n_trials);
    c.run.seed = s.unsigned_integer("seed", c.run.seed);
    c.run.theta_grid = s.numbers("theta_grid");
    c.run.excitation_cutoff = s.integer("excitation_cutoff", c.run.excitation_cutoff);
    c.run.truncation_tolerance = s.number("truncation_tolerance", c.run.truncation_tolerance);
    c.run.threads = static_cast<unsigned>(s.unsigned_integer("threads", c.run.threads));
    c.run.tpi_filter_efficiency = s.number("tpi_filter_efficiency", c.run.tpi_filter_efficiency);
    c.run.tpi_flip_rate = s.number("tpi_flip_rate", c.run.tpi_flip_rate);
    s.finish();
  }
  root.finish();

  apply_calibration(c);
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string dump_config(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["scheme"] = scheme_name(c.scheme);
  j["node_a"] = write_node(c.node_a);
  j["node_b"] = write_node(c.node_b);
  j["timing"] = {{"cycle_hz", c.timing.cycle_hz},
                 {"mot_ms", c.timing.mot_ms},
                 {"trial_us", c.timing.trial_us},
                 {"trials_per_cycle", c.timing.trials_per_cycle}};
  j["qfc"] = {{"conversion_efficiency", c.qfc.conversion_efficiency},
              {"filter_transmission", c.qfc.filter_transmission},
              {"coupling_efficiency", c.qfc.coupling_efficiency},
              {"noise_rate_hz", c.qfc.noise_rate_hz}};
  j["noise"] = {{"kind", noise_name(c.noise.kind)},
                {"sigma_rad", c.noise.sigma_rad},
                {"width_rad", c.noise.width_rad},
                {"servo_duration_s", c.noise.servo_duration_s}};
  j["servo"] = {{"diffusion_rad2_per_s", c.servo.diffusion_rad2_per_s},
                {"correction_period_ms", c.servo.correction_period_ms},
                {"continuous_bandwidth_hz", c.servo.continuous_bandwidth_hz},
                {"loop_gain", c.servo.loop_gain},
                {"step_us", c.servo.step_us}};
  j["waveforms"] = {
      {"a", {{"width_ns", c.waveform_a.width_ns}, {"arrival_offset_ns", c.waveform_a.arrival_offset_ns}}},
      {"b", {{"width_ns", c.waveform_b.width_ns}, {"arrival_offset_ns", c.waveform_b.arrival_offset_ns}}}};
  j["overlaps"] = {{"write_out_hom", c.write_out_hom}, {"read_out_hom", c.read_out_hom}};
  if (c.calibrate_p_ent) j["calibrate_p_ent"] = *c.calibrate_p_ent;
  j["run"] = {{"n_trials", c.run.n_trials},
              {"seed", c.run.seed},
              {"theta_grid", c.run.theta_grid},
              {"excitation_cutoff", c.run.excitation_cutoff},
              {"truncation_tolerance", c.run.truncation_tolerance},
              {"threads", c.run.threads},
              {"tpi_filter_efficiency", c.run.tpi_filter_efficiency},
              {"tpi_flip_rate", c.run.tpi_flip_rate}};
  return j.dump(2) + "\n";
}

std::string config_hash(const ScenarioConfig& c) {
  ScenarioConfig keyed = c;
  keyed.run.threads = 0;
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : dump_config(keyed)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Presets. Values marked "published" are reported figures from the two-node
// experiment; "derived" values follow from them by the stated calibration;
// "assumed" values are not published and were chosen as plausible defaults.

std::vector<std::string> preset_names() { return {"paper_local", "paper_10km", "paper_50km", "paper_field_22km"}; }

namespace {

ScenarioConfig spi_base() {
  ScenarioConfig c;
  c.scheme = Scheme::SPI;
  LinkParams p;
  p.chi = 0.015;           // published: optimal working point
  p.eta_det_snspd = 0.5;   // published: SNSPD efficiency
  p.dark_rate_hz = 100.0;  // published: SNSPD dark counts
  p.gate_ns = 200.0;       // assumed detection window
  p.eta_ret = 0.5;         // assumed split of the published 35% read-out efficiency
  p.eta_det_si = 0.7;      // assumed, product with eta_ret gives 0.35
  c.node_a = c.node_b = p;
  c.write_out_hom = 0.082;  // published HOM visibility of write-out photons
  c.read_out_hom = 0.085;   // published read-out figure used by the visibility bound
  c.run.n_trials = 4'000'000;
  return c;
}

ServoSpec servo_for(double sigma_rad) {
  ServoSpec s;
  s.continuous_bandwidth_hz = 100.0;  // assumed loop bandwidth
  s.correction_period_ms = 20.0;      // one intermittent correction per 50 Hz cycle
  s.loop_gain = 1.0;
  s.diffusion_rad2_per_s = calibrate_servo_diffusion(s, sigma_rad);
  return s;
}

ScenarioConfig spi_long(double length_km, double p_ent, double sigma_deg, double mismatch_ns) {
  ScenarioConfig c = spi_base();
  for (LinkParams* p : {&c.node_a, &c.node_b}) {
    p->eta_qfc = 0.33;  // published end-to-end conversion efficiency
    p->channel.length_km = length_km;
  }
  c.qfc = {0.70, 0.80, 0.60, 2500.0};  // published breakdown; noise rate assumed
  c.calibrate_p_ent = p_ent;             // published entangling probability
  c.noise.kind = NoiseKind::Gaussian;
  c.noise.sigma_rad = deg(sigma_deg);  // published residual phase fluctuation
  c.servo = servo_for(deg(sigma_deg));
  const double width = calibrate_waveform_width(2.10, 5.8e-3);  // derived from the 10 km mismatch
  c.waveform_a = {width, 0.0};
  c.waveform_b = {width, mismatch_ns};  // published arrival mismatch
  return c;
}

}  // namespace

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  if (name == "paper_local") {
    c = spi_base();
    for (LinkParams* p : {&c.node_a, &c.node_b}) p->channel.length_km = 0.01;  // published 10 m fiber
    c.calibrate_p_ent = 0.0132;  // published local entangling probability
    c.run.n_trials = 1'000'000;
  } else if (name == "paper_10km") {
    c = spi_long(10.0, 1.76e-3, 8.3, 2.10);
  } else if (name == "paper_50km") {
    c = spi_long(50.0, 4.43e-4, 13.4, 1.45);
    c.run.n_trials = 20'000'000;
  } else if (name == "paper_field_22km") {
    c.scheme = Scheme::TPI;
    LinkParams p;
    p.chi = 0.038;                      // published working point over field fiber
    p.eta_qfc = 0.33;                   // published conversion efficiency
    p.eta_loss = 0.5;                   // assumed, matches the calibrated SPI coupling
    p.eta_det_snspd = 0.5;              // published
    p.dark_rate_hz = 280.0;             // published background including dark counts
    p.channel.length_km = 11.0;         // published 11 km per channel
    p.channel.attenuation_db_per_km = 4.0 / 11.0;  // published 4 dB per channel
    c.node_a = c.node_b = p;
    c.write_out_hom = 0.063;            // published amended HOM visibility
    c.noise.kind = NoiseKind::Gaussian;
    c.noise.sigma_rad = deg(11.7);      // published analyzer phase uncertainty
    c.run.tpi_filter_efficiency = 0.98; // published polarization filtering efficiency
    c.run.n_trials = 50'000'000;
  } else {
    std::string names;
    for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "'; valid presets: " + names);
  }
  c.name = name;
  apply_calibration(c);
  c.validate();
  return c;
}

}  // namespace qlink
