#include "qlink/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <thread>

#include "qlink/errors.hpp"

namespace qlink {

namespace {

constexpr int kMaxExcitationCutoff = 6;
constexpr std::uint64_t kBatchSize = 1u << 16;
constexpr double kPi = std::numbers::pi;

// Herald-stage modes.
constexpr int kWA = 0, kWB = 1, kWAt = 2, kWBt = 3, kSA = 4, kSB = 5;
// Read-out-stage modes.
constexpr int kRA = 0, kRB = 1, kRAt = 2, kRBt = 3;

const BeamsplitterSpec kBalanced(0.5, 0.5 * kPi);

std::vector<double> excitation_distribution(double chi, int cutoff) {
  std::vector<double> p(cutoff + 1);
  double term = 1.0;
  double total = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    p[n] = term;
    total += term;
    term *= chi;
  }
  for (double& x : p) x /= total;
  return p;
}

double dark_probability(double rate_hz, double gate_ns) { return -std::expm1(-rate_hz * gate_ns * 1e-9); }

double herald_transmission(const LinkParams& p) {
  return p.local_herald_efficiency() * std::sqrt(fiber_transmission(p.channel));
}

double readout_transmission(const LinkParams& p) { return p.eta_ret * p.eta_det_si; }

TruncatedFockState evolve(const TruncatedFockState& s, const BeamsplitterSpec& bs, int i, int j) {
  return beamsplitter_evolve(s, bs, i, j).state;
}

std::mt19937_64 batch_rng(std::uint64_t seed, std::uint64_t batch, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(batch >> 32), tag};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::size_t sample_cdf(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::vector<double> cumulative(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) c[i] = (acc += w[i]);
  return c;
}

// Photon-presence categories at the read-out detectors: none, C only, D only, both.
using Categories = std::array<double, 4>;

// Joint click probabilities once dark counts are folded in.
Categories with_dark_counts(const Categories& photons, double dark_c, double dark_d) {
  Categories out{};
  for (int cat = 0; cat < 4; ++cat) {
    const double pc = (cat & 1) ? 1.0 : dark_c;
    const double pd = (cat & 2) ? 1.0 : dark_d;
    out[0] += photons[cat] * (1 - pc) * (1 - pd);
    out[1] += photons[cat] * pc * (1 - pd);
    out[2] += photons[cat] * (1 - pc) * pd;
    out[3] += photons[cat] * pc * pd;
  }
  return out;
}

struct HeraldOutcome {
  double prob;  ///< conditional on the loss branch
  int n1;
  int n2;
  int spin;  ///< index into SpiModel::spins
};

struct LossBranch {
  double prob;
  std::vector<HeraldOutcome> outcomes;
  std::vector<double> cdf;
};

struct SpiModel {
  int cutoff = 0;
  std::vector<LossBranch> branches;
  std::vector<double> branch_cdf;
  std::vector<TruncatedFockState> spins;  ///< normalized, read-out mode layout
  std::vector<double> thetas;
  double dark_1 = 0, dark_2 = 0;  ///< herald detectors
  double dark_c = 0, dark_d = 0;  ///< read-out detectors
  double read_a = 1, read_b = 1;
  double alpha_ro = 1;
  /// Exact read-out photon categories per spin state and setting
  /// (setting 0 direct, 1.. theta grid).
  std::vector<std::vector<Categories>> exact;

  std::size_t settings() const { return thetas.size() + 1; }
};

Categories photon_categories(const TruncatedFockState& spin, double alpha_ro, const double* theta) {
  TruncatedFockState s = evolve(spin, BeamsplitterSpec(alpha_ro * alpha_ro, 0.0), kRB, kRBt);
  if (theta != nullptr) {
    apply_phase_shift(s, kRA, *theta);
    s = evolve(s, kBalanced, kRA, kRB);
    s = evolve(s, kBalanced, kRAt, kRBt);
  }
  Categories cat{};
  for (const auto& [occ, amp] : s.amplitudes()) {
    const bool c = occ[kRA] + occ[kRAt] > 0;
    const bool d = occ[kRB] + occ[kRBt] > 0;
    cat[(c ? 1 : 0) + (d ? 2 : 0)] += std::norm(amp);
  }
  return cat;
}

Categories exact_readout(const TruncatedFockState& spin, const SpiModel& m, const double* theta) {
  Categories total{};
  for (int la = 0; la <= m.cutoff; ++la) {
    const TruncatedFockState a = apply_loss_kraus(spin, kRA, m.read_a, la);
    if (a.norm_squared() == 0.0) continue;
    for (int lb = 0; lb <= m.cutoff; ++lb) {
      const TruncatedFockState ab = apply_loss_kraus(a, kRB, m.read_b, lb);
      if (ab.norm_squared() == 0.0) continue;
      const Categories c = photon_categories(ab, m.alpha_ro, theta);
      for (int i = 0; i < 4; ++i) total[i] += c[i];
    }
  }
  return total;
}

SpiModel build_spi_model(const RunConfig& config) {
  SpiModel m;
  m.cutoff = config.effective_cutoff();
  m.thetas = config.effective_theta_grid();
  const int K = m.cutoff;
  const int photon_cutoff = 2 * K;
  const auto& pa = config.params_a;
  const auto& pb = config.params_b;
  m.dark_1 = dark_probability(pa.dark_rate_hz, pa.gate_ns);
  m.dark_2 = dark_probability(pb.dark_rate_hz, pb.gate_ns);
  m.dark_c = dark_probability(pa.dark_rate_si_hz, pa.gate_ns);
  m.dark_d = dark_probability(pb.dark_rate_si_hz, pb.gate_ns);
  m.read_a = readout_transmission(pa);
  m.read_b = readout_transmission(pb);
  m.alpha_ro = config.overlaps.read_out.alpha();

  const auto ea = excitation_distribution(pa.chi, K);
  const auto eb = excitation_distribution(pb.chi, K);
  TruncatedFockState initial(6, photon_cutoff);
  for (int na = 0; na <= K; ++na) {
    for (int nb = 0; nb <= K; ++nb) {
      const double amp = std::sqrt(ea[na] * eb[nb]);
      if (amp == 0.0) continue;
      Occupation occ{};
      occ[kWA] = occ[kSA] = static_cast<std::uint8_t>(na);
      occ[kWB] = occ[kSB] = static_cast<std::uint8_t>(nb);
      initial.add(occ, amp);
    }
  }

  const double ta = herald_transmission(pa);
  const double tb = herald_transmission(pb);
  const double alpha_wo = config.overlaps.write_out.alpha();
  std::vector<double> branch_weights;
  for (int la = 0; la <= K; ++la) {
    const TruncatedFockState a = apply_loss_kraus(initial, kWA, ta, la);
    if (a.norm_squared() == 0.0) continue;
    for (int lb = 0; lb <= K; ++lb) {
      TruncatedFockState s = apply_loss_kraus(a, kWB, tb, lb);
      const double w = s.norm_squared();
      if (w == 0.0) continue;
      s = evolve(s, BeamsplitterSpec(alpha_wo * alpha_wo, 0.0), kWB, kWBt);
      s = evolve(s, kBalanced, kWA, kWB);
      s = evolve(s, kBalanced, kWAt, kWBt);

      std::map<std::array<int, 4>, TruncatedFockState> parts;
      for (const auto& [occ, amp] : s.amplitudes()) {
        const std::array<int, 4> key{occ[kWA], occ[kWB], occ[kWAt], occ[kWBt]};
        auto it = parts.try_emplace(key, 4, photon_cutoff).first;
        Occupation spin{};
        spin[kRA] = occ[kSA];
        spin[kRB] = occ[kSB];
        it->second.add(spin, amp);
      }

      LossBranch branch{w, {}, {}};
      std::vector<double> weights;
      for (auto& [key, part] : parts) {
        const double q = part.norm_squared();
        if (q == 0.0) continue;
        part.normalize();
        branch.outcomes.push_back({q / w, key[0] + key[2], key[1] + key[3], static_cast<int>(m.spins.size())});
        m.spins.push_back(std::move(part));
        weights.push_back(q / w);
      }
      branch.cdf = cumulative(weights);
      branch_weights.push_back(w);
      m.branches.push_back(std::move(branch));
    }
  }
  m.branch_cdf = cumulative(branch_weights);

  m.exact.resize(m.spins.size());
  for (std::size_t i = 0; i < m.spins.size(); ++i) {
    m.exact[i].push_back(exact_readout(m.spins[i], m, nullptr));
    for (double th : m.thetas) m.exact[i].push_back(exact_readout(m.spins[i], m, &th));
  }
  return m;
}

struct HeraldProbs {
  double port1;
  double port2;
};

HeraldProbs herald_probs(const HeraldOutcome& o, const SpiModel& m) {
  const double c1 = o.n1 > 0 ? 1.0 : m.dark_1;
  const double c2 = o.n2 > 0 ? 1.0 : m.dark_2;
  return {c1 * (1 - c2), c2 * (1 - c1)};
}

void record_readout(CountsAccumulator& acc, std::size_t setting, int port, bool click_c, bool click_d) {
  if (setting == 0) {
    ++acc.direct_heralds;
    const int n = int(click_c) + int(click_d);
    if (n == 0) ++acc.direct_none;
    if (n == 1) ++acc.direct_one;
    if (n == 2) ++acc.direct_both;
    return;
  }
  ThetaCounts& t = acc.theta[setting - 1];
  ++t.heralds;
  const bool par = port == 1 ? click_c : click_d;
  const bool crs = port == 1 ? click_d : click_c;
  if (par) ++t.parallel;
  if (crs) ++t.cross;
  if (click_c && click_d) ++t.both;
}

// Samples the read-out loss Kraus branches, then returns photon categories
// for the surviving state with the given phase.
Categories sampled_readout(const TruncatedFockState& spin, const SpiModel& m, double theta, std::mt19937_64& rng) {
  auto pick_loss = [&](const TruncatedFockState& s, int mode, double t) {
    std::vector<TruncatedFockState> options;
    std::vector<double> w;
    for (int l = 0; l <= m.cutoff; ++l) {
      options.push_back(apply_loss_kraus(s, mode, t, l));
      w.push_back(options.back().norm_squared());
    }
    return options[sample_cdf(cumulative(w), uniform(rng))];
  };
  const TruncatedFockState a = pick_loss(spin, kRA, m.read_a);
  const TruncatedFockState ab = pick_loss(a, kRB, m.read_b);
  return photon_categories(ab, m.alpha_ro, &theta);
}

template <typename BatchFn>
CountsAccumulator run_batches(const RunConfig& config, const CountsAccumulator& prototype, BatchFn&& fn) {
  const std::uint64_t n_batches = (config.n_trials + kBatchSize - 1) / kBatchSize;
  std::vector<CountsAccumulator> results(n_batches, prototype);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t b = next++; b < n_batches; b = next++) {
      const std::uint64_t begin = b * kBatchSize;
      const std::uint64_t end = std::min(config.n_trials, begin + kBatchSize);
      fn(b, begin, end, results[b]);
      results[b].trials = end - begin;
    }
  };
  unsigned threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, n_batches));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  CountsAccumulator total = prototype;
  for (const auto& r : results) total += r;
  return total;
}

CountsAccumulator spi_prototype(const RunConfig& config, const std::vector<double>& thetas) {
  CountsAccumulator acc;
  for (double th : thetas) acc.theta.push_back({th, 0, 0, 0, 0});
  acc.readout_efficiency = std::sqrt(readout_transmission(config.params_a) * readout_transmission(config.params_b));
  return acc;
}

}  // namespace

// ---------------------------------------------------------------------------

int select_excitation_cutoff(double chi_a, double chi_b, double tolerance) {
  const double chi = std::max(chi_a, chi_b);
  for (int k = 1; k <= kMaxExcitationCutoff; ++k) {
    if (std::pow(chi, k + 1) <= tolerance) return k;
  }
  throw TruncationError("no excitation cutoff up to " + std::to_string(kMaxExcitationCutoff) +
                        " keeps the dropped tail below " + std::to_string(tolerance));
}

void RunConfig::validate() const {
  if (n_trials == 0) throw ValidationError("n_trials must be positive");
  params_a.validate();
  params_b.validate();
  if (!(truncation_tolerance > 0.0 && truncation_tolerance < 1.0)) {
    throw ValidationError("truncation tolerance must lie in (0, 1)");
  }
  if (excitation_cutoff < 0 || excitation_cutoff > kMaxExcitationCutoff) {
    throw ValidationError("excitation cutoff must lie in [0, " + std::to_string(kMaxExcitationCutoff) + "]");
  }
  if (!(tpi_filter_efficiency > 0.0 && tpi_filter_efficiency <= 1.0)) {
    throw ValidationError("filter efficiency must lie in (0, 1]");
  }
  if (!(tpi_flip_rate <= 1.0)) throw ValidationError("flip rate must not exceed 1");
  for (double th : theta_grid) {
    if (!std::isfinite(th)) throw ValidationError("theta grid entries must be finite");
  }
  effective_cutoff();
}

std::vector<double> RunConfig::effective_theta_grid() const {
  if (!theta_grid.empty()) return theta_grid;
  std::vector<double> g;
  for (int k = 0; k < 8; ++k) g.push_back(k * kPi / 4.0);
  return g;
}

int RunConfig::effective_cutoff() const {
  if (excitation_cutoff == 0) return select_excitation_cutoff(params_a.chi, params_b.chi, truncation_tolerance);
  const double tail = std::pow(std::max(params_a.chi, params_b.chi), excitation_cutoff + 1);
  if (tail > truncation_tolerance) {
    throw TruncationError("excitation cutoff " + std::to_string(excitation_cutoff) + " drops weight " +
                          std::to_string(tail) + " above tolerance");
  }
  return excitation_cutoff;
}

CountsAccumulator& CountsAccumulator::operator+=(const CountsAccumulator& o) {
  trials += o.trials;
  heralds += o.heralds;
  false_heralds += o.false_heralds;
  heralds_port1 += o.heralds_port1;
  heralds_port2 += o.heralds_port2;
  direct_heralds += o.direct_heralds;
  direct_none += o.direct_none;
  direct_one += o.direct_one;
  direct_both += o.direct_both;
  if (theta.size() != o.theta.size()) throw ValidationError("cannot merge counts over different theta grids");
  for (std::size_t i = 0; i < theta.size(); ++i) {
    theta[i].heralds += o.theta[i].heralds;
    theta[i].parallel += o.theta[i].parallel;
    theta[i].cross += o.theta[i].cross;
    theta[i].both += o.theta[i].both;
  }
  tpi_population_heralds += o.tpi_population_heralds;
  tpi_population_same += o.tpi_population_same;
  tpi_population_diff += o.tpi_population_diff;
  tpi_coherence_heralds += o.tpi_coherence_heralds;
  tpi_coherence_same += o.tpi_coherence_same;
  tpi_coherence_diff += o.tpi_coherence_diff;
  return *this;
}

CountsAccumulator run_spi(const RunConfig& config) {
  config.validate();
  const SpiModel m = build_spi_model(config);
  const bool noiseless = config.noise.is_noiseless();
  const std::size_t settings = m.settings();

  return run_batches(config, spi_prototype(config, m.thetas),
                     [&](std::uint64_t batch, std::uint64_t begin, std::uint64_t end, CountsAccumulator& acc) {
    std::mt19937_64 rng = batch_rng(config.seed, batch, 0x5350u);
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      const LossBranch& br = m.branches[sample_cdf(m.branch_cdf, uniform(rng))];
      const HeraldOutcome& o = br.outcomes[sample_cdf(br.cdf, uniform(rng))];
      const bool click1 = o.n1 > 0 || (m.dark_1 > 0 && uniform(rng) < m.dark_1);
      const bool click2 = o.n2 > 0 || (m.dark_2 > 0 && uniform(rng) < m.dark_2);
      if (click1 == click2) continue;

      const int port = click1 ? 1 : 2;
      ++acc.heralds;
      ++(port == 1 ? acc.heralds_port1 : acc.heralds_port2);
      if (o.n1 == 0 && o.n2 == 0) ++acc.false_heralds;

      const std::size_t setting = idx % settings;
      Categories photons;
      if (setting == 0 || noiseless) {
        photons = m.exact[o.spin][setting];
      } else {
        const double theta = m.thetas[setting - 1] + config.noise.draw(rng);
        photons = sampled_readout(m.spins[o.spin], m, theta, rng);
      }
      const std::vector<double> cdf = cumulative({photons.begin(), photons.end()});
      const auto cat = sample_cdf(cdf, uniform(rng));
      const bool click_c = (cat & 1) || (m.dark_c > 0 && uniform(rng) < m.dark_c);
      const bool click_d = (cat & 2) || (m.dark_d > 0 && uniform(rng) < m.dark_d);
      record_readout(acc, setting, port, click_c, click_d);
    }
  });
}

CountsAccumulator run_tpi(const RunConfig& config) {
  config.validate();
  const int K = config.effective_cutoff();
  const auto& pa = config.params_a;
  const auto& pb = config.params_b;
  const auto cdf_a = cumulative(excitation_distribution(pa.chi, K));
  const auto cdf_b = cumulative(excitation_distribution(pb.chi, K));
  const auto arm = [&](const LinkParams& p) {
    return p.local_herald_efficiency() * fiber_transmission(p.channel) * config.tpi_filter_efficiency;
  };
  const double eta_a = arm(pa);
  const double eta_b = arm(pb);
  const double dark_a = dark_probability(pa.dark_rate_hz, pa.gate_ns);
  const double dark_b = dark_probability(pb.dark_rate_hz, pb.gate_ns);
  const double read_a = readout_transmission(pa);
  const double read_b = readout_transmission(pb);
  const double si_a = dark_probability(pa.dark_rate_si_hz, pa.gate_ns);
  const double si_b = dark_probability(pb.dark_rate_si_hz, pb.gate_ns);
  const double flip = config.tpi_flip_rate >= 0.0 ? config.tpi_flip_rate : bsm_flip_rate(config.overlaps.write_out);

  CountsAccumulator proto;
  proto.readout_efficiency = std::sqrt(read_a * read_b);
  return run_batches(config, proto,
                     [&](std::uint64_t batch, std::uint64_t begin, std::uint64_t end, CountsAccumulator& acc) {
    std::mt19937_64 rng = batch_rng(config.seed, batch, 0x5450u);
    auto bern = [&rng](double p) { return p > 0.0 && uniform(rng) < p; };
    auto thin = [&](std::size_t n, double eta) {
      int k = 0;
      for (std::size_t i = 0; i < n; ++i) k += bern(eta) ? 1 : 0;
      return k;
    };
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      const std::size_t na = sample_cdf(cdf_a, uniform(rng));
      const std::size_t nb = sample_cdf(cdf_b, uniform(rng));
      const int ka = thin(na, eta_a);
      const int kb = thin(nb, eta_b);
      const int darks = int(bern(dark_a)) + int(bern(dark_a)) + int(bern(dark_b)) + int(bern(dark_b));
      if (ka + kb + darks != 2) continue;
      if (uniform(rng) >= 0.5) continue;  // pattern outside the two resolvable Bell states

      ++acc.heralds;
      if (ka + kb == 0) ++acc.false_heralds;
      const bool population = idx % 2 == 0;
      ++(population ? acc.tpi_population_heralds : acc.tpi_coherence_heralds);

      const bool paired = na == 1 && nb == 1 && ka == 1 && kb == 1 && darks == 0;
      const bool ret_a = na > 0 && bern(1.0 - std::pow(1.0 - read_a, double(na)));
      const bool ret_b = nb > 0 && bern(1.0 - std::pow(1.0 - read_b, double(nb)));
      const bool click_a = ret_a || bern(si_a);
      const bool click_b = ret_b || bern(si_b);
      if (!(click_a && click_b)) continue;

      bool same;
      if (paired && ret_a && ret_b) {
        if (population) {
          same = false;
        } else {
          const double sign = bern(flip) ? -1.0 : 1.0;
          same = uniform(rng) < 0.5 * (1.0 + sign * std::cos(config.noise.draw(rng)));
        }
      } else {
        same = uniform(rng) < 0.5;
      }
      if (population) {
        ++(same ? acc.tpi_population_same : acc.tpi_population_diff);
      } else {
        ++(same ? acc.tpi_coherence_same : acc.tpi_coherence_diff);
      }
    }
  });
}

CountsAccumulator run(const RunConfig& config) {
  return config.scheme == Scheme::SPI ? run_spi(config) : run_tpi(config);
}

// ---------------------------------------------------------------------------

SpiTallies to_tallies(const CountsAccumulator& c) {
  SpiTallies t;
  t.trials = double(c.trials);
  t.heralds = double(c.heralds);
  t.direct_heralds = double(c.direct_heralds);
  t.direct_none = double(c.direct_none);
  t.direct_one = double(c.direct_one);
  t.direct_both = double(c.direct_both);
  for (const auto& th : c.theta) t.fringe.push_back({th.theta, double(th.parallel), double(th.cross)});
  t.readout_efficiency = c.readout_efficiency;
  return t;
}

SpiTallies scale_tallies(const SpiTallies& per_trial, double n_trials) {
  SpiTallies t = per_trial;
  const double f = n_trials / per_trial.trials;
  t.trials *= f;
  t.heralds *= f;
  t.direct_heralds *= f;
  t.direct_none *= f;
  t.direct_one *= f;
  t.direct_both *= f;
  for (auto& s : t.fringe) {
    s.count_c *= f;
    s.count_d *= f;
  }
  return t;
}

MixEstimate estimate_mix(const SpiTallies& t) {
  if (!(t.heralds > 0.0)) throw DegenerateInputError("no heralds recorded");
  if (!(t.direct_heralds > 0.0)) throw DegenerateInputError("no heralds in the direct setting");
  const double eta = t.readout_efficiency;
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("read-out efficiency must lie in (0, 1]");

  MixEstimate e;
  e.p_ent = t.heralds / t.trials;
  e.p_ent_err = std::sqrt(e.p_ent * (1.0 - e.p_ent) / t.trials);

  const double n = t.direct_heralds;
  const double q1 = t.direct_one / n;
  const double q2 = t.direct_both / n;
  const double a = q1 / eta - 2.0 * (1.0 - eta) * q2 / (eta * eta);  // single-excitation weight
  const double b = q2 / (eta * eta);                                  // double-excitation weight
  if (!(a + b > 0.0)) throw DegenerateInputError("no read-out clicks in the direct setting");
  e.v_f = a / (a + b);
  e.c00 = 1.0 - a - b;

  const double var1 = q1 * (1 - q1) / n;
  const double var2 = q2 * (1 - q2) / n;
  const double cov = -q1 * q2 / n;
  const double da1 = 1.0 / eta, da2 = -2.0 * (1.0 - eta) / (eta * eta), db2 = 1.0 / (eta * eta);
  const double s2 = (a + b) * (a + b);
  const double g1 = b / s2 * da1;
  const double g2 = (b * da2 - a * db2) / s2;
  e.v_f_err = std::sqrt(std::max(0.0, g1 * g1 * var1 + g2 * g2 * var2 + 2 * g1 * g2 * cov));
  const double h1 = -da1, h2 = -(da2 + db2);
  e.c00_err = std::sqrt(std::max(0.0, h1 * h1 * var1 + h2 * h2 * var2 + 2 * h1 * h2 * cov));

  std::vector<FringeSample> samples;
  for (const auto& s : t.fringe) {
    if (s.count_c + s.count_d > 0.0) samples.push_back(s);
  }
  e.fit = fit_sinusoid(samples);
  e.v_theta = e.fit->visibility;
  e.v_theta_err = e.fit->visibility_error;

  e.f_post = 0.5 * (e.v_f + e.v_theta);
  e.f_post_err = 0.5 * std::hypot(e.v_f_err, e.v_theta_err);

  const double vf = std::clamp(e.v_f, 0.0, 1.0);
  const double vt = std::clamp(std::min(e.v_theta, vf), 0.0, 1.0);
  e.mix = BellDiagonalMix::from_visibilities(std::clamp(e.c00, 0.0, 1.0 - 1e-15), vf, vt);
  return e;
}

MixEstimate estimate_mix(const CountsAccumulator& counts) { return estimate_mix(to_tallies(counts)); }

TpiEstimate estimate_tpi(const CountsAccumulator& c) {
  const double n1 = double(c.tpi_population_same + c.tpi_population_diff);
  const double n2 = double(c.tpi_coherence_same + c.tpi_coherence_diff);
  if (n1 == 0.0 || n2 == 0.0) throw DegenerateInputError("a TPI basis has no coincidences");
  TpiEstimate e;
  e.v1 = (double(c.tpi_population_diff) - double(c.tpi_population_same)) / n1;
  e.v2 = (double(c.tpi_coherence_same) - double(c.tpi_coherence_diff)) / n2;
  e.v1_err = std::sqrt(std::max(0.0, 1.0 - e.v1 * e.v1) / n1);
  e.v2_err = std::sqrt(std::max(0.0, 1.0 - e.v2 * e.v2) / n2);
  e.fidelity = tpi_fidelity({e.v1, e.v2});
  e.fidelity_err = 0.25 * std::hypot(e.v1_err, 2.0 * e.v2_err);
  e.p_ent = double(c.heralds) / double(c.trials);
  e.p_ent_err = std::sqrt(e.p_ent * (1.0 - e.p_ent) / double(c.trials));
  return e;
}

OracleResult oracle_enumerate(const RunConfig& config) {
  config.validate();
  const SpiModel m = build_spi_model(config);
  const double S = double(m.settings());

  OracleResult r;
  r.cutoff = m.cutoff;
  SpiTallies& t = r.expected;
  t.trials = 1.0;
  t.readout_efficiency = std::sqrt(m.read_a * m.read_b);
  for (double th : m.thetas) t.fringe.push_back({th, 0.0, 0.0});

  for (const auto& br : m.branches) {
    const double pb = br.prob / m.branch_cdf.back();
    for (const auto& o : br.outcomes) {
      const double q = pb * o.prob;
      const auto h = herald_probs(o, m);
      const double herald = q * (h.port1 + h.port2);
      if (herald == 0.0) continue;
      r.p_ent += herald;
      if (o.n1 == 0 && o.n2 == 0) r.p_false_herald += herald;

      const Categories direct = with_dark_counts(m.exact[o.spin][0], m.dark_c, m.dark_d);
      t.direct_none += herald * direct[0] / S;
      t.direct_one += herald * (direct[1] + direct[2]) / S;
      t.direct_both += herald * direct[3] / S;
      for (std::size_t k = 0; k < m.thetas.size(); ++k) {
        const Categories c = with_dark_counts(m.exact[o.spin][k + 1], m.dark_c, m.dark_d);
        const double to_c = c[1] + c[3];
        const double to_d = c[2] + c[3];
        t.fringe[k].count_c += q * (h.port1 * to_c + h.port2 * to_d) / S;
        t.fringe[k].count_d += q * (h.port1 * to_d + h.port2 * to_c) / S;
      }
    }
  }
  t.heralds = r.p_ent;
  t.direct_heralds = r.p_ent / S;
  r.estimate = estimate_mix(t);
  return r;
}

}  // namespace qlink
