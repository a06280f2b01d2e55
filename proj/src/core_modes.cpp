#include "qlink/core_modes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qlink/errors.hpp"

namespace qlink {
namespace {

constexpr double kOverlapTol = 1e-12;
constexpr double kDensityTol = 1e-9;

const std::array<double, 2 * kMaxCutoff + 1>& factorials() {
  static const auto table = [] {
    std::array<double, 2 * kMaxCutoff + 1> f{};
    f[0] = 1.0;
    for (std::size_t i = 1; i < f.size(); ++i) f[i] = f[i - 1] * static_cast<double>(i);
    return f;
  }();
  return table;
}

double binomial(int n, int k) {
  const auto& f = factorials();
  return f[n] / (f[k] * f[n - k]);
}

Complex int_pow(Complex base, int exponent) {
  Complex out{1.0, 0.0};
  for (int k = 0; k < exponent; ++k) out *= base;
  return out;
}

}  // namespace

ModeOverlap::ModeOverlap(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0)) {
    throw ValidationError("mode overlap amplitudes must lie in [0, 1]");
  }
  if (std::abs(alpha * alpha + beta * beta - 1.0) > kOverlapTol) {
    throw ValidationError("mode overlap must satisfy alpha^2 + beta^2 = 1");
  }
}

ModeOverlap overlap_from_hom(double v_hom) {
  if (!(v_hom >= 0.0 && v_hom <= 0.5)) {
    throw DomainError("HOM visibility " + std::to_string(v_hom) + " outside [0, 0.5]");
  }
  const double beta = std::sqrt(2.0 * v_hom);
  const double alpha = std::sqrt(1.0 - 2.0 * v_hom);
  return {alpha, beta};
}

double hom_coincidence_visibility(const ModeOverlap& overlap) { return 0.5 * overlap.beta() * overlap.beta(); }

ClickProbabilities spi_click_probabilities(const ModeOverlap& overlap, double delta_theta) {
  const double fringe = overlap.alpha() * std::cos(delta_theta);
  return {0.5 * (1.0 - fringe), 0.5 * (1.0 + fringe)};
}

double bsm_flip_rate(const ModeOverlap& overlap) { return 0.5 * overlap.beta() * overlap.beta(); }

void validate_density_operator(const DensityOperator& rho) {
  if (!rho.allFinite()) throw ValidationError("density operator has non-finite entries");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kDensityTol) {
    throw ValidationError("density operator is not Hermitian");
  }
  if (std::abs(rho.trace() - Complex{1.0, 0.0}) > kDensityTol) {
    throw ValidationError("density operator trace differs from 1");
  }
  Eigen::SelfAdjointEigenSolver<DensityOperator> eig(rho);
  if (eig.eigenvalues().minCoeff() < -kDensityTol) {
    throw ValidationError("density operator has a negative eigenvalue");
  }
}

double imperfect_bsm_fidelity(const DensityOperator& rho_a, const DensityOperator& rho_b, double lambda) {
  validate_density_operator(rho_a);
  validate_density_operator(rho_b);
  if (!(lambda >= 0.0 && lambda <= 0.5)) throw DomainError("BSM flip rate outside [0, 0.5]");

  // Photon-pair projector in the (p_a, p_b) basis |00>,|01>,|10>,|11>.
  Eigen::Matrix4cd bsm = Eigen::Matrix4cd::Zero();
  const double h = 0.5;
  bsm(1, 1) = bsm(2, 2) = h * (1.0 - lambda) + h * lambda;
  bsm(1, 2) = bsm(2, 1) = h * (1.0 - lambda) - h * lambda;

  // Each input is ordered (atom, photon); the joint index is (a_a, p_a, a_b, p_b).
  const auto joint = [&](int a1, int p1, int a2, int p2, int b1, int q1, int b2, int q2) {
    return rho_a(2 * a1 + p1, 2 * b1 + q1) * rho_b(2 * a2 + p2, 2 * b2 + q2);
  };

  Eigen::Matrix4cd atoms = Eigen::Matrix4cd::Zero();
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a2 = 0; a2 < 2; ++a2)
      for (int b1 = 0; b1 < 2; ++b1)
        for (int b2 = 0; b2 < 2; ++b2) {
          Complex acc{0.0, 0.0};
          // Tr_pp[(1 x S) rho]_{(a),(b)} = sum_{p,q} S_{p q} rho_{(a,q),(b,p)}
          for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) {
              if (bsm(p, q) == Complex{}) continue;
              acc += bsm(p, q) * joint(a1, q / 2, a2, q % 2, b1, p / 2, b2, p % 2);
            }
          atoms(2 * a1 + a2, 2 * b1 + b2) = acc;
        }

  const double success = atoms.trace().real();
  if (success <= 0.0) throw DegenerateInputError("BSM success probability vanishes");
  Eigen::Vector4cd psi_plus(0.0, std::sqrt(0.5), std::sqrt(0.5), 0.0);
  const double overlap = (psi_plus.adjoint() * atoms * psi_plus)(0, 0).real();
  return overlap / success;
}

double v_theta_upper_bound(double v_wo, double v_ro) {
  if (!(v_wo >= 0.0 && v_wo <= 0.5 && v_ro >= 0.0 && v_ro <= 0.5)) {
    throw DomainError("HOM visibilities must lie in [0, 0.5]");
  }
  const auto ports = [](double v) {
    const double root = std::sqrt(1.0 - 2.0 * v);
    return std::pair{0.5 * (1.0 - root), 0.5 * (1.0 + root)};
  };
  const auto [pa, pb] = ports(v_wo);
  const auto [pc, pd] = ports(v_ro);
  const double max = pb * pd + pa * pc;
  const double min = pa * pd + pb * pc;
  if (max + min <= 0.0) return 0.0;
  return (max - min) / (max + min);
}

BeamsplitterSpec::BeamsplitterSpec(double transmissivity, double relative_phase)
    : transmissivity_(transmissivity) {
  if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) {
    throw DomainError("beamsplitter transmissivity outside [0, 1]");
  }
  const double two_pi = 2.0 * std::numbers::pi;
  relative_phase_ = std::fmod(relative_phase, two_pi);
  if (relative_phase_ < 0.0) relative_phase_ += two_pi;
}

TruncatedFockState::TruncatedFockState(int mode_count, int cutoff) : mode_count_(mode_count), cutoff_(cutoff) {
  if (mode_count < 1 || mode_count > kMaxModes) throw DomainError("mode count out of range");
  if (cutoff < 1 || cutoff > kMaxCutoff) throw DomainError("Fock cutoff out of range");
}

TruncatedFockState TruncatedFockState::vacuum(int mode_count, int cutoff) {
  TruncatedFockState s(mode_count, cutoff);
  s.amplitudes_[Occupation{}] = 1.0;
  return s;
}

TruncatedFockState TruncatedFockState::basis(int mode_count, int cutoff, std::initializer_list<int> occupation) {
  TruncatedFockState s(mode_count, cutoff);
  s.add(s.make_occupation(occupation), 1.0);
  return s;
}

Occupation TruncatedFockState::make_occupation(std::initializer_list<int> occupation) const {
  if (static_cast<int>(occupation.size()) != mode_count_) throw DomainError("occupation has wrong length");
  Occupation occ{};
  std::size_t k = 0;
  for (int n : occupation) {
    if (n < 0 || n > cutoff_) throw TruncationError("occupation exceeds cutoff");
    occ[k++] = static_cast<std::uint8_t>(n);
  }
  return occ;
}

Complex TruncatedFockState::amplitude(const Occupation& occupation) const {
  auto it = amplitudes_.find(occupation);
  return it == amplitudes_.end() ? Complex{} : it->second;
}

Complex TruncatedFockState::amplitude(std::initializer_list<int> occupation) const {
  return amplitude(make_occupation(occupation));
}

void TruncatedFockState::add(const Occupation& occupation, Complex amplitude) {
  for (int m = 0; m < mode_count_; ++m) {
    if (occupation[m] > cutoff_) throw TruncationError("occupation exceeds cutoff");
  }
  for (int m = mode_count_; m < kMaxModes; ++m) {
    if (occupation[m] != 0) throw DomainError("occupation addresses a mode beyond mode_count");
  }
  amplitudes_[occupation] += amplitude;
}

void TruncatedFockState::add(std::initializer_list<int> occupation, Complex amplitude) {
  add(make_occupation(occupation), amplitude);
}

double TruncatedFockState::norm_squared() const {
  double acc = 0.0;
  for (const auto& [occ, amp] : amplitudes_) acc += std::norm(amp);
  return acc;
}

void TruncatedFockState::normalize() {
  const double n2 = norm_squared();
  if (n2 <= 0.0) throw DegenerateInputError("cannot normalize the zero vector");
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& [occ, amp] : amplitudes_) amp *= scale;
}

void TruncatedFockState::prune(double threshold) {
  std::erase_if(amplitudes_, [threshold](const auto& kv) { return std::norm(kv.second) < threshold; });
}

EvolveResult beamsplitter_evolve(const TruncatedFockState& state, const BeamsplitterSpec& bs, int mode_i,
                                 int mode_j, double leakage_tolerance) {
  if (mode_i == mode_j || mode_i < 0 || mode_j < 0 || mode_i >= state.mode_count() ||
      mode_j >= state.mode_count()) {
    throw DomainError("beamsplitter modes must be distinct and in range");
  }
  const double t = std::sqrt(bs.transmissivity());
  const double r = std::sqrt(1.0 - bs.transmissivity());
  const Complex phase = std::polar(1.0, bs.relative_phase());
  const Complex i_unit{0.0, 1.0};
  const Complex u_ii = t, u_ij = i_unit * r * phase;
  const Complex u_ji = i_unit * r * std::conj(phase), u_jj = t;
  const auto& fact = factorials();
  const int cutoff = state.cutoff();

  EvolveResult result{TruncatedFockState(state.mode_count(), cutoff), 0.0};
  // Outputs of one input basis ket are orthogonal, so the leakage per ket is
  // the norm of the dropped amplitudes; summing across kets requires the
  // coherent sum, accumulated below.
  std::map<Occupation, Complex> dropped;

  for (const auto& [occ, amp] : state.amplitudes()) {
    const int ni = occ[mode_i];
    const int nj = occ[mode_j];
    const int total = ni + nj;
    const double norm_in = 1.0 / std::sqrt(fact[ni] * fact[nj]);
    for (int k = 0; k <= ni; ++k) {
      const Complex ck = binomial(ni, k) * int_pow(u_ii, k) * int_pow(u_ij, ni - k);
      for (int l = 0; l <= nj; ++l) {
        const Complex cl = binomial(nj, l) * int_pow(u_ji, l) * int_pow(u_jj, nj - l);
        const int out_i = k + l;
        const int out_j = total - out_i;
        const Complex c = amp * norm_in * ck * cl * std::sqrt(fact[out_i] * fact[out_j]);
        Occupation out = occ;
        if (out_i > cutoff || out_j > cutoff) {
          out[mode_i] = static_cast<std::uint8_t>(std::min(out_i, 255));
          out[mode_j] = static_cast<std::uint8_t>(std::min(out_j, 255));
          dropped[out] += c;
          continue;
        }
        out[mode_i] = static_cast<std::uint8_t>(out_i);
        out[mode_j] = static_cast<std::uint8_t>(out_j);
        result.state.add(out, c);
      }
    }
  }
  for (const auto& [occ, amp] : dropped) result.leakage += std::norm(amp);
  result.state.prune();
  if (result.leakage > leakage_tolerance) {
    throw TruncationError("beamsplitter output exceeds Fock cutoff (leakage " + std::to_string(result.leakage) +
                          ")");
  }
  return result;
}

void apply_phase_shift(TruncatedFockState& state, int mode, double phase) {
  TruncatedFockState out(state.mode_count(), state.cutoff());
  for (const auto& [occ, amp] : state.amplitudes()) out.add(occ, amp * std::polar(1.0, phase * occ[mode]));
  state = std::move(out);
}

TruncatedFockState apply_loss_kraus(const TruncatedFockState& state, int mode, double transmissivity, int lost) {
  if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) throw DomainError("transmissivity outside [0, 1]");
  TruncatedFockState out(state.mode_count(), state.cutoff());
  for (const auto& [occ, amp] : state.amplitudes()) {
    const int n = occ[mode];
    if (lost > n) continue;
    const double weight = binomial(n, lost) * std::pow(transmissivity, n - lost) *
                          std::pow(1.0 - transmissivity, lost);
    if (weight == 0.0) continue;
    Occupation o = occ;
    o[mode] = static_cast<std::uint8_t>(n - lost);
    out.add(o, amp * std::sqrt(weight));
  }
  return out;
}

}  // namespace qlink
