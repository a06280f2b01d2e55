#pragma once

// Small-mode linear optics: mode overlap from HOM data, single-photon
// interference statistics, the imperfect Bell-state-measurement model and a
// sparse truncated Fock-space state with beamsplitter evolution.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <utility>

namespace qlink {

using Complex = std::complex<double>;

/// Decomposition b = alpha * a + beta * a_perp of one photonic mode onto a
/// reference mode. Only |alpha| enters any interference statistic, so both
/// amplitudes are kept real and nonnegative.
class ModeOverlap {
 public:
  /// Throws ValidationError unless alpha^2 + beta^2 = 1 within 1e-12.
  ModeOverlap(double alpha, double beta);

  static ModeOverlap identical() { return {1.0, 0.0}; }
  static ModeOverlap orthogonal() { return {0.0, 1.0}; }

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

 private:
  double alpha_;
  double beta_;
};

/// Inverts V_HOM = beta^2 / 2. Throws DomainError outside [0, 0.5].
ModeOverlap overlap_from_hom(double v_hom);

/// HOM coincidence visibility beta^2 / 2.
double hom_coincidence_visibility(const ModeOverlap& overlap);

struct ClickProbabilities {
  double p_a;  ///< port that goes dark for identical modes at zero phase
  double p_b;
};

/// Herald-port probabilities when one photon is shared between two partially
/// distinguishable inputs of a balanced beamsplitter with relative phase
/// delta_theta: p_a = (1 - alpha cos(delta_theta)) / 2.
ClickProbabilities spi_click_probabilities(const ModeOverlap& overlap, double delta_theta);

/// Probability that the distinguishable component randomizes the BSM outcome.
double bsm_flip_rate(const ModeOverlap& overlap);

using DensityOperator = Eigen::Matrix4cd;

/// Throws ValidationError unless rho is Hermitian, unit trace and has no
/// eigenvalue below -1e-9 (all within 1e-9).
void validate_density_operator(const DensityOperator& rho);

/// Atom-atom fidelity to |Psi+> after a BSM on the two photons of
/// rho_a (atom_a x photon_a) and rho_b (atom_b x photon_b), where the BSM
/// reports Psi+ but projects onto Psi- with probability lambda. Normalized by
/// the success probability of the Psi+ outcome.
double imperfect_bsm_fidelity(const DensityOperator& rho_a, const DensityOperator& rho_b, double lambda);

/// Upper bound on the theta-fringe visibility imposed by write-out and
/// read-out mode mismatch, each given as an HOM visibility in [0, 0.5].
double v_theta_upper_bound(double v_wo, double v_ro);

/// Two-mode lossless beamsplitter. Maps
///   a_i^dag -> sqrt(T) a_i^dag + i sqrt(1-T) e^{i phi} a_j^dag
///   a_j^dag -> i sqrt(1-T) e^{-i phi} a_i^dag + sqrt(T) a_j^dag.
class BeamsplitterSpec {
 public:
  /// Throws DomainError if transmissivity is outside [0, 1]. The phase is
  /// stored reduced to [0, 2 pi).
  explicit BeamsplitterSpec(double transmissivity = 0.5, double relative_phase = 0.0);

  static BeamsplitterSpec balanced() { return BeamsplitterSpec(0.5, 0.0); }

  double transmissivity() const { return transmissivity_; }
  double relative_phase() const { return relative_phase_; }

 private:
  double transmissivity_;
  double relative_phase_;
};

inline constexpr int kMaxModes = 8;
inline constexpr int kMaxCutoff = 12;

using Occupation = std::array<std::uint8_t, kMaxModes>;

/// Sparse pure state on mode_count bosonic modes with at most `cutoff`
/// photons per mode.
class TruncatedFockState {
 public:
  using AmplitudeMap = std::map<Occupation, Complex>;

  TruncatedFockState(int mode_count, int cutoff = 2);

  static TruncatedFockState vacuum(int mode_count, int cutoff = 2);
  static TruncatedFockState basis(int mode_count, int cutoff, std::initializer_list<int> occupation);

  int mode_count() const { return mode_count_; }
  int cutoff() const { return cutoff_; }
  const AmplitudeMap& amplitudes() const { return amplitudes_; }

  Complex amplitude(const Occupation& occupation) const;
  Complex amplitude(std::initializer_list<int> occupation) const;

  /// Adds to the amplitude of a basis state. Throws TruncationError if any
  /// entry exceeds the cutoff.
  void add(const Occupation& occupation, Complex amplitude);
  void add(std::initializer_list<int> occupation, Complex amplitude);

  double norm_squared() const;
  /// Throws DegenerateInputError for the zero vector.
  void normalize();
  /// Drops amplitudes with |a|^2 below threshold.
  void prune(double threshold = 1e-30);

  Occupation make_occupation(std::initializer_list<int> occupation) const;

 private:
  int mode_count_;
  int cutoff_;
  AmplitudeMap amplitudes_;
};

/// Result of a linear-optics step: the evolved state and the probability
/// weight that fell outside the cutoff.
struct EvolveResult {
  TruncatedFockState state;
  double leakage = 0.0;
};

/// Applies a beamsplitter between modes i and j. Amplitudes beyond the cutoff
/// are dropped and their weight is reported; more than leakage_tolerance of
/// lost weight throws TruncationError.
EvolveResult beamsplitter_evolve(const TruncatedFockState& state, const BeamsplitterSpec& bs, int mode_i,
                                 int mode_j, double leakage_tolerance = 1e-9);

/// Multiplies every amplitude by exp(i phase * n_mode).
void apply_phase_shift(TruncatedFockState& state, int mode, double phase);

/// Binomial-thinning Kraus operator K_l of a pure-loss channel with
/// transmissivity t acting on one mode: K_l |n> = sqrt(C(n,l) t^{n-l} (1-t)^l) |n-l>.
TruncatedFockState apply_loss_kraus(const TruncatedFockState& state, int mode, double transmissivity,
                                    int lost);

}  // namespace qlink
