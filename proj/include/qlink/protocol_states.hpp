#pragma once

// Read-out mixture of a heralded Fock-basis entangled pair and the estimators
// built on it: Fock visibility, theta-fringe visibility, post-selected
// fidelity, fringe fitting, two-photon-scheme fidelity and two-qubit
// linear-inversion tomography.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "qlink/core_modes.hpp"

namespace qlink {

/// Diagonal weights of the read-out field in the basis
/// {|00>, |Psi+>, |Psi->, |11>}. Always stored normalized.
struct BellDiagonalMix {
  double c00 = 0.0;
  double c_plus = 0.0;
  double c_minus = 0.0;
  double c11 = 0.0;

  /// Throws ValidationError on negative weights or a sum differing from 1 by
  /// more than 1e-9.
  static BellDiagonalMix make(double c00, double c_plus, double c_minus, double c11);
  /// Rescales nonnegative weights to unit sum.
  static BellDiagonalMix from_unnormalized(double c00, double c_plus, double c_minus, double c11);
  /// Mix whose clicked sector reproduces the given visibilities; c00 is the
  /// no-click weight.
  static BellDiagonalMix from_visibilities(double c00, double v_fock, double v_theta);

  static BellDiagonalMix psi_plus() { return {0.0, 1.0, 0.0, 0.0}; }
  static BellDiagonalMix psi_minus() { return {0.0, 0.0, 1.0, 0.0}; }
  static BellDiagonalMix vacuum() { return {1.0, 0.0, 0.0, 0.0}; }
  static BellDiagonalMix double_excitation() { return {0.0, 0.0, 0.0, 1.0}; }

  /// c+ + c- + c11, the weight of the post-selected (clicked) sector.
  double clicked_weight() const { return c_plus + c_minus + c11; }

  std::array<double, 4> as_array() const { return {c00, c_plus, c_minus, c11}; }
  void validate() const;
};

struct SigmaThetaSetting {
  double theta = 0.0;
  double delta_phi_ro = 0.0;
};

struct TpiVisibilities {
  double v1 = 0.0;  ///< population basis
  double v2 = 0.0;  ///< coherence basis

  /// Throws ValidationError if either value is outside [-1, 1].
  static TpiVisibilities make(double v1, double v2);
};

double fock_visibility(const BellDiagonalMix& mix);
double theta_visibility(const BellDiagonalMix& mix);
/// c+ / (c+ + c- + c11); identical to (V_F + V_theta) / 2.
double f_post(const BellDiagonalMix& mix);

struct SigmaThetaRates {
  double rate_c;
  double rate_d;
};

/// Normalized click shares of the two outputs of the theta-interferometer,
/// post-selected on at least one read-out photon. The double-excitation part
/// splits evenly between the outputs.
SigmaThetaRates sigma_theta_rates(const BellDiagonalMix& mix, const SigmaThetaSetting& setting);

struct FringeSample {
  double theta;
  double count_c;
  double count_d;
};

struct SinusoidFit {
  double offset;      ///< A
  double amplitude;   ///< B >= 0
  double phase;       ///< phi0 in (-pi, pi]
  double visibility;  ///< B / A
  double offset_error;
  double amplitude_error;
  double phase_error;
  double visibility_error;
};

/// Least-squares fit of A + B cos(theta + phi0) to the share
/// count_c / (count_c + count_d). Errors are the fit covariance propagated
/// from binomial variances of each share. Throws FitError for fewer than
/// three distinct angles or points with no counts.
SinusoidFit fit_sinusoid(std::span<const FringeSample> samples);

/// (1 + V1 + 2 V2) / 4, not clamped.
double tpi_fidelity(const TpiVisibilities& v);

enum class PolarizationState { H, V, D, R };

/// One of the 16 product projectors |s_a><s_a| x |s_b><s_b|, with the number of
/// projections that clicked out of `trials` repetitions.
struct TomographySetting {
  PolarizationState first;
  PolarizationState second;
  double counts;
  double trials;
};

enum class BellState { PsiPlus, PsiMinus, PhiPlus, PhiMinus };

struct TomographyResult {
  DensityOperator raw;       ///< linear-inversion estimate, Hermitian, unit trace
  DensityOperator physical;  ///< nearest PSD unit-trace operator (Frobenius)
  std::array<double, 4> bell_fidelities;  ///< indexed by BellState
  BellState best_bell;
  double fidelity;  ///< max of bell_fidelities
};

/// Linear inversion of the 16 product-projector frequencies followed by the
/// Frobenius-nearest physical projection. Throws FitError if the settings do
/// not span the operator space and ValidationError on nonpositive trials.
TomographyResult tomography_linear_inversion(std::span<const TomographySetting> record);

/// Frobenius-nearest positive semidefinite unit-trace operator.
DensityOperator project_to_physical(const DensityOperator& rho);

/// <b|rho|b> for a Bell vector b.
double bell_fidelity(const DensityOperator& rho, BellState state);

/// Column vector of a Bell state in the |00>,|01>,|10>,|11> basis.
Eigen::Vector4cd bell_vector(BellState state);

/// Expected record (counts = trials * probability) for a known state, used by
/// tests and by the CLI demo.
std::vector<TomographySetting> ideal_tomography_record(const DensityOperator& rho, double trials_per_setting);

}  // namespace qlink
