#include "qlink/protocol_states.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qlink/errors.hpp"

namespace qlink {
namespace {

constexpr double kMixTol = 1e-9;

double clicked_or_throw(const BellDiagonalMix& mix) {
  const double denom = mix.clicked_weight();
  if (!(denom > 0.0)) throw DegenerateInputError("mixture has no clicked weight (c+ + c- + c11 = 0)");
  return denom;
}

Eigen::Vector2cd polarization_vector(PolarizationState s) {
  const double h = std::sqrt(0.5);
  switch (s) {
    case PolarizationState::H:
      return {1.0, 0.0};
    case PolarizationState::V:
      return {0.0, 1.0};
    case PolarizationState::D:
      return {h, h};
    case PolarizationState::R:
      return {Complex{h, 0.0}, Complex{0.0, h}};
  }
  return {1.0, 0.0};
}

Eigen::Matrix4cd product_projector(PolarizationState a, PolarizationState b) {
  const Eigen::Vector2cd va = polarization_vector(a);
  const Eigen::Vector2cd vb = polarization_vector(b);
  Eigen::Vector4cd v;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) v(2 * i + j) = va(i) * vb(j);
  return v * v.adjoint();
}

std::array<Eigen::Matrix2cd, 4> paulis() {
  Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd x, y, z;
  x << 0, 1, 1, 0;
  y << 0, Complex{0, -1}, Complex{0, 1}, 0;
  z << 1, 0, 0, -1;
  return {id, x, y, z};
}

Eigen::Matrix4cd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

}  // namespace

void BellDiagonalMix::validate() const {
  for (double c : as_array()) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("mixture weights must be finite and nonnegative");
  }
  if (std::abs(c00 + c_plus + c_minus + c11 - 1.0) > kMixTol) {
    throw ValidationError("mixture weights must sum to 1");
  }
}

BellDiagonalMix BellDiagonalMix::make(double c00, double c_plus, double c_minus, double c11) {
  BellDiagonalMix m{c00, c_plus, c_minus, c11};
  m.validate();
  return m;
}

BellDiagonalMix BellDiagonalMix::from_unnormalized(double c00, double c_plus, double c_minus, double c11) {
  const double sum = c00 + c_plus + c_minus + c11;
  if (!(c00 >= 0.0 && c_plus >= 0.0 && c_minus >= 0.0 && c11 >= 0.0)) {
    throw ValidationError("mixture weights must be nonnegative");
  }
  if (!(sum > 0.0)) throw DegenerateInputError("mixture weights sum to zero");
  return make(c00 / sum, c_plus / sum, c_minus / sum, c11 / sum);
}

BellDiagonalMix BellDiagonalMix::from_visibilities(double c00, double v_fock, double v_theta) {
  if (!(c00 >= 0.0 && c00 < 1.0)) throw ValidationError("vacuum weight must lie in [0, 1)");
  if (!(v_fock >= 0.0 && v_fock <= 1.0)) throw ValidationError("Fock visibility must lie in [0, 1]");
  if (std::abs(v_theta) > v_fock + kMixTol) throw ValidationError("|V_theta| cannot exceed V_F");
  const double s = 1.0 - c00;
  const double plus = 0.5 * s * (v_fock + v_theta);
  const double minus = 0.5 * s * (v_fock - v_theta);
  return make(c00, std::max(plus, 0.0), std::max(minus, 0.0), s * (1.0 - v_fock));
}

TpiVisibilities TpiVisibilities::make(double v1, double v2) {
  if (!(std::abs(v1) <= 1.0 && std::abs(v2) <= 1.0)) throw ValidationError("TPI visibilities must lie in [-1, 1]");
  return {v1, v2};
}

double fock_visibility(const BellDiagonalMix& mix) {
  return (mix.c_plus + mix.c_minus) / clicked_or_throw(mix);
}

double theta_visibility(const BellDiagonalMix& mix) {
  return (mix.c_plus - mix.c_minus) / clicked_or_throw(mix);
}

double f_post(const BellDiagonalMix& mix) { return mix.c_plus / clicked_or_throw(mix); }

SigmaThetaRates sigma_theta_rates(const BellDiagonalMix& mix, const SigmaThetaSetting& setting) {
  const double s = clicked_or_throw(mix);
  const double c = std::cos(setting.theta + setting.delta_phi_ro);
  const double to_c = 0.5 * mix.c_plus * (1.0 + c) + 0.5 * mix.c_minus * (1.0 - c) + 0.5 * mix.c11;
  const double rate_c = to_c / s;
  return {rate_c, 1.0 - rate_c};
}

SinusoidFit fit_sinusoid(std::span<const FringeSample> samples) {
  std::vector<double> distinct;
  for (const auto& s : samples) {
    double t = std::remainder(s.theta, 2.0 * std::numbers::pi);
    if (std::none_of(distinct.begin(), distinct.end(), [t](double u) {
          return std::abs(std::remainder(t - u, 2.0 * std::numbers::pi)) < 1e-12;
        })) {
      distinct.push_back(t);
    }
  }
  if (distinct.size() < 4) throw FitError("sinusoid fit needs at least four distinct angles");

  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  Eigen::VectorXd var(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& s = samples[static_cast<std::size_t>(k)];
    const double total = s.count_c + s.count_d;
    if (!(total > 0.0) || s.count_c < 0.0 || s.count_d < 0.0) {
      throw FitError("every fringe sample needs nonnegative counts with a positive total");
    }
    x(k, 0) = 1.0;
    x(k, 1) = std::cos(s.theta);
    x(k, 2) = std::sin(s.theta);
    y(k) = s.count_c / total;
    var(k) = y(k) * (1.0 - y(k)) / total;
  }
  const Eigen::Matrix3d gram = x.transpose() * x;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(gram);
  if (lu.rank() < 3) throw FitError("sinusoid design matrix is rank deficient");
  const Eigen::Matrix3d gram_inv = lu.inverse();
  const Eigen::Vector3d beta = gram_inv * (x.transpose() * y);
  const Eigen::Matrix3d meat = x.transpose() * var.asDiagonal() * x;
  const Eigen::Matrix3d cov = gram_inv * meat * gram_inv;

  SinusoidFit fit{};
  fit.offset = beta(0);
  fit.amplitude = std::hypot(beta(1), beta(2));
  fit.phase = std::atan2(-beta(2), beta(1));
  if (fit.offset == 0.0) throw FitError("fitted offset vanishes");
  fit.visibility = fit.amplitude / fit.offset;
  fit.offset_error = std::sqrt(std::max(cov(0, 0), 0.0));

  const double b = fit.amplitude;
  const double a = fit.offset;
  if (b > 0.0) {
    const Eigen::Vector3d grad_b(0.0, beta(1) / b, beta(2) / b);
    const Eigen::Vector3d grad_phi(0.0, beta(2) / (b * b), -beta(1) / (b * b));
    const Eigen::Vector3d grad_v(-b / (a * a), beta(1) / (a * b), beta(2) / (a * b));
    fit.amplitude_error = std::sqrt(std::max(grad_b.dot(cov * grad_b), 0.0));
    fit.phase_error = std::sqrt(std::max(grad_phi.dot(cov * grad_phi), 0.0));
    fit.visibility_error = std::sqrt(std::max(grad_v.dot(cov * grad_v), 0.0));
  } else {
    // Gradient of |B| is undefined at B = 0; quote the spread of the two
    // quadratures instead.
    fit.amplitude_error = std::sqrt(std::max(0.5 * (cov(1, 1) + cov(2, 2)), 0.0));
    fit.phase_error = std::numbers::pi;
    fit.visibility_error = fit.amplitude_error / std::abs(a);
  }
  return fit;
}

double tpi_fidelity(const TpiVisibilities& v) { return 0.25 * (1.0 + v.v1 + 2.0 * v.v2); }

Eigen::Vector4cd bell_vector(BellState state) {
  const double h = std::sqrt(0.5);
  switch (state) {
    case BellState::PsiPlus:
      return {0.0, h, h, 0.0};
    case BellState::PsiMinus:
      return {0.0, h, -h, 0.0};
    case BellState::PhiPlus:
      return {h, 0.0, 0.0, h};
    case BellState::PhiMinus:
      return {h, 0.0, 0.0, -h};
  }
  return {0.0, h, h, 0.0};
}

double bell_fidelity(const DensityOperator& rho, BellState state) {
  const Eigen::Vector4cd v = bell_vector(state);
  return (v.adjoint() * rho * v)(0, 0).real();
}

DensityOperator project_to_physical(const DensityOperator& rho) {
  const DensityOperator herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DensityOperator> eig(herm);
  const Eigen::Vector4d mu = eig.eigenvalues();

  // Euclidean projection of the spectrum onto the probability simplex.
  std::array<double, 4> sorted{mu(0), mu(1), mu(2), mu(3)};
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (int k = 0; k < 4; ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / (k + 1);
    if (sorted[k] - candidate > 0.0) shift = candidate;
  }
  Eigen::Vector4d lambda;
  for (int k = 0; k < 4; ++k) lambda(k) = std::max(mu(k) - shift, 0.0);
  const Eigen::Matrix4cd vecs = eig.eigenvectors();
  return vecs * lambda.cast<Complex>().asDiagonal() * vecs.adjoint();
}

TomographyResult tomography_linear_inversion(std::span<const TomographySetting> record) {
  const auto basis = paulis();
  std::array<Eigen::Matrix4cd, 16> operators;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) operators[4 * i + j] = kron(basis[i], basis[j]);

  const auto n = static_cast<Eigen::Index>(record.size());
  Eigen::MatrixXd design(n, 16);
  Eigen::VectorXd freq(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& s = record[static_cast<std::size_t>(k)];
    if (!(s.trials > 0.0) || s.counts < 0.0) throw ValidationError("tomography settings need positive trials");
    const Eigen::Matrix4cd proj = product_projector(s.first, s.second);
    for (int m = 0; m < 16; ++m) design(k, m) = 0.25 * (proj * operators[m]).trace().real();
    freq(k) = s.counts / s.trials;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 16) throw FitError("tomography settings are not informationally complete");
  const Eigen::VectorXd coeff = qr.solve(freq);

  DensityOperator raw = DensityOperator::Zero();
  for (int m = 0; m < 16; ++m) raw += 0.25 * coeff(m) * operators[m];
  const double trace = raw.trace().real();
  if (!(trace > 0.0)) throw FitError("linear-inversion estimate has nonpositive trace");
  raw /= trace;
  raw = 0.5 * (raw + raw.adjoint());

  TomographyResult out{raw, project_to_physical(raw), {}, BellState::PsiPlus, 0.0};
  for (int b = 0; b < 4; ++b) {
    out.bell_fidelities[b] = bell_fidelity(out.physical, static_cast<BellState>(b));
  }
  const auto best = std::max_element(out.bell_fidelities.begin(), out.bell_fidelities.end());
  out.best_bell = static_cast<BellState>(best - out.bell_fidelities.begin());
  out.fidelity = *best;
  return out;
}

std::vector<TomographySetting> ideal_tomography_record(const DensityOperator& rho, double trials_per_setting) {
  std::vector<TomographySetting> out;
  constexpr std::array kStates{PolarizationState::H, PolarizationState::V, PolarizationState::D,
                               PolarizationState::R};
  for (auto a : kStates)
    for (auto b : kStates) {
      const double p = std::max((product_projector(a, b) * rho).trace().real(), 0.0);
      out.push_back({a, b, trials_per_setting * p, trials_per_setting});
    }
  return out;
}

}  // namespace qlink
