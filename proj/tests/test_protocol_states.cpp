#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "qlink/errors.hpp"
#include "qlink/protocol_states.hpp"

using namespace qlink;

TEST(BellDiagonalMix, MakeValidates) {
  EXPECT_NO_THROW(BellDiagonalMix::make(0.1, 0.8, 0.05, 0.05));
  EXPECT_THROW(BellDiagonalMix::make(0.1, 0.8, 0.05, 0.1), ValidationError);
  EXPECT_THROW(BellDiagonalMix::make(-0.1, 1.0, 0.05, 0.05), ValidationError);
  const auto m = BellDiagonalMix::from_unnormalized(1, 2, 1, 0);
  EXPECT_DOUBLE_EQ(m.c_plus, 0.5);
}

TEST(BellDiagonalMix, FromVisibilitiesRoundTrip) {
  const auto m = BellDiagonalMix::from_visibilities(0.2, 0.95, 0.8);
  EXPECT_NEAR(m.c00, 0.2, 1e-12);
  EXPECT_NEAR(fock_visibility(m), 0.95, 1e-12);
  EXPECT_NEAR(theta_visibility(m), 0.8, 1e-12);
}

TEST(Visibilities, FockExamples) {
  EXPECT_NEAR(fock_visibility(BellDiagonalMix::make(0.9, 0.05, 0.05, 0.0)), 1.0, 1e-15);
  EXPECT_NEAR(fock_visibility(BellDiagonalMix::make(0.0, 0.45, 0.45, 0.10)), 0.9, 1e-15);
}

TEST(Visibilities, ThetaExamples) {
  EXPECT_NEAR(theta_visibility(BellDiagonalMix::psi_plus()), 1.0, 1e-15);
  EXPECT_NEAR(theta_visibility(BellDiagonalMix::make(0.0, 0.4, 0.4, 0.2)), 0.0, 1e-15);
  EXPECT_NEAR(theta_visibility(BellDiagonalMix::make(0.0, 0.9, 0.05, 0.05)), 0.85, 1e-15);
}

TEST(Visibilities, PostSelectedFidelity) {
  EXPECT_NEAR(f_post(BellDiagonalMix::make(0.0, 0.9, 0.05, 0.05)), 0.9, 1e-15);
  EXPECT_NEAR(f_post(BellDiagonalMix::psi_plus()), 1.0, 1e-15);
  EXPECT_THROW(f_post(BellDiagonalMix::vacuum()), DegenerateInputError);
}

TEST(Visibilities, PostSelectedIdentityRandomized) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const auto m = BellDiagonalMix::from_unnormalized(u(rng), u(rng) + 1e-3, u(rng), u(rng));
    EXPECT_NEAR(f_post(m), 0.5 * (fock_visibility(m) + theta_visibility(m)), 1e-12);
  }
}

TEST(SigmaTheta, IdealStateSwitchesPorts) {
  const auto at0 = sigma_theta_rates(BellDiagonalMix::psi_plus(), {0.0, 0.0});
  EXPECT_NEAR(at0.rate_c, 1.0, 1e-15);
  EXPECT_NEAR(at0.rate_d, 0.0, 1e-15);
  const auto atpi = sigma_theta_rates(BellDiagonalMix::psi_plus(), {std::numbers::pi, 0.0});
  EXPECT_NEAR(atpi.rate_c, 0.0, 1e-15);
  EXPECT_NEAR(atpi.rate_d, 1.0, 1e-15);
}

TEST(SigmaTheta, FringeVisibilityOfMix) {
  const auto m = BellDiagonalMix::make(0.0, 0.9, 0.05, 0.05);
  std::vector<FringeSample> samples;
  for (int k = 0; k < 4; ++k) {
    const double th = k * std::numbers::pi / 2;
    const auto r = sigma_theta_rates(m, {th, 0.0});
    samples.push_back({th, 1e6 * r.rate_c, 1e6 * r.rate_d});
  }
  EXPECT_NEAR(fit_sinusoid(samples).visibility, 0.85, 1e-9);
}

TEST(FitSinusoid, ExactRecoveryAndConstant) {
  std::vector<FringeSample> s, flat;
  for (int k = 0; k < 8; ++k) {
    const double th = k * std::numbers::pi / 4;
    const double share = 0.5 * (1.0 + 0.8 * std::cos(th + 0.3));
    s.push_back({th, 1e5 * share, 1e5 * (1.0 - share)});
    flat.push_back({th, 500.0, 500.0});
  }
  const auto fit = fit_sinusoid(s);
  EXPECT_NEAR(fit.visibility, 0.8, 1e-9);
  EXPECT_NEAR(fit.phase, 0.3, 1e-9);
  EXPECT_NEAR(fit_sinusoid(flat).visibility, 0.0, 1e-12);
}

TEST(FitSinusoid, PoissonNoiseWithinErrors) {
  std::mt19937_64 rng(11);
  std::vector<FringeSample> s;
  for (int k = 0; k < 8; ++k) {
    const double th = k * std::numbers::pi / 4;
    const double share = 0.5 * (1.0 + 0.8 * std::cos(th));
    std::poisson_distribution<long> pc(1e5 * share), pd(1e5 * (1.0 - share));
    s.push_back({th, double(pc(rng)), double(pd(rng))});
  }
  const auto fit = fit_sinusoid(s);
  EXPECT_GT(fit.visibility_error, 0.0);
  EXPECT_NEAR(fit.visibility, 0.8, 3.0 * fit.visibility_error);
}

TEST(FitSinusoid, RejectsTooFewAngles) {
  std::vector<FringeSample> s{{0.0, 10, 5}, {1.0, 3, 9}};
  EXPECT_THROW(fit_sinusoid(s), FitError);
}

TEST(TpiFidelity, Values) {
  EXPECT_NEAR(tpi_fidelity({0.630, 0.612}), 0.7135, 1e-12);
  EXPECT_NEAR(tpi_fidelity({1.0, 1.0}), 1.0, 1e-15);
  EXPECT_NEAR(tpi_fidelity({0.0, 0.0}), 0.25, 1e-15);
  EXPECT_THROW(TpiVisibilities::make(1.2, 0.0), ValidationError);
}

TEST(Tomography, IdealBellState) {
  const Eigen::Vector4cd v = bell_vector(BellState::PsiPlus);
  const DensityOperator rho = v * v.adjoint();
  const auto res = tomography_linear_inversion(ideal_tomography_record(rho, 1e4));
  EXPECT_EQ(res.best_bell, BellState::PsiPlus);
  EXPECT_NEAR(res.fidelity, 1.0, 1e-9);
}

TEST(Tomography, WhiteNoise) {
  const DensityOperator rho = DensityOperator::Identity() / 4.0;
  const auto res = tomography_linear_inversion(ideal_tomography_record(rho, 1e4));
  for (double f : res.bell_fidelities) EXPECT_NEAR(f, 0.25, 1e-9);
}

TEST(Tomography, DepolarizedBellState) {
  const Eigen::Vector4cd v = bell_vector(BellState::PhiMinus);
  const DensityOperator rho = 0.9 * v * v.adjoint() + 0.1 * DensityOperator::Identity() / 4.0;
  const auto res = tomography_linear_inversion(ideal_tomography_record(rho, 1e4));
  EXPECT_EQ(res.best_bell, BellState::PhiMinus);
  EXPECT_NEAR(res.fidelity, 0.925, 1e-9);
}

TEST(Tomography, PhysicalProjectionIsPositive) {
  DensityOperator rho = DensityOperator::Zero();
  rho(0, 0) = 1.1;
  rho(1, 1) = -0.1;
  const DensityOperator p = project_to_physical(rho);
  Eigen::SelfAdjointEigenSolver<DensityOperator> es(p);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
  EXPECT_NEAR(p.trace().real(), 1.0, 1e-12);
}

TEST(Tomography, IncompleteRecordFails) {
  const Eigen::Vector4cd v = bell_vector(BellState::PsiPlus);
  auto rec = ideal_tomography_record(v * v.adjoint(), 100);
  rec.resize(4);
  EXPECT_THROW(tomography_linear_inversion(rec), FitError);
}
