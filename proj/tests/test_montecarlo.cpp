#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qlink/errors.hpp"
#include "qlink/montecarlo.hpp"

using namespace qlink;

namespace {

LinkParams ideal_node(double chi) {
  LinkParams p;
  p.chi = chi;
  p.eta_ret = 1.0;
  p.eta_det_snspd = 1.0;
  p.eta_det_si = 1.0;
  p.dark_rate_hz = 0.0;
  return p;
}

RunConfig spi_config(const LinkParams& p, std::uint64_t trials) {
  RunConfig c;
  c.n_trials = trials;
  c.params_a = p;
  c.params_b = p;
  return c;
}

// 50 km-like node with realistic losses and dark counts.
LinkParams field_node() {
  LinkParams p;
  p.chi = 0.015;
  p.eta_qfc = 0.33;
  p.eta_loss = 0.5;
  p.channel = {50.0};
  return p;
}

double z_score(double a, double b, double err) { return std::abs(a - b) / err; }

}  // namespace

TEST(Cutoff, Selection) {
  EXPECT_EQ(select_excitation_cutoff(0.015, 0.015, 1e-6), 3);
  EXPECT_EQ(select_excitation_cutoff(0.001, 0.015, 1e-4), 2);
  EXPECT_EQ(select_excitation_cutoff(0.1, 0.1, 2e-7), 6);
  EXPECT_THROW(select_excitation_cutoff(0.1, 0.1, 1e-9), TruncationError);
  RunConfig c;
  c.excitation_cutoff = 1;
  EXPECT_THROW(c.validate(), TruncationError);
}

TEST(RunConfig, Validation) {
  RunConfig c;
  c.n_trials = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c.n_trials = 10;
  c.theta_grid = {std::numeric_limits<double>::infinity()};
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_EQ(RunConfig{}.effective_theta_grid().size(), 8u);
}

TEST(Spi, NoExcitationNoDarkGivesNoHeralds) {
  auto c = spi_config(ideal_node(0.0), 100000);
  const auto counts = run_spi(c);
  EXPECT_EQ(counts.trials, 100000u);
  EXPECT_EQ(counts.heralds, 0u);
  EXPECT_THROW(estimate_mix(counts), DegenerateInputError);
}

TEST(Spi, DeterministicAcrossThreadCounts) {
  auto c = spi_config(field_node(), 300000);
  c.noise = PhaseNoiseModel::gaussian(0.2);
  c.threads = 1;
  const auto one = run_spi(c);
  c.threads = 3;
  const auto three = run_spi(c);
  c.threads = 8;
  EXPECT_EQ(one, three);
  EXPECT_EQ(one, run_spi(c));
  c.seed = 2;
  EXPECT_FALSE(one == run_spi(c));
}

TEST(Spi, AgreesWithOracle) {
  const auto c = spi_config(field_node(), 4'000'000);
  const auto counts = run_spi(c);
  const auto mc = estimate_mix(counts);
  const auto o = oracle_enumerate(c);
  EXPECT_LT(z_score(mc.p_ent, o.p_ent, mc.p_ent_err), 4.0);
  EXPECT_LT(z_score(mc.v_f, o.estimate.v_f, mc.v_f_err), 4.0);
  EXPECT_LT(z_score(mc.v_theta, o.estimate.v_theta, mc.v_theta_err), 4.0);
  EXPECT_LT(z_score(mc.c00, o.estimate.c00, mc.c00_err), 4.0);
}

TEST(Spi, HeraldRateMatchesLeadingOrderFormula) {
  LinkParams p = field_node();
  p.chi = 0.002;
  p.dark_rate_hz = 0.0;
  const auto o = oracle_enumerate(spi_config(p, 1));
  EXPECT_NEAR(o.p_ent / p_ent_spi(p), 1.0, 0.01);
  EXPECT_DOUBLE_EQ(o.p_false_herald, 0.0);
}

TEST(Oracle, SingleExcitationLimit) {
  const auto o = oracle_enumerate(spi_config(ideal_node(1e-5), 1));
  EXPECT_NEAR(o.estimate.v_f, 1.0, 1e-4);
  EXPECT_NEAR(o.estimate.v_theta, 1.0, 1e-4);
  EXPECT_NEAR(o.estimate.f_post, 1.0, 1e-4);
}

TEST(Oracle, DoubleExcitationOfOrderChi) {
  const double chi = 0.015;
  const auto o = oracle_enumerate(spi_config(ideal_node(chi), 1));
  const auto& m = o.estimate.mix;
  const double ratio = m.c11 / (m.c_plus + m.c_minus);
  EXPECT_GT(ratio, 0.1 * chi);
  EXPECT_LT(ratio, 10.0 * chi);
}

TEST(Oracle, LocalCalibratedRate) {
  LinkParams p;
  p.chi = 0.015;
  p.eta_det_snspd = 0.5;
  p.eta_loss = 0.88;
  p.channel = {0.01};
  const auto o = oracle_enumerate(spi_config(p, 1));
  EXPECT_NEAR(o.p_ent, 0.0132, 0.03 * 0.0132);
}

TEST(Oracle, EstimatorRecoversExpectations) {
  const auto o = oracle_enumerate(spi_config(field_node(), 1));
  const auto scaled = estimate_mix(scale_tallies(o.expected, 1e9));
  EXPECT_NEAR(scaled.v_f, o.estimate.v_f, 1e-12);
  EXPECT_NEAR(scaled.v_theta, o.estimate.v_theta, 1e-9);
  EXPECT_NEAR(scaled.f_post, 0.5 * (scaled.v_f + scaled.v_theta), 1e-12);
}

TEST(Spi, DarkCountsOnlyGiveFlatFringe) {
  LinkParams p = ideal_node(1e-7);
  p.dark_rate_hz = 2e5;
  p.dark_rate_si_hz = 2e5;
  auto c = spi_config(p, 1'000'000);
  c.excitation_cutoff = 1;
  c.truncation_tolerance = 0.5;
  const auto counts = run_spi(c);
  EXPECT_GT(counts.heralds, 1000u);
  const auto e = estimate_mix(counts);
  EXPECT_LT(std::abs(e.v_theta), 4.0 * e.v_theta_err + 0.02);
}

TEST(Spi, PhaseNoiseScalesThetaVisibility) {
  auto c = spi_config(ideal_node(0.01), 3'000'000);
  const auto clean = estimate_mix(run_spi(c));
  const auto noise = PhaseNoiseModel::gaussian(13.4 * std::numbers::pi / 180.0);
  c.noise = noise;
  c.seed = 99;
  const auto noisy = estimate_mix(run_spi(c));
  const double ratio = noisy.v_theta / clean.v_theta;
  const double err = std::hypot(noisy.v_theta_err, clean.v_theta_err) / clean.v_theta;
  EXPECT_NEAR(ratio, c_ph(noise), 4.0 * err);
  EXPECT_NEAR(noisy.v_f, clean.v_f, 4.0 * std::hypot(noisy.v_f_err, clean.v_f_err));
}

TEST(Tpi, PerfectPairsGiveUnitVisibilities) {
  RunConfig c;
  c.scheme = Scheme::TPI;
  c.n_trials = 1'000'000;
  c.params_a = ideal_node(0.1);
  c.params_b = c.params_a;
  c.excitation_cutoff = 1;
  c.truncation_tolerance = 0.5;
  c.tpi_filter_efficiency = 1.0;
  c.tpi_flip_rate = 0.0;
  const auto e = estimate_tpi(run_tpi(c));
  EXPECT_DOUBLE_EQ(e.v1, 1.0);
  EXPECT_DOUBLE_EQ(e.v2, 1.0);
  EXPECT_DOUBLE_EQ(e.fidelity, 1.0);
}

TEST(Tpi, FlipRateGivesAffineFidelity) {
  RunConfig c;
  c.scheme = Scheme::TPI;
  c.n_trials = 2'000'000;
  c.params_a = ideal_node(0.1);
  c.params_b = c.params_a;
  c.excitation_cutoff = 1;
  c.truncation_tolerance = 0.5;
  c.tpi_filter_efficiency = 1.0;
  c.overlaps.write_out = overlap_from_hom(0.063);
  const auto e = estimate_tpi(run_tpi(c));
  EXPECT_NEAR(e.fidelity, 0.937, 4.0 * e.fidelity_err);
}

TEST(Tpi, HigherExcitationLowersFidelity) {
  const auto fidelity = [](double chi) {
    RunConfig c;
    c.scheme = Scheme::TPI;
    c.n_trials = 20'000'000;
    c.params_a = ideal_node(chi);
    c.params_a.eta_loss = 0.6;
    c.params_a.eta_ret = 0.9;
    c.params_b = c.params_a;
    return estimate_tpi(run_tpi(c));
  };
  const auto lo = fidelity(0.019);
  const auto hi = fidelity(0.038);
  EXPECT_LT(hi.fidelity, lo.fidelity - 3.0 * std::hypot(hi.fidelity_err, lo.fidelity_err));
}

TEST(Tpi, DeterministicAcrossThreadCounts) {
  RunConfig c;
  c.scheme = Scheme::TPI;
  c.n_trials = 300000;
  c.params_a = ideal_node(0.05);
  c.params_b = c.params_a;
  c.threads = 1;
  const auto one = run_tpi(c);
  c.threads = 4;
  EXPECT_EQ(one, run_tpi(c));
}
