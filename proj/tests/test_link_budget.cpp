#include <gtest/gtest.h>

#include <cmath>

#include "qlink/errors.hpp"
#include "qlink/link_budget.hpp"

using namespace qlink;

TEST(FiberTransmission, Examples) {
  EXPECT_DOUBLE_EQ(fiber_transmission({0.0, 0.3, 0.0}), 1.0);
  EXPECT_NEAR(fiber_transmission({11.0, 4.0 / 11.0, 0.0}), 0.398, 1e-3);
  EXPECT_NEAR(fiber_transmission({50.0}), std::pow(10.0, -1.5), 1e-15);
  EXPECT_THROW(fiber_transmission({-1.0}), ValidationError);
}

TEST(QfcBudget, Products) {
  EXPECT_NEAR(qfc_end_to_end(0.70, 0.80, 0.60), 0.336, 1e-15);
  EXPECT_DOUBLE_EQ(qfc_end_to_end(1, 1, 1), 1.0);
  EXPECT_DOUBLE_EQ(qfc_end_to_end(0, 0.4, 0.7), 0.0);
  EXPECT_THROW(qfc_end_to_end(1.1, 1, 1), ValidationError);
}

TEST(QfcSnr, Proportionality) {
  EXPECT_NEAR(qfc_snr(0.015, 0.70, 2500.0, 200.0, 2e4), 21.0, 1e-9);
  EXPECT_DOUBLE_EQ(qfc_snr(0.0, 0.70, 2500.0, 200.0, 2e4), 0.0);
  EXPECT_NEAR(qfc_snr(0.015, 0.70, 2500.0, 100.0, 2e4), 42.0, 1e-9);
  EXPECT_TRUE(std::isinf(qfc_snr(0.015, 0.70, 0.0, 200.0, 2e4)));
}

TEST(PEntSpi, CalibratedLocalValue) {
  LinkParams p;
  p.chi = 0.015;
  p.eta_det_snspd = 0.5;
  p.eta_loss = 0.88;
  EXPECT_NEAR(p_ent_spi(p), 0.0132, 1e-12);
  p.eta_loss = 0.0;
  EXPECT_DOUBLE_EQ(p_ent_spi(p), 0.0);
}

TEST(PEntSpi, LengthRatio) {
  LinkParams p;
  p.channel = {10.0};
  const double p10 = p_ent_spi(p);
  p.channel = {50.0};
  EXPECT_NEAR(p10 / p_ent_spi(p), 3.98, 0.02);
  EXPECT_NEAR(p10 / p_ent_spi(p), std::pow(10.0, 0.6), 1e-12);
}

TEST(PEntTpi, ScalesWithFullChannelLoss) {
  LinkParams a;
  a.channel = {10.0};
  LinkParams far = a;
  far.channel = {20.0};
  const double ratio_tpi = p_ent_tpi(a, a) / p_ent_tpi(far, far);
  const double ratio_spi = p_ent_spi(a) / p_ent_spi(far);
  EXPECT_NEAR(ratio_tpi, ratio_spi * ratio_spi * ratio_spi * ratio_spi, 1e-9);
  LinkParams dead = a;
  dead.eta_qfc = 0.0;
  EXPECT_DOUBLE_EQ(p_ent_tpi(a, dead), 0.0);
}

TEST(PEntTpi, PerfectArms) {
  LinkParams p;
  p.chi = 0.02;
  p.eta_det_snspd = 1.0;
  EXPECT_NEAR(p_ent_tpi(p, p), 0.02 * 0.02 / 2.0, 1e-15);
}

TEST(Timing, EntanglementTimes) {
  EXPECT_NEAR(communication_time_s({50.0}), 250e-6, 1e-15);
  EXPECT_NEAR(t_ent(4.43e-4, {50.0}), 0.56, 0.02 * 0.56);
  EXPECT_NEAR(t_ent(1.76e-3, {10.0}), 0.028, 0.02 * 0.028);
  EXPECT_DOUBLE_EQ(t_ent(0.01, {0.0}), 0.0);
  EXPECT_THROW(t_ent(0.0, {10.0}), DomainError);
}

TEST(Timing, DutyCycle) {
  const DutyCycle d = duty_cycle(TimingModel{});
  EXPECT_DOUBLE_EQ(d.trials_per_second, 20000.0);
  EXPECT_NEAR(d.duty_fraction, 0.10, 1e-15);
  TimingModel none;
  none.trials_per_cycle = 0;
  const DutyCycle z = duty_cycle(none);
  EXPECT_DOUBLE_EQ(z.trials_per_second, 0.0);
  EXPECT_DOUBLE_EQ(z.duty_fraction, 0.0);
  TimingModel overrun;
  overrun.mot_ms = 20.0;
  EXPECT_THROW(duty_cycle(overrun), ConfigError);
}

TEST(Calibration, InvertsRateFormula) {
  LinkParams p;
  p.chi = 0.015;
  p.eta_det_snspd = 0.5;
  EXPECT_NEAR(calibrate_eta_loss(0.0132, p), 0.88, 1e-12);
  EXPECT_THROW(calibrate_eta_loss(0.0, p), DomainError);
  EXPECT_THROW(calibrate_eta_loss(0.018, p), CalibrationError);
}

TEST(LinkParams, Validation) {
  LinkParams p;
  p.chi = 0.2;
  EXPECT_THROW(p.validate(), ValidationError);
  p.chi = 0.01;
  p.dark_rate_hz = -1.0;
  EXPECT_THROW(p.validate(), ValidationError);
}
