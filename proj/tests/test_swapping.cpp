#include <gtest/gtest.h>

#include <random>

#include "qlink/errors.hpp"
#include "qlink/swapping.hpp"

using namespace qlink;

namespace {

// Independent enumeration: each Fock-basis pair contributes a photon pattern
// per component; a coincidence needs exactly one photon per side.
double enumerate_vs_ideal(const BellDiagonalMix& m) {
  const auto& r = pme_right_table();
  const auto& w = pme_wrong_table();
  const auto c = m.as_array();
  const std::array<double, 4> ideal{0.0, 1.0, 0.0, 0.0};
  double right = 0.0, wrong = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      right += c[i] * ideal[j] * r[i][j];
      wrong += c[i] * ideal[j] * w[i][j];
    }
  }
  return right / (right + wrong);
}

BellDiagonalMix random_mix(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return BellDiagonalMix::from_unnormalized(u(rng), u(rng) + 1e-6, u(rng), u(rng));
}

}  // namespace

TEST(PmeTables, PublishedEntries) {
  const auto pp = pme_convert(BellDiagonalMix::psi_plus(), BellDiagonalMix::psi_plus());
  EXPECT_DOUBLE_EQ(pp.right_weight, 0.5);
  EXPECT_DOUBLE_EQ(pp.wrong_weight, 0.0);
  const auto mp = pme_convert(BellDiagonalMix::psi_minus(), BellDiagonalMix::psi_plus());
  EXPECT_DOUBLE_EQ(mp.right_weight, 0.0);
  EXPECT_DOUBLE_EQ(mp.wrong_weight, 0.5);
  const auto dd = pme_convert(BellDiagonalMix::double_excitation(), BellDiagonalMix::double_excitation());
  EXPECT_DOUBLE_EQ(dd.right_weight, 0.5);
  EXPECT_DOUBLE_EQ(dd.wrong_weight, 0.5);
  const auto vv = pme_convert(BellDiagonalMix::vacuum(), BellDiagonalMix::vacuum());
  EXPECT_DOUBLE_EQ(vv.success_probability, 0.0);
}

TEST(PmeVsIdeal, Values) {
  EXPECT_DOUBLE_EQ(f_pme_vs_ideal(BellDiagonalMix::psi_plus()), 1.0);
  EXPECT_NEAR(f_pme_vs_ideal(BellDiagonalMix::make(0.0, 0.9, 0.05, 0.05)), 0.95 / 1.05, 1e-15);
  EXPECT_THROW(f_pme_vs_ideal(BellDiagonalMix::vacuum()), DegenerateInputError);
}

TEST(PmeVsIdeal, MatchesTableEnumeration) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 10000; ++i) {
    const auto m = random_mix(rng);
    EXPECT_NEAR(f_pme_vs_ideal(m), enumerate_vs_ideal(m), 1e-12);
  }
}

TEST(PmeVsIdeal, PostSelectionInversion) {
  const auto m = mix_from_post_selection(0.896, 0.985, 0.0);
  EXPECT_NEAR(f_post(m), 0.896, 1e-12);
  EXPECT_NEAR(fock_visibility(m), 0.985, 1e-12);
  EXPECT_NEAR(f_pme_vs_ideal(m), 0.899, 0.005);
  EXPECT_THROW(mix_from_post_selection(0.99, 0.5, 0.0), DomainError);
}

TEST(PmeSelf, Values) {
  EXPECT_DOUBLE_EQ(f_pme_self(BellDiagonalMix::psi_plus()), 1.0);
  EXPECT_NEAR(f_pme_self(BellDiagonalMix::make(0.2, 0.4, 0.4, 0.0)), 0.5, 1e-15);
  EXPECT_THROW(f_pme_self(BellDiagonalMix::vacuum()), DegenerateInputError);
}

TEST(PmeSelf, NoDoubleExcitationLimit) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const auto m = BellDiagonalMix::from_unnormalized(u(rng), u(rng) + 1e-6, u(rng), 1e-8);
    const double v = theta_visibility(m);
    EXPECT_NEAR(f_pme_self(m), 0.5 * (1.0 + v * v), 1e-4);
    EXPECT_GE(f_pme_self(m), 0.0);
    EXPECT_LE(f_pme_self(m), 1.0);
  }
}

TEST(PmeSelf, ClosedFormCanExceedOne) {
  EXPECT_GT(f_pme_self_closed_form(0.95, 0.99), 1.0);
  EXPECT_DOUBLE_EQ(f_pme_self_closed_form(0.0, 0.5), 0.5);
}

TEST(PhaseLedger, Algebra) {
  PhaseLedger a({{"x", 1}, {"y", -2}});
  PhaseLedger b({{"y", -2}, {"z", 3}});
  const PhaseLedger d = a - b;
  EXPECT_EQ(d.coefficient("y"), 0);
  EXPECT_EQ(d.coefficient("z"), -3);
  EXPECT_EQ(d.evaluate({{"x", 5}, {"z", 1}}), 2);
  EXPECT_THROW(d.evaluate({{"x", 5}}), ValidationError);
  EXPECT_EQ(PhaseLedger().to_string(), "0");
  EXPECT_EQ(d.to_string(), "x - 3*z");
}

TEST(ChainLedger, TwoNodes) {
  const auto r = chain_phase_ledger(ChainSpec::linear({"A", "B"}));
  EXPECT_NE(r.eme_relative.coefficient("phi_A"), 0);
  EXPECT_EQ(std::abs(r.eme_relative.coefficient("phi_A")), std::abs(r.eme_relative.coefficient("phi_B")));
  EXPECT_NE(r.eme_relative.coefficient("theta_AB"), 0);
}

TEST(ChainLedger, ThreeNodesMatchesHandDerivation) {
  const auto r = chain_phase_ledger(ChainSpec::linear({"A", "B", "C"}));
  EXPECT_EQ(r.eme_relative.to_string(), "-phi_A + phi_C - pump_A + pump_C + theta_AB - theta_BC");
  EXPECT_EQ(r.eme_relative.coefficient("phi_B"), 0);
  EXPECT_EQ(r.eme_relative.coefficient("psi_B"), 0);
  EXPECT_TRUE(r.pme_relative.empty());
}

TEST(ChainLedger, InteriorSymbolsCancel) {
  for (int n = 3; n <= 6; ++n) {
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.emplace_back(1, char('A' + i));
    const ChainSpec chain = ChainSpec::linear(names);
    const auto r = chain_phase_ledger(chain);
    const auto interior = interior_laser_symbols(chain);
    EXPECT_EQ(interior.size(), 3u * (n - 2));
    for (const auto& s : interior) {
      EXPECT_EQ(r.eme_relative.coefficient(s), 0) << n << " " << s;
      EXPECT_EQ(r.pme_relative.coefficient(s), 0) << n << " " << s;
      EXPECT_EQ(r.global.coefficient(s), 0) << n << " " << s;
    }
  }
}

TEST(ChainLedger, SwapOrderDoesNotMatter) {
  ChainSpec chain = ChainSpec::linear({"A", "B", "C", "D", "E"});
  const auto ref = chain_phase_ledger(chain);
  chain.swap_order = {3, 1, 2};
  EXPECT_EQ(chain_phase_ledger(chain).eme_relative, ref.eme_relative);
}

TEST(ChainLedger, Validation) {
  ChainSpec bad = ChainSpec::linear({"A", "B", "C"});
  bad.swap_order = {0};
  EXPECT_THROW(bad.validate(), ValidationError);
  EXPECT_THROW(ChainSpec::linear({"A"}), ValidationError);
  EXPECT_THROW(ChainSpec::linear({"A", "A"}), ValidationError);
}

TEST(Interferometer, SymmetricArmsAreLocked) {
  InterferometerGeometry g;
  g.arm1 = {10, 12, 7, 9, 30, 21, 5, 3};
  g.arm2 = g.arm1;
  const auto rep = interferometer_decomposition(g);
  EXPECT_TRUE(rep.identity_holds);
  EXPECT_TRUE(rep.write_read_locked);
  EXPECT_TRUE(rep.output_locked);
  EXPECT_TRUE(interferometer_decomposition_check(g));
}

TEST(Interferometer, RandomLockedGeometriesAndPerturbations) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::int64_t> u(-50, 50);
  for (int i = 0; i < 500; ++i) {
    InterferometerGeometry g;
    g.arm1 = {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    g.arm2 = g.arm1;
    // Shift both loops by multiples of the lock modulus.
    g.arm2.write += 2 * u(rng);
    g.arm2.read_out += 2 * u(rng);
    g.arm2.mot_write = u(rng);
    EXPECT_TRUE(interferometer_decomposition_check(g));
    InterferometerGeometry bent = g;
    bent.arm2.telecom += 1;
    EXPECT_FALSE(interferometer_decomposition_check(bent));
    bent = g;
    bent.arm2.read += 1;
    EXPECT_FALSE(interferometer_decomposition_check(bent));
  }
}
