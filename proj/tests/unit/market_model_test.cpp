#include <gtest/gtest.h>

#include <cmath>

#include "offload/errors.hpp"
#include "offload/market_model.hpp"
#include "toy.hpp"

using namespace offload;

TEST(UplinkPower, HandWorkedValues) {
  Scenario s = toy::channel();
  EXPECT_DOUBLE_EQ(uplink_power_wa_ma(0.0, s), 0.0);
  EXPECT_NEAR(uplink_power_wa_ma(1.0, s), 3e-4, 1e-18);
  EXPECT_NEAR(uplink_power_wa_ma(0.5, s), 1e-4, 1e-18);
  EXPECT_DOUBLE_EQ(uplink_power_wa_fa(1.0, s), 0.0);
  EXPECT_NEAR(uplink_power_wa_fa(0.0, s), 3e-4, 1e-18);
  EXPECT_NEAR(uplink_power_wa_fa(0.5, s), 2e-4, 1e-18);
}

TEST(UplinkPower, EnergyIsPowerTimesSlot) {
  Scenario s = toy::channel();
  EXPECT_NEAR(wa_transmission_energy(0.5, s), 1.5e-4, 1e-18);
  EXPECT_DOUBLE_EQ(wa_transmission_energy(0.0, s), uplink_power_wa_fa(0.0, s) * s.channel.t_up);
}

TEST(UplinkPower, RejectsRatioOutsideUnitInterval) {
  Scenario s = toy::channel();
  EXPECT_THROW(uplink_power_wa_ma(1.1, s), DomainError);
  EXPECT_THROW(wa_transmission_energy(-0.1, s), DomainError);
}

TEST(UplinkPower, OverflowGuardTrips) {
  Scenario s = toy::channel();
  s.workload = 1e7;
  EXPECT_THROW(uplink_power_wa_ma(1.0, s), DomainError);
}

TEST(FaToAa, HandWorkedValues) {
  Scenario s = toy::channel();
  s.channel.bandwidth_fa_aa = 1000;
  s.channel.t_k_up = 0.5;
  s.channel.noise_fa_aa = 1e-4;
  s.channel.gain_fa_aa = 1;
  s.alpha = 1;
  LinkBudget b = fa_to_aa_power_and_energy(0.0, s);
  EXPECT_NEAR(b.power, 3e-4, 1e-18);
  EXPECT_NEAR(b.energy, 1.5e-4, 1e-18);
  b = fa_to_aa_power_and_energy(1.0, s);
  EXPECT_EQ(b.power, 0.0);
  s.alpha = 0;
  EXPECT_EQ(fa_to_aa_power_and_energy(0.3, s).energy, 0.0);
}

TEST(Delays, HandWorkedValues) {
  Scenario s = toy::desk();
  s.workload = 10;
  s.channel.t_up = 0.5;
  Delays d = total_delays(0.5, s);
  EXPECT_NEAR(d.ma, 0.55, 1e-15);
  EXPECT_DOUBLE_EQ(total_delays(0.0, s).ma, s.channel.t_up);
  s.alpha = 1;
  EXPECT_DOUBLE_EQ(total_delays(0.0, s).fa, s.channel.t_up);
}

TEST(ComputeEnergies, HandWorkedValues) {
  Scenario s = toy::desk();
  s.workload = 10;
  ComputeEnergies e = compute_energies(1.0, s);
  EXPECT_NEAR(e.ma, 1e-3, 1e-15);
  s.alpha = 0;
  e = compute_energies(0.4, s);
  EXPECT_EQ(e.aa, 0.0);
  EXPECT_DOUBLE_EQ(e.hover, s.channel.t_k_up * s.aa.hover_power);
}

TEST(ComputeEnergies, LinearInWorkload) {
  Scenario s = toy::desk();
  ComputeEnergies base = compute_energies(0.37, s);
  for (double k : {2.0, 10.0}) {
    Scenario t = s;
    t.workload = k * s.workload;
    ComputeEnergies e = compute_energies(0.37, t);
    EXPECT_NEAR(e.ma, k * base.ma, 1e-12 * k * base.ma);
    EXPECT_NEAR(e.fa, k * base.fa, 1e-12 * k * base.fa);
    EXPECT_NEAR(e.aa, k * base.aa, 1e-12 * k * base.aa);
    // Hover is affine: the fixed slot does not scale.
    double slot = s.channel.t_k_up * s.aa.hover_power;
    EXPECT_NEAR(e.hover - slot, k * (base.hover - slot), 1e-9);
  }
}

TEST(Scenario, ValidateNamesViolation) {
  Scenario s = toy::desk();
  s.channel.gain_wa_ma = 0;
  try {
    s.validate();
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("gain"), std::string::npos);
  }
}
