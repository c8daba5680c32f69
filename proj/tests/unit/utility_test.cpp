#include <gtest/gtest.h>

#include <cmath>

#include "offload/errors.hpp"
#include "offload/utility.hpp"
#include "toy.hpp"

using namespace offload;

namespace {

// Latency of each case, written out from the delay model.
double oracle_latency(double o, int c, const Scenario& s) {
  double w = s.workload;
  if (c == 1) return s.channel.t_up + s.ma.cycles_per_bit * o * w / s.ma.cpu_speed;
  if (c == 2) {
    return s.channel.t_up + s.fa.cycles_per_bit * (1 - o) * w * (1 - s.alpha) / s.fa.cpu_speed;
  }
  return s.channel.t_up + s.channel.t_k_up +
         s.aa.cycles_per_bit * (1 - o) * w * s.alpha / s.aa.cpu_speed;
}

}  // namespace

TEST(WaUtility, PureQoeWhenFree) {
  Scenario s = toy::desk();
  s.wa.energy_weight = 0;
  PriceProfile p = prices_for(s, 0, 0);
  for (double o : {0.0, 0.3, 0.9}) {
    double t = std::max({oracle_latency(o, 1, s), oracle_latency(o, 2, s), oracle_latency(o, 3, s)});
    double want = s.wa.qoe_weight * std::log(1 + s.wa.max_delay - t) *
                  std::log(1 + s.wa.actuator_time / s.wa.max_delay);
    EXPECT_NEAR(wa_utility(o, p, s), want, 1e-12);
  }
}

TEST(WaUtility, HandWorkedComposition) {
  // Latency 0.55 s, eps 2, t_n 0.1: 0.5 ln(2.45) ln(1.05) minus payments and energy.
  Scenario s = toy::channel();
  s.workload = 10;
  s.wa.max_delay = 2;
  s.wa.actuator_time = 0.1;
  s.wa.qoe_weight = 0.5;
  s.wa.energy_weight = 3;
  s.alpha = 0;
  s.fa.cpu_speed = 1e12;
  PriceProfile p = prices_for(s, 0.2, 0.1);
  double o = 0.5;
  double qoe = 0.5 * std::log(2.45) * std::log(1.05);
  double pay = o * 10 * 0.2 + (1 - o) * 10 * 0.1;
  double x = 5.0 / (1000 * 0.5);  // bits per slot over bandwidth
  double energy = (1e-4 * (std::exp2(x) - 1) + 1e-4 * (std::exp2(x) - 1) * std::exp2(x)) * 0.5;
  EXPECT_NEAR(wa_utility(o, p, s, LatencyCase::kMobile), qoe - pay - 3 * energy, 1e-12);
}

TEST(WaUtility, MaxLatencyIsWorstCase) {
  Scenario s = toy::desk();
  PriceProfile p = prices_for(s, 1, 2);
  for (double o = 0; o <= 1.0; o += 0.05) {
    double u = wa_utility(o, p, s);
    double lo = std::min({wa_utility(o, p, s, LatencyCase::kMobile),
                          wa_utility(o, p, s, LatencyCase::kFixed),
                          wa_utility(o, p, s, LatencyCase::kAerial)});
    EXPECT_NEAR(u, lo, 1e-12) << o;
  }
}

TEST(WaUtility, DecreasingTowardDeadline) {
  Scenario s = toy::desk();
  s.wa.max_delay = 0.05;
  // Push the MA latency close to 1 + eps.
  s.ma.cpu_speed = s.ma.cycles_per_bit * s.workload / (1.0 + s.wa.max_delay - s.channel.t_up - 1e-3);
  PriceProfile p = prices_for(s, 0, 0);
  double h = 1e-5;
  double o = 0.995;
  double slope = (wa_utility(o + h, p, s, LatencyCase::kMobile) -
                  wa_utility(o - h, p, s, LatencyCase::kMobile)) / (2 * h);
  EXPECT_LT(slope, 0.0);
  s.ma.cpu_speed *= 0.5;
  EXPECT_THROW(wa_utility(1.0, p, s, LatencyCase::kMobile), DomainError);
}

TEST(MaRewardPrice, Cancellation) {
  Scenario s = toy::desk();
  auto& m = s.mobility;
  s.ma.idle_resources = m.resources_high;
  m.density = m.density_max;
  s.wa.speed = m.speed_high;
  s.ma.speed = m.speed_low;
  m.offset = 0;
  m.factor = 1;
  EXPECT_NEAR(ma_reward_price(prices_for(s, 3.7, 0), s), 3.7, 1e-12);
  s.ma.speed = s.wa.speed;
  EXPECT_EQ(ma_reward_price(prices_for(s, 3.7, 0), s), 0.0);
  s.ma.speed = m.speed_low;
  EXPECT_EQ(ma_reward_price(prices_for(s, 0, 0), s), 0.0);
}

TEST(MaRewardPrice, DeskDefaultsAreNeutral) {
  Scenario s = toy::desk();
  EXPECT_NEAR(ma_reward_price(prices_for(s, 2.5, 0), s), 2.5, 1e-12);
}

TEST(MaUtility, HandWorked) {
  Scenario s = toy::desk();
  s.workload = 10;
  PriceProfile p = prices_for(s, 0.2, 0);
  // p_i^v = 0.2 on desk mobility; xi_i E_ma = 1e-20 * 1e12 * 1e4 * 10 = 1e-3.
  EXPECT_NEAR(ma_utility(1.0, p, s), 1.999, 1e-12);
  EXPECT_EQ(ma_utility(0.0, p, s), 0.0);
  s.ma.compute_cost = 0;
  EXPECT_NEAR(ma_utility(0.6, p, s), 0.6 * 10 * 0.2, 1e-12);
}

TEST(FaUtility, Corners) {
  Scenario s = toy::desk();
  PriceProfile p = prices_for(s, 1, 4);
  EXPECT_NEAR(fa_utility(1.0, p, 2.5, s), -2.5, 1e-12);
  s.fa.compute_cost = 0;
  s.fa.tx_cost = 0;
  EXPECT_NEAR(fa_utility(0.3, p, 0, s), 0.7 * s.workload * 4, 1e-9);
}

TEST(FaUtility, Composition) {
  Scenario s = toy::desk();
  PriceProfile p = prices_for(s, 1, 4);
  double o = 0.4;
  double fa_bits = (1 - o) * s.workload * (1 - s.alpha);
  double e_fa = s.fa.power_coeff * s.fa.cpu_speed * s.fa.cpu_speed * s.fa.cycles_per_bit * fa_bits;
  double x = (1 - o) * s.workload * s.alpha / (s.channel.bandwidth_fa_aa * s.channel.t_k_up);
  double e_jk = s.channel.noise_fa_aa / s.channel.gain_fa_aa * (std::exp2(x) - 1) * s.channel.t_k_up;
  double want = (1 - o) * s.workload * 4 - 1.5 - s.fa.compute_cost * e_fa - s.fa.tx_cost * e_jk;
  EXPECT_NEAR(fa_utility(o, p, 1.5, s), want, 1e-9);
}

TEST(Valuations, FaCornersAndClamp) {
  Scenario s = toy::desk();
  PriceProfile p = prices_for(s, 0, 6);
  EXPECT_EQ(fa_valuation(0, p, s), 0.0);
  s.fa.delay_penalty = 0;
  EXPECT_DOUBLE_EQ(fa_valuation(7, p, s), 42);
  s.fa.delay_penalty = 1e6;
  EXPECT_EQ(fa_valuation(7, p, s), 0.0);
}

TEST(Valuations, AaCornersAndClamp) {
  Scenario s = toy::desk();
  PriceProfile p = prices_for(s, 0, 6);
  EXPECT_EQ(aa_valuation(0, p, s), 0.0);
  s.aa.delay_penalty = 0;
  s.aa.tx_cost = 0;
  double e_aa = s.aa.power_coeff * s.aa.cpu_speed * s.aa.cpu_speed * s.aa.cycles_per_bit * 5;
  EXPECT_NEAR(aa_valuation(5, p, s), s.aa.compute_cost * e_aa, 1e-15);
  s.aa.delay_penalty = 1e9;
  EXPECT_DOUBLE_EQ(aa_valuation(5, p, s), 30);
}

TEST(Valuations, BoundedByRevenueOnGrid) {
  Scenario s = toy::desk();
  PriceProfile p = prices_for(s, 0, 6);
  for (double w = 0; w <= 200; w += 0.5) {
    double v = fa_valuation(w, p, s);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, p.p_j * w + 1e-12);
    EXPECT_LE(aa_valuation(w, p, s), p.p_j * w + 1e-12);
  }
}

TEST(AaPayment, Blend) {
  EXPECT_DOUBLE_EQ(aa_payment(7, 7, 0.3), 7);
  EXPECT_DOUBLE_EQ(aa_payment(40, 10, 0.5), 25);
  EXPECT_NEAR(aa_payment(40, 10, 1 - 1e-12), 40, 1e-9);
}

TEST(Latency, CaseThreeIncludesBothSlots) {
  Scenario s = toy::desk();
  for (double o : {0.0, 0.25, 1.0}) {
    for (int c = 1; c <= 3; ++c) {
      EXPECT_NEAR(case_latency(o, static_cast<LatencyCase>(c), s), oracle_latency(o, c, s), 1e-12);
    }
  }
}
