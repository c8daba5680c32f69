#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "offload/errors.hpp"
#include "offload/stackelberg.hpp"
#include "toy.hpp"

using namespace offload;

namespace {

// Independent argmax of the case utility on an o grid; infeasible points skipped.
double grid_argmax(const PriceProfile& p, const Scenario& s, LatencyCase c, double step) {
  double best_o = 0, best_u = -INFINITY;
  for (long k = 0; k * step <= 1.0 + 1e-12; ++k) {
    double o = std::min(1.0, k * step);
    double u;
    try {
      u = wa_utility(o, p, s, c);
    } catch (const DomainError&) {
      continue;
    }
    if (u > best_u) {
      best_u = u;
      best_o = o;
    }
  }
  return best_o;
}

Scenario random_scenario(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  Scenario s = toy::desk();
  s.wa.qoe_weight = 0.2 + 0.8 * u(rng);
  s.wa.energy_weight = 50 + 450 * u(rng);
  s.alpha = 0.1 + 0.8 * u(rng);
  s.channel.gain_wa_ma = 5e-4 + 1e-3 * u(rng);
  s.channel.gain_wa_fa = s.channel.gain_wa_ma * (1 + 2 * u(rng));
  s.ma.cpu_speed = 8e5 + 6e5 * u(rng);
  return s;
}

}  // namespace

TEST(FollowerDerivative, MatchesCentralDifference) {
  Scenario s = toy::desk();
  PriceProfile p = prices_for(s, 1.5, 4);
  const double h = 1e-6;
  for (LatencyCase c : kAllCases) {
    for (double o : {0.1, 0.3, 0.7}) {
      double fd = (wa_utility(o + h, p, s, c) - wa_utility(o - h, p, s, c)) / (2 * h);
      double an = follower_derivative(o, c, p, s);
      EXPECT_NEAR(an, fd, 1e-5 * std::max(1.0, std::abs(fd))) << case_name(c) << " o=" << o;
    }
  }
}

TEST(FollowerDerivative, SymmetricCancellation) {
  Scenario s = toy::desk();
  s.wa.qoe_weight = 0;
  s.channel.gain_wa_fa = s.channel.gain_wa_ma;
  PriceProfile p = prices_for(s, 3, 3);
  for (LatencyCase c : kAllCases) EXPECT_NEAR(follower_derivative(0.42, c, p, s), 0.0, 1e-9);
}

TEST(FollowerThreshold, EqualGainsClosedForm) {
  Scenario s = toy::desk();
  s.channel.gain_wa_fa = s.channel.gain_wa_ma;
  double L = std::log(1 + s.wa.actuator_time / s.wa.max_delay);
  double p1 = s.wa.qoe_weight * s.ma.cycles_per_bit / s.ma.cpu_speed * L /
              (1 + s.wa.max_delay - s.channel.t_up);
  EXPECT_NEAR(follower_threshold(LatencyCase::kMobile, s), p1, 1e-12);
  s.wa.qoe_weight = 0;
  for (LatencyCase c : kAllCases) EXPECT_NEAR(follower_threshold(c, s), 0.0, 1e-15);
}

TEST(FollowerThreshold, SignOfSlopeAtZero) {
  Scenario s = toy::desk();
  for (LatencyCase c : kAllCases) {
    double P = follower_threshold(c, s);
    for (double gap : {-1.0, -0.1, 0.1, 1.0}) {
      PriceProfile p = prices_for(s, 2, 2 + P + gap);
      double d = follower_derivative(0, c, p, s);
      EXPECT_EQ(d > 0, gap > 0) << case_name(c) << " gap " << gap;
    }
  }
}

TEST(FollowerThreshold, MatchesGridBoundary) {
  // Smallest p_j - p_i on a 1e-3 grid where the grid optimum leaves zero.
  Scenario s = toy::desk();
  for (LatencyCase c : kAllCases) {
    double P = follower_threshold(c, s);
    double gap = std::floor((P - 0.05) / 1e-3) * 1e-3;
    double found = NAN;
    for (; gap < P + 0.05; gap += 1e-3) {
      if (grid_argmax(prices_for(s, 1.0, 1.0 + gap), s, c, 1e-4) > 0) {
        found = gap;
        break;
      }
    }
    ASSERT_FALSE(std::isnan(found));
    EXPECT_NEAR(found, P, 2e-3) << case_name(c);
  }
}

TEST(BestResponse, CornersAndInterior) {
  Scenario s = toy::desk();
  for (LatencyCase c : kAllCases) {
    double P = follower_threshold(c, s);
    EXPECT_EQ(best_response_bisection(c, prices_for(s, 3, 3 + P - 0.5), s, 1e-9).o_star, 0.0);
    EXPECT_EQ(best_response_bisection(c, prices_for(s, 0, s.p_j_max * 10), s, 1e-9).o_star, 1.0);
    FollowerAnalysis f = best_response_bisection(c, prices_for(s, 2, 6), s, 1e-9);
    ASSERT_TRUE(f.interior);
    // Derivative at the root is bounded by the bracket width times the slope.
    PriceProfile p = prices_for(s, 2, 6);
    double h = 1e-4;
    double curvature = std::abs(follower_derivative(f.o_star + h, c, p, s) -
                                follower_derivative(f.o_star - h, c, p, s)) / (2 * h);
    EXPECT_LT(std::abs(follower_derivative(f.o_star, c, p, s)), 10 * 1e-9 * curvature + 1e-9);
  }
}

TEST(BestResponse, AgreesWithGridOnRandomScenarios) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int n = 0; n < 20; ++n) {
    Scenario s = random_scenario(rng);
    PriceProfile p = prices_for(s, 6 * u(rng), 12 * u(rng));
    for (LatencyCase c : kAllCases) {
      double o = best_response(p, s, c, 1e-9).o_star;
      EXPECT_NEAR(o, grid_argmax(p, s, c, 1e-3), 2e-3);
      double uo = wa_utility(o, p, s, c);
      for (double g = 0; g <= 1.0; g += 1e-3) {
        try {
          EXPECT_GE(uo, wa_utility(g, p, s, c) - 1e-6);
        } catch (const DomainError&) {
          // past the deadline
        }
      }
    }
  }
}

TEST(BestResponse, MaxLatencyNotBelowCases) {
  Scenario s = toy::desk();
  PriceProfile p = prices_for(s, 2, 6);
  FollowerAnalysis f = best_response(p, s, std::nullopt, 1e-9);
  double u = wa_utility(f.o_star, p, s);
  for (double g = 0; g <= 1.0; g += 1e-3) EXPECT_GE(u, wa_utility(g, p, s) - 1e-6);
}

TEST(BestResponse, RejectsBadTolerance) {
  Scenario s = toy::desk();
  EXPECT_THROW(best_response_bisection(LatencyCase::kMobile, prices_for(s, 1, 1), s, 0), DomainError);
}

TEST(BindingCase, Rules) {
  Scenario s = toy::desk();
  EXPECT_EQ(select_binding_case(1.0, s), LatencyCase::kMobile);
  s.alpha = 0;
  s.aa.cycles_per_bit = 1e12;
  for (double o : {0.0, 0.5, 0.9}) EXPECT_NE(select_binding_case(o, s), LatencyCase::kAerial);

  // Exact three-way tie at o = 0.5: every case sees t_up + 4.
  Scenario t = toy::desk();
  t.workload = 8;
  t.alpha = 0.5;
  t.ma.cycles_per_bit = t.fa.cycles_per_bit = t.aa.cycles_per_bit = 1;
  t.ma.cpu_speed = 1;
  t.fa.cpu_speed = 0.5;
  t.aa.cpu_speed = 1;
  t.channel.t_k_up = 2;
  ASSERT_EQ(case_latency(0.5, LatencyCase::kMobile, t), case_latency(0.5, LatencyCase::kFixed, t));
  ASSERT_EQ(case_latency(0.5, LatencyCase::kMobile, t), case_latency(0.5, LatencyCase::kAerial, t));
  EXPECT_EQ(select_binding_case(0.5, t), LatencyCase::kMobile);
}

TEST(LeaderSearch, NoDemandMeansZeroPrice) {
  Scenario s = toy::desk();
  SolverOptions opts;
  opts.forced_case = LatencyCase::kMobile;
  LeaderChoice c = leader_price_search(0.0, Leader::kMobile, s, opts);
  EXPECT_EQ(c.price, 0.0);
  EXPECT_EQ(c.utility, 0.0);
}

TEST(LeaderSearch, WithinOneStepOfRefinedGrid) {
  Scenario s = toy::desk();
  SolverOptions opts;
  opts.forced_case = LatencyCase::kFixed;
  LeaderChoice c = leader_price_search(6.0, Leader::kMobile, s, opts);
  const double delta = s.p_i_max / 200;
  double best_p = 0, best_u = 0;
  for (long k = 0; k * delta / 10 < s.p_i_max; ++k) {
    PriceProfile p = prices_for(s, k * delta / 10, 6.0);
    double o = grid_argmax(p, s, LatencyCase::kFixed, 1e-4);
    double u = ma_utility(o, p, s);
    if (u > best_u) {
      best_u = u;
      best_p = p.p_i;
    }
  }
  EXPECT_NEAR(c.price, best_p, delta);
  EXPECT_GE(c.utility, 0.0);
}

TEST(LeaderSearch, SerialMatchesParallel) {
  Scenario s = toy::desk();
  for (Leader who : {Leader::kMobile, Leader::kFixed}) {
    SolverOptions a;
    a.forced_case = LatencyCase::kAerial;
    a.exec = Exec::kSerial;
    SolverOptions b = a;
    b.exec = Exec::kParallel;
    LeaderChoice x = leader_price_search(3.0, who, s, a);
    LeaderChoice y = leader_price_search(3.0, who, s, b);
    EXPECT_EQ(x.price, y.price);
    EXPECT_EQ(x.utility, y.utility);
    EXPECT_EQ(x.o_star, y.o_star);
  }
}

TEST(Equilibrium, VacuousToleranceStopsAfterOneIteration) {
  Scenario s = toy::desk();
  SolverOptions opts;
  opts.eta = 1e9;
  opts.forced_case = LatencyCase::kFixed;
  EquilibriumResult r = iterate_equilibrium(s, opts);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_TRUE(r.converged);
}

TEST(Equilibrium, ConvergesPerCaseOnDesk) {
  Scenario s = toy::desk();
  for (LatencyCase c : kAllCases) {
    SolverOptions opts;
    opts.forced_case = c;
    EquilibriumResult r = iterate_equilibrium(s, opts);
    EXPECT_TRUE(r.converged) << case_name(c);
    EXPECT_LE(r.iterations, 50);
    EXPECT_TRUE(r.constraints.leaders_ok());
    EXPECT_EQ(r.trace.size(), static_cast<std::size_t>(r.iterations));
  }
}

TEST(Equilibrium, SymmetricLeadersRespondAlike) {
  // alpha = 0 removes the AA leg; equal gains and compute profiles make the
  // game invariant under swapping MA and FA (o <-> 1 - o), so the two leaders'
  // best-response maps coincide. Alternating best responses still cycle at the
  // max-latency kink, so the check is on the maps rather than a fixed point.
  Scenario s = toy::desk();
  s.alpha = 0;
  s.channel.gain_wa_fa = s.channel.gain_wa_ma;
  s.fa.cycles_per_bit = s.ma.cycles_per_bit;
  s.fa.cpu_speed = s.ma.cpu_speed;
  s.fa.power_coeff = s.ma.power_coeff;
  s.fa.compute_cost = s.ma.compute_cost;
  s.p_j_max = s.p_i_max;
  SolverOptions opts;
  const double delta = s.p_i_max / 200;
  for (double other : {0.3, 0.9, 2.0, 5.0}) {
    LeaderChoice ma = leader_price_search(other, Leader::kMobile, s, opts);
    LeaderChoice fa = leader_price_search(other, Leader::kFixed, s, opts);
    EXPECT_LE(std::abs(ma.price - fa.price), delta + 1e-12) << other;
    EXPECT_NEAR(ma.utility, fa.utility, 1e-6 * std::max(1.0, std::abs(ma.utility))) << other;
    EXPECT_NEAR(ma.o_star, 1 - fa.o_star, 1e-4) << other;
  }
}
