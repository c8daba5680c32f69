#include "offload/utility.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "offload/errors.hpp"

namespace offload {

PriceProfile prices_for(const Scenario& s, double p_i, double p_j) {
  return PriceProfile{p_i, p_j, s.p_i_max, s.p_j_max};
}

const char* case_name(LatencyCase c) {
  switch (c) {
    case LatencyCase::kMobile: return "case1_ma";
    case LatencyCase::kFixed: return "case2_fa";
    case LatencyCase::kAerial: return "case3_aa";
  }
  return "?";
}

double case_latency(double o, LatencyCase c, const Scenario& s) {
  Delays d = total_delays(o, s);
  switch (c) {
    case LatencyCase::kMobile: return d.ma;
    case LatencyCase::kFixed: return d.fa;
    case LatencyCase::kAerial: return s.channel.t_up + d.aa;
  }
  return 0.0;
}

double end_to_end_latency(double o, const Scenario& s) {
  Delays d = total_delays(o, s);
  return std::max({d.ma, d.fa, s.channel.t_up + d.aa});
}

namespace {

double wa_utility_at_latency(double o, double latency, const PriceProfile& p,
                             const Scenario& s) {
  const auto& wa = s.wa;
  double slack = 1.0 + wa.max_delay - latency;
  if (slack <= 0.0) {
    throw DomainError("deadline infeasible: latency " + std::to_string(latency));
  }
  double qoe = wa.qoe_weight * std::log(slack) * std::log(1.0 + wa.actuator_time / wa.max_delay);
  double pay = o * s.workload * p.p_i + (1.0 - o) * s.workload * p.p_j;
  return qoe - pay - wa.energy_weight * wa_transmission_energy(o, s);
}

}  // namespace

double wa_utility(double o, const PriceProfile& prices, const Scenario& s) {
  return wa_utility_at_latency(o, end_to_end_latency(o, s), prices, s);
}

double wa_utility(double o, const PriceProfile& prices, const Scenario& s, LatencyCase c) {
  return wa_utility_at_latency(o, case_latency(o, c, s), prices, s);
}

double ma_reward_price(const PriceProfile& prices, const Scenario& s) {
  const auto& m = s.mobility;
  double denom = m.resources_high * m.density * (m.speed_high - m.speed_low);
  if (denom == 0.0) throw DomainError("mobility adjustment divides by zero");
  double num = s.ma.idle_resources * m.density_max * std::abs(s.wa.speed - s.ma.speed) + m.offset;
  return m.factor * num / denom * prices.p_i;
}

double ma_utility(double o, const PriceProfile& prices, const Scenario& s) {
  return o * s.workload * ma_reward_price(prices, s) -
         s.ma.compute_cost * compute_energies(o, s).ma;
}

double fa_utility(double o, const PriceProfile& prices, double r_payment, const Scenario& s) {
  return (1.0 - o) * s.workload * prices.p_j - r_payment -
         s.fa.compute_cost * compute_energies(o, s).fa -
         s.fa.tx_cost * fa_to_aa_power_and_energy(o, s).energy;
}

double fa_valuation(double w_k, const PriceProfile& prices, const Scenario& s) {
  double v = prices.p_j * w_k -
             s.fa.delay_penalty * std::log(s.aa.cycles_per_bit * w_k / s.aa.cpu_speed + 1.0);
  return std::max(0.0, v);
}

double aa_valuation(double w_k, const PriceProfile& prices, const Scenario& s) {
  double fa_compute_time = s.fa.cycles_per_bit * w_k / s.fa.cpu_speed;
  double cost = s.aa.compute_cost * aa_compute_energy(w_k, s) +
                s.aa.tx_cost * aa_hover_energy(w_k, s) +
                s.aa.delay_penalty * fa_compute_time * fa_compute_time;
  return std::min(prices.p_j * w_k, cost);
}

double aa_payment(double bid, double ask, double psi) { return psi * bid + (1.0 - psi) * ask; }

double aa_workload(double o, const Scenario& s) { return (1.0 - o) * s.workload * s.alpha; }

double fa_leader_utility(double o, const PriceProfile& prices, const Scenario& s) {
  double w_k = aa_workload(o, s);
  double r = aa_payment(fa_valuation(w_k, prices, s), aa_valuation(w_k, prices, s),
                        s.profit_share);
  return fa_utility(o, prices, r, s);
}

}  // namespace offload
