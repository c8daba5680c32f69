#include "offload/market_model.hpp"

#include <cmath>
#include <string>

#include "offload/errors.hpp"

namespace offload {
namespace {

void require_fraction(double o) {
  if (!(o >= 0.0 && o <= 1.0)) {
    throw DomainError("offloading ratio " + std::to_string(o) + " outside [0,1]");
  }
}

// 2^x with the overflow guard applied.
double pow2(double x, const Scenario& s) {
  if (x > s.overflow_guard) {
    throw DomainError("rate exponent " + std::to_string(x) + " exceeds guard " +
                      std::to_string(s.overflow_guard));
  }
  return std::exp2(x);
}

double wa_exponent(double bits, const Scenario& s) {
  return bits / (s.channel.bandwidth_wa * s.channel.t_up);
}

void check(bool ok, const char* what) {
  if (!ok) throw DomainError(std::string("invalid scenario: ") + what);
}

AgentProfile read_agent(const Config& c, const std::string& p, Role role) {
  AgentProfile a;
  a.role = role;
  auto get = [&](const char* k) { return c.number(p + "." + k); };
  switch (role) {
    case Role::kWireless:
      a.energy_weight = get("energy_weight");
      a.qoe_weight = get("qoe_weight");
      a.max_delay = get("max_delay");
      a.actuator_time = get("actuator_time");
      a.speed = get("speed");
      break;
    case Role::kMobile:
      a.speed = get("speed");
      a.idle_resources = get("idle_resources");
      break;
    case Role::kFixed:
      a.tx_cost = get("tx_cost");
      a.delay_penalty = get("delay_penalty");
      break;
    case Role::kAerial:
      a.tx_cost = get("tx_cost");
      a.hover_power = get("hover_power");
      a.delay_penalty = get("delay_penalty");
      break;
  }
  if (role != Role::kWireless) {
    a.cycles_per_bit = get("cycles_per_bit");
    a.cpu_speed = get("cpu_speed");
    a.power_coeff = get("power_coeff");
    a.compute_cost = get("compute_cost");
  }
  return a;
}

}  // namespace

void Scenario::validate() const {
  const auto& c = channel;
  check(c.bandwidth_wa > 0 && c.noise_wa > 0 && c.bandwidth_fa_aa > 0 && c.noise_fa_aa > 0,
        "bandwidths and noise powers must be positive");
  check(c.gain_wa_ma > 0 && c.gain_wa_fa > 0 && c.gain_fa_aa > 0, "gains must be positive");
  check(c.t_up > 0 && c.t_k_up > 0, "upload slots must be positive");
  check(c.t_up <= c.t_up_max && c.t_k_up <= c.t_k_up_max, "upload slot exceeds its cap");
  for (const AgentProfile* a : {&ma, &fa, &aa}) {
    check(a->cycles_per_bit > 0 && a->cpu_speed > 0, "lambda and mu must be positive");
    check(a->power_coeff >= 0 && a->compute_cost >= 0 && a->tx_cost >= 0,
          "sigma, xi, gamma must be nonnegative");
  }
  check(wa.max_delay > 0, "epsilon_n must be positive");
  check(wa.actuator_time >= 0, "t_n must be nonnegative");
  check(workload > 0, "workload must be positive");
  check(alpha >= 0 && alpha <= 1, "alpha must lie in [0,1]");
  check(profit_share > 0 && profit_share < 1, "psi must lie in (0,1)");
  check(mobility.density > 0 && mobility.density <= mobility.density_max,
        "need 0 < rho <= rho_bar");
  check(mobility.speed_low < mobility.speed_high, "need v_low < v_high");
  check(ma.idle_resources >= mobility.resources_low &&
            ma.idle_resources <= mobility.resources_high,
        "D_i outside [D_low, D_high]");
  check(p_i_max > 0 && p_j_max > 0, "price caps must be positive");
}

Scenario scenario_from_config(const Config& c) {
  Scenario s;
  s.wa = read_agent(c, "wa", Role::kWireless);
  s.ma = read_agent(c, "ma", Role::kMobile);
  s.fa = read_agent(c, "fa", Role::kFixed);
  s.aa = read_agent(c, "aa", Role::kAerial);
  auto& ch = s.channel;
  ch.bandwidth_wa = c.number("channel.bandwidth_wa");
  ch.noise_wa = c.number("channel.noise_wa");
  ch.bandwidth_fa_aa = c.number("channel.bandwidth_fa_aa");
  ch.noise_fa_aa = c.number("channel.noise_fa_aa");
  ch.gain_wa_ma = c.number("channel.gain_wa_ma");
  ch.gain_wa_fa = c.number("channel.gain_wa_fa");
  ch.gain_fa_aa = c.number("channel.gain_fa_aa");
  ch.t_up = c.number("channel.t_up");
  ch.t_k_up = c.number("channel.t_k_up");
  ch.t_up_max = c.number("channel.t_up_max");
  ch.t_k_up_max = c.number("channel.t_k_up_max");
  s.workload = c.number("task.workload");
  s.alpha = c.number("task.alpha");
  auto& m = s.mobility;
  m.density = c.number("mobility.density");
  m.density_max = c.number("mobility.density_max");
  m.speed_low = c.number("mobility.speed_low");
  m.speed_high = c.number("mobility.speed_high");
  m.resources_low = c.number("mobility.resources_low");
  m.resources_high = c.number("mobility.resources_high");
  m.factor = c.number("mobility.factor");
  m.offset = c.number("mobility.offset");
  s.profit_share = c.number("pricing.profit_share");
  s.p_i_max = c.number("pricing.p_i_max");
  s.p_j_max = c.number("pricing.p_j_max");
  s.overflow_guard = c.number("solver.overflow_guard");
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

double uplink_power_wa_ma(double o, const Scenario& s) {
  require_fraction(o);
  double x = wa_exponent(o * s.workload, s);
  return s.channel.noise_wa / s.channel.gain_wa_ma * (pow2(x, s) - 1.0);
}

double uplink_power_wa_fa(double o, const Scenario& s) {
  require_fraction(o);
  double x_i = wa_exponent(o * s.workload, s);
  double x_j = wa_exponent((1.0 - o) * s.workload, s);
  return s.channel.noise_wa / s.channel.gain_wa_fa * (pow2(x_j, s) - 1.0) * pow2(x_i, s);
}

double wa_transmission_energy(double o, const Scenario& s) {
  return (uplink_power_wa_ma(o, s) + uplink_power_wa_fa(o, s)) * s.channel.t_up;
}

LinkBudget fa_to_aa_power_and_energy(double o, const Scenario& s) {
  require_fraction(o);
  const auto& c = s.channel;
  double x = (1.0 - o) * s.workload * s.alpha / (c.bandwidth_fa_aa * c.t_k_up);
  LinkBudget out;
  out.power = c.noise_fa_aa / c.gain_fa_aa * (pow2(x, s) - 1.0);
  out.energy = out.power * c.t_k_up;
  return out;
}

Delays total_delays(double o, const Scenario& s) {
  require_fraction(o);
  const double w = s.workload;
  Delays d;
  d.ma = s.channel.t_up + s.ma.cycles_per_bit / s.ma.cpu_speed * o * w;
  d.fa = s.channel.t_up + s.fa.cycles_per_bit / s.fa.cpu_speed * (1.0 - o) * w * (1.0 - s.alpha);
  d.aa = s.channel.t_k_up + s.aa.cycles_per_bit / s.aa.cpu_speed * (1.0 - o) * w * s.alpha;
  return d;
}

double aa_compute_energy(double w_k, const Scenario& s) {
  const auto& a = s.aa;
  return a.power_coeff * a.cpu_speed * a.cpu_speed * a.cycles_per_bit * w_k;
}

double aa_hover_energy(double w_k, const Scenario& s) {
  const auto& a = s.aa;
  return (s.channel.t_k_up + a.cycles_per_bit * w_k / a.cpu_speed) * a.hover_power;
}

ComputeEnergies compute_energies(double o, const Scenario& s) {
  require_fraction(o);
  const double w = s.workload;
  auto unit = [](const AgentProfile& a) {
    return a.power_coeff * a.cpu_speed * a.cpu_speed * a.cycles_per_bit;
  };
  ComputeEnergies e;
  e.ma = unit(s.ma) * o * w;
  e.fa = unit(s.fa) * (1.0 - o) * w * (1.0 - s.alpha);
  double w_k = (1.0 - o) * w * s.alpha;
  e.aa = aa_compute_energy(w_k, s);
  e.hover = aa_hover_energy(w_k, s);
  return e;
}

}  // namespace offload
