#pragma once

#include "offload/config.hpp"

namespace offload {

enum class Role { kWireless, kMobile, kFixed, kAerial };

struct ChannelParams {
  double bandwidth_wa = 0;     // w_B, Hz
  double noise_wa = 0;         // n_B, W
  double bandwidth_fa_aa = 0;  // w_0, Hz
  double noise_fa_aa = 0;      // n_0, W
  double gain_wa_ma = 0;       // g_ni
  double gain_wa_fa = 0;       // g_nj
  double gain_fa_aa = 0;       // g_jk
  double t_up = 0;             // s
  double t_k_up = 0;           // s
  double t_up_max = 0;
  double t_k_up_max = 0;
};

// One struct serves all four roles; fields irrelevant to a role stay zero.
struct AgentProfile {
  Role role = Role::kWireless;
  double cycles_per_bit = 0;  // lambda
  double cpu_speed = 0;       // mu, cycles/s
  double power_coeff = 0;     // sigma
  double compute_cost = 0;    // xi
  double tx_cost = 0;         // gamma
  double energy_weight = 0;   // zeta_n
  double qoe_weight = 0;      // kappa_n
  double max_delay = 0;       // epsilon_n, s
  double actuator_time = 0;   // t_n, s
  double speed = 0;           // v, m/s
  double idle_resources = 0;  // D_i
  double hover_power = 0;     // p_hov, W
  double delay_penalty = 0;   // theta
};

struct MobilityParams {
  double density = 0;      // rho
  double density_max = 0;  // rho_bar
  double speed_low = 0;
  double speed_high = 0;
  double resources_low = 0;   // D_low
  double resources_high = 0;  // D_high
  double factor = 1;          // phi multiplier
  double offset = 0;          // phi additive term
};

struct Scenario {
  AgentProfile wa, ma, fa, aa;
  ChannelParams channel;
  double workload = 0;  // W_n, bits
  double alpha = 0;     // FA -> AA share
  MobilityParams mobility;
  double profit_share = 0.5;  // psi
  double p_i_max = 0;
  double p_j_max = 0;
  double overflow_guard = 1024;

  // Throws DomainError naming the first violated invariant.
  void validate() const;
};

Scenario scenario_from_config(const Config& config);

struct Delays {
  double ma = 0;  // t_i_tot
  double fa = 0;  // t_j_tot
  double aa = 0;  // t_k_tot (FA->AA leg only)
};

struct ComputeEnergies {
  double ma = 0;
  double fa = 0;
  double aa = 0;
  double hover = 0;
};

struct LinkBudget {
  double power = 0;   // W
  double energy = 0;  // J
};

double uplink_power_wa_ma(double o, const Scenario& s);
double uplink_power_wa_fa(double o, const Scenario& s);
double wa_transmission_energy(double o, const Scenario& s);
LinkBudget fa_to_aa_power_and_energy(double o, const Scenario& s);
Delays total_delays(double o, const Scenario& s);
ComputeEnergies compute_energies(double o, const Scenario& s);

// Pieces reused by the auction valuations, parameterised by the AA workload.
double aa_compute_energy(double w_k, const Scenario& s);
double aa_hover_energy(double w_k, const Scenario& s);

}  // namespace offload
