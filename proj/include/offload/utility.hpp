#pragma once

#include "offload/market_model.hpp"

namespace offload {

struct PriceProfile {
  double p_i = 0;  // MA unit price
  double p_j = 0;  // FA unit price
  double p_i_max = 0;
  double p_j_max = 0;
};

PriceProfile prices_for(const Scenario& s, double p_i, double p_j);

// Which latency is binding in the end-to-end max. Enum order is the tie order.
enum class LatencyCase { kMobile = 1, kFixed = 2, kAerial = 3 };

constexpr LatencyCase kAllCases[] = {LatencyCase::kMobile, LatencyCase::kFixed,
                                     LatencyCase::kAerial};

const char* case_name(LatencyCase c);

double case_latency(double o, LatencyCase c, const Scenario& s);
double end_to_end_latency(double o, const Scenario& s);

// WA utility with the max latency, and with the latency pinned to one case.
double wa_utility(double o, const PriceProfile& prices, const Scenario& s);
double wa_utility(double o, const PriceProfile& prices, const Scenario& s, LatencyCase c);

double ma_reward_price(const PriceProfile& prices, const Scenario& s);
double ma_utility(double o, const PriceProfile& prices, const Scenario& s);
double fa_utility(double o, const PriceProfile& prices, double r_payment, const Scenario& s);

double fa_valuation(double w_k, const PriceProfile& prices, const Scenario& s);
double aa_valuation(double w_k, const PriceProfile& prices, const Scenario& s);
double aa_payment(double bid, double ask, double psi);

// AA share of the workload at offloading ratio o.
double aa_workload(double o, const Scenario& s);

// FA utility when the AA payment is settled at the blended valuations.
double fa_leader_utility(double o, const PriceProfile& prices, const Scenario& s);

}  // namespace offload
