#pragma once

#include <string>
#include <vector>

#include "offload/utility.hpp"

namespace offload {

enum class Side { kBuyer = 0, kSeller = 1 };

struct Participant {
  int id = 0;
  Side side = Side::kBuyer;
  double value = 0;  // true value b
};

struct Acceptance {
  int id = 0;
  double clock = 0;   // recorded bid c
  double regret = 0;
};

enum class RoundEvent { kAccept, kAdjust };

struct RoundRecord {
  int t = 0;             // round index, 1-based
  Side flag = Side::kBuyer;  // side that was active this round
  double buyer_clock = 0;    // after the round
  double seller_clock = 0;
  RoundEvent event = RoundEvent::kAdjust;
  int actor = -1;            // accepting participant, -1 on adjustments
  double regret = 0;
  int recipients = 0;        // participants on the broadcasting side
  double exchange_cost = 0;  // co_t, adjustments only
  bool terminated = false;
};

struct AuctionState {
  std::vector<Participant> buyers;
  std::vector<Participant> sellers;
  Side flag = Side::kBuyer;
  int round = 0;
  double buyer_clock = 0;
  double seller_clock = 0;
  double initial_buyer_clock = 0;
  double initial_seller_clock = 0;
  // Clocks as they stood before the latest adjustment (the T-1 values once
  // the auction has terminated).
  double prev_buyer_clock = 0;
  double prev_seller_clock = 0;
  std::vector<Acceptance> buy_winners;   // admission order
  std::vector<Acceptance> sell_winners;
  double exchange_penalty = 0.01;        // d in co_t(X) = d X
  double exchange_cost = 0;
  double total_regret = 0;
  bool terminated = false;
};

struct MarketOutcome {
  double clearing_price = 0;
  double social_welfare = 0;
  int matched = 0;
  std::vector<double> buyer_utilities;   // matched buyers, admission order
  std::vector<double> seller_utilities;
  double buyer_payments = 0;
  double seller_receipts = 0;
  double total_regret = 0;
  double exchange_cost = 0;
  int rounds = 0;
};

// Opening clocks for an AA workload w_k: C_b = p_j w_k, C_s = xi_k E_aa + gamma_k E_hov.
double opening_buyer_clock(double w_k, const PriceProfile& prices);
double opening_seller_clock(double w_k, const Scenario& s);

AuctionState init_auction(std::vector<Participant> buyers, std::vector<Participant> sellers,
                          double buyer_clock, double seller_clock,
                          double exchange_penalty = 0.01);
AuctionState init_auction(std::vector<Participant> buyers, std::vector<Participant> sellers,
                          double w_k, const PriceProfile& prices, const Scenario& s,
                          double exchange_penalty = 0.01);

RoundRecord step(AuctionState& state, double step_size);
MarketOutcome clear(const AuctionState& state, double psi);

std::string round_record_json(const RoundRecord& r);

// Market replayed by verify_ir_ic with a constant clock step.
struct MarketDescription {
  std::vector<Participant> buyers;
  std::vector<Participant> sellers;
  double buyer_clock = 0;
  double seller_clock = 0;
  double step_size = 1;
  double psi = 0.5;
  double exchange_penalty = 0.01;
};

// Runs the auction to termination with a constant step.
MarketOutcome run_constant_step(const MarketDescription& market);

struct ProbeRow {
  double bid = 0;
  double utility = 0;  // against the probe's true value
  bool matched = false;
  double clearing_price = 0;
};

struct IcReport {
  std::vector<ProbeRow> rows;
  double truthful_utility = 0;
  double argmax_bid = 0;        // maximiser closest to the true value
  bool truthful_is_argmax = false;
  bool ic_holds = false;        // no grid bid beats truth
  bool ir_holds = false;        // every matched winner in every replay has u >= 0
  double min_winner_utility = 0;
};

IcReport verify_ir_ic(const MarketDescription& market, const Participant& probe,
                      const std::vector<double>& bid_grid);

// Exact welfare maximum over every sequence of steps drawn from `steps`.
// Steps must be integer multiples of the smallest one so that clocks stay on
// a lattice; memoised over (flag, buyer ticks, seller ticks, admissions).
struct WelfareOracle {
  double max_welfare = 0;
  std::vector<int> actions;  // one maximising sequence (indices into steps)
};

WelfareOracle exhaustive_max_welfare(const MarketDescription& market,
                                     const std::vector<double>& steps);

}  // namespace offload
