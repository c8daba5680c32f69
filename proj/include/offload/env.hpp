#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "offload/dda.hpp"
#include "offload/mlp.hpp"

namespace offload {

struct MarketConfig {
  int buyers = 3;
  int sellers = 3;
  double buyer_clock = 40;  // C_b0
  double seller_clock = 0;  // C_s0
  // Participant values as fractions of the spread above C_s0.
  double buyer_low = 0.3, buyer_high = 0.95;
  double seller_low = 0.05, seller_high = 0.7;
  std::vector<double> steps = {0.25, 0.5, 1.0, 2.0};  // action set, increasing
  int fixed_step_index = 0;
  double psi = 0.5;
  double exchange_penalty = 0.01;
  double reward_b = 1, reward_c = 1, reward_d = 0.5;
  bool per_step_reward = false;
  long max_rounds = 100000;

  double spread() const { return buyer_clock - seller_clock; }
  void validate() const;
};

// Opening clocks come from the scenario's AA workload at market.offload_ratio
// and the FA price market.fa_price; steps scale with the spread.
MarketConfig market_from_config(const Config& config, const Scenario& s);

struct MdpState {
  int flag = 0;
  int t = 0;
  double buyer_clock = 0;
  double seller_clock = 0;
  int n_buy = 0;
  int n_sell = 0;
};

constexpr int kStateFeatures = 6;
using Features = std::array<double, kStateFeatures>;

// Clocks scaled by the opening spread, t by the progress bound, counts by
// market size. state_from_features inverts it.
Features features(const MdpState& s, const MarketConfig& m);
MdpState state_from_features(const Features& f, const MarketConfig& m);
double round_scale(const MarketConfig& m);

std::uint64_t episode_seed(std::uint64_t run_seed, std::uint64_t episode);

struct StepResult {
  MdpState next;
  double reward = 0;
  bool done = false;
};

class AuctionEnv {
 public:
  explicit AuctionEnv(MarketConfig config);

  MdpState reset(std::uint64_t seed);
  StepResult step(int action);

  const MarketConfig& config() const { return config_; }
  const AuctionState& auction() const { return auction_; }
  MarketDescription description() const;
  // Valid after the episode ends.
  MarketOutcome outcome() const;
  const std::vector<RoundRecord>& log() const { return log_; }

 private:
  MdpState observe() const;

  MarketConfig config_;
  AuctionState auction_;
  std::vector<RoundRecord> log_;
  bool done_ = true;
};

}  // namespace offload
