#include "offload/env.hpp"

#include <algorithm>
#include <cmath>

#include "offload/errors.hpp"

namespace offload {

void MarketConfig::validate() const {
  if (buyers < 1 || sellers < 1) throw DomainError("market needs a buyer and a seller");
  if (!(buyer_clock >= seller_clock)) throw DomainError("buyer clock opens below seller clock");
  if (steps.size() < 2) throw DomainError("action set needs at least two steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i] > 0.0) || (i > 0 && !(steps[i] > steps[i - 1]))) {
      throw DomainError("steps must be positive and strictly increasing");
    }
  }
  if (fixed_step_index < 0 || fixed_step_index >= static_cast<int>(steps.size())) {
    throw DomainError("fixed step index out of range");
  }
  if (!(buyer_low <= buyer_high && seller_low <= seller_high)) {
    throw DomainError("value ranges are inverted");
  }
}

MarketConfig market_from_config(const Config& c, const Scenario& s) {
  MarketConfig m;
  m.buyers = static_cast<int>(c.integer("market.buyers"));
  m.sellers = static_cast<int>(c.integer("market.sellers"));
  double w_k = aa_workload(c.number("market.offload_ratio"), s);
  m.buyer_clock = opening_buyer_clock(w_k, prices_for(s, 0.0, c.number("market.fa_price")));
  m.seller_clock = opening_seller_clock(w_k, s);
  m.buyer_low = c.number("market.buyer_value_low");
  m.buyer_high = c.number("market.buyer_value_high");
  m.seller_low = c.number("market.seller_value_low");
  m.seller_high = c.number("market.seller_value_high");
  double unit = m.spread() / c.number("market.step_divisor");
  m.steps.clear();
  for (double mult : c.numbers("market.step_multipliers")) m.steps.push_back(mult * unit);
  m.fixed_step_index = static_cast<int>(c.integer("market.fixed_step_index"));
  m.psi = s.profit_share;
  m.exchange_penalty = c.number("market.exchange_penalty");
  m.reward_b = c.number("market.reward_b");
  m.reward_c = c.number("market.reward_c");
  m.reward_d = c.number("market.reward_d");
  const std::string& mode = c.text("market.reward_mode");
  if (mode != "terminal" && mode != "per_step") {
    throw ConfigError("market.reward_mode must be terminal or per_step");
  }
  m.per_step_reward = mode == "per_step";
  m.max_rounds = c.integer("market.max_rounds");
  try {
    m.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("market: ") + e.what());
  }
  return m;
}

double round_scale(const MarketConfig& m) {
  return m.spread() / m.steps.front() + m.buyers + m.sellers + 1.0;
}

Features features(const MdpState& s, const MarketConfig& m) {
  const double spread = m.spread() > 0.0 ? m.spread() : 1.0;
  return {static_cast<double>(s.flag),
          s.t / round_scale(m),
          (s.buyer_clock - m.seller_clock) / spread,
          (s.seller_clock - m.seller_clock) / spread,
          static_cast<double>(s.n_buy) / m.buyers,
          static_cast<double>(s.n_sell) / m.sellers};
}

MdpState state_from_features(const Features& f, const MarketConfig& m) {
  const double spread = m.spread() > 0.0 ? m.spread() : 1.0;
  MdpState s;
  s.flag = static_cast<int>(std::lround(f[0]));
  s.t = static_cast<int>(std::lround(f[1] * round_scale(m)));
  s.buyer_clock = m.seller_clock + f[2] * spread;
  s.seller_clock = m.seller_clock + f[3] * spread;
  s.n_buy = static_cast<int>(std::lround(f[4] * m.buyers));
  s.n_sell = static_cast<int>(std::lround(f[5] * m.sellers));
  return s;
}

std::uint64_t episode_seed(std::uint64_t run_seed, std::uint64_t episode) {
  // splitmix64 finaliser over a mixed pair
  std::uint64_t z = run_seed * 0x9E3779B97F4A7C15ULL + episode + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

AuctionEnv::AuctionEnv(MarketConfig config) : config_(std::move(config)) { config_.validate(); }

MdpState AuctionEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  const double spread = config_.spread();
  std::uniform_real_distribution<double> buy(config_.buyer_low, config_.buyer_high);
  std::uniform_real_distribution<double> sell(config_.seller_low, config_.seller_high);
  std::vector<Participant> buyers, sellers;
  for (int i = 0; i < config_.buyers; ++i) {
    buyers.push_back({i, Side::kBuyer, config_.seller_clock + spread * buy(rng)});
  }
  for (int k = 0; k < config_.sellers; ++k) {
    sellers.push_back({config_.buyers + k, Side::kSeller, config_.seller_clock + spread * sell(rng)});
  }
  auction_ = init_auction(std::move(buyers), std::move(sellers), config_.buyer_clock,
                          config_.seller_clock, config_.exchange_penalty);
  log_.clear();
  done_ = false;
  return observe();
}

MdpState AuctionEnv::observe() const {
  MdpState s;
  s.flag = static_cast<int>(auction_.flag);
  s.t = auction_.round;
  s.buyer_clock = auction_.buyer_clock;
  s.seller_clock = auction_.seller_clock;
  s.n_buy = static_cast<int>(auction_.buy_winners.size());
  s.n_sell = static_cast<int>(auction_.sell_winners.size());
  return s;
}

StepResult AuctionEnv::step(int action) {
  if (done_) throw StateError("episode already finished");
  if (action < 0 || action >= static_cast<int>(config_.steps.size())) {
    throw DomainError("action index out of range");
  }
  if (auction_.round >= config_.max_rounds) throw StateError("episode exceeded max_rounds");
  const std::size_t pairs_before = std::min(auction_.buy_winners.size(), auction_.sell_winners.size());
  RoundRecord rec = offload::step(auction_, config_.steps[action]);
  log_.push_back(rec);

  StepResult out;
  double r = rec.event == RoundEvent::kAccept ? -rec.regret : -rec.exchange_cost;
  out.reward = config_.reward_b * r;
  if (config_.per_step_reward) {
    const std::size_t pairs = std::min(auction_.buy_winners.size(), auction_.sell_winners.size());
    if (pairs > pairs_before) {
      double sw = auction_.buy_winners[pairs - 1].clock - auction_.sell_winners[pairs - 1].clock;
      out.reward += config_.reward_c * sw + config_.reward_d;
    }
  } else if (rec.terminated) {
    MarketOutcome o = clear(auction_, config_.psi);
    out.reward += config_.reward_c * o.social_welfare + config_.reward_d * o.matched;
  }
  out.done = rec.terminated;
  done_ = out.done;
  out.next = observe();
  return out;
}

MarketDescription AuctionEnv::description() const {
  MarketDescription d;
  d.buyers = auction_.buyers;
  d.sellers = auction_.sellers;
  d.buyer_clock = config_.buyer_clock;
  d.seller_clock = config_.seller_clock;
  d.step_size = config_.steps[config_.fixed_step_index];
  d.psi = config_.psi;
  d.exchange_penalty = config_.exchange_penalty;
  return d;
}

MarketOutcome AuctionEnv::outcome() const { return clear(auction_, config_.psi); }

}  // namespace offload
