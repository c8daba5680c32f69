#include "offload/policies.hpp"

#include <memory>

#include "offload/errors.hpp"

namespace offload {

PolicyKind policy_from_name(const std::string& name) {
  if (name == "diffusion") return PolicyKind::kDiffusion;
  if (name == "ppo") return PolicyKind::kPpo;
  if (name == "greedy") return PolicyKind::kGreedy;
  if (name == "random") return PolicyKind::kRandom;
  if (name == "fixed_dda") return PolicyKind::kFixedDda;
  throw ConfigError("unknown policy '" + name + "'");
}

const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kDiffusion: return "diffusion";
    case PolicyKind::kPpo: return "ppo";
    case PolicyKind::kGreedy: return "greedy";
    case PolicyKind::kRandom: return "random";
    case PolicyKind::kFixedDda: return "fixed_dda";
  }
  return "?";
}

int baseline_action(PolicyKind kind, const MarketConfig& market, Rng& rng) {
  const int n = static_cast<int>(market.steps.size());
  switch (kind) {
    case PolicyKind::kGreedy: return n - 1;
    case PolicyKind::kRandom: return std::uniform_int_distribution<int>(0, n - 1)(rng);
    case PolicyKind::kFixedDda: return market.fixed_step_index;
    default: throw DomainError("not a baseline policy");
  }
}

PolicyRunConfig policy_run_from_config(const Config& config, const Scenario& s) {
  PolicyRunConfig r;
  r.market = market_from_config(config, s);
  r.drl = drl_from_config(config);
  r.ppo = ppo_from_config(config);
  r.episodes = r.drl.episodes;
  return r;
}

std::vector<EpisodeStats> run_policy(PolicyKind kind, const PolicyRunConfig& config,
                                     std::uint64_t seed) {
  const int actions = static_cast<int>(config.market.steps.size());
  if (kind == PolicyKind::kDiffusion) {
    Rng init(episode_seed(seed, 0xA11CEu));
    DiffusionAgent agent(actions, config.drl, init);
    return train_diffusion(agent, config.market, seed, config.episodes).curve;
  }

  Rng rng(episode_seed(seed, 0xBA5Eu + static_cast<std::uint64_t>(kind)));
  std::unique_ptr<PpoAgent> ppo;
  if (kind == PolicyKind::kPpo) ppo = std::make_unique<PpoAgent>(actions, config.ppo, rng);

  AuctionEnv env(config.market);
  std::vector<EpisodeStats> curve;
  for (int ep = 0; ep < config.episodes; ++ep) {
    EpisodeStats stats;
    stats.episode = ep;
    stats.market_seed = episode_seed(seed, static_cast<std::uint64_t>(ep));
    MdpState state = env.reset(stats.market_seed);
    for (;;) {
      Features f = features(state, config.market);
      double log_prob = 0.0, value = 0.0;
      int a = ppo ? ppo->act(f, rng, &log_prob, &value) : baseline_action(kind, config.market, rng);
      StepResult r = env.step(a);
      if (ppo) {
        ppo->observe(f, a, log_prob, value, r.reward, features(r.next, config.market), r.done, rng);
      }
      stats.reward += r.reward;
      state = r.next;
      if (r.done) break;
    }
    MarketOutcome o = env.outcome();
    stats.social_welfare = o.social_welfare;
    stats.exchange_cost = o.exchange_cost;
    stats.rounds = o.rounds;
    stats.matched = o.matched;
    curve.push_back(stats);
  }
  return curve;
}

}  // namespace offload
