#pragma once

#include <string>
#include <vector>

#include "offload/ppo.hpp"

namespace offload {

enum class PolicyKind { kDiffusion, kPpo, kGreedy, kRandom, kFixedDda };

PolicyKind policy_from_name(const std::string& name);
const char* policy_name(PolicyKind kind);

// Non-learning baselines. Greedy takes the largest step, random is uniform,
// fixed_dda always uses the configured step.
int baseline_action(PolicyKind kind, const MarketConfig& market, Rng& rng);

struct PolicyRunConfig {
  MarketConfig market;
  DrlConfig drl;
  PpoConfig ppo;
  int episodes = 300;
};

PolicyRunConfig policy_run_from_config(const Config& config, const Scenario& s);

// Runs `episodes` episodes of one policy. Market draws depend only on
// (seed, episode), so different policies see identical markets.
std::vector<EpisodeStats> run_policy(PolicyKind kind, const PolicyRunConfig& config,
                                     std::uint64_t seed);

}  // namespace offload
