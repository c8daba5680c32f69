#pragma once

#include "offload/diffusion.hpp"

namespace offload {

struct PpoConfig {
  int rollout = 512;
  int epochs = 4;
  int minibatch = 64;
  double clip = 0.2;
  double gae_lambda = 1.0;
  double gamma = 1.0;
  double learning_rate = 1e-3;
  double entropy_coef = 0.01;
  int hidden = 32;
};

PpoConfig ppo_from_config(const Config& config);

// Clipped-surrogate learner with separate softmax policy and value networks.
class PpoAgent {
 public:
  PpoAgent(int actions, const PpoConfig& config, Rng& rng);

  int act(const Features& state, Rng& rng, double* log_prob = nullptr, double* value = nullptr) const;
  Eigen::VectorXd probabilities(const Features& state) const;

  // Records one step; runs an update when the rollout is full.
  void observe(const Features& state, int action, double log_prob, double value, double reward,
               const Features& next, bool terminal, Rng& rng);

  struct UpdateStats {
    double policy_loss = 0;
    double value_loss = 0;
    double entropy = 0;
  };
  const UpdateStats& last_update() const { return last_; }
  int updates() const { return updates_; }

 private:
  void update(const Features& last_next, bool last_terminal, Rng& rng);

  PpoConfig config_;
  Mlp policy_, value_;
  Optimizer policy_opt_, value_opt_;
  std::vector<Features> states_;
  std::vector<int> actions_;
  std::vector<double> log_probs_, values_, rewards_;
  std::vector<bool> terminals_;
  UpdateStats last_;
  int updates_ = 0;
};

}  // namespace offload
