#pragma once

#include <deque>
#include <string>
#include <vector>

#include "offload/env.hpp"
#include "offload/mlp.hpp"

namespace offload {

struct DrlConfig {
  int episodes = 300;
  int diffusion_steps = 5;  // H
  double beta_start = 1e-4;
  double beta_end = 0.02;
  double learning_rate = 1e-3;
  double tau = 0.05;
  double gamma = 1.0;
  double temperature = 0.05;  // entropy weight
  std::size_t replay_capacity = 10000;
  std::size_t batch_size = 64;
  int hidden = 32;
  OptimizerKind optimizer = OptimizerKind::kAdam;
};

DrlConfig drl_from_config(const Config& config);

struct NoiseSchedule {
  std::vector<double> beta;       // index h-1 for step h
  std::vector<double> alpha;      // 1 - beta
  std::vector<double> alpha_bar;  // running product

  static NoiseSchedule linear(int steps, double start, double end);
  int steps() const { return static_cast<int>(beta.size()); }
};

// x_H = sqrt(alpha_bar_H) x0 + sqrt(1 - alpha_bar_H) noise, drawn step by step.
Eigen::VectorXd forward_noise(const Eigen::VectorXd& x0, const NoiseSchedule& schedule, Rng& rng);

// Gaussian draws consumed by one reverse chain over a batch: x_H, then z_h
// for h = H..2.
struct ChainNoise {
  Eigen::MatrixXd start;
  std::vector<Eigen::MatrixXd> steps;
};

ChainNoise draw_chain_noise(int actions, int batch, int steps, Rng& rng);

// Denoiser eps(x_h, state, h/H): input is [x_h; state features; h/H].
class DiffusionActor {
 public:
  DiffusionActor() = default;
  DiffusionActor(int actions, int hidden, NoiseSchedule schedule, Rng& rng);
  DiffusionActor(Mlp net, NoiseSchedule schedule);

  // Action probabilities for each state column (features x batch).
  Eigen::MatrixXd probabilities(const Eigen::MatrixXd& states, const ChainNoise& noise) const;

  struct LossGrad {
    double loss = 0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd probs;
  };
  // Loss = mean_b [ sum_a pi(a|s_b) (-q(a, b)) - temperature * H(pi(.|s_b)) ].
  LossGrad loss_and_grad(const Eigen::MatrixXd& states, const ChainNoise& noise,
                         const Eigen::MatrixXd& q, double temperature) const;

  int actions() const { return actions_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }
  const NoiseSchedule& schedule() const { return schedule_; }

 private:
  Eigen::MatrixXd denoiser_input(const Eigen::MatrixXd& x, const Eigen::MatrixXd& states,
                                 int h) const;

  int actions_ = 0;
  Mlp net_;
  NoiseSchedule schedule_;
};

// Sum over critics of mean squared TD error at the taken actions:
// (1/B) sum_b (Q(s_b, a_b) - y_b)^2 for one critic.
struct CriticLossGrad {
  double loss = 0;
  Eigen::VectorXd grad;
};
CriticLossGrad critic_loss_and_grad(const Mlp& critic, const Eigen::MatrixXd& states,
                                    const std::vector<int>& actions, const Eigen::VectorXd& y);

struct Transition {
  Features state{};
  int action = 0;
  double reward = 0;
  Features next{};
  bool terminal = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(const Transition& t);
  std::vector<Transition> sample(std::size_t n, Rng& rng) const;  // with replacement
  std::size_t size() const { return items_.size(); }
  const std::deque<Transition>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

struct EpisodeStats {
  int episode = 0;
  double reward = 0;
  double social_welfare = 0;
  double exchange_cost = 0;
  int rounds = 0;
  int matched = 0;
  std::uint64_t market_seed = 0;
};

class DiffusionAgent {
 public:
  DiffusionAgent(int actions, const DrlConfig& config, Rng& rng);

  int act(const Features& state, Rng& rng, Eigen::VectorXd* probs = nullptr) const;

  double critic_update(const std::vector<Transition>& batch, Rng& rng);
  double actor_update(const std::vector<Transition>& batch, Rng& rng);
  void update_targets();

  const DrlConfig& config() const { return config_; }
  DiffusionActor& actor() { return actor_; }
  const DiffusionActor& actor() const { return actor_; }
  DiffusionActor& actor_target() { return actor_target_; }
  Mlp& critic(int i) { return critics_[i]; }
  Mlp& critic_target(int i) { return critic_targets_[i]; }
  const Mlp& critic(int i) const { return critics_[i]; }
  const Mlp& critic_target(int i) const { return critic_targets_[i]; }

  void save(const std::string& path) const;
  static DiffusionAgent load(const std::string& path);

 private:
  DiffusionAgent() = default;

  DrlConfig config_;
  DiffusionActor actor_, actor_target_;
  Mlp critics_[2], critic_targets_[2];
  Optimizer actor_opt_, critic_opt_[2];
};

Eigen::MatrixXd stack_states(const std::vector<Transition>& batch, bool next);

struct TrainResult {
  std::vector<EpisodeStats> curve;
};

// Algorithm loop: act, store, sample, critic step, actor step, soft update.
TrainResult train_diffusion(DiffusionAgent& agent, const MarketConfig& market,
                            std::uint64_t seed, int episodes);

}  // namespace offload
