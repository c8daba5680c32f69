#include "offload/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "offload/errors.hpp"

namespace offload {
namespace {

Eigen::MatrixXd column(const Features& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.data(), kStateFeatures);
}

}  // namespace

PpoConfig ppo_from_config(const Config& c) {
  PpoConfig p;
  p.rollout = static_cast<int>(c.integer("ppo.rollout"));
  p.epochs = static_cast<int>(c.integer("ppo.epochs"));
  p.minibatch = static_cast<int>(c.integer("ppo.minibatch"));
  p.clip = c.number("ppo.clip");
  p.gae_lambda = c.number("ppo.gae_lambda");
  p.gamma = c.number("drl.gamma");
  p.learning_rate = c.number("ppo.learning_rate");
  p.entropy_coef = c.number("ppo.entropy_coef");
  p.hidden = static_cast<int>(c.integer("ppo.hidden"));
  if (p.rollout < 1 || p.epochs < 1 || p.minibatch < 1 || p.hidden < 1 || !(p.clip > 0.0)) {
    throw ConfigError("ppo settings out of range");
  }
  return p;
}

PpoAgent::PpoAgent(int actions, const PpoConfig& config, Rng& rng)
    : config_(config),
      policy_({kStateFeatures, config.hidden, config.hidden, actions}, rng),
      value_({kStateFeatures, config.hidden, config.hidden, 1}, rng),
      policy_opt_(OptimizerKind::kAdam, policy_.params().size(), config.learning_rate),
      value_opt_(OptimizerKind::kAdam, value_.params().size(), config.learning_rate) {}

Eigen::VectorXd PpoAgent::probabilities(const Features& state) const {
  return softmax_columns(policy_.forward(column(state))).col(0);
}

int PpoAgent::act(const Features& state, Rng& rng, double* log_prob, double* value) const {
  Eigen::VectorXd p = probabilities(state);
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  int a = static_cast<int>(p.size()) - 1;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) {
      a = static_cast<int>(i);
      break;
    }
  }
  if (log_prob) *log_prob = std::log(std::max(p[a], 1e-300));
  if (value) *value = value_.forward(column(state))(0, 0);
  return a;
}

void PpoAgent::observe(const Features& state, int action, double log_prob, double value,
                       double reward, const Features& next, bool terminal, Rng& rng) {
  states_.push_back(state);
  actions_.push_back(action);
  log_probs_.push_back(log_prob);
  values_.push_back(value);
  rewards_.push_back(reward);
  terminals_.push_back(terminal);
  if (static_cast<int>(states_.size()) >= config_.rollout) update(next, terminal, rng);
}

void PpoAgent::update(const Features& last_next, bool last_terminal, Rng& rng) {
  const int n = static_cast<int>(states_.size());
  std::vector<double> adv(n), ret(n);
  double next_value = last_terminal ? 0.0 : value_.forward(column(last_next))(0, 0);
  double gae = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    double bootstrap = terminals_[t] ? 0.0 : next_value;
    double delta = rewards_[t] + config_.gamma * bootstrap - values_[t];
    gae = delta + (terminals_[t] ? 0.0 : config_.gamma * config_.gae_lambda * gae);
    adv[t] = gae;
    ret[t] = gae + values_[t];
    next_value = values_[t];
  }
  double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  double sd = std::sqrt(var / n) + 1e-8;
  for (double& a : adv) a = (a - mean) / sd;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  UpdateStats stats;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start < n; start += config_.minibatch) {
      const int m = std::min(config_.minibatch, n - start);
      Eigen::MatrixXd s(kStateFeatures, m);
      for (int i = 0; i < m; ++i) s.col(i) = column(states_[order[start + i]]);

      Mlp::Cache pc, vc;
      Eigen::MatrixXd probs = softmax_columns(policy_.forward(s, &pc));
      Eigen::MatrixXd v = value_.forward(s, &vc);
      Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(probs.rows(), m);
      Eigen::MatrixXd d_v(1, m);
      stats = {};
      for (int i = 0; i < m; ++i) {
        const int k = order[start + i];
        const int a = actions_[k];
        Eigen::VectorXd p = probs.col(i);
        Eigen::ArrayXd logp = p.array().max(1e-300).log();
        double ratio = std::exp(logp[a] - log_probs_[k]);
        double clipped = std::clamp(ratio, 1.0 - config_.clip, 1.0 + config_.clip);
        double surrogate = std::min(ratio * adv[k], clipped * adv[k]);
        bool through = ratio * adv[k] <= clipped * adv[k];
        double entropy = -(p.array() * logp).sum();
        stats.policy_loss += (-surrogate - config_.entropy_coef * entropy) / m;
        stats.entropy += entropy / m;
        // d(-surrogate)/dlogits via dlogp_a/dlogits = onehot(a) - p
        if (through) {
          Eigen::VectorXd g = -p;
          g[a] += 1.0;
          d_logits.col(i) += (-ratio * adv[k] / m) * g;
        }
        // d(-c H)/dlogits_b = c p_b (log p_b + H)
        d_logits.col(i) += (config_.entropy_coef / m) * (p.array() * (logp + entropy)).matrix();
        double err = v(0, i) - ret[k];
        stats.value_loss += err * err / m;
        d_v(0, i) = 2.0 * err / m;
      }
      if (!std::isfinite(stats.policy_loss) || !std::isfinite(stats.value_loss)) {
        throw NumericalError("nonfinite PPO loss");
      }
      Eigen::VectorXd gp = Eigen::VectorXd::Zero(policy_.params().size());
      policy_.backward(pc, d_logits, gp);
      policy_opt_.step(policy_.params(), gp);
      Eigen::VectorXd gv = Eigen::VectorXd::Zero(value_.params().size());
      value_.backward(vc, d_v, gv);
      value_opt_.step(value_.params(), gv);
    }
  }
  last_ = stats;
  ++updates_;
  states_.clear();
  actions_.clear();
  log_probs_.clear();
  values_.clear();
  rewards_.clear();
  terminals_.clear();
}

}  // namespace offload
