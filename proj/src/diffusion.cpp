#include "offload/diffusion.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "offload/errors.hpp"

namespace offload {
namespace {

Eigen::MatrixXd gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = n(rng);
  }
  return m;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("nonfinite ") + what);
}

int sample_index(const Eigen::VectorXd& p, Rng& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (Eigen::Index a = 0; a < p.size(); ++a) {
    acc += p[a];
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(p.size() - 1);
}

nlohmann::json net_json(const Mlp& net) {
  return {{"sizes", net.sizes()},
          {"params", std::vector<double>(net.params().data(),
                                         net.params().data() + net.params().size())}};
}

Mlp net_from_json(const nlohmann::json& j) {
  Mlp net(j.at("sizes").get<std::vector<int>>());
  auto params = j.at("params").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(params.size()) != net.params().size()) {
    throw DomainError("checkpoint parameter count does not match layer sizes");
  }
  net.params() = Eigen::Map<Eigen::VectorXd>(params.data(), net.params().size());
  return net;
}

constexpr const char* kCheckpointFormat = "offload-diffusion-checkpoint";
constexpr int kCheckpointVersion = 1;

}  // namespace

DrlConfig drl_from_config(const Config& c) {
  DrlConfig d;
  d.episodes = static_cast<int>(c.integer("drl.episodes"));
  d.diffusion_steps = static_cast<int>(c.integer("drl.diffusion_steps"));
  d.beta_start = c.number("drl.beta_start");
  d.beta_end = c.number("drl.beta_end");
  d.learning_rate = c.number("drl.learning_rate");
  d.tau = c.number("drl.tau");
  d.gamma = c.number("drl.gamma");
  d.temperature = c.number("drl.temperature");
  d.replay_capacity = static_cast<std::size_t>(c.integer("drl.replay_capacity"));
  d.batch_size = static_cast<std::size_t>(c.integer("drl.batch_size"));
  d.hidden = static_cast<int>(c.integer("drl.hidden"));
  try {
    d.optimizer = optimizer_from_name(c.text("drl.optimizer"));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("drl.optimizer: ") + e.what());
  }
  if (d.episodes < 1 || d.diffusion_steps < 0 || d.batch_size < 1 || d.replay_capacity < 1 ||
      d.hidden < 1 || !(d.tau > 0.0 && d.tau <= 1.0) || d.temperature < 0.0) {
    throw ConfigError("drl settings out of range");
  }
  return d;
}

NoiseSchedule NoiseSchedule::linear(int steps, double start, double end) {
  NoiseSchedule s;
  double bar = 1.0;
  for (int h = 1; h <= steps; ++h) {
    double b = steps == 1 ? start : start + (end - start) * (h - 1) / (steps - 1);
    if (!(b > 0.0 && b < 1.0)) throw DomainError("noise levels must lie in (0,1)");
    bar *= 1.0 - b;
    s.beta.push_back(b);
    s.alpha.push_back(1.0 - b);
    s.alpha_bar.push_back(bar);
  }
  return s;
}

Eigen::VectorXd forward_noise(const Eigen::VectorXd& x0, const NoiseSchedule& schedule,
                              Rng& rng) {
  Eigen::VectorXd x = x0;
  for (int h = 0; h < schedule.steps(); ++h) {
    x = std::sqrt(schedule.alpha[h]) * x +
        std::sqrt(schedule.beta[h]) * gaussian(static_cast<int>(x.size()), 1, rng).col(0);
  }
  return x;
}

ChainNoise draw_chain_noise(int actions, int batch, int steps, Rng& rng) {
  ChainNoise n;
  n.start = gaussian(actions, batch, rng);
  for (int h = steps; h >= 2; --h) n.steps.push_back(gaussian(actions, batch, rng));
  return n;
}

DiffusionActor::DiffusionActor(int actions, int hidden, NoiseSchedule schedule, Rng& rng)
    : actions_(actions),
      net_({actions + kStateFeatures + 1, hidden, hidden, actions}, rng),
      schedule_(std::move(schedule)) {}

DiffusionActor::DiffusionActor(Mlp net, NoiseSchedule schedule)
    : actions_(net.output_size()), net_(std::move(net)), schedule_(std::move(schedule)) {
  if (net_.input_size() != actions_ + kStateFeatures + 1) {
    throw DomainError("denoiser input width does not match the action set");
  }
}

Eigen::MatrixXd DiffusionActor::denoiser_input(const Eigen::MatrixXd& x,
                                               const Eigen::MatrixXd& states, int h) const {
  Eigen::MatrixXd in(actions_ + kStateFeatures + 1, x.cols());
  in.topRows(actions_) = x;
  in.middleRows(actions_, kStateFeatures) = states;
  in.bottomRows(1).setConstant(static_cast<double>(h) / std::max(1, schedule_.steps()));
  return in;
}

Eigen::MatrixXd DiffusionActor::probabilities(const Eigen::MatrixXd& states,
                                              const ChainNoise& noise) const {
  const int H = schedule_.steps();
  Eigen::MatrixXd x = noise.start;
  for (int h = H; h >= 1; --h) {
    const double a = schedule_.alpha[h - 1], b = schedule_.beta[h - 1];
    const double c = b / std::sqrt(1.0 - schedule_.alpha_bar[h - 1]);
    Eigen::MatrixXd eps = net_.forward(denoiser_input(x, states, h));
    x = (x - c * eps) / std::sqrt(a);
    if (h > 1) x += std::sqrt(b) * noise.steps[H - h];
  }
  return softmax_columns(x);
}

DiffusionActor::LossGrad DiffusionActor::loss_and_grad(const Eigen::MatrixXd& states,
                                                       const ChainNoise& noise,
                                                       const Eigen::MatrixXd& q,
                                                       double temperature) const {
  const int H = schedule_.steps();
  const double batch = static_cast<double>(states.cols());
  std::vector<Mlp::Cache> caches(H);
  Eigen::MatrixXd x = noise.start;
  for (int h = H; h >= 1; --h) {
    const double a = schedule_.alpha[h - 1], b = schedule_.beta[h - 1];
    const double c = b / std::sqrt(1.0 - schedule_.alpha_bar[h - 1]);
    Eigen::MatrixXd eps = net_.forward(denoiser_input(x, states, h), &caches[h - 1]);
    x = (x - c * eps) / std::sqrt(a);
    if (h > 1) x += std::sqrt(b) * noise.steps[H - h];
  }

  LossGrad out;
  out.probs = softmax_columns(x);
  Eigen::MatrixXd logp = out.probs.array().max(1e-300).log();
  out.loss = ((out.probs.array() * (-q.array() + temperature * logp.array())).sum()) / batch;
  require_finite(out.loss, "actor loss");

  Eigen::MatrixXd g = (-q.array() + temperature * (logp.array() + 1.0)) / batch;
  Eigen::RowVectorXd mean = (out.probs.array() * g.array()).colwise().sum();
  Eigen::MatrixXd dx = out.probs.array() * (g.rowwise() - mean).array();

  out.grad = Eigen::VectorXd::Zero(net_.params().size());
  for (int h = 1; h <= H; ++h) {
    const double a = schedule_.alpha[h - 1], b = schedule_.beta[h - 1];
    const double c = b / std::sqrt(1.0 - schedule_.alpha_bar[h - 1]);
    Eigen::MatrixXd d_eps = (-c / std::sqrt(a)) * dx;
    Eigen::MatrixXd d_in = net_.backward(caches[h - 1], d_eps, out.grad);
    dx = dx / std::sqrt(a) + d_in.topRows(actions_);
  }
  return out;
}

CriticLossGrad critic_loss_and_grad(const Mlp& critic, const Eigen::MatrixXd& states,
                                    const std::vector<int>& actions, const Eigen::VectorXd& y) {
  Mlp::Cache cache;
  Eigen::MatrixXd q = critic.forward(states, &cache);
  const double batch = static_cast<double>(states.cols());
  Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  CriticLossGrad out;
  for (Eigen::Index b = 0; b < q.cols(); ++b) {
    double diff = q(actions[b], b) - y[b];
    out.loss += diff * diff / batch;
    dq(actions[b], b) = 2.0 * diff / batch;
  }
  require_finite(out.loss, "critic loss");
  out.grad = Eigen::VectorXd::Zero(critic.params().size());
  critic.backward(cache, dq, out.grad);
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw DomainError("replay capacity must be positive");
}

void ReplayBuffer::push(const Transition& t) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(t);
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (items_.empty()) throw StateError("sampling an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(items_[pick(rng)]);
  return out;
}

Eigen::MatrixXd stack_states(const std::vector<Transition>& batch, bool next) {
  Eigen::MatrixXd s(kStateFeatures, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Features& f = next ? batch[b].next : batch[b].state;
    for (int i = 0; i < kStateFeatures; ++i) s(i, static_cast<Eigen::Index>(b)) = f[i];
  }
  return s;
}

DiffusionAgent::DiffusionAgent(int actions, const DrlConfig& config, Rng& rng)
    : config_(config),
      actor_(actions, config.hidden,
             NoiseSchedule::linear(config.diffusion_steps, config.beta_start, config.beta_end),
             rng) {
  actor_target_ = actor_;
  for (int i = 0; i < 2; ++i) {
    critics_[i] = Mlp({kStateFeatures, config.hidden, config.hidden, actions}, rng);
    critic_targets_[i] = critics_[i];
    critic_opt_[i] = Optimizer(config.optimizer, critics_[i].params().size(), config.learning_rate);
  }
  actor_opt_ = Optimizer(config.optimizer, actor_.net().params().size(), config.learning_rate);
}

int DiffusionAgent::act(const Features& state, Rng& rng, Eigen::VectorXd* probs) const {
  Eigen::MatrixXd s = Eigen::Map<const Eigen::VectorXd>(state.data(), kStateFeatures);
  ChainNoise noise = draw_chain_noise(actor_.actions(), 1, actor_.schedule().steps(), rng);
  Eigen::VectorXd p = actor_.probabilities(s, noise).col(0);
  if (probs) *probs = p;
  return sample_index(p, rng);
}

double DiffusionAgent::critic_update(const std::vector<Transition>& batch, Rng& rng) {
  if (batch.empty()) throw DomainError("empty batch");
  Eigen::MatrixXd s = stack_states(batch, false);
  Eigen::MatrixXd s_next = stack_states(batch, true);
  const int B = static_cast<int>(batch.size());
  ChainNoise noise = draw_chain_noise(actor_.actions(), B, actor_.schedule().steps(), rng);
  Eigen::MatrixXd pi_next = actor_target_.probabilities(s_next, noise);
  Eigen::MatrixXd q_next =
      critic_targets_[0].forward(s_next).cwiseMin(critic_targets_[1].forward(s_next));
  Eigen::VectorXd v_next = (pi_next.array() * q_next.array()).colwise().sum().transpose();

  Eigen::VectorXd y(B);
  std::vector<int> actions(B);
  for (int b = 0; b < B; ++b) {
    y[b] = batch[b].reward + (batch[b].terminal ? 0.0 : config_.gamma * v_next[b]);
    actions[b] = batch[b].action;
  }
  double loss = 0.0;
  for (int i = 0; i < 2; ++i) {
    CriticLossGrad lg = critic_loss_and_grad(critics_[i], s, actions, y);
    loss += lg.loss;
    critic_opt_[i].step(critics_[i].params(), lg.grad);
  }
  return loss;
}

double DiffusionAgent::actor_update(const std::vector<Transition>& batch, Rng& rng) {
  if (batch.empty()) throw DomainError("empty batch");
  Eigen::MatrixXd s = stack_states(batch, false);
  Eigen::MatrixXd q = critics_[0].forward(s).cwiseMin(critics_[1].forward(s));
  ChainNoise noise = draw_chain_noise(actor_.actions(), static_cast<int>(batch.size()),
                                      actor_.schedule().steps(), rng);
  DiffusionActor::LossGrad lg = actor_.loss_and_grad(s, noise, q, config_.temperature);
  actor_opt_.step(actor_.net().params(), lg.grad);
  return lg.loss;
}

void DiffusionAgent::update_targets() {
  soft_update(actor_target_.net().params(), actor_.net().params(), config_.tau);
  for (int i = 0; i < 2; ++i) {
    soft_update(critic_targets_[i].params(), critics_[i].params(), config_.tau);
  }
}

void DiffusionAgent::save(const std::string& path) const {
  const auto& c = config_;
  nlohmann::ordered_json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = {{"diffusion_steps", c.diffusion_steps}, {"beta_start", c.beta_start},
                 {"beta_end", c.beta_end},               {"learning_rate", c.learning_rate},
                 {"tau", c.tau},                         {"gamma", c.gamma},
                 {"temperature", c.temperature},         {"replay_capacity", c.replay_capacity},
                 {"batch_size", c.batch_size},           {"hidden", c.hidden},
                 {"optimizer", c.optimizer == OptimizerKind::kAdam ? "adam" : "sgd"}};
  j["schedule"] = actor_.schedule().beta;
  j["networks"] = {{"actor", net_json(actor_.net())},
                   {"actor_target", net_json(actor_target_.net())},
                   {"critic1", net_json(critics_[0])},
                   {"critic2", net_json(critics_[1])},
                   {"critic1_target", net_json(critic_targets_[0])},
                   {"critic2_target", net_json(critic_targets_[1])}};
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write checkpoint " + path);
  out << j.dump(1) << '\n';
}

DiffusionAgent DiffusionAgent::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read checkpoint " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.at("format") != kCheckpointFormat || j.at("version") != kCheckpointVersion) {
    throw DomainError("unsupported checkpoint format");
  }
  DiffusionAgent agent;
  const auto& c = j.at("config");
  DrlConfig& d = agent.config_;
  d.diffusion_steps = c.at("diffusion_steps");
  d.beta_start = c.at("beta_start");
  d.beta_end = c.at("beta_end");
  d.learning_rate = c.at("learning_rate");
  d.tau = c.at("tau");
  d.gamma = c.at("gamma");
  d.temperature = c.at("temperature");
  d.replay_capacity = c.at("replay_capacity");
  d.batch_size = c.at("batch_size");
  d.hidden = c.at("hidden");
  d.optimizer = optimizer_from_name(c.at("optimizer"));

  NoiseSchedule schedule = NoiseSchedule::linear(d.diffusion_steps, d.beta_start, d.beta_end);
  if (schedule.beta != j.at("schedule").get<std::vector<double>>()) {
    throw DomainError("checkpoint schedule does not match its config");
  }
  const auto& n = j.at("networks");
  agent.actor_ = DiffusionActor(net_from_json(n.at("actor")), schedule);
  agent.actor_target_ = DiffusionActor(net_from_json(n.at("actor_target")), schedule);
  agent.critics_[0] = net_from_json(n.at("critic1"));
  agent.critics_[1] = net_from_json(n.at("critic2"));
  agent.critic_targets_[0] = net_from_json(n.at("critic1_target"));
  agent.critic_targets_[1] = net_from_json(n.at("critic2_target"));
  for (int i = 0; i < 2; ++i) {
    agent.critic_opt_[i] = Optimizer(d.optimizer, agent.critics_[i].params().size(), d.learning_rate);
  }
  agent.actor_opt_ = Optimizer(d.optimizer, agent.actor_.net().params().size(), d.learning_rate);
  return agent;
}

TrainResult train_diffusion(DiffusionAgent& agent, const MarketConfig& market, std::uint64_t seed,
                            int episodes) {
  if (episodes < 1) throw DomainError("need at least one episode");
  const DrlConfig& c = agent.config();
  Rng rng(episode_seed(seed, 0xD1FFu));
  AuctionEnv env(market);
  ReplayBuffer buffer(c.replay_capacity);
  TrainResult result;
  for (int ep = 0; ep < episodes; ++ep) {
    EpisodeStats stats;
    stats.episode = ep;
    stats.market_seed = episode_seed(seed, static_cast<std::uint64_t>(ep));
    MdpState state = env.reset(stats.market_seed);
    for (;;) {
      Transition t;
      t.state = features(state, market);
      t.action = agent.act(t.state, rng);
      StepResult r = env.step(t.action);
      t.reward = r.reward;
      t.next = features(r.next, market);
      t.terminal = r.done;
      buffer.push(t);
      stats.reward += r.reward;
      if (buffer.size() >= c.batch_size) {
        auto batch = buffer.sample(c.batch_size, rng);
        try {
          agent.critic_update(batch, rng);
          agent.actor_update(batch, rng);
        } catch (const NumericalError& e) {
          std::ostringstream msg;
          msg << e.what() << " (seed " << seed << ", episode " << ep << ", round " << r.next.t << ")";
          throw NumericalError(msg.str());
        }
        agent.update_targets();
      }
      state = r.next;
      if (r.done) break;
    }
    MarketOutcome o = env.outcome();
    stats.social_welfare = o.social_welfare;
    stats.exchange_cost = o.exchange_cost;
    stats.rounds = o.rounds;
    stats.matched = o.matched;
    result.curve.push_back(stats);
  }
  return result;
}

}  // namespace offload
