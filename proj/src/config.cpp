#include "offload/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "offload/errors.hpp"

namespace offload {
namespace {

using D = Dimension;

// Desk-scale defaults. paper.cfg overrides them with the published constants.
const std::vector<SchemaEntry> kSchema = {
    {"channel.bandwidth_wa", D::kHertz, "50 Hz", "WA uplink bandwidth w_B"},
    {"channel.noise_wa", D::kWatts, "1e-4 dBm", "WA uplink noise power n_B"},
    {"channel.bandwidth_fa_aa", D::kHertz, "100 Hz", "FA->AA bandwidth w_0"},
    {"channel.noise_fa_aa", D::kWatts, "1e-4 dBm", "FA->AA noise power n_0"},
    {"channel.gain_wa_ma", D::kNone, "1e-3", "channel gain g_ni"},
    {"channel.gain_wa_fa", D::kNone, "2e-3", "channel gain g_nj"},
    {"channel.gain_fa_aa", D::kNone, "1e-3", "channel gain g_jk"},
    {"channel.t_up", D::kSeconds, "0.5 s", "WA->MA/FA upload slot"},
    {"channel.t_k_up", D::kSeconds, "0.1 s", "FA->AA upload slot"},
    {"channel.t_up_max", D::kSeconds, "1 s", "cap on t_up"},
    {"channel.t_k_up_max", D::kSeconds, "1 s", "cap on t_k_up"},

    {"wa.energy_weight", D::kNone, "300", "zeta_n, 1/J"},
    {"wa.qoe_weight", D::kNone, "0.5", "kappa_n"},
    {"wa.max_delay", D::kSeconds, "0.05 s", "epsilon_n"},
    {"wa.actuator_time", D::kSeconds, "50 s", "t_n"},
    {"wa.speed", D::kNone, "20", "v_n, m/s"},

    {"ma.cycles_per_bit", D::kNone, "1e4", "lambda_i"},
    {"ma.cpu_speed", D::kNone, "1e6", "mu_i, cycles/s"},
    {"ma.power_coeff", D::kNone, "1e-20", "sigma_i"},
    {"ma.compute_cost", D::kNone, "1", "xi_i, 1/J"},
    {"ma.speed", D::kNone, "15", "v_i, m/s"},
    {"ma.idle_resources", D::kNone, "8", "D_i"},

    {"fa.cycles_per_bit", D::kNone, "1e4", "lambda_j"},
    {"fa.cpu_speed", D::kNone, "4e6", "mu_j, cycles/s"},
    {"fa.power_coeff", D::kNone, "1.25e-22", "sigma_j"},
    {"fa.compute_cost", D::kNone, "1", "xi_j, 1/J"},
    {"fa.tx_cost", D::kNone, "1", "gamma_j, 1/J"},
    {"fa.delay_penalty", D::kNone, "1", "theta_j"},

    {"aa.cycles_per_bit", D::kNone, "1e4", "lambda_k"},
    {"aa.cpu_speed", D::kNone, "6e6", "mu_k, cycles/s"},
    {"aa.power_coeff", D::kNone, "1.5e-22", "sigma_k"},
    {"aa.compute_cost", D::kNone, "1", "xi_k, 1/J"},
    {"aa.tx_cost", D::kNone, "0.1", "gamma_k, 1/J"},
    {"aa.hover_power", D::kWatts, "100 W", "p_hov"},
    {"aa.delay_penalty", D::kNone, "1", "theta_k"},

    {"task.workload", D::kBits, "50 bit", "W_n"},
    {"task.alpha", D::kNone, "0.3", "share of FA work delegated to the AA"},

    {"mobility.density", D::kNone, "0.08", "rho, agents/m"},
    {"mobility.density_max", D::kNone, "0.1", "rho_bar, agents/m"},
    {"mobility.speed_low", D::kNone, "10", "v_low, m/s"},
    {"mobility.speed_high", D::kNone, "30", "v_high, m/s"},
    {"mobility.resources_low", D::kNone, "2", "D_low"},
    {"mobility.resources_high", D::kNone, "10", "D_high"},
    {"mobility.factor", D::kNone, "1", "phi multiplier"},
    {"mobility.offset", D::kNone, "12", "phi additive term"},

    {"pricing.p_i_max", D::kNone, "12", "MA price cap"},
    {"pricing.p_j_max", D::kNone, "12", "FA price cap"},
    {"pricing.profit_share", D::kNone, "0.5", "psi"},
    {"pricing.fa_preset", D::kText, "caption", "caption | text"},
    {"pricing.fa_price_caption", D::kNone, "6.0", "fixed FA price, figure caption"},
    {"pricing.fa_price_text", D::kNone, "5.0", "fixed FA price, body text"},

    {"solver.price_step", D::kNone, "0", "leader scan step; 0 means p_max/200"},
    {"solver.tolerance", D::kNone, "1e-6", "bisection width iota"},
    {"solver.eta", D::kNone, "1e-4", "price convergence tolerance"},
    {"solver.max_iters", D::kNone, "200", "best-response iterations"},
    {"solver.overflow_guard", D::kNone, "1024", "largest allowed 2^x exponent"},

    {"market.buyers", D::kNone, "3", "FA buyers"},
    {"market.sellers", D::kNone, "3", "AA sellers"},
    {"market.offload_ratio", D::kNone, "0.5", "o used to size w_k"},
    {"market.fa_price", D::kNone, "6.0", "p_j used to open the buyer clock"},
    {"market.buyer_value_low", D::kNone, "0.3", "fraction of clock spread"},
    {"market.buyer_value_high", D::kNone, "0.95", "fraction of clock spread"},
    {"market.seller_value_low", D::kNone, "0.05", "fraction of clock spread"},
    {"market.seller_value_high", D::kNone, "0.7", "fraction of clock spread"},
    {"market.step_multipliers", D::kText, "0.25,0.5,1,2", "action set / spread unit"},
    {"market.step_divisor", D::kNone, "40", "spread unit = spread / divisor"},
    {"market.fixed_step_index", D::kNone, "0", "step used by fixed_dda"},
    {"market.exchange_penalty", D::kNone, "0.01", "co_t per recipient"},
    {"market.reward_b", D::kNone, "1", "weight on R"},
    {"market.reward_c", D::kNone, "1", "weight on SW"},
    {"market.reward_d", D::kNone, "0.5", "weight on NUM"},
    {"market.reward_mode", D::kText, "terminal", "terminal | per_step"},
    {"market.max_rounds", D::kNone, "100000", "episode guard"},

    {"drl.episodes", D::kNone, "300", "training episodes"},
    {"drl.diffusion_steps", D::kNone, "5", "H"},
    {"drl.beta_start", D::kNone, "1e-4", "first noise level"},
    {"drl.beta_end", D::kNone, "0.02", "last noise level"},
    {"drl.learning_rate", D::kNone, "1e-3", "actor and critic step"},
    {"drl.tau", D::kNone, "0.05", "soft update rate"},
    {"drl.gamma", D::kNone, "1", "discount; episodes are finite"},
    {"drl.temperature", D::kNone, "0.05", "entropy weight"},
    {"drl.replay_capacity", D::kNone, "10000", "FIFO capacity"},
    {"drl.batch_size", D::kNone, "64", "mini-batch"},
    {"drl.hidden", D::kNone, "32", "hidden width"},
    {"drl.optimizer", D::kText, "adam", "adam | sgd"},

    {"ppo.rollout", D::kNone, "512", "steps per update"},
    {"ppo.epochs", D::kNone, "4", "passes per rollout"},
    {"ppo.minibatch", D::kNone, "64", "minibatch size"},
    {"ppo.clip", D::kNone, "0.2", "ratio clip"},
    {"ppo.gae_lambda", D::kNone, "1", "GAE lambda; Monte Carlo returns for the terminal reward"},
    {"ppo.learning_rate", D::kNone, "1e-3", "Adam step"},
    {"ppo.entropy_coef", D::kNone, "0.01", "entropy bonus"},
    {"ppo.hidden", D::kNone, "32", "hidden width"},

    {"experiment.kind", D::kText, "stackelberg_converge", "experiment name"},
    {"experiment.policies", D::kText, "diffusion,ppo,greedy,random,fixed_dda",
     "policies compared"},
    {"experiment.eval_window", D::kNone, "50", "final episodes averaged"},
    {"experiment.fixed_fa_step", D::kNone, "0.001", "scan step for fixed-FA runs"},
    {"experiment.ic_buyer_values", D::kText, "41,42,28,19,19", "IC market buyers"},
    {"experiment.ic_seller_values", D::kText, "9,34,7,17,2", "IC market sellers"},
    {"experiment.ic_buyer_clock", D::kNone, "50", "IC market C_b0"},
    {"experiment.ic_seller_clock", D::kNone, "0", "IC market C_s0"},
    {"experiment.ic_step", D::kNone, "1", "IC market clock step"},
    {"experiment.ic_bid_low", D::kNone, "0", "bid grid start"},
    {"experiment.ic_bid_high", D::kNone, "60", "bid grid end"},
};

struct Unit {
  const char* name;
  Dimension dimension;
  double scale;
};

const Unit kUnits[] = {
    {"bit", D::kBits, 1.0},      {"kbit", D::kBits, 1e3},
    {"Mbit", D::kBits, 1e6},     {"Hz", D::kHertz, 1.0},
    {"kHz", D::kHertz, 1e3},     {"MHz", D::kHertz, 1e6},
    {"W", D::kWatts, 1.0},       {"mW", D::kWatts, 1e-3},
    {"s", D::kSeconds, 1.0},     {"ms", D::kSeconds, 1e-3},
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(context + ": not a number: '" + text + "'");
  }
}

}  // namespace

const std::vector<SchemaEntry>& config_schema() { return kSchema; }

double parse_quantity(const std::string& raw, Dimension dimension) {
  std::string text = trim(raw);
  auto space = text.find_first_of(" \t");
  std::string number = text.substr(0, space);
  std::string unit = space == std::string::npos ? "" : trim(text.substr(space));
  double value = to_double(number, "quantity");
  if (unit.empty()) return value;
  if (unit == "dBm") {
    if (dimension != D::kWatts) throw ConfigError("dBm used for a non-power quantity");
    return std::pow(10.0, (value - 30.0) / 10.0);
  }
  for (const auto& u : kUnits) {
    if (unit == u.name) {
      if (u.dimension != dimension) {
        throw ConfigError("unit '" + unit + "' does not fit this quantity");
      }
      return value * u.scale;
    }
  }
  throw ConfigError("unknown unit '" + unit + "'");
}

Config::Config() {
  for (const auto& e : kSchema) values_[e.key] = e.default_value;
}

Config Config::from_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  Config config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(path + ": key '" + section + "' is outside any section");
    }
    for (const auto& [key, value] : body) {
      config.set(section + "." + key, value.get_value<std::string>());
    }
  }
  return config;
}

void Config::apply_override(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const SchemaEntry& Config::entry(const std::string& key) const {
  auto it = std::find_if(kSchema.begin(), kSchema.end(),
                         [&](const SchemaEntry& e) { return e.key == key; });
  if (it == kSchema.end()) throw ConfigError("unknown config key '" + key + "'");
  return *it;
}

void Config::set(const std::string& key, const std::string& value) {
  const SchemaEntry& e = entry(key);
  std::string v = trim(value);
  if (e.dimension != D::kText) {
    try {
      parse_quantity(v, e.dimension);
    } catch (const ConfigError& err) {
      throw ConfigError(key + ": " + err.what());
    }
  }
  values_[key] = v;
}

double Config::number(const std::string& key) const {
  const SchemaEntry& e = entry(key);
  if (e.dimension == D::kText) throw ConfigError(key + " is not numeric");
  return parse_quantity(values_.at(key), e.dimension);
}

long Config::integer(const std::string& key) const {
  double v = number(key);
  if (v != std::floor(v)) throw ConfigError(key + " must be an integer");
  return static_cast<long>(v);
}

const std::string& Config::text(const std::string& key) const {
  entry(key);
  return values_.at(key);
}

std::vector<double> Config::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_commas(text(key))) out.push_back(to_double(item, key));
  return out;
}

std::vector<std::string> Config::words(const std::string& key) const {
  return split_commas(text(key));
}

}  // namespace offload
