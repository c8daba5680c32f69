#include "offload/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "offload/errors.hpp"

namespace offload {
namespace {

const std::map<ExperimentKind, std::vector<std::string>> kColumns = {
    {ExperimentKind::kStackelbergFixedFa, {"p_i", "p_j", "o", "u_i", "u_n", "is_optimum"}},
    {ExperimentKind::kStackelbergConverge, {"p_i", "p_j", "o", "converged"}},
    {ExperimentKind::kDrlTrain, {"reward", "social_welfare", "exchange_cost", "rounds", "matched"}},
    {ExperimentKind::kWelfareCompare,
     {"reward", "social_welfare", "exchange_cost", "rounds", "matched"}},
    {ExperimentKind::kCostCompare, {"reward", "social_welfare", "exchange_cost", "rounds", "matched"}},
    {ExperimentKind::kIrIcSweep, {"bid", "utility", "matched", "clearing_price"}},
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v), s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

ResultRow make_row(ExperimentKind kind, std::uint64_t seed, long index, std::string label,
                   std::vector<double> metrics) {
  ResultRow r{kind, seed, index, std::move(label), std::move(metrics)};
  validate_row(r);
  return r;
}

double preset_fa_price(const Config& c) {
  const std::string& preset = c.text("pricing.fa_preset");
  if (preset == "caption") return c.number("pricing.fa_price_caption");
  if (preset == "text") return c.number("pricing.fa_price_text");
  throw ConfigError("pricing.fa_preset must be caption or text");
}

ExperimentOutput run_fixed_fa(const ExperimentConfig& ec, const Scenario& s) {
  ExperimentOutput out;
  const double p_j = preset_fa_price(ec.config);
  SolverOptions opts = solver_options_from_config(ec.config);
  opts.price_step = ec.config.number("experiment.fixed_fa_step");
  const double curve_step = s.p_i_max / 200.0;
  out.summary.header = {"case", "p_j", "p_i_star", "o_star", "u_i", "u_n", "threshold"};
  for (LatencyCase c : kAllCases) {
    opts.forced_case = c;
    LeaderChoice best = leader_price_search(p_j, Leader::kMobile, s, opts);
    PriceProfile at_best = prices_for(s, best.price, p_j);
    double u_n = wa_utility(best.o_star, at_best, s, c);
    for (std::uint64_t seed : ec.seeds) {
      long k = 0;
      for (; k * curve_step < s.p_i_max; ++k) {
        PriceProfile p = prices_for(s, k * curve_step, p_j);
        double o = best_response(p, s, c, opts.tolerance).o_star;
        out.rows.push_back(make_row(ec.kind, seed, k, case_name(c),
                                    {p.p_i, p_j, o, ma_utility(o, p, s), wa_utility(o, p, s, c), 0}));
      }
      out.rows.push_back(make_row(ec.kind, seed, k, case_name(c),
                                  {best.price, p_j, best.o_star, best.utility, u_n, 1}));
    }
    out.summary.rows.push_back({case_name(c), fmt(p_j), fmt(best.price), fmt(best.o_star),
                                fmt(best.utility), fmt(u_n), fmt(follower_threshold(c, s))});
  }
  return out;
}

ExperimentOutput run_converge(const ExperimentConfig& ec, const Scenario& s) {
  ExperimentOutput out;
  SolverOptions opts = solver_options_from_config(ec.config);
  out.summary.header = {"case",  "p_i_star", "p_j_star", "o_star",    "u_n", "u_i",
                        "u_j",   "iterations", "converged", "leaders_ok", "wa_participates"};
  std::vector<std::optional<LatencyCase>> cases = {LatencyCase::kMobile, LatencyCase::kFixed,
                                                   LatencyCase::kAerial, std::nullopt};
  for (const auto& c : cases) {
    opts.forced_case = c;
    EquilibriumResult r = iterate_equilibrium(s, opts);
    std::string label = c ? case_name(*c) : "max_latency";
    for (std::uint64_t seed : ec.seeds) {
      for (std::size_t i = 0; i < r.trace.size(); ++i) {
        bool last = i + 1 == r.trace.size();
        out.rows.push_back(make_row(ec.kind, seed, static_cast<long>(i + 1), label,
                                    {r.trace[i].p_i, r.trace[i].p_j, r.trace[i].o,
                                     last && r.converged ? 1.0 : 0.0}));
      }
    }
    out.summary.rows.push_back({label, fmt(r.p_i_star), fmt(r.p_j_star), fmt(r.o_star),
                                fmt(r.u_n), fmt(r.u_i), fmt(r.u_j), std::to_string(r.iterations),
                                r.converged ? "1" : "0", r.constraints.leaders_ok() ? "1" : "0",
                                r.constraints.wa_participates ? "1" : "0"});
  }
  return out;
}

std::string curve_csv(const std::vector<EpisodeStats>& curve) {
  Table t;
  t.header = {"episode", "reward", "social_welfare", "exchange_cost", "rounds"};
  for (const auto& e : curve) {
    t.rows.push_back({std::to_string(e.episode), fmt(e.reward), fmt(e.social_welfare),
                      fmt(e.exchange_cost), std::to_string(e.rounds)});
  }
  return table_csv(t);
}

std::vector<double> episode_metrics(const EpisodeStats& e) {
  return {e.reward, e.social_welfare, e.exchange_cost, static_cast<double>(e.rounds),
          static_cast<double>(e.matched)};
}

ExperimentOutput run_drl_train(const ExperimentConfig& ec, const Scenario& s) {
  ExperimentOutput out;
  PolicyRunConfig pc = policy_run_from_config(ec.config, s);
  const int window = static_cast<int>(ec.config.integer("experiment.eval_window"));
  const int actions = static_cast<int>(pc.market.steps.size());

  struct Job {
    std::vector<EpisodeStats> curve;
    std::string checkpoint;
  };
  auto jobs = map_indices<Job>(
      ec.seeds.size(),
      [&](std::size_t i) {
        std::uint64_t seed = ec.seeds[i];
        Rng init(episode_seed(seed, 0xA11CEu));
        DiffusionAgent agent(actions, pc.drl, init);
        Job job;
        job.curve = train_diffusion(agent, pc.market, seed, pc.episodes).curve;
        auto tmp = std::filesystem::temp_directory_path() /
                   ("offload_ckpt_" + std::to_string(seed) + "_" + std::to_string(i) + ".json");
        agent.save(tmp.string());
        std::ifstream in(tmp);
        job.checkpoint.assign(std::istreambuf_iterator<char>(in), {});
        in.close();
        std::filesystem::remove(tmp);
        return job;
      },
      Exec::kParallel);

  out.summary.header = {"seed", "final_reward", "final_social_welfare", "final_exchange_cost",
                        "final_rounds"};
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& curve = jobs[i].curve;
    std::vector<double> r, sw, cost, rounds;
    for (const auto& e : curve) {
      out.rows.push_back(make_row(ec.kind, ec.seeds[i], e.episode, "diffusion", episode_metrics(e)));
      if (e.episode >= static_cast<int>(curve.size()) - window) {
        r.push_back(e.reward);
        sw.push_back(e.social_welfare);
        cost.push_back(e.exchange_cost);
        rounds.push_back(e.rounds);
      }
    }
    std::string tag = "seed" + std::to_string(ec.seeds[i]);
    out.files.push_back({"curve_" + tag + ".csv", curve_csv(curve)});
    out.files.push_back({"checkpoint_" + tag + ".json", jobs[i].checkpoint});
    out.summary.rows.push_back({std::to_string(ec.seeds[i]), fmt(mean(r)), fmt(mean(sw)),
                                fmt(mean(cost)), fmt(mean(rounds))});
  }
  return out;
}

ExperimentOutput run_compare(const ExperimentConfig& ec, const Scenario& s) {
  ExperimentOutput out;
  PolicyRunConfig pc = policy_run_from_config(ec.config, s);
  std::vector<std::string> names =
      ec.policies.empty() ? ec.config.words("experiment.policies") : ec.policies;
  if (names.size() < 2) throw ConfigError("policy comparison needs at least two policies");
  std::vector<PolicyKind> kinds;
  for (const auto& n : names) kinds.push_back(policy_from_name(n));
  const int window = static_cast<int>(ec.config.integer("experiment.eval_window"));
  RankingTable table = compare_policies(pc, kinds, ec.seeds, window);

  for (std::size_t p = 0; p < kinds.size(); ++p) {
    for (std::size_t k = 0; k < ec.seeds.size(); ++k) {
      for (const auto& e : table.curves[p * ec.seeds.size() + k]) {
        out.rows.push_back(make_row(ec.kind, ec.seeds[k], e.episode, policy_name(kinds[p]),
                                    episode_metrics(e)));
      }
    }
  }

  std::vector<std::size_t> order(kinds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const bool by_cost = ec.kind == ExperimentKind::kCostCompare;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto &x = table.policies[a], &y = table.policies[b];
    return by_cost ? x.exchange_cost < y.exchange_cost : x.reward > y.reward;
  });
  out.summary.header = {"rank",   "policy",        "reward", "reward_sd",      "social_welfare",
                        "exchange_cost", "rounds", "paired_reward_diff", "wins", "losses", "ties"};
  if (table.oracle_sized) out.summary.header.push_back("oracle_social_welfare");
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& p = table.policies[order[r]];
    std::vector<std::string> row = {std::to_string(r + 1), p.policy, fmt(p.reward),
                                    fmt(p.reward_sd), fmt(p.social_welfare), fmt(p.exchange_cost),
                                    fmt(p.rounds), fmt(p.paired_reward_diff), std::to_string(p.wins),
                                    std::to_string(p.losses), std::to_string(p.ties)};
    if (table.oracle_sized) row.push_back(fmt(table.oracle_welfare));
    out.summary.rows.push_back(std::move(row));
  }
  return out;
}

ExperimentOutput run_ir_ic(const ExperimentConfig& ec, const Scenario& s) {
  const Config& c = ec.config;
  MarketDescription m;
  int id = 0;
  for (double v : c.numbers("experiment.ic_buyer_values")) m.buyers.push_back({id++, Side::kBuyer, v});
  for (double v : c.numbers("experiment.ic_seller_values")) m.sellers.push_back({id++, Side::kSeller, v});
  if (m.buyers.empty() || m.sellers.empty()) throw ConfigError("IC market needs both sides");
  m.buyer_clock = c.number("experiment.ic_buyer_clock");
  m.seller_clock = c.number("experiment.ic_seller_clock");
  m.step_size = c.number("experiment.ic_step");
  m.psi = s.profit_share;
  m.exchange_penalty = c.number("market.exchange_penalty");
  std::vector<double> grid;
  const double lo = c.number("experiment.ic_bid_low"), hi = c.number("experiment.ic_bid_high");
  for (long k = 0; lo + k <= hi; ++k) grid.push_back(lo + k);

  ExperimentOutput out;
  out.summary.header = {"side", "true_value", "argmax_bid", "truthful_utility",
                        "truthful_is_argmax", "ic_holds", "ir_holds"};
  for (const Participant* probe : {&m.buyers.front(), &m.sellers.front()}) {
    IcReport rep = verify_ir_ic(m, *probe, grid);
    std::string side = probe->side == Side::kBuyer ? "buyer" : "seller";
    for (std::uint64_t seed : ec.seeds) {
      for (std::size_t k = 0; k < rep.rows.size(); ++k) {
        const auto& r = rep.rows[k];
        out.rows.push_back(make_row(ec.kind, seed, static_cast<long>(k), side,
                                    {r.bid, r.utility, r.matched ? 1.0 : 0.0, r.clearing_price}));
      }
    }
    out.summary.rows.push_back({side, fmt(probe->value), fmt(rep.argmax_bid),
                                fmt(rep.truthful_utility), rep.truthful_is_argmax ? "1" : "0",
                                rep.ic_holds ? "1" : "0", rep.ir_holds ? "1" : "0"});
  }

  // Audit log of the truthful run.
  AuctionState st = init_auction(m.buyers, m.sellers, m.buyer_clock, m.seller_clock,
                                 m.exchange_penalty);
  std::string log;
  while (!st.terminated) log += round_record_json(step(st, m.step_size)) + "\n";
  out.files.push_back({"auction_log.jsonl", log});
  return out;
}

}  // namespace

ExperimentKind experiment_from_name(const std::string& name) {
  for (const auto& [kind, cols] : kColumns) {
    if (name == experiment_name(kind)) return kind;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kStackelbergFixedFa: return "stackelberg_fixed_fa";
    case ExperimentKind::kStackelbergConverge: return "stackelberg_converge";
    case ExperimentKind::kDrlTrain: return "drl_train";
    case ExperimentKind::kWelfareCompare: return "welfare_compare";
    case ExperimentKind::kCostCompare: return "cost_compare";
    case ExperimentKind::kIrIcSweep: return "ir_ic_sweep";
  }
  return "?";
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad seed '" + item + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  return seeds;
}

const std::vector<std::string>& result_columns(ExperimentKind kind) { return kColumns.at(kind); }

void validate_row(const ResultRow& row) {
  const auto& cols = result_columns(row.kind);
  if (row.metrics.size() != cols.size()) {
    throw DomainError(std::string("row does not match the column schema of ") +
                      experiment_name(row.kind));
  }
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (!std::isfinite(row.metrics[i])) {
      std::ostringstream msg;
      msg << "nonfinite " << cols[i] << " in " << experiment_name(row.kind) << " row (seed "
          << row.seed << ", index " << row.index << ", " << row.label << ")";
      throw NumericalError(msg.str());
    }
  }
}

std::string row_json(const ResultRow& row) {
  nlohmann::ordered_json j;
  j["kind"] = experiment_name(row.kind);
  j["seed"] = row.seed;
  j["index"] = row.index;
  j["label"] = row.label;
  const auto& cols = result_columns(row.kind);
  for (std::size_t i = 0; i < cols.size(); ++i) j[cols[i]] = row.metrics[i];
  return j.dump();
}

std::string table_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += "\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

bool oracle_sized(const MarketConfig& market) {
  if (market.buyers > 3 || market.sellers > 3) return false;
  for (double s : market.steps) {
    double ratio = s / market.steps.front();
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) return false;
  }
  return true;
}

RankingTable compare_policies(const PolicyRunConfig& config, const std::vector<PolicyKind>& policies,
                              const std::vector<std::uint64_t>& seeds, int window, Exec exec) {
  if (policies.size() < 2) throw DomainError("need at least two policies");
  if (seeds.empty()) throw DomainError("need at least one seed");
  const std::size_t ns = seeds.size();
  RankingTable table;
  table.curves = map_indices<std::vector<EpisodeStats>>(
      policies.size() * ns,
      [&](std::size_t job) { return run_policy(policies[job / ns], config, seeds[job % ns]); },
      exec);

  const int episodes = config.episodes;
  const int first = std::max(0, episodes - window);
  for (std::size_t p = 0; p < policies.size(); ++p) {
    PolicySummary s;
    s.policy = policy_name(policies[p]);
    std::vector<double> rounds;
    for (std::size_t k = 0; k < ns; ++k) {
      const auto& curve = table.curves[p * ns + k];
      std::vector<double> r, sw, c, t;
      for (int e = first; e < episodes; ++e) {
        r.push_back(curve[e].reward);
        sw.push_back(curve[e].social_welfare);
        c.push_back(curve[e].exchange_cost);
        t.push_back(curve[e].rounds);
      }
      s.per_seed_reward.push_back(mean(r));
      s.per_seed_welfare.push_back(mean(sw));
      s.per_seed_cost.push_back(mean(c));
      rounds.push_back(mean(t));
    }
    s.reward = mean(s.per_seed_reward);
    s.reward_sd = stddev(s.per_seed_reward);
    s.social_welfare = mean(s.per_seed_welfare);
    s.exchange_cost = mean(s.per_seed_cost);
    s.rounds = mean(rounds);
    table.policies.push_back(std::move(s));
  }
  const auto& base = table.policies.front().per_seed_reward;
  for (auto& s : table.policies) {
    std::vector<double> diffs;
    for (std::size_t k = 0; k < ns; ++k) {
      double d = s.per_seed_reward[k] - base[k];
      diffs.push_back(d);
      if (d > 0) {
        ++s.wins;
      } else if (d < 0) {
        ++s.losses;
      } else {
        ++s.ties;
      }
    }
    s.paired_reward_diff = mean(diffs);
  }

  table.oracle_sized = oracle_sized(config.market);
  if (table.oracle_sized) {
    // Markets depend only on (seed, episode), so one oracle value serves all policies.
    auto oracle = map_indices<std::vector<double>>(
        ns,
        [&](std::size_t k) {
          AuctionEnv env(config.market);
          std::vector<double> values;
          for (int e = first; e < episodes; ++e) {
            env.reset(table.curves[k][e].market_seed);
            values.push_back(exhaustive_max_welfare(env.description(), config.market.steps).max_welfare);
          }
          return values;
        },
        exec);
    table.max_oracle_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ns; ++k) {
      table.per_seed_oracle.push_back(mean(oracle[k]));
      for (std::size_t p = 0; p < policies.size(); ++p) {
        const auto& curve = table.curves[p * ns + k];
        for (int e = first; e < episodes; ++e) {
          table.max_oracle_excess =
              std::max(table.max_oracle_excess, curve[e].social_welfare - oracle[k][e - first]);
        }
      }
    }
    table.oracle_welfare = mean(table.per_seed_oracle);
  }
  return table;
}

ExperimentOutput run_experiment(const ExperimentConfig& ec) {
  if (ec.seeds.empty()) throw ConfigError("at least one seed is required");
  Scenario s = scenario_from_config(ec.config);
  switch (ec.kind) {
    case ExperimentKind::kStackelbergFixedFa: return run_fixed_fa(ec, s);
    case ExperimentKind::kStackelbergConverge: return run_converge(ec, s);
    case ExperimentKind::kDrlTrain: return run_drl_train(ec, s);
    case ExperimentKind::kWelfareCompare:
    case ExperimentKind::kCostCompare: return run_compare(ec, s);
    case ExperimentKind::kIrIcSweep: return run_ir_ic(ec, s);
  }
  throw ConfigError("unhandled experiment kind");
}

void write_outputs(const ExperimentOutput& output, ExperimentKind kind, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string name = experiment_name(kind);
  auto write = [&](const std::string& file, const std::string& body) {
    std::ofstream out(fs::path(dir) / file, std::ios::binary);
    if (!out) throw DomainError("cannot write " + file);
    out << body;
  };
  std::string rows;
  for (const auto& r : output.rows) rows += row_json(r) + "\n";
  write(name + ".jsonl", rows);
  write(name + "_summary.csv", table_csv(output.summary));
  for (const auto& [file, body] : output.files) write(file, body);
}

}  // namespace offload
