#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "offload/policies.hpp"
#include "offload/stackelberg.hpp"

namespace offload {

enum class ExperimentKind {
  kStackelbergFixedFa,
  kStackelbergConverge,
  kDrlTrain,
  kWelfareCompare,
  kCostCompare,
  kIrIcSweep,
};

ExperimentKind experiment_from_name(const std::string& name);  // ConfigError if unknown
const char* experiment_name(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kStackelbergConverge;
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir;  // empty: nothing written
  std::vector<std::string> policies;
  Config config;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text);

struct ResultRow {
  ExperimentKind kind = ExperimentKind::kStackelbergConverge;
  std::uint64_t seed = 0;
  long index = 0;
  std::string label;
  std::vector<double> metrics;  // order given by result_columns(kind)
};

const std::vector<std::string>& result_columns(ExperimentKind kind);

// Throws NumericalError on nonfinite metrics and DomainError on schema drift.
void validate_row(const ResultRow& row);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct ExperimentOutput {
  std::vector<ResultRow> rows;
  Table summary;
  // Extra per-seed files (training curves, checkpoints, audit logs):
  // relative path -> contents.
  std::vector<std::pair<std::string, std::string>> files;
};

ExperimentOutput run_experiment(const ExperimentConfig& config);

// <dir>/<kind>.jsonl, <dir>/<kind>_summary.csv and the extra files.
void write_outputs(const ExperimentOutput& output, ExperimentKind kind, const std::string& dir);

std::string row_json(const ResultRow& row);
std::string table_csv(const Table& table);

struct PolicySummary {
  std::string policy;
  double reward = 0, reward_sd = 0;
  double social_welfare = 0;
  double exchange_cost = 0;
  double rounds = 0;
  double paired_reward_diff = 0;  // vs the first policy, mean over seeds
  int wins = 0, losses = 0, ties = 0;  // seeds where this policy beats the first
  std::vector<double> per_seed_reward;
  std::vector<double> per_seed_welfare;
  std::vector<double> per_seed_cost;
};

struct RankingTable {
  std::vector<PolicySummary> policies;
  bool oracle_sized = false;
  double oracle_welfare = 0;  // mean exhaustive max SW over the evaluated markets
  std::vector<double> per_seed_oracle;
  // Largest episode-level SW - oracle SW over all policies (<= 0 expected).
  double max_oracle_excess = 0;
  std::vector<std::vector<EpisodeStats>> curves;  // [policy * seeds + seed]
};

// Runs every policy on every seed (paired markets) and averages the last
// `window` episodes. Jobs fan out across threads; results merge in order.
RankingTable compare_policies(const PolicyRunConfig& config, const std::vector<PolicyKind>& policies,
                              const std::vector<std::uint64_t>& seeds, int window,
                              Exec exec = Exec::kParallel);

bool oracle_sized(const MarketConfig& market);

}  // namespace offload
