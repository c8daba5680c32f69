#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "offload/errors.hpp"
#include "offload/harness.hpp"

using namespace offload;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PolicyRunConfig small_run(int episodes) {
  PolicyRunConfig pc;
  pc.market.buyers = 2;
  pc.market.sellers = 2;
  pc.market.buyer_clock = 20;
  pc.market.steps = {1, 2, 4};
  pc.episodes = episodes;
  return pc;
}

}  // namespace

TEST(Harness, KindNames) {
  for (const char* n : {"stackelberg_fixed_fa", "stackelberg_converge", "drl_train",
                        "welfare_compare", "cost_compare", "ir_ic_sweep"}) {
    EXPECT_STREQ(experiment_name(experiment_from_name(n)), n);
  }
  EXPECT_THROW(experiment_from_name("fig9"), ConfigError);
}

TEST(Harness, Seeds) {
  EXPECT_EQ(parse_seeds("1,2,30"), (std::vector<std::uint64_t>{1, 2, 30}));
  EXPECT_THROW(parse_seeds(""), ConfigError);
  EXPECT_THROW(parse_seeds("1,x"), ConfigError);
  EXPECT_THROW(parse_seeds("2.5"), ConfigError);
}

TEST(Harness, RowSchema) {
  ResultRow ok{ExperimentKind::kIrIcSweep, 1, 3, "buyer", {41, 22, 1, 19}};
  EXPECT_NO_THROW(validate_row(ok));
  auto j = nlohmann::ordered_json::parse(row_json(ok));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"kind", "seed", "index", "label", "bid", "utility",
                                            "matched", "clearing_price"}));

  ResultRow short_row = ok;
  short_row.metrics.pop_back();
  EXPECT_THROW(validate_row(short_row), DomainError);
  ResultRow nan_row = ok;
  nan_row.metrics[1] = NAN;
  try {
    validate_row(nan_row);
    FAIL();
  } catch (const NumericalError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("utility"), std::string::npos);
    EXPECT_NE(msg.find("index 3"), std::string::npos);
  }
}

TEST(Harness, CsvLayout) {
  Table t{{"a", "b"}, {{"1", "2"}, {"3", "4"}}};
  EXPECT_EQ(table_csv(t), "a,b\n1,2\n3,4\n");
}

TEST(Compare, IdenticalPoliciesHaveZeroDifferences) {
  auto table = compare_policies(small_run(6), {PolicyKind::kRandom, PolicyKind::kRandom}, {1, 2, 3}, 3);
  for (const auto& p : table.policies) {
    EXPECT_EQ(p.paired_reward_diff, 0.0);
    EXPECT_EQ(p.ties, 3);
  }
  EXPECT_EQ(table.policies[0].reward, table.policies[1].reward);
}

TEST(Compare, SerialMatchesParallel) {
  std::vector<PolicyKind> kinds = {PolicyKind::kGreedy, PolicyKind::kRandom, PolicyKind::kFixedDda};
  auto a = compare_policies(small_run(5), kinds, {4, 5}, 5, Exec::kSerial);
  auto b = compare_policies(small_run(5), kinds, {4, 5}, 5, Exec::kParallel);
  for (std::size_t p = 0; p < kinds.size(); ++p) {
    EXPECT_EQ(a.policies[p].reward, b.policies[p].reward);
    EXPECT_EQ(a.policies[p].exchange_cost, b.policies[p].exchange_cost);
  }
  EXPECT_EQ(a.oracle_welfare, b.oracle_welfare);
}

TEST(Compare, OracleBoundsEveryPolicy) {
  auto table = compare_policies(small_run(10),
                                {PolicyKind::kGreedy, PolicyKind::kRandom, PolicyKind::kFixedDda},
                                {1, 2}, 10);
  ASSERT_TRUE(table.oracle_sized);
  EXPECT_LE(table.max_oracle_excess, 1e-9);
  for (const auto& p : table.policies) EXPECT_LE(p.social_welfare, table.oracle_welfare + 1e-9);
}

TEST(Compare, NeedsTwoPolicies) {
  EXPECT_THROW(compare_policies(small_run(2), {PolicyKind::kGreedy}, {1}, 2), DomainError);
}

TEST(Experiment, IrIcSweepFindsTruth) {
  ExperimentConfig ec;
  ec.kind = ExperimentKind::kIrIcSweep;
  ExperimentOutput out = run_experiment(ec);
  ASSERT_EQ(out.summary.rows.size(), 2u);
  EXPECT_EQ(out.summary.rows[0][2], "41");
  EXPECT_EQ(out.summary.rows[1][2], "9");
  EXPECT_EQ(out.rows.size(), 2u * 61);
}

TEST(Experiment, OutputsAreByteIdentical) {
  ExperimentConfig ec;
  ec.kind = ExperimentKind::kStackelbergFixedFa;
  ec.seeds = {1, 2};
  ec.config.set("experiment.fixed_fa_step", "0.05");
  fs::path root = fs::temp_directory_path() / "offload_harness_test";
  fs::remove_all(root);
  for (const char* run : {"a", "b"}) write_outputs(run_experiment(ec), ec.kind, (root / run).string());
  for (const auto& f : fs::directory_iterator(root / "a")) {
    EXPECT_EQ(slurp(f.path()), slurp(root / "b" / f.path().filename())) << f.path();
  }
  EXPECT_TRUE(fs::exists(root / "a" / "stackelberg_fixed_fa.jsonl"));
  EXPECT_TRUE(fs::exists(root / "a" / "stackelberg_fixed_fa_summary.csv"));
  fs::remove_all(root);
}

TEST(Experiment, ScenarioErrorsCarryKeys) {
  ExperimentConfig ec;
  ec.config.set("task.alpha", "2");
  EXPECT_THROW(run_experiment(ec), ConfigError);
  ec = ExperimentConfig{};
  ec.seeds.clear();
  EXPECT_THROW(run_experiment(ec), ConfigError);
}
