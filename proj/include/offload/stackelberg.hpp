#pragma once

#include <optional>
#include <vector>

#include "offload/parallel.hpp"
#include "offload/utility.hpp"

namespace offload {

struct FollowerAnalysis {
  LatencyCase latency_case = LatencyCase::kMobile;
  double threshold = 0;     // P for the case
  double slope_at_zero = 0; // dU_n/do at o = 0
  double o_star = 0;
  bool interior = false;
  bool grid_fallback = false;
};

// dU_n/do with the latency pinned to case c.
double follower_derivative(double o, LatencyCase c, const PriceProfile& prices,
                           const Scenario& s);

// Price gap p_j - p_i above which the WA starts offloading to the MA.
double follower_threshold(LatencyCase c, const Scenario& s);

LatencyCase select_binding_case(double o, const Scenario& s);

// Case-restricted bisection. Throws ConcavityError when sampled derivatives
// are not monotone on the bracket.
FollowerAnalysis best_response_bisection(LatencyCase c, const PriceProfile& prices,
                                         const Scenario& s, double tol);

// Same, for the max-latency utility (binding case re-selected at each point).
FollowerAnalysis best_response_bisection(const PriceProfile& prices, const Scenario& s,
                                         double tol);

// Grid argmax of U_n over o = k * step; ties go to the smallest o.
FollowerAnalysis grid_best_response(const PriceProfile& prices, const Scenario& s,
                                    std::optional<LatencyCase> c, double step);

// Bisection with grid fallback when concavity fails.
FollowerAnalysis best_response(const PriceProfile& prices, const Scenario& s,
                               std::optional<LatencyCase> c, double tol);

enum class Leader { kMobile, kFixed };

struct SolverOptions {
  double price_step = 0;  // 0: p_max / 200
  double tolerance = 1e-6;
  double eta = 1e-4;
  int max_iters = 200;
  std::optional<LatencyCase> forced_case;
  Exec exec = Exec::kParallel;
};

SolverOptions solver_options_from_config(const Config& config);

struct LeaderChoice {
  double price = 0;
  double utility = 0;
  double o_star = 0;
};

double leader_utility(Leader who, double o, const PriceProfile& prices, const Scenario& s);

LeaderChoice leader_price_search(double other_price, Leader who, const Scenario& s,
                                 const SolverOptions& options);

struct TracePoint {
  double p_i = 0;
  double p_j = 0;
  double o = 0;
};

struct ConstraintReport {
  bool ratio_in_range = false;
  bool prices_within_caps = false;
  bool slots_within_caps = false;
  bool ma_participates = false;  // U_i >= 0
  bool fa_participates = false;  // U_j >= 0
  bool wa_participates = false;  // U_n >= 0, reported only
  bool leaders_ok() const {
    return ratio_in_range && prices_within_caps && slots_within_caps && ma_participates &&
           fa_participates;
  }
};

struct EquilibriumResult {
  double p_i_star = 0;
  double p_j_star = 0;
  double o_star = 0;
  double u_n = 0;
  double u_i = 0;
  double u_j = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<TracePoint> trace;
  ConstraintReport constraints;
};

EquilibriumResult iterate_equilibrium(const Scenario& s, const SolverOptions& options);

}  // namespace offload
