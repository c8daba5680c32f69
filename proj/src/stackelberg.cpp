#include "offload/stackelberg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "offload/errors.hpp"

namespace offload {
namespace {

constexpr int kMonotoneSamples = 33;
constexpr double kFallbackGridStep = 1e-4;

double log_actuator_ratio(const Scenario& s) {
  return std::log(1.0 + s.wa.actuator_time / s.wa.max_delay);
}

// Work-proportional latency coefficient a_c and the latency constant at full
// load for each case: latency = base + a_c * share(o).
double case_slope(LatencyCase c, const Scenario& s) {
  const double w = s.workload;
  switch (c) {
    case LatencyCase::kMobile: return w * s.ma.cycles_per_bit / s.ma.cpu_speed;
    case LatencyCase::kFixed:
      return w * (1.0 - s.alpha) * s.fa.cycles_per_bit / s.fa.cpu_speed;
    case LatencyCase::kAerial: return w * s.alpha * s.aa.cycles_per_bit / s.aa.cpu_speed;
  }
  return 0.0;
}

double case_base(LatencyCase c, const Scenario& s) {
  double base = 1.0 + s.wa.max_delay - s.channel.t_up;
  if (c == LatencyCase::kAerial) base -= s.channel.t_k_up;
  return base;
}

// zeta_n n_B ln2 / w_B * (1/g_ni - 1/g_nj): the per-bit channel part of P.
double channel_threshold_term(const Scenario& s) {
  const auto& ch = s.channel;
  return s.wa.energy_weight * ch.noise_wa * std::log(2.0) / ch.bandwidth_wa *
         (1.0 / ch.gain_wa_ma - 1.0 / ch.gain_wa_fa);
}

// Largest o keeping every relevant case inside the deadline.
double feasible_upper(const Scenario& s, std::optional<LatencyCase> only) {
  double hi = 1.0;
  for (LatencyCase c : kAllCases) {
    if (only && *only != c) continue;
    double slack0 = 1.0 + s.wa.max_delay - case_latency(0.0, c, s);
    if (slack0 <= 0.0) {
      throw DomainError(std::string("deadline infeasible at o=0 for ") + case_name(c));
    }
    double slack1 = 1.0 + s.wa.max_delay - case_latency(1.0, c, s);
    if (slack1 <= 0.0) {
      double o_dead = slack0 / (slack0 - slack1);
      hi = std::min(hi, o_dead * (1.0 - 1e-9));
    }
  }
  return hi;
}

// Right derivative of the max-latency utility: among cases tied for the max
// latency, the smallest case derivative.
double max_latency_derivative(double o, const PriceProfile& p, const Scenario& s,
                              LatencyCase* binding) {
  double top = end_to_end_latency(o, s);
  double best = std::numeric_limits<double>::infinity();
  for (LatencyCase c : kAllCases) {
    if (case_latency(o, c, s) != top) continue;
    double d = follower_derivative(o, c, p, s);
    if (d < best) {
      best = d;
      if (binding) *binding = c;
    }
  }
  return best;
}

template <class Deriv>
FollowerAnalysis bisect(Deriv&& deriv, double hi, double tol, FollowerAnalysis out) {
  double prev = deriv(0.0);
  for (int k = 1; k < kMonotoneSamples; ++k) {
    double d = deriv(hi * k / (kMonotoneSamples - 1));
    double slack = 1e-12 * std::max({1.0, std::abs(d), std::abs(prev)});
    if (d > prev + slack) {
      throw ConcavityError("follower derivative increases on [0, " + std::to_string(hi) + "]");
    }
    prev = d;
  }
  if (deriv(hi) >= 0.0) {
    out.o_star = hi;
    out.interior = false;
    return out;
  }
  double lo = 0.0;
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (deriv(mid) < 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.o_star = 0.5 * (lo + hi);
  out.interior = true;
  return out;
}

}  // namespace

double follower_derivative(double o, LatencyCase c, const PriceProfile& prices,
                           const Scenario& s) {
  if (!(o >= 0.0 && o <= 1.0)) throw DomainError("offloading ratio outside [0,1]");
  const auto& ch = s.channel;
  const double w = s.workload;
  const double a = case_slope(c, s);
  const double share = c == LatencyCase::kMobile ? o : 1.0 - o;
  const double denom = case_base(c, s) - share * a;
  if (denom <= 0.0) {
    throw DomainError(std::string("deadline infeasible for ") + case_name(c));
  }
  double qoe = s.wa.qoe_weight * a * log_actuator_ratio(s) / denom;
  if (c == LatencyCase::kMobile) qoe = -qoe;
  double x = o * w / (ch.bandwidth_wa * ch.t_up);
  if (x > s.overflow_guard) throw DomainError("rate exponent exceeds guard");
  double channel = s.wa.energy_weight * ch.noise_wa * w * std::exp2(x) * std::log(2.0) /
                   ch.bandwidth_wa * (1.0 / ch.gain_wa_fa - 1.0 / ch.gain_wa_ma);
  return qoe + (prices.p_j - prices.p_i) * w + channel;
}

double follower_threshold(LatencyCase c, const Scenario& s) {
  const double a = case_slope(c, s);
  const double share0 = c == LatencyCase::kMobile ? 0.0 : 1.0;
  const double denom = case_base(c, s) - share0 * a;
  if (denom <= 0.0) {
    throw DomainError(std::string("deadline infeasible at o=0 for ") + case_name(c));
  }
  // a already carries W; dividing by W leaves the per-bit coefficient.
  double qoe = s.wa.qoe_weight * (a / s.workload) * log_actuator_ratio(s) / denom;
  if (c != LatencyCase::kMobile) qoe = -qoe;
  return qoe + channel_threshold_term(s);
}

LatencyCase select_binding_case(double o, const Scenario& s) {
  LatencyCase best = LatencyCase::kMobile;
  double top = case_latency(o, best, s);
  for (LatencyCase c : {LatencyCase::kFixed, LatencyCase::kAerial}) {
    double t = case_latency(o, c, s);
    if (t > top) {
      top = t;
      best = c;
    }
  }
  return best;
}

FollowerAnalysis best_response_bisection(LatencyCase c, const PriceProfile& prices,
                                         const Scenario& s, double tol) {
  if (!(tol > 0.0)) throw DomainError("bisection tolerance must be positive");
  FollowerAnalysis out;
  out.latency_case = c;
  out.threshold = follower_threshold(c, s);
  out.slope_at_zero = follower_derivative(0.0, c, prices, s);
  if (prices.p_j - prices.p_i <= out.threshold) return out;
  double hi = feasible_upper(s, c);
  return bisect([&](double o) { return follower_derivative(o, c, prices, s); }, hi, tol, out);
}

FollowerAnalysis best_response_bisection(const PriceProfile& prices, const Scenario& s,
                                         double tol) {
  if (!(tol > 0.0)) throw DomainError("bisection tolerance must be positive");
  double hi = feasible_upper(s, std::nullopt);
  FollowerAnalysis out;
  LatencyCase at_zero = LatencyCase::kMobile;
  out.slope_at_zero = max_latency_derivative(0.0, prices, s, &at_zero);
  out.latency_case = at_zero;
  out.threshold = follower_threshold(at_zero, s);
  if (prices.p_j - prices.p_i <= out.threshold) return out;
  out = bisect([&](double o) { return max_latency_derivative(o, prices, s, nullptr); }, hi, tol,
               out);
  out.latency_case = select_binding_case(out.o_star, s);
  return out;
}

FollowerAnalysis grid_best_response(const PriceProfile& prices, const Scenario& s,
                                    std::optional<LatencyCase> c, double step) {
  FollowerAnalysis out;
  const long n = std::lround(1.0 / step);
  double best = -std::numeric_limits<double>::infinity();
  for (long k = 0; k <= n; ++k) {
    double o = std::min(1.0, k * step);
    double u;
    try {
      u = c ? wa_utility(o, prices, s, *c) : wa_utility(o, prices, s);
    } catch (const DomainError&) {
      continue;
    }
    if (u > best) {
      best = u;
      out.o_star = o;
    }
  }
  if (!std::isfinite(best)) throw DomainError("deadline infeasible on the whole grid");
  out.latency_case = c ? *c : select_binding_case(out.o_star, s);
  out.threshold = follower_threshold(out.latency_case, s);
  out.interior = out.o_star > 0.0 && out.o_star < 1.0;
  out.grid_fallback = true;
  return out;
}

FollowerAnalysis best_response(const PriceProfile& prices, const Scenario& s,
                               std::optional<LatencyCase> c, double tol) {
  try {
    return c ? best_response_bisection(*c, prices, s, tol)
             : best_response_bisection(prices, s, tol);
  } catch (const ConcavityError&) {
    return grid_best_response(prices, s, c, kFallbackGridStep);
  }
}

SolverOptions solver_options_from_config(const Config& config) {
  SolverOptions o;
  o.price_step = config.number("solver.price_step");
  o.tolerance = config.number("solver.tolerance");
  o.eta = config.number("solver.eta");
  o.max_iters = static_cast<int>(config.integer("solver.max_iters"));
  return o;
}

double leader_utility(Leader who, double o, const PriceProfile& prices, const Scenario& s) {
  return who == Leader::kMobile ? ma_utility(o, prices, s) : fa_leader_utility(o, prices, s);
}

LeaderChoice leader_price_search(double other_price, Leader who, const Scenario& s,
                                 const SolverOptions& options) {
  const double cap = who == Leader::kMobile ? s.p_i_max : s.p_j_max;
  const double step = options.price_step > 0.0 ? options.price_step : cap / 200.0;
  if (!(options.tolerance > 0.0)) throw DomainError("tolerance must be positive");
  const auto n = static_cast<std::size_t>(std::ceil(cap / step * (1.0 - 1e-12)));

  struct Eval {
    double utility = 0;
    double o = 0;
  };
  auto evals = map_indices<Eval>(
      n,
      [&](std::size_t k) {
        double p = static_cast<double>(k) * step;
        PriceProfile prices = who == Leader::kMobile ? prices_for(s, p, other_price)
                                                     : prices_for(s, other_price, p);
        double o = best_response(prices, s, options.forced_case, options.tolerance).o_star;
        return Eval{leader_utility(who, o, prices, s), o};
      },
      options.exec);

  LeaderChoice best{0.0, 0.0, n > 0 ? evals[0].o : 0.0};
  for (std::size_t k = 0; k < n; ++k) {
    if (evals[k].utility > best.utility) {
      best = {static_cast<double>(k) * step, evals[k].utility, evals[k].o};
    }
  }
  return best;
}

EquilibriumResult iterate_equilibrium(const Scenario& s, const SolverOptions& options) {
  if (!(options.eta > 0.0) || options.max_iters < 1) {
    throw DomainError("eta must be positive and max_iters at least 1");
  }
  EquilibriumResult r;
  double p_i = s.p_i_max / 2.0;
  double p_j = s.p_j_max / 2.0;
  for (int l = 1; l <= options.max_iters; ++l) {
    double next_i = leader_price_search(p_j, Leader::kMobile, s, options).price;
    LeaderChoice fa = leader_price_search(next_i, Leader::kFixed, s, options);
    r.trace.push_back({next_i, fa.price, fa.o_star});
    r.iterations = l;
    bool done = std::abs(next_i - p_i) <= options.eta && std::abs(fa.price - p_j) <= options.eta;
    p_i = next_i;
    p_j = fa.price;
    if (done) {
      r.converged = true;
      break;
    }
  }
  PriceProfile prices = prices_for(s, p_i, p_j);
  r.p_i_star = p_i;
  r.p_j_star = p_j;
  r.o_star = best_response(prices, s, options.forced_case, options.tolerance).o_star;
  r.u_n = options.forced_case ? wa_utility(r.o_star, prices, s, *options.forced_case)
                              : wa_utility(r.o_star, prices, s);
  r.u_i = ma_utility(r.o_star, prices, s);
  r.u_j = fa_leader_utility(r.o_star, prices, s);

  auto& c = r.constraints;
  c.ratio_in_range = r.o_star >= 0.0 && r.o_star <= 1.0;
  c.prices_within_caps = p_i >= 0.0 && p_i <= s.p_i_max && p_j >= 0.0 && p_j <= s.p_j_max;
  c.slots_within_caps =
      s.channel.t_up <= s.channel.t_up_max && s.channel.t_k_up <= s.channel.t_k_up_max;
  c.ma_participates = r.u_i >= 0.0;
  c.fa_participates = r.u_j >= 0.0;
  c.wa_participates = r.u_n >= 0.0;
  return r;
}

}  // namespace offload
