#include "offload/dda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include "json.hpp"

#include "offload/errors.hpp"

namespace offload {
namespace {

bool admitted(const std::vector<Acceptance>& winners, int id) {
  return std::any_of(winners.begin(), winners.end(),
                     [id](const Acceptance& a) { return a.id == id; });
}

void check_side(const std::vector<Participant>& people, Side side, const char* label) {
  if (people.empty()) throw DomainError(std::string("market has no ") + label);
  for (std::size_t i = 0; i < people.size(); ++i) {
    if (people[i].side != side) throw DomainError(std::string("participant on wrong side in ") + label);
    if (!(people[i].value >= 0.0)) throw DomainError("participant values must be nonnegative");
    for (std::size_t j = 0; j < i; ++j) {
      if (people[j].id == people[i].id) throw DomainError("duplicate participant id");
    }
  }
}

// Priority order used for admission: buyers by value desc, sellers by value
// asc, ties by smaller id.
bool before(const Participant& a, const Participant& b) {
  if (a.value != b.value) return a.side == Side::kBuyer ? a.value > b.value : a.value < b.value;
  return a.id < b.id;
}

}  // namespace

double opening_buyer_clock(double w_k, const PriceProfile& prices) { return prices.p_j * w_k; }

double opening_seller_clock(double w_k, const Scenario& s) {
  return s.aa.compute_cost * aa_compute_energy(w_k, s) + s.aa.tx_cost * aa_hover_energy(w_k, s);
}

AuctionState init_auction(std::vector<Participant> buyers, std::vector<Participant> sellers,
                          double buyer_clock, double seller_clock, double exchange_penalty) {
  check_side(buyers, Side::kBuyer, "buyers");
  check_side(sellers, Side::kSeller, "sellers");
  if (buyer_clock < seller_clock) {
    throw DomainError("buyer clock opens below seller clock; market cannot open");
  }
  AuctionState st;
  st.buyers = std::move(buyers);
  st.sellers = std::move(sellers);
  st.buyer_clock = st.initial_buyer_clock = st.prev_buyer_clock = buyer_clock;
  st.seller_clock = st.initial_seller_clock = st.prev_seller_clock = seller_clock;
  st.exchange_penalty = exchange_penalty;
  return st;
}

AuctionState init_auction(std::vector<Participant> buyers, std::vector<Participant> sellers,
                          double w_k, const PriceProfile& prices, const Scenario& s,
                          double exchange_penalty) {
  return init_auction(std::move(buyers), std::move(sellers), opening_buyer_clock(w_k, prices),
                      opening_seller_clock(w_k, s), exchange_penalty);
}

RoundRecord step(AuctionState& st, double step_size) {
  if (st.terminated) throw StateError("auction already terminated");
  if (!(step_size > 0.0)) throw DomainError("clock step must be positive");
  RoundRecord rec;
  rec.t = ++st.round;
  rec.flag = st.flag;

  const bool buying = st.flag == Side::kBuyer;
  const auto& people = buying ? st.buyers : st.sellers;
  auto& winners = buying ? st.buy_winners : st.sell_winners;
  const double clock = buying ? st.buyer_clock : st.seller_clock;

  const Participant* pick = nullptr;
  for (const auto& p : people) {
    bool willing = buying ? p.value >= clock : p.value <= clock;
    if (!willing || admitted(winners, p.id)) continue;
    if (!pick || before(p, *pick)) pick = &p;
  }

  if (pick) {
    double regret = buying ? pick->value - clock : clock - pick->value;
    winners.push_back({pick->id, clock, regret});
    st.total_regret += regret;
    st.flag = buying ? Side::kSeller : Side::kBuyer;
    rec.event = RoundEvent::kAccept;
    rec.actor = pick->id;
    rec.regret = regret;
  } else {
    st.prev_buyer_clock = st.buyer_clock;
    st.prev_seller_clock = st.seller_clock;
    if (buying) {
      st.buyer_clock -= step_size;
    } else {
      st.seller_clock += step_size;
    }
    rec.event = RoundEvent::kAdjust;
    rec.recipients = static_cast<int>(people.size());
    rec.exchange_cost = st.exchange_penalty * rec.recipients;
    st.exchange_cost += rec.exchange_cost;
  }
  st.terminated = st.buyer_clock < st.seller_clock;
  rec.buyer_clock = st.buyer_clock;
  rec.seller_clock = st.seller_clock;
  rec.terminated = st.terminated;
  return rec;
}

MarketOutcome clear(const AuctionState& st, double psi) {
  if (!st.terminated) throw StateError("clear called before the clocks crossed");
  MarketOutcome out;
  out.clearing_price = aa_payment(st.prev_buyer_clock, st.prev_seller_clock, psi);
  out.matched = static_cast<int>(std::min(st.buy_winners.size(), st.sell_winners.size()));
  for (int m = 0; m < out.matched; ++m) {
    double u_j = st.buy_winners[m].clock - out.clearing_price;
    double u_k = out.clearing_price - st.sell_winners[m].clock;
    out.buyer_utilities.push_back(u_j);
    out.seller_utilities.push_back(u_k);
    out.social_welfare += u_j + u_k;
    out.buyer_payments += out.clearing_price;
    out.seller_receipts += out.clearing_price;
  }
  out.total_regret = st.total_regret;
  out.exchange_cost = st.exchange_cost;
  out.rounds = st.round;
  return out;
}

std::string round_record_json(const RoundRecord& r) {
  nlohmann::ordered_json j;
  j["t"] = r.t;
  j["psi"] = static_cast<int>(r.flag);
  j["C_b"] = r.buyer_clock;
  j["C_s"] = r.seller_clock;
  j["event"] = r.event == RoundEvent::kAccept ? "accept" : "adjust";
  j["actor"] = r.actor;
  j["regret"] = r.regret;
  j["exchange_cost"] = r.exchange_cost;
  j["terminated"] = r.terminated;
  return j.dump();
}

MarketOutcome run_constant_step(const MarketDescription& m) {
  AuctionState st = init_auction(m.buyers, m.sellers, m.buyer_clock, m.seller_clock,
                                 m.exchange_penalty);
  while (!st.terminated) step(st, m.step_size);
  return clear(st, m.psi);
}

IcReport verify_ir_ic(const MarketDescription& market, const Participant& probe,
                      const std::vector<double>& bid_grid) {
  auto& crowd = probe.side == Side::kBuyer ? market.buyers : market.sellers;
  auto it = std::find_if(crowd.begin(), crowd.end(),
                         [&](const Participant& p) { return p.id == probe.id; });
  if (it == crowd.end()) throw DomainError("probe is not part of the market");
  const std::size_t slot = static_cast<std::size_t>(it - crowd.begin());

  IcReport report;
  report.ir_holds = true;
  report.min_winner_utility = std::numeric_limits<double>::infinity();

  auto replay = [&](double bid) {
    MarketDescription m = market;
    auto& side = probe.side == Side::kBuyer ? m.buyers : m.sellers;
    side[slot].value = bid;
    AuctionState st = init_auction(m.buyers, m.sellers, m.buyer_clock, m.seller_clock,
                                   m.exchange_penalty);
    while (!st.terminated) step(st, m.step_size);
    MarketOutcome out = clear(st, m.psi);
    for (double u : out.buyer_utilities) report.min_winner_utility = std::min(report.min_winner_utility, u);
    for (double u : out.seller_utilities) report.min_winner_utility = std::min(report.min_winner_utility, u);
    const auto& winners = probe.side == Side::kBuyer ? st.buy_winners : st.sell_winners;
    ProbeRow row;
    row.bid = bid;
    row.clearing_price = out.clearing_price;
    for (int k = 0; k < out.matched; ++k) {
      if (winners[k].id == probe.id) row.matched = true;
    }
    if (row.matched) {
      row.utility = probe.side == Side::kBuyer ? probe.value - out.clearing_price
                                               : out.clearing_price - probe.value;
    }
    return row;
  };

  report.truthful_utility = replay(probe.value).utility;
  double best = -std::numeric_limits<double>::infinity();
  report.ic_holds = true;
  for (double bid : bid_grid) {
    ProbeRow row = replay(bid);
    report.rows.push_back(row);
    if (row.utility > report.truthful_utility) report.ic_holds = false;
    double gap = std::abs(bid - probe.value);
    double best_gap = std::abs(report.argmax_bid - probe.value);
    if (row.utility > best ||
        (row.utility == best && (gap < best_gap || (gap == best_gap && bid < report.argmax_bid)))) {
      best = row.utility;
      report.argmax_bid = bid;
    }
  }
  report.truthful_is_argmax = report.truthful_utility >= best;
  if (report.min_winner_utility < 0.0) report.ir_holds = false;
  if (!std::isfinite(report.min_winner_utility)) report.min_winner_utility = 0.0;
  return report;
}

namespace {

// Memoised search over the step lattice. Admissions alternate sides, so a
// pending buyer's recorded clock is the current buyer clock and welfare can
// be booked when its seller is admitted.
class LatticeSearch {
 public:
  LatticeSearch(const MarketDescription& m, const std::vector<double>& steps)
      : m_(m), buyers_(m.buyers), sellers_(m.sellers) {
    if (steps.empty()) throw DomainError("empty step set");
    base_ = *std::min_element(steps.begin(), steps.end());
    if (!(base_ > 0.0)) throw DomainError("steps must be positive");
    for (double s : steps) {
      int ticks = static_cast<int>(std::lround(s / base_));
      if (std::abs(ticks * base_ - s) > 1e-9 * s) {
        throw DomainError("steps must be integer multiples of the smallest step");
      }
      ticks_.push_back(ticks);
    }
    std::sort(buyers_.begin(), buyers_.end(), before);
    std::sort(sellers_.begin(), sellers_.end(), before);
    double spread = m.buyer_clock - m.seller_clock;
    span_ = static_cast<int>(std::floor(spread / base_)) + 2 +
            *std::max_element(ticks_.begin(), ticks_.end());
    nb_ = static_cast<int>(buyers_.size());
    ns_ = static_cast<int>(sellers_.size());
    std::size_t size = 2 * static_cast<std::size_t>(span_ + 1) * (span_ + 1) * (nb_ + 1) * (ns_ + 1);
    memo_.assign(size, kUnset);
    choice_.assign(size, -1);
  }

  WelfareOracle solve() {
    WelfareOracle out;
    out.max_welfare = value(0, 0, 0, 0, 0);
    int flag = 0, kb = 0, ks = 0, ib = 0, is = 0;
    while (!crossed(kb, ks)) {
      std::size_t k = key(flag, kb, ks, ib, is);
      int a = choice_[k];
      if (a < 0) {  // forced admission
        out.actions.push_back(0);
        if (flag == 0) {
          ++ib;
        } else {
          ++is;
        }
        flag = 1 - flag;
      } else {
        out.actions.push_back(a);
        (flag == 0 ? kb : ks) += ticks_[a];
      }
    }
    return out;
  }

 private:
  static constexpr double kUnset = -std::numeric_limits<double>::infinity();

  double cb(int kb) const { return m_.buyer_clock - kb * base_; }
  double cs(int ks) const { return m_.seller_clock + ks * base_; }
  bool crossed(int kb, int ks) const { return cb(kb) < cs(ks); }

  std::size_t key(int flag, int kb, int ks, int ib, int is) const {
    return (((static_cast<std::size_t>(flag) * (span_ + 1) + kb) * (span_ + 1) + ks) * (nb_ + 1) +
            ib) * (ns_ + 1) + is;
  }

  double value(int flag, int kb, int ks, int ib, int is) {
    if (crossed(kb, ks)) return 0.0;
    std::size_t k = key(flag, kb, ks, ib, is);
    if (memo_[k] != kUnset) return memo_[k];
    double best;
    if (flag == 0 && ib < nb_ && buyers_[ib].value >= cb(kb)) {
      best = value(1, kb, ks, ib + 1, is);
    } else if (flag == 1 && is < ns_ && sellers_[is].value <= cs(ks)) {
      best = (cb(kb) - cs(ks)) + value(0, kb, ks, ib, is + 1);
    } else {
      best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < ticks_.size(); ++a) {
        double v = flag == 0 ? value(0, kb + ticks_[a], ks, ib, is)
                             : value(1, kb, ks + ticks_[a], ib, is);
        if (v > best) {
          best = v;
          choice_[k] = static_cast<int>(a);
        }
      }
    }
    memo_[k] = best;
    return best;
  }

  const MarketDescription& m_;
  std::vector<Participant> buyers_, sellers_;
  std::vector<int> ticks_;
  double base_ = 0;
  int span_ = 0, nb_ = 0, ns_ = 0;
  std::vector<double> memo_;
  std::vector<int> choice_;
};

}  // namespace

WelfareOracle exhaustive_max_welfare(const MarketDescription& market,
                                     const std::vector<double>& steps) {
  init_auction(market.buyers, market.sellers, market.buyer_clock, market.seller_clock);
  return LatticeSearch(market, steps).solve();
}

}  // namespace offload
