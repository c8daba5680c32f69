#pragma once

#include "offload/config.hpp"
#include "offload/market_model.hpp"

namespace toy {

inline offload::Scenario desk() { return offload::scenario_from_config(offload::Config{}); }

// Small channel used by the hand-worked power and energy values:
// W = 1000 bit, w_B = 1000 Hz, t_up = 0.5 s, n_B = 1e-4 W, unit gains.
inline offload::Scenario channel() {
  offload::Scenario s = desk();
  s.workload = 1000;
  s.channel.bandwidth_wa = 1000;
  s.channel.t_up = 0.5;
  s.channel.noise_wa = 1e-4;
  s.channel.gain_wa_ma = 1;
  s.channel.gain_wa_fa = 1;
  return s;
}

}  // namespace toy
