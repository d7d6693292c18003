#include "relayfl/scheduler.hpp"

#include <algorithm>

namespace relayfl {

Schedule Schedule::all_single_hop(std::size_t n_devices) {
  return from_relays(std::vector<std::optional<std::size_t>>(n_devices));
}

Schedule Schedule::from_relays(std::vector<std::optional<std::size_t>> relay_of) {
  Schedule s;
  for (std::size_t n = 0; n < relay_of.size(); ++n) {
    (relay_of[n] ? s.two_hop : s.single_hop).push_back(n);
  }
  s.relay_of = std::move(relay_of);
  return s;
}

double effective_two_hop_gain(std::size_t n, std::size_t k, const ChannelRealization& ch) {
  return 0.5 * std::min(ch.backhaul_gain(k), ch.access_gain(n, k));
}

std::optional<RelayChoice> best_relay_gain(std::size_t n, const ChannelRealization& ch) {
  if (ch.n_saps() == 0) return std::nullopt;
  RelayChoice best{effective_two_hop_gain(n, 0, ch), 0};
  for (std::size_t k = 1; k < ch.n_saps(); ++k) {
    const double g = effective_two_hop_gain(n, k, ch);
    if (g > best.gain) best = {g, k};
  }
  return best;
}

Schedule classify(const ChannelRealization& ch) {
  std::vector<std::optional<std::size_t>> relay_of(ch.n_sensors());
  for (std::size_t n = 0; n < ch.n_sensors(); ++n) {
    const auto relay = best_relay_gain(n, ch);
    if (relay && ch.direct_gain(n) < relay->gain) relay_of[n] = relay->sap;
  }
  return Schedule::from_relays(std::move(relay_of));
}

}  // namespace relayfl
