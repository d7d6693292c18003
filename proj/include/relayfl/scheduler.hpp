#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "relayfl/channel.hpp"

namespace relayfl {

enum class Mode { SingleHop, TwoHop };

/// Partition of devices into direct and relayed transmission.
struct Schedule {
  std::vector<std::size_t> single_hop;
  std::vector<std::size_t> two_hop;
  /// Serving sAP per device; engaged exactly for two-hop devices.
  std::vector<std::optional<std::size_t>> relay_of;

  std::size_t n_devices() const { return relay_of.size(); }
  Mode mode(std::size_t n) const { return relay_of[n] ? Mode::TwoHop : Mode::SingleHop; }
  /// Number of transmit power variables (one per device plus one per relayed device).
  std::size_t n_power_variables() const { return n_devices() + two_hop.size(); }

  /// Every device single-hop.
  static Schedule all_single_hop(std::size_t n_devices);
  /// Rebuilds the index sets from relay_of.
  static Schedule from_relays(std::vector<std::optional<std::size_t>> relay_of);
};

struct RelayChoice {
  double gain = 0.0;
  std::size_t sap = 0;
};

/// (1/2) min(|h_c(k)|^2, |H_s(n,k)|^2): a relayed link is limited by its weaker hop.
double effective_two_hop_gain(std::size_t n, std::size_t k, const ChannelRealization& ch);

/// Strongest sAP for device n, ties to the lowest index; nullopt when K = 0.
std::optional<RelayChoice> best_relay_gain(std::size_t n, const ChannelRealization& ch);

/// Device n is single-hop iff |h_p(n)|^2 >= its best effective two-hop gain.
Schedule classify(const ChannelRealization& ch);

}  // namespace relayfl
