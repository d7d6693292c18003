#pragma once

#include <vector>

namespace relayfl {

/// Transmit powers in watts. relay_power[n] is the power the serving sAP of
/// device n uses to forward its packet; it is zero for single-hop devices.
struct PowerAllocation {
  std::vector<double> device_power;
  std::vector<double> relay_power;
};

}  // namespace relayfl
