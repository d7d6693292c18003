#pragma once

#include <cstddef>
#include <optional>

#include "relayfl/channel.hpp"
#include "relayfl/link_rates.hpp"
#include "relayfl/power_allocation.hpp"
#include "relayfl/scheduler.hpp"

namespace relayfl {

struct OracleResult {
  PowerAllocation powers;
  double objective = 0.0;  // sum P / r at true rates
  double uplink_time = 0.0;
};

/**
 * Exhaustive search over a uniform grid P_max * i / grid_points, i = 1..grid_points,
 * for every power variable. Each point is scored with the true rates; points
 * whose uplink time exceeds the deadline are discarded. Each refinement pass
 * re-grids one coarse cell either side of the incumbent with the same count.
 *
 * Test oracle: throws std::invalid_argument for more than three power
 * variables. Returns nullopt when no grid point is feasible.
 */
std::optional<OracleResult> brute_force_power_oracle(const Schedule& schedule, const ChannelRealization& ch,
                                                     const LinkParams& link, double uplink_deadline,
                                                     double p_max, std::size_t grid_points,
                                                     std::size_t refinements = 0);

}  // namespace relayfl
