#include "relayfl/power_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace relayfl {

namespace {

/// Power variables in a fixed order: P_n for every device, then P^s_n for relayed ones.
struct PowerSlot {
  std::size_t device;
  bool relay;
};

struct Evaluation {
  double objective;
  double time;
};

// Scores one power vector straight from the rate formulas.
Evaluation evaluate(const Schedule& schedule, const ChannelRealization& ch, const LinkParams& link,
                    const PowerAllocation& p) {
  const double noise = link.noise_power;
  const double unit = link.packet_bits / link.bandwidth;
  Evaluation e{0.0, 0.0};
  for (std::size_t n = 0; n < schedule.n_devices(); ++n) {
    const double pn = p.device_power[n];
    if (!schedule.relay_of[n]) {
      const double r = std::log2(1.0 + pn * ch.direct_gain(n) / noise);
      e.objective += pn / r;
      e.time += unit / r;
    } else {
      const std::size_t k = *schedule.relay_of[n];
      const double ps = p.relay_power[n];
      const double r1 = std::log2(1.0 + pn * ch.access_gain(n, k) / noise);
      const double r2 = std::log2(1.0 + (ps * ch.backhaul_gain(k) + pn * ch.direct_gain(n)) / noise);
      e.objective += pn / r1 + ps / r2;
      e.time += unit / r1 + unit / r2;
    }
  }
  return e;
}

}  // namespace

std::optional<OracleResult> brute_force_power_oracle(const Schedule& schedule, const ChannelRealization& ch,
                                                     const LinkParams& link, double uplink_deadline,
                                                     double p_max, std::size_t grid_points,
                                                     std::size_t refinements) {
  std::vector<PowerSlot> slots;
  for (std::size_t n = 0; n < schedule.n_devices(); ++n) slots.push_back({n, false});
  for (std::size_t n : schedule.two_hop) slots.push_back({n, true});
  if (slots.size() > 3) throw std::invalid_argument("brute_force_power_oracle: at most three power variables");
  if (slots.empty() || grid_points == 0) return std::nullopt;

  const std::size_t dims = slots.size();
  std::vector<double> lo(dims, 0.0);
  std::vector<double> hi(dims, p_max);
  std::optional<OracleResult> best;
  std::vector<double> cell(dims, p_max / double(grid_points));

  for (std::size_t pass = 0; pass <= refinements; ++pass) {
    std::vector<std::vector<double>> axes(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      const double step = (hi[d] - lo[d]) / double(grid_points);
      for (std::size_t i = 1; i <= grid_points; ++i) axes[d].push_back(std::min(lo[d] + step * double(i), p_max));
      cell[d] = step;
    }
    std::vector<std::size_t> idx(dims, 0);
    PowerAllocation p;
    p.device_power.assign(schedule.n_devices(), 0.0);
    p.relay_power.assign(schedule.n_devices(), 0.0);
    while (true) {
      for (std::size_t d = 0; d < dims; ++d) {
        (slots[d].relay ? p.relay_power : p.device_power)[slots[d].device] = axes[d][idx[d]];
      }
      const Evaluation e = evaluate(schedule, ch, link, p);
      if (e.time <= uplink_deadline && (!best || e.objective < best->objective)) {
        best = OracleResult{p, e.objective, e.time};
      }
      std::size_t d = 0;
      while (d < dims && ++idx[d] == grid_points) idx[d++] = 0;
      if (d == dims) break;
    }
    if (!best) return std::nullopt;
    for (std::size_t d = 0; d < dims; ++d) {
      const auto& pw = slots[d].relay ? best->powers.relay_power : best->powers.device_power;
      const double centre = pw[slots[d].device];
      lo[d] = std::max(0.0, centre - cell[d]);
      hi[d] = std::min(p_max, centre + cell[d]);
    }
  }
  return best;
}

}  // namespace relayfl
