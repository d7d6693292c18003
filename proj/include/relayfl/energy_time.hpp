#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "relayfl/channel.hpp"
#include "relayfl/link_rates.hpp"
#include "relayfl/power_allocation.hpp"
#include "relayfl/scheduler.hpp"

namespace relayfl {

/// Local training workload and CPU model of one device.
struct ComputeProfile {
  double cycles_per_sample = 1.5e4;  // C_n
  double local_samples = 200;        // D_n
  double local_iterations = 1;       // I_n
  double cpu_frequency = 1e9;        // f_n, Hz
  double max_frequency = 1e9;        // f_max, Hz
  double kappa = 1e-28;              // effective switched capacitance

  double cycles_per_round() const { return local_iterations * cycles_per_sample * local_samples; }
};

struct TimingBudget {
  double total_deadline = 6.0;    // T^th, s
  double global_rounds = 130;     // I_0
  double uplink_deadline = 4e-3;  // T', s

  double per_round_budget() const { return total_deadline / global_rounds; }
  void validate() const;
};

double compute_time(const ComputeProfile& p);
double compute_energy(const ComputeProfile& p);

/// Every power set to one level, relays included.
PowerAllocation uniform_power(const Schedule& schedule, double power);

/// Spectral efficiencies actually achieved at given powers. For a single-hop
/// device `first` is the direct rate and `second` is unused (0); for a two-hop
/// device `first` is the device->sAP rate and `second` the combined rate.
struct AchievedRates {
  std::vector<double> first;
  std::vector<double> second;
};

AchievedRates achieved_rates(const Schedule& schedule, const ChannelRealization& ch,
                             const PowerAllocation& powers, const LinkParams& link);

struct UplinkTimes {
  double single_hop = 0.0;
  double two_hop_first = 0.0;
  double two_hop_second = 0.0;
  double total = 0.0;

  /// False when some scheduled transmission has zero rate.
  bool feasible() const;
};

UplinkTimes uplink_times(const Schedule& schedule, const AchievedRates& rates, const LinkParams& link);

/// Transmit energy split into device and relay parts.
struct TransmitEnergy {
  double devices = 0.0;
  double relays = 0.0;
  double total() const { return devices + relays; }
};

/// nullopt when a scheduled transmission has zero rate (infeasible uplink).
std::optional<TransmitEnergy> transmit_energy(const Schedule& schedule, const PowerAllocation& powers,
                                              const AchievedRates& rates, const LinkParams& link);

double total_energy(double transmit, std::span<const double> compute, double global_rounds);

double completion_time(double compute_time, double uplink_time, double global_rounds);

enum class FrequencyStatus { Ok, BudgetExhausted, ComputeBound };

struct FrequencyChoice {
  FrequencyStatus status = FrequencyStatus::Ok;
  double frequency = 0.0;  // the unclamped f*, +inf when the budget is exhausted

  bool feasible() const { return status == FrequencyStatus::Ok; }
};

/// Lowest CPU frequency meeting I_0 (tau + T_UL) <= T^th. Never clamped to
/// f_max: exceeding it is reported as ComputeBound.
FrequencyChoice optimal_frequency(const ComputeProfile& p, const TimingBudget& b, double uplink_time);

/// Fraction of devices with completion time above the deadline; +inf counts.
double outage_fraction(std::span<const double> completion_times, double deadline);

/// Mean over trials of the per-trial outage fraction.
double outage_probability(std::span<const std::vector<double>> trials, double deadline);

/// Per-round bookkeeping for one channel realization and power allocation.
struct EnergyLatencyReport {
  std::vector<double> compute_time;    // tau_n
  std::vector<double> compute_energy;  // E^L_n
  std::vector<double> frequency;       // f_n used (f* when feasible, else f_max)
  UplinkTimes uplink;
  TransmitEnergy transmit;
  double total = 0.0;                  // E
  std::vector<double> completion;      // T^c_n
  std::vector<bool> outage;

  double compute_energy_sum() const;
  double outage_frac() const;
};

/**
 * Sets each device to f* for the achieved uplink time and evaluates energies,
 * completion times and outage. Devices whose f* exceeds f_max, or any device
 * when the uplink itself is infeasible, run at f_max and are flagged.
 */
EnergyLatencyReport evaluate_round(const Schedule& schedule, const ChannelRealization& ch,
                                   const PowerAllocation& powers, const LinkParams& link,
                                   std::span<const ComputeProfile> profiles, const TimingBudget& budget);

}  // namespace relayfl
