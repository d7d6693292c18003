#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "relayfl/config.hpp"
#include "relayfl/energy_time.hpp"
#include "relayfl/scheduler.hpp"
#include "relayfl/spca.hpp"

namespace relayfl {

inline constexpr std::string_view kSweepCsvHeader =
    "scheme,sweep_name,sweep_value,trial,seed,n_1h,n_2h,e_transmit_j,e_compute_j,e_total_j,t_ul_s,outage_frac,"
    "spca_status,accuracy";

/**
 * Seed of one trial's channel stream:
 * derive_seed(derive_seed(derive_seed(master, fnv1a(label)), point), trial).
 * Adding or renaming another scheme never changes it.
 */
std::uint64_t trial_seed(std::uint64_t master, std::string_view scheme_label, std::size_t point, std::size_t trial);

/// Seed of the compute-profile stream, shared by all schemes at (point, trial)
/// so schemes are compared on the same devices.
std::uint64_t device_seed(std::uint64_t master, std::size_t point, std::size_t trial);

/// Everything computed for one channel realization.
struct Snapshot {
  NodePositions positions;
  ChannelRealization channel;
  Schedule schedule;
  std::vector<ComputeProfile> profiles;
  double p_max = 0.0;  // W
  SpcaResult spca;
  /// Absent when SPCA found the deadline unattainable.
  std::optional<EnergyLatencyReport> report;
};

/// The instance a scheme sees at one sweep point.
struct TrialSetup {
  std::size_t n_sensors = 0;
  std::size_t n_saps = 0;
  double p_max_dbm = 0.0;
  std::uint64_t channel_seed = 0;
  std::uint64_t device_seed = 0;
};

/// Place nodes, draw channels, classify, optimise powers and evaluate the round.
Snapshot simulate(const Config& cfg, const TrialSetup& setup);

struct TrialRecord {
  std::string scheme;
  std::string sweep_name;
  double sweep_value = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t n_1h = 0;
  std::size_t n_2h = 0;
  // Whole-training energies: I_0 times the per-round values. Absent when infeasible.
  std::optional<double> e_transmit;
  std::optional<double> e_compute;
  std::optional<double> e_total;
  std::optional<double> t_ul;
  double outage_frac = 0.0;
  std::string spca_status;
  std::optional<double> accuracy;
  /// Relay share of e_transmit; not part of the CSV.
  std::optional<double> e_relay;

  bool operator==(const TrialRecord&) const = default;
};

/// Setup of (scheme, point, trial) under the config's sweep.
TrialSetup trial_setup(const Config& cfg, const Scheme& scheme, std::size_t point, std::size_t trial);

/// Record built from an explicit setup; `scheme`, `point` and `trial` only label it.
TrialRecord run_trial(const Config& cfg, const Scheme& scheme, std::size_t point, std::size_t trial,
                      const TrialSetup& setup);

/// run_trial at trial_setup(cfg, scheme, point, trial).
TrialRecord run_point(const Config& cfg, const Scheme& scheme, std::size_t point, std::size_t trial);

/// Mean and sample standard deviation of the present values.
struct ColumnStats {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

ColumnStats column_stats(const std::vector<std::optional<double>>& values);

struct PointSummary {
  std::string scheme;
  std::string sweep_name;
  double sweep_value = 0.0;
  std::size_t trials = 0;
  std::size_t converged = 0;
  ColumnStats n_1h, n_2h, e_transmit, e_compute, e_total, t_ul, outage_frac, accuracy;
};

/// One summary per (scheme, point), in record order.
std::vector<PointSummary> summarize(const std::vector<TrialRecord>& records);

using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

/**
 * Every (scheme, point, trial) of the config, run on `threads` workers
 * (0: hardware concurrency). The result is ordered by scheme (config order),
 * point and trial regardless of scheduling.
 */
std::vector<TrialRecord> run_sweep(const Config& cfg, std::size_t threads = 0, const ProgressCallback& progress = {});

/**
 * Header, one row per record, then one summary row per (scheme, point). In a
 * summary row `trial` is "summary", `seed` is the number of trials, each
 * numeric column holds "mean+-std" over the trials where it is present, and
 * spca_status is "converged/trials".
 */
void write_sweep_csv(std::ostream& out, const std::vector<TrialRecord>& records);

}  // namespace relayfl
