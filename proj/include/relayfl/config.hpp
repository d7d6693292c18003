#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "relayfl/channel.hpp"
#include "relayfl/energy_time.hpp"
#include "relayfl/fl_sim.hpp"
#include "relayfl/link_rates.hpp"
#include "relayfl/spca.hpp"

namespace relayfl {

/// Invalid or unreadable configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Link block as written in the file; dBm values are converted on use.
struct LinkSettings {
  double noise_psd_dbm_hz = -174.0;
  double bandwidth = 100e6;
  double packet_bits = 10e3;
  double p_max_dbm = 23.0;

  LinkParams params() const;
};

/// Per-device compute model; C_n is drawn uniformly from [cycles_min, cycles_max].
struct ComputeSettings {
  double cycles_min = 1e4;
  double cycles_max = 2e4;
  double local_samples = 200;
  double local_iterations = 1;
  double max_frequency = 1e9;
  double kappa = 1e-28;

  ComputeProfile profile(double cycles_per_sample) const;
};

/// A relaying scheme: `1h` has no sAPs, `1 of K` relays through the best of K.
struct Scheme {
  std::string label;
  std::size_t n_saps = 0;
};

inline constexpr const char* kSweepPmax = "p_max_dbm";
inline constexpr const char* kSweepDevices = "n_sensors";

struct ExperimentSettings {
  std::vector<Scheme> schemes{{"1h", 0}, {"1 of 4", 4}};
  std::string sweep_name = kSweepPmax;
  std::vector<double> sweep_values{23.0};
  std::size_t trials = 200;
  std::uint64_t master_seed = 20240601;
  std::string output = "results.csv";
  std::size_t threads = 0;  // 0: one per hardware thread
  /// Also train FL per trial with that trial's outage devices dropped.
  bool joint_fl = false;
};

struct Config {
  GeometryConfig geometry;
  PropagationParams propagation;
  LinkSettings link;
  TimingBudget timing;
  ComputeSettings compute;
  FlConfig fl;
  SpcaOptions spca;
  ExperimentSettings experiment;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/**
 * JSON with optional top-level blocks geometry, propagation, link, timing,
 * compute, fl, spca and experiment. Missing keys keep their defaults;
 * unknown keys are rejected. propagation.reference_loss_db defaults to the
 * free-space loss at reference_distance for the configured carrier.
 */
Config parse_config(const std::string& text);

/// Reads and parses a file; ConfigError on I/O or content problems.
Config load_config(const std::filesystem::path& path);

}  // namespace relayfl
