#pragma once

#include <cmath>

namespace relayfl {

inline constexpr double kSpeedOfLight = 299792458.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

/// Thermal noise power over a band, from a power spectral density in dBm/Hz.
inline double noise_power_watts(double psd_dbm_per_hz, double bandwidth_hz) {
  return dbm_to_watts(psd_dbm_per_hz + 10.0 * std::log10(bandwidth_hz));
}

}  // namespace relayfl
